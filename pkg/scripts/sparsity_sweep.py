"""Prune the sweep config and print the error-vs-sparsity table.

    python3 scripts/sparsity_sweep.py --config configs/sweep.json --out runs/sweep
"""

import argparse
import sys
from pathlib import Path

from spap.cli import main as spap_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=Path("configs/sweep.json"))
    ap.add_argument("--out", type=Path, default=Path("runs/sweep"))
    args = ap.parse_args()
    code = spap_main(["prune", "--config", str(args.config), "--out", str(args.out)])
    if code:
        sys.exit(code)
    sys.exit(spap_main(["plot-data", str(args.out / "report.json"), "--out", str(args.out)]))


if __name__ == "__main__":
    main()
