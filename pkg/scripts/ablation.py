"""Single-layer recovery ablation: full vs gd-only vs no-update reconstruction error.

    python3 scripts/ablation.py --seeds 100 --sparsity 0.3
"""

import argparse

import numpy as np

from spap import SparsityPlan, make_rng, make_toy_model, sequential_prune

VARIANTS = ("full", "gd_only", "no_update")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--sparsity", type=float, default=0.3)
    ap.add_argument("--model-dim", type=int, default=16)
    ap.add_argument("--hidden-dim", type=int, default=40)
    ap.add_argument("--samples", type=int, default=192)
    ap.add_argument("--channel-decay", type=float, default=0.5)
    args = ap.parse_args()

    errs = {v: [] for v in VARIANTS}
    for seed in range(args.seeds):
        model = make_toy_model(seed, args.model_dim, args.hidden_dim, 1,
                               channel_decay=args.channel_decay)
        calib = make_rng(seed, 1).standard_normal((args.model_dim, args.samples))
        plan = SparsityPlan.for_model(model, args.sparsity)
        for v in VARIANTS:
            errs[v].append(sequential_prune(model, calib, plan, v)[1].layers[0].reconstruction_error)

    e = {v: np.asarray(a) for v, a in errs.items()}
    print("variant,mean_error,median_error")
    for v in VARIANTS:
        print(f"{v},{e[v].mean():.6g},{np.median(e[v]):.6g}")
    print(f"# full < gd_only on {int(np.sum(e['full'] < e['gd_only']))}/{args.seeds} seeds")
    print(f"# gd_only < no_update on {int(np.sum(e['gd_only'] < e['no_update']))}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
