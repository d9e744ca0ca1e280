"""Penalty method vs magnitude vs exhaustive search on small random instances.

    python3 scripts/oracle_study.py --instances 100 --score-mix 0.5
"""

import argparse

import numpy as np

from spap import PenaltyConfig, magnitude_baseline, make_rng, oracle_best_subset, penalty_prune


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--m", type=int, default=6)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--p", type=int, default=32)
    ap.add_argument("--lam", type=int, default=4)
    ap.add_argument("--noise", type=float, default=0.0, help="std of noise added to Y = W0 X")
    ap.add_argument("--score-mix", type=float, default=0.5)
    ap.add_argument("--soft-alpha", type=float, default=0.3)
    args = ap.parse_args()

    cfg = PenaltyConfig(score_mix=args.score_mix, soft_alpha=args.soft_alpha)
    gaps, mag_gaps, wins, ties, flips = [], [], 0, 0, 0
    for seed in range(args.instances):
        rng = make_rng(seed)
        w0 = rng.standard_normal((args.m, args.n))
        x = rng.standard_normal((args.n, args.p))
        y = w0 @ x + args.noise * rng.standard_normal((args.m, args.p))
        res = penalty_prune(w0, x, y, args.lam, cfg)
        best = oracle_best_subset(x, y, args.lam).best_objective
        mag_keep, mag = magnitude_baseline(w0, x, y, args.lam)
        gaps.append((res.objective - best) / best)
        mag_gaps.append((mag - best) / best)
        wins += res.objective < mag
        ties += mag <= best * (1 + 1e-12)
        flips += list(res.keep) != list(mag_keep)

    gaps, mag_gaps = np.asarray(gaps), np.asarray(mag_gaps)
    print(f"instances                  {args.instances}")
    print(f"penalty within 5% of best  {int(np.sum(gaps <= 0.05))}")
    print(f"magnitude within 5%        {int(np.sum(mag_gaps <= 0.05))}")
    print(f"penalty < magnitude        {wins}")
    print(f"magnitude already optimal  {ties}")
    print(f"mask differs from magnitude {flips}")
    print(f"median gap penalty/magnitude {np.median(gaps):.4f} / {np.median(mag_gaps):.4f}")


if __name__ == "__main__":
    main()
