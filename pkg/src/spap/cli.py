"""Command-line entry point: ``spap {prune,oracle-compare,bench,plot-data,make-model}``.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical
failure, 3 I/O or container-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, normalize_variant
from .container import (
    ContainerFormatError,
    atomic_write,
    load_model,
    read_container,
    save_model,
    write_container,
)
from .core import NumericalError, make_rng
from .glu import prune_by_correspondence
from .oracle import GuardExceededError
from .pipeline import (
    LayerFailure,
    SparsityPlan,
    ToyModel,
    analytic_cost,
    make_toy_model,
    sequential_prune,
)

REPORT_FORMAT = "spap-report/1"
COST_NOTE = (
    "Cost ratios cover MLP blocks only. The toy model has no attention "
    "parameters, so pruning a fraction s of channels scales FLOPs and weight "
    "bytes by exactly 1 - s; in a full decoder the whole-model memory ratio is "
    "diluted by attention weights, embeddings and runtime buffers."
)


def _log(msg: str):
    print(msg, file=sys.stderr)


def build_model(cfg: RunConfig) -> ToyModel:
    spec = cfg.model
    if spec.path:
        return load_model(spec.path)
    return make_toy_model(cfg.seed, spec.model_dim, spec.hidden_dim, spec.num_layers,
                          spec.residual, spec.channel_decay)


def build_calibration(cfg: RunConfig, model: ToyModel) -> np.ndarray:
    if cfg.calibration.path:
        entries = read_container(cfg.calibration.path)
        if "calibration" not in entries:
            raise ContainerFormatError(f"{cfg.calibration.path}: no 'calibration' entry")
        return entries["calibration"]
    rng = make_rng(cfg.seed, stream=1)
    return rng.standard_normal((model.model_dim, cfg.calibration.samples))


def _run_name(variant: str, sparsity: float) -> str:
    return f"pruned_{variant}_s{sparsity:.3f}.spwt"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def cli_prune(cfg: RunConfig, out_dir: Path) -> int:
    model = build_model(cfg)
    calib = build_calibration(cfg, model)
    runs = []
    for variant in cfg.variants:
        for s in cfg.plan.sparsities:
            plan = SparsityPlan.for_model(model, s, cfg.plan.mlp_param_share)
            pruned, report = sequential_prune(
                model, calib, plan, variant, cfg.penalty, cfg.altmin,
                oracle=cfg.oracle.enabled, oracle_guard=cfg.oracle.guard,
            )
            name = _run_name(variant, s)
            save_model(out_dir / name, pruned)
            run = report.to_dict()
            run["container"] = name
            run["per_layer_lambda"] = list(plan.per_layer_lambda)
            runs.append(run)
            _log(f"{variant:>9} s={s:.2f}: end-to-end error {report.end_to_end_error:.6g} -> {name}")
    report = {
        "format": REPORT_FORMAT,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "cost_model_note": COST_NOTE,
        "runs": runs,
    }
    atomic_write(out_dir / "report.json", _dump_json(report).encode())
    return 0


def cli_oracle_compare(cfg: RunConfig, out_dir: Path | None) -> int:
    model = build_model(cfg)
    calib = build_calibration(cfg, model)
    variant = cfg.variants[0]
    plans = [SparsityPlan.for_model(model, s, cfg.plan.mlp_param_share)
             for s in cfg.plan.sparsities]
    for plan in plans:
        for n, lam in zip(model.hidden_dims, plan.per_layer_lambda):
            count = math.comb(n, lam)
            if count > cfg.oracle.guard:
                raise GuardExceededError(count, cfg.oracle.guard)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sparsity", "layer", "lambda", "subsets", "penalty", "magnitude",
                     "oracle", "penalty_gap", "magnitude_gap"])
    for plan in plans:
        _, report = sequential_prune(model, calib, plan, variant, cfg.penalty, cfg.altmin,
                                     oracle=True, oracle_guard=cfg.oracle.guard)
        for lr in report.layers:
            if lr.lam == 0:
                continue
            best = lr.oracle_objective
            mag_gap = (lr.magnitude_objective - best) / best if best > 0 else 0.0
            writer.writerow([
                f"{plan.overall_sparsity:g}", lr.index, lr.lam, math.comb(lr.hidden_dim, lr.lam),
                f"{lr.penalty_objective:.10g}", f"{lr.magnitude_objective:.10g}",
                f"{best:.10g}", f"{lr.oracle_gap:.6f}", f"{mag_gap:.6f}",
            ])
    table = buf.getvalue()
    sys.stdout.write(table)
    if out_dir is not None:
        atomic_write(out_dir / "oracle_compare.csv", table.encode())
    return 0


def _time_interleaved(models: list[ToyModel], x: np.ndarray, repeats: int) -> list[float]:
    """Median forward time per model, alternating models within each round."""
    for model in models:
        model.forward(x)  # warm-up
    times = [[] for _ in models]
    for _ in range(repeats):
        for t, model in zip(times, models):
            t0 = time.perf_counter()
            model.forward(x)
            t.append(time.perf_counter() - t0)
    return [float(np.median(t)) for t in times]


def structural_prune(model: ToyModel, plan: SparsityPlan) -> ToyModel:
    """Shape-only pruning for timing: drop the lowest-norm down-projection columns."""
    layers = []
    for layer, lam in zip(model.layers, plan.per_layer_lambda):
        order = np.argsort(np.linalg.norm(layer.w_down, axis=0), kind="stable")
        layers.append(prune_by_correspondence(layer, np.sort(order[lam:])) if lam else layer)
    return ToyModel(tuple(layers), model.residual)


def run_bench(cfg: RunConfig) -> list[dict]:
    model = build_model(cfg)
    x = make_rng(cfg.seed, stream=2).standard_normal((model.model_dim, cfg.bench.seq_len))
    flops_dense, bytes_dense = analytic_cost(model, cfg.bench.seq_len)
    sparsities = [0.0, *cfg.bench.sparsities]
    pruned = [structural_prune(model, SparsityPlan.for_model(model, s, cfg.plan.mlp_param_share))
              for s in sparsities[1:]]
    t_dense, *t_pruned = _time_interleaved([model, *pruned], x, cfg.bench.repeats)
    rows = []
    for s, m, t in zip(sparsities, [model, *pruned], [t_dense, *t_pruned]):
        flops, nbytes = analytic_cost(m, cfg.bench.seq_len)
        rows.append({
            "sparsity": s,
            "flops": flops,
            "bytes": nbytes,
            "flops_ratio": flops / flops_dense,
            "bytes_ratio": nbytes / bytes_dense,
            "seconds": t,
            "wall_ratio": t / t_dense,
        })
    return rows


def cli_bench(cfg: RunConfig, out_dir: Path | None) -> int:
    rows = run_bench(cfg)
    print(f"{'sparsity':>8} {'flops_ratio':>11} {'bytes_ratio':>11} {'wall_ratio':>10} {'seconds':>10}")
    for r in rows:
        print(f"{r['sparsity']:8.2f} {r['flops_ratio']:11.4f} {r['bytes_ratio']:11.4f} "
              f"{r['wall_ratio']:10.3f} {r['seconds']:10.6f}")
    if out_dir is not None:
        atomic_write(out_dir / "bench.json", _dump_json({"rows": rows, "note": COST_NOTE}).encode())
    return 0


def plot_rows(report: dict) -> tuple[list[str], list[list]]:
    """Pivot a report into (header, rows): one row per sparsity, one column per variant."""
    if not isinstance(report, dict) or not isinstance(report.get("runs"), list):
        raise ConfigError("malformed report: missing 'runs' list")
    table: dict[float, dict[str, float]] = {}
    variants: list[str] = []
    for run in report["runs"]:
        try:
            v, s, err = run["variant"], float(run["overall_sparsity"]), float(run["end_to_end_error"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("malformed report: run lacks variant/overall_sparsity/end_to_end_error") from None
        if v not in variants:
            variants.append(v)
        table.setdefault(s, {})[v] = err
    header = ["sparsity", *variants]
    rows = [[s, *(table[s].get(v, "") for v in variants)] for s in sorted(table)]
    return header, rows


def cli_plot_data(report_path: Path, out_dir: Path | None) -> int:
    try:
        report = json.loads(Path(report_path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed report {report_path}: {exc}") from None
    header, rows = plot_rows(report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{row[0]:g}", *(f"{v:.10g}" if v != "" else "" for v in row[1:])])
    sys.stdout.write(buf.getvalue())
    if out_dir is not None:
        atomic_write(out_dir / "sparsity_curve.csv", buf.getvalue().encode())
    return 0


def cli_make_model(cfg: RunConfig, out_dir: Path) -> int:
    model = build_model(cfg)
    save_model(out_dir / "model.spwt", model)
    write_container(out_dir / "calibration.spwt", {"calibration": build_calibration(cfg, model)})
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spap", description="Structured pruning of GLU MLP layers.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--config", required=True, type=Path, help="JSON run config")
        sp.add_argument("--out", type=Path, required=out_required, help="output directory")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--variant", help="override the config variant: full, no-update, gd-only")

    common(sub.add_parser("prune", help="prune a model and write containers + report"), True)
    common(sub.add_parser("oracle-compare", help="penalty vs magnitude vs exhaustive search"))
    common(sub.add_parser("bench", help="analytic cost and forward timing per sparsity"))
    common(sub.add_parser("make-model", help="write the synthetic model and calibration data"), True)
    pd = sub.add_parser("plot-data", help="CSV of end-to-end error vs sparsity per variant")
    pd.add_argument("report", type=Path)
    pd.add_argument("--out", type=Path)
    return p


def _run(args) -> int:
    if args.command == "plot-data":
        return cli_plot_data(args.report, args.out)
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.variant is not None:
        cfg = cfg.replace(variant=normalize_variant(args.variant))
    if args.command == "prune":
        return cli_prune(cfg, args.out)
    if args.command == "oracle-compare":
        return cli_oracle_compare(cfg, args.out)
    if args.command == "bench":
        return cli_bench(cfg, args.out)
    return cli_make_model(cfg, args.out)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except LayerFailure as exc:
        _log(f"error: {exc}")
        return 2 if isinstance(exc.cause, NumericalError) else 1
    except NumericalError as exc:
        _log(f"numerical error: {exc}")
        return 2
    except (ContainerFormatError, OSError) as exc:
        _log(f"I/O error: {exc}")
        return 3
    except ValueError as exc:  # ConfigError, GuardExceededError, plan validation
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
