"""JSON run configuration for the command-line tools.

Every section is optional; omitted keys take the defaults below. Unknown
keys anywhere are rejected. Relative paths are resolved against the
directory holding the config file.

.. code-block:: json

    {
      "seed": 0,
      "variant": "full",
      "model": {"path": null, "model_dim": 16, "hidden_dim": 40,
                "num_layers": 3, "residual": true, "channel_decay": 0.5},
      "calibration": {"path": null, "samples": 1024},
      "plan": {"overall_sparsity": 0.3, "mlp_param_share": 1.0},
      "penalty": {"iterations": 15, "score_mix": 0.5, "soft_alpha": 0.3,
                  "rho_init": null, "rho_growth": 2.0, "stabilizer": null,
                  "literal_score_indexing": false},
      "altmin": {"iterations": 20, "learning_rate": 0.001, "adam_beta1": 0.9,
                 "adam_beta2": 0.999, "adam_eps": 1e-08, "down_stabilizer": null},
      "oracle": {"enabled": false, "guard": 1000000},
      "bench": {"seq_len": 256, "repeats": 7, "sparsities": [0.1, 0.2, 0.3]}
    }

``variant`` and ``plan.overall_sparsity`` may also be lists, in which case
``spap prune`` runs the full grid.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .altmin import AltMinConfig
from .penalty import PenaltyConfig
from .pipeline import VARIANTS

__all__ = ["ConfigError", "RunConfig", "load_config", "normalize_variant"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    path: str | None = None
    model_dim: int = 16
    hidden_dim: int = 40
    num_layers: int = 3
    residual: bool = True
    channel_decay: float = 0.5


@dataclass(frozen=True)
class CalibrationSpec:
    path: str | None = None   # container with a "calibration" entry (m x p)
    samples: int = 1024


@dataclass(frozen=True)
class PlanSpec:
    overall_sparsity: float | list[float] = 0.3
    mlp_param_share: float = 1.0

    @property
    def sparsities(self) -> list[float]:
        s = self.overall_sparsity
        return [float(v) for v in s] if isinstance(s, (list, tuple)) else [float(s)]


@dataclass(frozen=True)
class OracleSpec:
    enabled: bool = False
    guard: int = 10**6


@dataclass(frozen=True)
class BenchSpec:
    seq_len: int = 256
    repeats: int = 7
    sparsities: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3])


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    variant: str | list[str] = "full"
    model: ModelSpec = field(default_factory=ModelSpec)
    calibration: CalibrationSpec = field(default_factory=CalibrationSpec)
    plan: PlanSpec = field(default_factory=PlanSpec)
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    altmin: AltMinConfig = field(default_factory=AltMinConfig)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    bench: BenchSpec = field(default_factory=BenchSpec)

    @property
    def variants(self) -> list[str]:
        v = self.variant
        return [normalize_variant(x) for x in (v if isinstance(v, (list, tuple)) else [v])]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "RunConfig":
        cfg = _build(cls, data, "config")
        cfg.variants  # raises on unknown names
        for s in cfg.plan.sparsities:
            if not 0.0 <= s < 1.0:
                raise ConfigError(f"plan.overall_sparsity {s} outside [0, 1)")
            if s >= cfg.plan.mlp_param_share:
                raise ConfigError(
                    f"plan.overall_sparsity {s} >= plan.mlp_param_share "
                    f"{cfg.plan.mlp_param_share}: unreachable by MLP-only pruning"
                )
        if base_dir is not None:
            cfg = cfg.replace(
                model=dataclasses.replace(cfg.model, path=_resolve(cfg.model.path, base_dir)),
                calibration=dataclasses.replace(
                    cfg.calibration, path=_resolve(cfg.calibration.path, base_dir)),
            )
        return cfg


_SECTIONS = {
    "model": ModelSpec,
    "calibration": CalibrationSpec,
    "plan": PlanSpec,
    "penalty": PenaltyConfig,
    "altmin": AltMinConfig,
    "oracle": OracleSpec,
    "bench": BenchSpec,
}


def _check_type(value, default, where: str):
    if value is None or default is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float, list)) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, (str, list))
    else:
        ok = True
    if not ok:
        raise ConfigError(f"{where}: expected {type(default).__name__}, got {value!r}")


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for name, value in data.items():
        if cls is RunConfig and name in _SECTIONS:
            kwargs[name] = _build(_SECTIONS[name], value, f"{where}.{name}")
            continue
        f = known[name]
        default = f.default if f.default is not dataclasses.MISSING else None
        _check_type(value, default, f"{where}.{name}")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _resolve(path: str | None, base: Path) -> str | None:
    if path is None:
        return None
    p = Path(path)
    return str(p if p.is_absolute() else (base / p))


def normalize_variant(name: str) -> str:
    v = str(name).replace("-", "_")
    if v not in VARIANTS:
        raise ConfigError(f"unknown variant {name!r}; choose from full, no-update, gd-only")
    return v


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return RunConfig.from_dict(data, base_dir=path.parent)
