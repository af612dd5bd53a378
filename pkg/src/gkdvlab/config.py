"""Experiment configuration: YAML schema, validation, canned scenarios.

The config dialect is YAML with a top-level ``config_version`` (currently
1).  Validation happens before any compute; every structural mistake
raises ConfigError with a path-like message.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any, Optional

import yaml

from .core import GridSpec
from .errors import ConfigError
from .profiles import BreatherParams, SolitonParams

__all__ = [
    "ExperimentConfig",
    "InitialSpec",
    "DiagnosticSpec",
    "load_config",
    "parse_config",
    "config_hash",
    "SCENARIOS",
    "scenario_text",
]

CONFIG_VERSION = 1
_DIAG_KINDS = (
    "conservation",
    "traveling_wave",
    "nondispersion",
    "monotone_functional",
    "modulation",
    "monotonicity",
    "spatial_decay",
    "temporal_decay",
    "scattering",
    "weinstein",
    "collision",
)


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    params: dict


@dataclass(frozen=True)
class DiagnosticSpec:
    kind: str
    params: dict


@dataclass
class ExperimentConfig:
    name: str
    p: int
    grid: GridSpec
    T: float
    initial: InitialSpec
    diagnostics: list
    record_stride: int = 0
    output_dir: Optional[str] = None
    seed: int = 0
    plots: bool = False
    boundary_mode: str = "raise"
    snapshots: str = "ends"  # "ends" | "all" | "none"
    raw_text: str = dc_field(default="", repr=False)

    @property
    def hash(self) -> str:
        return config_hash(self.raw_text)


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _req(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return mapping[key]


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_initial(raw: Any) -> InitialSpec:
    if not isinstance(raw, dict):
        raise ConfigError("initial: expected a mapping")
    kind = _req(raw, "type", "initial")
    params = {k: v for k, v in raw.items() if k != "type"}
    if kind == "soliton":
        SolitonParams(
            c=_num(_req(params, "c", "initial"), "initial.c"),
            x0=_num(params.get("x0", 0.0), "initial.x0"),
            sign=int(params.get("sign", 1)),
        )
    elif kind == "breather":
        BreatherParams(
            alpha=_num(_req(params, "alpha", "initial"), "initial.alpha"),
            beta=_num(_req(params, "beta", "initial"), "initial.beta"),
            x1=_num(params.get("x1", 0.0), "initial.x1"),
            x2=_num(params.get("x2", 0.0), "initial.x2"),
        )
    elif kind == "superposition":
        items = _req(params, "solitons", "initial")
        if not isinstance(items, list) or not items:
            raise ConfigError("initial.solitons: expected a non-empty list")
        for j, item in enumerate(items):
            SolitonParams(
                c=_num(_req(item, "c", f"initial.solitons[{j}]"), "c"),
                x0=_num(item.get("x0", 0.0), "x0"),
                sign=int(item.get("sign", 1)),
            )
    elif kind == "gaussian":
        if _num(_req(params, "amplitude", "initial"), "initial.amplitude") == 0:
            raise ConfigError("initial.amplitude: must be nonzero")
        if _num(_req(params, "width", "initial"), "initial.width") <= 0:
            raise ConfigError("initial.width: must be positive")
    elif kind == "file":
        _req(params, "path", "initial")
    else:
        raise ConfigError(f"initial.type: unknown kind {kind!r}")
    return InitialSpec(kind=kind, params=params)


def _parse_diagnostics(raw: Any) -> list:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("diagnostics: expected a list")
    out = []
    for j, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ConfigError(f"diagnostics[{j}]: expected a mapping")
        kind = _req(item, "kind", f"diagnostics[{j}]")
        if kind not in _DIAG_KINDS:
            raise ConfigError(
                f"diagnostics[{j}].kind: unknown kind {kind!r} "
                f"(known: {', '.join(_DIAG_KINDS)})"
            )
        out.append(DiagnosticSpec(kind=kind, params={k: v for k, v in item.items() if k != "kind"}))
    return out


def parse_config(text: str, name: str = "config") -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"invalid YAML: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    version = raw.get("config_version")
    if version != CONFIG_VERSION:
        raise ConfigError(
            f"config_version must be {CONFIG_VERSION}, got {version!r}"
        )
    gridmap = _req(raw, "grid", "top level")
    if not isinstance(gridmap, dict):
        raise ConfigError("grid: expected a mapping")
    try:
        grid = GridSpec(
            L=_num(_req(gridmap, "L", "grid"), "grid.L"),
            N=int(_req(gridmap, "N", "grid")),
            dt=_num(_req(gridmap, "dt", "grid"), "grid.dt"),
        )
    except ConfigError:
        raise
    except Exception as err:
        raise ConfigError(f"grid: {err}") from err

    p = _req(raw, "p", "top level")
    if isinstance(p, bool) or not isinstance(p, int) or p < 2:
        raise ConfigError(f"p: expected an integer >= 2, got {p!r}")
    T = _num(_req(raw, "T", "top level"), "T")
    if T < 0:
        raise ConfigError(f"T: must be nonnegative, got {T}")
    boundary_mode = raw.get("boundary_mode", "raise")
    if boundary_mode not in ("raise", "flag", "ignore"):
        raise ConfigError(f"boundary_mode: unknown mode {boundary_mode!r}")
    snapshots = raw.get("snapshots", "ends")
    if snapshots not in ("ends", "all", "none"):
        raise ConfigError(f"snapshots: expected one of ends/all/none, got {snapshots!r}")

    return ExperimentConfig(
        name=str(raw.get("name", name)),
        p=p,
        grid=grid,
        T=T,
        initial=_parse_initial(_req(raw, "initial", "top level")),
        diagnostics=_parse_diagnostics(raw.get("diagnostics")),
        record_stride=int(raw.get("record_stride", 0)),
        output_dir=raw.get("output_dir"),
        seed=int(raw.get("seed", 0)),
        plots=bool(raw.get("plots", False)),
        boundary_mode=boundary_mode,
        snapshots=snapshots,
        raw_text=text,
    )


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), name=p.stem)


# ---------------------------------------------------------------------------
# canned scenarios

SCENARIOS = {
    "soliton-sanity": """\
config_version: 1
name: soliton-sanity
p: 2
grid: {L: 128.0, N: 1024, dt: 1.0e-3}
T: 20.0
record_stride: 500
initial: {type: soliton, c: 1.0, x0: 0.0}
diagnostics:
  - kind: conservation
  - kind: traveling_wave
    c: 1.0
  - kind: modulation
    mode: translations
    speeds: [1.0]
    centers: [0.0]
""",
    "kdv-collision": """\
config_version: 1
name: kdv-collision
p: 2
grid: {L: 256.0, N: 2048, dt: 5.0e-4}
T: 24.0
record_stride: 400
boundary_mode: flag
initial:
  type: superposition
  solitons:
    - {c: 4.0, x0: -20.0}
    - {c: 1.0, x0: 20.0}
  ordered_by_center: true
diagnostics:
  - kind: conservation
  - kind: collision
    speeds: [4.0, 1.0]
    centers: [-20.0, 20.0]
    t_pre: [1.0, 7.0]
    t_post: [19.0, 24.0]
""",
    "ordered-two-soliton": """\
config_version: 1
name: ordered-two-soliton
p: 2
grid: {L: 256.0, N: 2048, dt: 5.0e-4}
T: 20.0
record_stride: 500
initial:
  type: superposition
  solitons:
    - {c: 1.0, x0: -20.0}
    - {c: 4.0, x0: 20.0}
diagnostics:
  - kind: conservation
  - kind: nondispersion
    rho: 0.5
    R: 30.0
  - kind: modulation
    mode: translations
    speeds: [1.0, 4.0]
    centers: [-20.0, 20.0]
  - kind: monotonicity
    kappa: 0.2
  - kind: temporal_decay
  - kind: weinstein
    kappa: 0.2
    samples: 100
""",
    "mkdv-breather": """\
config_version: 1
name: mkdv-breather
p: 3
grid: {L: 128.0, N: 1024, dt: 5.0e-4}
T: 4.0
record_stride: 400
boundary_mode: flag
initial: {type: breather, alpha: 1.0, beta: 1.0}
diagnostics:
  - kind: conservation
  - kind: scattering
    M: 512
""",
    "gaussian-dispersion": """\
config_version: 1
name: gaussian-dispersion
p: 2
grid: {L: 256.0, N: 2048, dt: 5.0e-4}
T: 20.0
record_stride: 500
boundary_mode: ignore
initial: {type: gaussian, amplitude: 3.281, width: 4.0, center: 0.0}
diagnostics:
  - kind: conservation
  - kind: nondispersion
    rho: 0.5
    R: 30.0
""",
}


def scenario_text(name: str) -> str:
    if name not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {name!r} (known: {', '.join(sorted(SCENARIOS))})"
        )
    return SCENARIOS[name]
