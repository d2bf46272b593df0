"""Configuration schema: JSON file -> validated dataclasses and back.

The file has four top-level blocks: ``layers`` (list of per-layer blocks),
``plasticity``, ``weight_init``, ``run``, plus optional ``task`` and
``sweep`` blocks. Unknown keys are rejected everywhere; every omitted key
falls back to the dataclass default. ``docs/CONFIG.md`` is generated from
these dataclasses (scripts/gen_config_reference.py).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .dynamics import LifParams
from .errors import ConfigError
from .plasticity import CompetitionRule, PlasticityParams
from .topology import KernelParams, LayerGeometry, grid_geometry, line_geometry, load_geometry_csv


@dataclass(frozen=True)
class GeometrySpec:
    kind: str = "grid"  # grid | line | csv
    width: int = 1
    height: int = 1
    n: int = 1
    spacing: float = 1.0
    path: str = ""

    def __post_init__(self):
        if self.kind not in ("grid", "line", "csv"):
            raise ValueError(f"unknown geometry kind: {self.kind!r}")
        if self.kind == "csv" and not self.path:
            raise ValueError("csv geometry requires a path")

    def build(self) -> LayerGeometry:
        if self.kind == "grid":
            return grid_geometry(self.width, self.height, self.spacing)
        if self.kind == "line":
            return line_geometry(self.n, self.spacing)
        return load_geometry_csv(self.path)


@dataclass(frozen=True)
class LayerSpec:
    geometry: GeometrySpec = GeometrySpec()
    kernel: KernelParams = KernelParams(r_i=3.0, r_o=6.0, a_i=0.0, a_o=0.0)
    lif: LifParams = LifParams(tau_v=1.0, tau_theta=5.0, v_th=1.0, theta_plus=1.0, v_reset=0.0)
    input_gain: float = 1.0
    input_rule: CompetitionRule = CompetitionRule()
    output_rule: CompetitionRule = CompetitionRule()


@dataclass(frozen=True)
class NoiseSpec:
    amplitude: float = 0.0
    layer: int = 0
    t_stop: float | None = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("noise amplitude must be nonnegative")


@dataclass(frozen=True)
class WeightInit:
    mu: float = 1.0
    sigma: float = 0.5

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("weight_init sigma must be nonnegative")


@dataclass(frozen=True)
class RunParams:
    dt: float = 0.01
    n_steps: int = 0
    seed: int = 0
    learning_enabled: bool = True
    noise: NoiseSpec = NoiseSpec()
    snapshot_every: int = 100
    probe_neurons: tuple[int, ...] | None = None
    record_spikes: bool = True
    learn_pairs: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be nonnegative")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be nonnegative (0 disables)")


@dataclass(frozen=True)
class ReadoutParams:
    l2: float = 1e-4
    epochs: int = 300
    lr: float = 0.5
    standardize: bool = True


@dataclass(frozen=True)
class TaskParams:
    images: str = ""
    labels: str = ""
    n_train: int = 2000
    n_test: int = 1000
    hold_duration: float = 5.0
    gap: float = 0.0
    gain: float = 1.0
    settle: float = 1.0
    feature_layer: int = -1
    readout: ReadoutParams = ReadoutParams()

    def __post_init__(self):
        if self.hold_duration <= 0:
            raise ValueError("hold_duration must be positive")
        if self.gap < 0:
            raise ValueError("gap must be nonnegative")
        if not 0 <= self.settle < self.hold_duration:
            raise ValueError("settle must lie in [0, hold_duration)")


@dataclass(frozen=True)
class SweepParams:
    grid: dict = field(default_factory=dict)
    n_steps: int = 1500
    warmup: int = 500


@dataclass(frozen=True)
class NetworkConfig:
    layers: tuple[LayerSpec, ...]
    plasticity: PlasticityParams = PlasticityParams()
    weight_init: WeightInit = WeightInit()
    run: RunParams = RunParams()
    task: TaskParams | None = None
    sweep: SweepParams | None = None

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("at least one layer is required")
        if not 0 <= self.run.noise.layer < len(self.layers):
            raise ValueError(f"noise.layer {self.run.noise.layer} out of range")
        if self.run.probe_neurons is not None and len(self.run.probe_neurons) != len(self.layers):
            raise ValueError("probe_neurons must list one index per layer")
        if self.layers[0].input_rule.kind != "none":
            raise ValueError("layers[0].input_rule must be 'none': competition applies only to inter-layer signals")
        if self.task is not None and not -len(self.layers) <= self.task.feature_layer < len(self.layers):
            raise ValueError(f"task.feature_layer {self.task.feature_layer} out of range")


# ---------------------------------------------------------------------------
# dict <-> dataclass plumbing


def _check_keys(d: dict, allowed, ctx: str):
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"{ctx}: unknown key(s) {unknown}")


def _build(cls, d: dict, ctx: str, **overrides):
    names = [f.name for f in fields(cls)]
    _check_keys(d, names, ctx)
    kwargs = {k: v for k, v in d.items()}
    kwargs.update(overrides)
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{ctx}: {e}") from e


def _tupled(v):
    return tuple(v) if isinstance(v, list) else v


def layer_from_dict(d: dict, ctx: str) -> LayerSpec:
    _check_keys(d, ["geometry", "kernel", "lif", "input_gain", "input_rule", "output_rule"], ctx)
    kw = {}
    if "geometry" in d:
        kw["geometry"] = _build(GeometrySpec, d["geometry"], f"{ctx}.geometry")
    if "kernel" in d:
        kw["kernel"] = _build(KernelParams, d["kernel"], f"{ctx}.kernel")
    if "lif" in d:
        kw["lif"] = _build(LifParams, d["lif"], f"{ctx}.lif")
    if "input_gain" in d:
        kw["input_gain"] = d["input_gain"]
    if "input_rule" in d:
        kw["input_rule"] = _build(CompetitionRule, d["input_rule"], f"{ctx}.input_rule")
    if "output_rule" in d:
        kw["output_rule"] = _build(CompetitionRule, d["output_rule"], f"{ctx}.output_rule")
    return LayerSpec(**kw)


def config_from_dict(d: dict) -> NetworkConfig:
    _check_keys(d, ["layers", "plasticity", "weight_init", "run", "task", "sweep"], "config")
    if "layers" not in d or not isinstance(d["layers"], list) or not d["layers"]:
        raise ConfigError("config: 'layers' must be a non-empty list")
    layers = tuple(layer_from_dict(ld, f"layers[{i}]") for i, ld in enumerate(d["layers"]))
    kw = {"layers": layers}
    if "plasticity" in d:
        kw["plasticity"] = _build(PlasticityParams, d["plasticity"], "plasticity")
    if "weight_init" in d:
        kw["weight_init"] = _build(WeightInit, d["weight_init"], "weight_init")
    if "run" in d:
        rd = dict(d["run"])
        noise = rd.pop("noise", None)
        over = {}
        if noise is not None:
            over["noise"] = _build(NoiseSpec, noise, "run.noise")
        for key in ("probe_neurons", "learn_pairs"):
            if rd.get(key) is not None:
                rd[key] = _tupled(rd[key])
        kw["run"] = _build(RunParams, rd, "run", **over)
    if d.get("task") is not None:
        td = dict(d["task"])
        over = {}
        if "readout" in td:
            over["readout"] = _build(ReadoutParams, td.pop("readout"), "task.readout")
        kw["task"] = _build(TaskParams, td, "task", **over)
    if d.get("sweep") is not None:
        kw["sweep"] = _build(SweepParams, d["sweep"], "sweep")
    try:
        return NetworkConfig(**kw)
    except ValueError as e:
        raise ConfigError(f"config: {e}") from e


def _plain(obj):
    if isinstance(obj, tuple):
        return [_plain(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    return obj


def config_to_dict(cfg: NetworkConfig) -> dict:
    return _plain(cfg)


def config_hash(cfg: NetworkConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def parse_config(path) -> NetworkConfig:
    """Load and validate a JSON config file.

    Relative data paths (csv geometry, task images/labels) are resolved
    against the config file's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    base = path.parent
    for i, layer in enumerate(raw.get("layers", [])):
        geo = layer.get("geometry") if isinstance(layer, dict) else None
        if isinstance(geo, dict) and geo.get("kind") == "csv" and geo.get("path"):
            geo["path"] = str((base / geo["path"]).resolve())
    task = raw.get("task")
    if isinstance(task, dict):
        for key in ("images", "labels"):
            if task.get(key):
                task[key] = str((base / task[key]).resolve())
    return config_from_dict(raw)


def dump_config(cfg: NetworkConfig, path):
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")
