"""Quantitative summaries of runs: rates, tuning, pools, clusters, wave regimes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .config import NetworkConfig
from .record import SimulationRecord
from .topology import LayerGeometry, distance_matrix


def extract_features(record: SimulationRecord, layer: int, window: tuple[float, float]) -> np.ndarray:
    """Per-neuron spike rate over a time window: count / window length."""
    if record.spikes is None:
        raise ValueError("spikes were not recorded")
    t0, t1 = window
    k0, k1 = round(t0 / record.dt), round(t1 / record.dt)
    if not 0 <= k0 < k1 <= record.n_steps:
        raise ValueError(f"window {window} is empty or outside the record (0, {record.n_steps * record.dt})")
    n = record.sizes[layer]
    steps = record.spikes[layer][k0:k1]
    idx = np.concatenate(steps) if steps else np.empty(0, dtype=np.int32)
    counts = np.bincount(idx, minlength=n)
    return counts / ((k1 - k0) * record.dt)


def tuning_curves(features: np.ndarray, labels: np.ndarray, n_classes: int = 10) -> np.ndarray:
    """Per-unit mean response per class, each row rescaled so its max is 1.

    ``features`` is (n_presentations, n_units); all-zero rows stay all-zero.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    means = np.zeros((features.shape[1], n_classes))
    for c in range(n_classes):
        mask = labels == c
        if not mask.any():
            raise ValueError(f"class {c} absent from the presented set")
        means[:, c] = features[mask].mean(axis=0)
    peak = means.max(axis=1, keepdims=True)
    scaled = np.divide(means, peak, out=np.zeros_like(means), where=peak > 0)
    return scaled


def pool_sizes(W: np.ndarray, threshold: float) -> np.ndarray:
    """Number of above-threshold afferents of each post-neuron."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return (W > threshold).sum(axis=1)


def pool_histogram(W: np.ndarray, threshold: float) -> np.ndarray:
    """Histogram of pool sizes; bin i counts post-neurons with exactly i members."""
    sizes = pool_sizes(W, threshold)
    return np.bincount(sizes, minlength=W.shape[1] + 1)


def pool_spread(W: np.ndarray, threshold: float, pre_geometry: LayerGeometry) -> np.ndarray:
    """RMS distance of each pool's members about the pool centroid (NaN for empty pools)."""
    members = W > threshold
    pos = pre_geometry.positions
    out = np.full(W.shape[0], np.nan)
    for i in range(W.shape[0]):
        pts = pos[members[i]]
        if len(pts):
            c = pts.mean(axis=0)
            out[i] = np.sqrt(((pts - c) ** 2).sum(axis=1).mean())
    return out


@dataclass(frozen=True)
class ClusterMap:
    """Per-unit class labels (-1 = unresponsive), positions, and spatial coherence."""

    labels: np.ndarray
    positions: np.ndarray
    coherence: float | None
    k: int


def _neighbor_indices(positions: np.ndarray, k: int) -> np.ndarray:
    tree = cKDTree(positions)
    _, idx = tree.query(positions, k=k + 1)
    return idx[:, 1:]  # drop self


def _coherence(neighbor_idx: np.ndarray, labels: np.ndarray) -> float:
    same = labels[neighbor_idx] == labels[:, None]
    return float(same.mean())


def cluster_map(curves: np.ndarray, geometry: LayerGeometry, k: int = 8) -> ClusterMap:
    """Label each unit by its preferred class and score local label agreement.

    Coherence is the mean fraction of each responsive unit's k nearest
    responsive neighbors that share its label; unresponsive units (all-zero
    tuning) are excluded from the score and labeled -1.
    """
    curves = np.asarray(curves, dtype=np.float64)
    labels = np.argmax(curves, axis=1).astype(np.int64)
    labels[curves.max(axis=1) == 0] = -1
    responsive = labels >= 0
    n_resp = int(responsive.sum())
    if n_resp < 2:
        return ClusterMap(labels, geometry.positions, None, k)
    kk = min(k, n_resp - 1)
    idx = _neighbor_indices(geometry.positions[responsive], kk)
    coherence = _coherence(idx, labels[responsive])
    return ClusterMap(labels, geometry.positions, coherence, kk)


def coherence_baseline(
    positions: np.ndarray, n_classes: int, k: int, trials: int = 200, seed: int = 0
) -> tuple[float, float]:
    """Mean and standard deviation of coherence under uniform random labels."""
    n = len(positions)
    if n < 2:
        raise ValueError("need at least two units for a baseline")
    kk = min(k, n - 1)
    idx = _neighbor_indices(np.asarray(positions, dtype=np.float64), kk)
    rng = np.random.default_rng(seed)
    scores = np.array([_coherence(idx, rng.integers(0, n_classes, n)) for _ in range(trials)])
    return float(scores.mean()), float(scores.std())


# ---------------------------------------------------------------------------
# wave metrics and regime classification


@dataclass(frozen=True)
class WaveMetrics:
    active_fraction: np.ndarray  # (T,)
    centroid: np.ndarray  # (T, dim), NaN where nothing fired
    components: np.ndarray  # (T,) int


def wave_metrics(spike_steps: list[np.ndarray], geometry: LayerGeometry, r_i: float) -> WaveMetrics:
    """Per-step activity statistics of one layer's raster.

    Components are counted on the spiking subgraph of the excitation-radius
    graph (pairs closer than r_i), so they are invariant to neuron labeling.
    """
    if len(spike_steps) == 0:
        raise ValueError("empty raster")
    pos = geometry.positions
    n = geometry.n
    near = distance_matrix(geometry) < r_i
    np.fill_diagonal(near, False)
    T = len(spike_steps)
    frac = np.zeros(T)
    centroid = np.full((T, pos.shape[1]), np.nan)
    comps = np.zeros(T, dtype=np.int64)
    for s, idx in enumerate(spike_steps):
        m = idx.size
        frac[s] = m / n
        if m == 0:
            continue
        centroid[s] = pos[idx].mean(axis=0)
        sub = near[np.ix_(idx, idx)]
        comps[s] = connected_components(csr_matrix(sub), directed=False)[0]
    return WaveMetrics(frac, centroid, comps)


def centroid_displacement(centroid: np.ndarray, window: int) -> np.ndarray:
    """Per-window travel of the activity centroid.

    For every window of ``window`` consecutive steps, the largest coordinate
    range covered by the centroid track (NaN steps ignored). A stuck blob
    scores near zero; a traveling or orbiting wave scores at least its path
    extent along one axis.
    """
    T = centroid.shape[0]
    if window > T:
        raise ValueError(f"window {window} longer than track {T}")
    sw = np.lib.stride_tricks.sliding_window_view(centroid, window, axis=0)  # (T-w+1, dim, w)
    with np.errstate(all="ignore"):
        rng = np.nanmax(sw, axis=2) - np.nanmin(sw, axis=2)
    return np.nanmax(rng, axis=1)


QUIESCENT = "quiescent"
SATURATED = "saturated"
SINGLE_WAVE = "single_wave"
SPLIT_MERGE = "split_merge"


def classify_regime(
    metrics: WaveMetrics, warmup: int, band: tuple[float, float] = (0.01, 0.30)
) -> str:
    """Coarse wave-regime label from post-warmup statistics."""
    lo, hi = band
    frac = metrics.active_fraction[warmup:]
    comps = metrics.components[warmup:]
    if len(frac) == 0:
        raise ValueError("warmup leaves no steps to classify")
    if frac.mean() < lo / 2 or frac[-max(1, len(frac) // 4):].max() == 0:
        return QUIESCENT
    if np.median(frac) > hi:
        return SATURATED
    if np.median(comps) == 1 and frac.min() >= lo and frac.max() <= hi:
        return SINGLE_WAVE
    return SPLIT_MERGE


# ---------------------------------------------------------------------------
# regime sweep


_LAYER_BLOCKS = ("kernel", "lif")


def apply_override(config: NetworkConfig, path: str, value) -> NetworkConfig:
    """Return a config with one dotted-path override applied (layer 0 for layer blocks)."""
    head, _, rest = path.partition(".")
    if head in _LAYER_BLOCKS:
        layer = config.layers[0]
        block = replace(getattr(layer, head), **{rest: value})
        new_layer = replace(layer, **{head: block})
        return replace(config, layers=(new_layer,) + config.layers[1:])
    if head == "input_gain":
        return replace(config, layers=(replace(config.layers[0], input_gain=value),) + config.layers[1:])
    if head == "noise":
        return replace(config, run=replace(config.run, noise=replace(config.run.noise, **{rest: value})))
    if head == "run":
        return replace(config, run=replace(config.run, **{rest: value}))
    if head == "plasticity":
        return replace(config, plasticity=replace(config.plasticity, **{rest: value}))
    raise ValueError(f"unknown override path: {path!r}")


@dataclass(frozen=True)
class SweepResult:
    cells: list[dict]
    candidate: int | None  # index into cells of the committed-default pick


def regime_sweep(
    base_config: NetworkConfig,
    grid: dict[str, list],
    n_steps: int = 1500,
    warmup: int = 500,
    band: tuple[float, float] = (0.01, 0.30),
    displacement_window: int = 500,
) -> SweepResult:
    """Run every grid cell, classify its layer-1 wave regime, pick a default.

    The candidate is the single-wave cell whose centroid travels farthest in
    its worst window: stable, in-band, and visibly moving.
    """
    from .network import run  # deferred: network imports analysis-free modules only

    keys = sorted(grid)
    cells = []
    best, best_disp = None, -np.inf
    for values in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, values))
        cfg = base_config
        for path, value in overrides.items():
            cfg = apply_override(cfg, path, value)
        cfg = replace(cfg, run=replace(cfg.run, n_steps=n_steps, record_spikes=True, snapshot_every=0))
        record = run(cfg)
        metrics = wave_metrics(record.spikes[0], cfg.layers[0].geometry.build(), cfg.layers[0].kernel.r_i)
        regime = classify_regime(metrics, warmup, band)
        w = min(displacement_window, n_steps - warmup)
        disp = centroid_displacement(metrics.centroid[warmup:], w)
        min_disp = float(np.nanmin(disp)) if disp.size else float("nan")
        cell = {
            "overrides": overrides,
            "regime": regime,
            "mean_fraction": float(metrics.active_fraction[warmup:].mean()),
            "median_components": float(np.median(metrics.components[warmup:])),
            "component_std": float(metrics.components[warmup:].std()),
            "min_window_displacement": min_disp,
        }
        cells.append(cell)
        if regime == SINGLE_WAVE and min_disp == min_disp and min_disp > best_disp:
            best, best_disp = len(cells) - 1, min_disp
    return SweepResult(cells, best)
