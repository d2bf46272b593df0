"""Run records and their on-disk formats.

All exports are deterministic byte-for-byte: floats are written with
shortest round-trip repr, JSON keys are sorted, and row order follows
(step, layer, neuron). See FORMATS.md for the exact layouts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    """Shortest exact decimal form of a float."""
    return repr(float(x))


@dataclass
class SimulationRecord:
    """What a run leaves behind: rasters, probe traces, weight snapshots."""

    dt: float
    n_steps: int
    sizes: tuple[int, ...]
    probe_idx: tuple[int, ...]
    # spikes[layer][step] -> int32 indices of neurons that fired at that step
    spikes: list[list[np.ndarray]] | None
    # probe traces sampled at steps 0..n_steps (pre-reset voltages)
    probe_v: np.ndarray = field(default=None)
    probe_theta: np.ndarray = field(default=None)
    snapshots: list[tuple[int, list[np.ndarray]]] = field(default_factory=list)
    final_weights: list[np.ndarray] = field(default_factory=list)
    final_state: object = None

    @property
    def n_layers(self) -> int:
        return len(self.sizes)

    def spike_counts(self, layer: int) -> np.ndarray:
        """Per-step spike count of one layer."""
        if self.spikes is None:
            raise ValueError("spikes were not recorded")
        return np.array([idx.size for idx in self.spikes[layer]])


# ---------------------------------------------------------------------------
# writers


def write_raster_ndjson(record: SimulationRecord, path):
    """One JSON object per spike event: {"t": ..., "layer": ..., "neuron": ...}."""
    if record.spikes is None:
        raise ValueError("spikes were not recorded")
    with open(path, "w") as fh:
        for step in range(record.n_steps):
            t = (step + 1) * record.dt
            for layer in range(record.n_layers):
                for neuron in record.spikes[layer][step]:
                    fh.write('{"layer": %d, "neuron": %d, "t": %s}\n' % (layer, int(neuron), fmt(t)))


def read_raster_ndjson(path, n_layers: int, n_steps: int, dt: float) -> list[list[np.ndarray]]:
    """Rebuild per-layer per-step spike index lists from an event file."""
    spikes = [[[] for _ in range(n_steps)] for _ in range(n_layers)]
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            ev = json.loads(line)
            step = round(ev["t"] / dt) - 1
            if not 0 <= step < n_steps:
                raise ValueError(f"event time {ev['t']} outside the run's {n_steps} steps")
            spikes[ev["layer"]][step].append(ev["neuron"])
    return [[np.array(sorted(s), dtype=np.int32) for s in layer] for layer in spikes]


def write_probes_csv(record: SimulationRecord, path):
    """Columns t,layer,neuron,v,theta; one row per layer per sampled step."""
    with open(path, "w") as fh:
        fh.write("t,layer,neuron,v,theta\n")
        for step in range(record.probe_v.shape[1]):
            t = step * record.dt
            for layer in range(record.n_layers):
                fh.write(
                    "%s,%d,%d,%s,%s\n"
                    % (
                        fmt(t),
                        layer,
                        record.probe_idx[layer],
                        fmt(record.probe_v[layer, step]),
                        fmt(record.probe_theta[layer, step]),
                    )
                )


def write_weights_csv(W: np.ndarray, step: int, path):
    """Header line 'rows=R,cols=C,step=K', then R rows of C comma-separated values."""
    rows, cols = W.shape
    with open(path, "w") as fh:
        fh.write(f"rows={rows},cols={cols},step={step}\n")
        for r in range(rows):
            fh.write(",".join(fmt(v) for v in W[r]) + "\n")


def read_weights_csv(path):
    """Returns (W, step)."""
    with open(path) as fh:
        header = fh.readline().strip()
        try:
            meta = dict(kv.split("=") for kv in header.split(","))
            rows, cols, step = int(meta["rows"]), int(meta["cols"]), int(meta["step"])
        except (ValueError, KeyError) as e:
            raise ValueError(f"{path}: bad weights header {header!r}") from e
        W = np.loadtxt(fh, delimiter=",", ndmin=2)
    if W.shape != (rows, cols):
        raise ValueError(f"{path}: expected {rows}x{cols}, found {W.shape}")
    return W, step


def write_geometry_csv(geometry, path):
    """Columns x,y[,z]; row order defines neuron identity."""
    pos = geometry.positions
    with open(path, "w") as fh:
        fh.write(",".join("xyz"[: pos.shape[1]][i] for i in range(pos.shape[1])) + "\n")
        for row in pos:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_histogram_csv(counts: np.ndarray, path):
    """Columns pool_size,count."""
    with open(path, "w") as fh:
        fh.write("pool_size,count\n")
        for size, count in enumerate(counts):
            fh.write(f"{size},{int(count)}\n")


def write_tuning_csv(curves: np.ndarray, path):
    """Columns unit,c0..c9 (0-1-scaled per-class mean spike intensity)."""
    n_classes = curves.shape[1]
    with open(path, "w") as fh:
        fh.write("unit," + ",".join(f"c{c}" for c in range(n_classes)) + "\n")
        for unit, row in enumerate(curves):
            fh.write(f"{unit}," + ",".join(fmt(v) for v in row) + "\n")


def write_cluster_csv(positions: np.ndarray, labels: np.ndarray, path):
    """Columns unit,x,y,label; label -1 marks unresponsive units."""
    with open(path, "w") as fh:
        fh.write("unit,x,y,label\n")
        for unit, (pos, lab) in enumerate(zip(positions, labels)):
            fh.write(f"{unit},{fmt(pos[0])},{fmt(pos[1])},{int(lab)}\n")


def write_metrics_ndjson(per_layer_metrics: dict, dt: float, path):
    """One JSON object per (step, layer): active fraction, centroid, component count."""
    layers = sorted(per_layer_metrics)
    with open(path, "w") as fh:
        first = next(iter(per_layer_metrics.values()))
        for step in range(len(first.active_fraction)):
            for layer in layers:
                m = per_layer_metrics[layer]
                cx, cy = m.centroid[step]
                obj = {
                    "active_fraction": float(m.active_fraction[step]),
                    "centroid_x": None if np.isnan(cx) else float(cx),
                    "centroid_y": None if np.isnan(cy) else float(cy),
                    "components": int(m.components[step]),
                    "layer": layer,
                    "step": step,
                    "t": (step + 1) * dt,
                }
                fh.write(json.dumps(obj, sort_keys=True) + "\n")


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
