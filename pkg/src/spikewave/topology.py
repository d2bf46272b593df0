"""Layer geometries and the local-excitation / global-inhibition coupling kernel.

A layer is a list of neuron coordinates (2D or 3D lattice units). The
intra-layer adjacency matrix couples each pair of neurons through an
isotropic distance kernel: positive coupling inside an excitation radius,
exponentially decaying negative coupling outside an inhibition radius,
and zero in the band between the two radii.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    """Distance-kernel parameters for one layer's coupling matrix.

    ``excitation`` selects the excitatory branch: ``"linear"`` grows with
    distance (``a_i * D``), ``"constant"`` uses a flat amplitude ``a_i``
    inside the excitation radius.
    """

    r_i: float
    r_o: float
    a_i: float
    a_o: float
    decay_length: float = 10.0
    excitation: str = "linear"
    wrap: bool = False

    def __post_init__(self):
        if not (0 < self.r_i <= self.r_o):
            raise ValueError(f"kernel radii must satisfy 0 < r_i <= r_o, got r_i={self.r_i}, r_o={self.r_o}")
        if self.a_i < 0 or self.a_o < 0:
            raise ValueError("kernel amplitudes must be nonnegative")
        if self.decay_length <= 0:
            raise ValueError("decay_length must be positive")
        if self.excitation not in ("linear", "constant"):
            raise ValueError(f"unknown excitation variant: {self.excitation!r}")


@dataclass(frozen=True)
class LayerGeometry:
    """Neuron coordinates of one layer, shape (n, 2) or (n, 3)."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] not in (2, 3):
            raise ValueError(f"positions must have shape (n, 2) or (n, 3), got {pos.shape}")
        if pos.shape[0] < 1:
            raise ValueError("a layer needs at least one neuron")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def centroid(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def center_index(self) -> int:
        """Index of the neuron closest to the spatial centroid."""
        d = np.linalg.norm(self.positions - self.centroid(), axis=1)
        return int(np.argmin(d))


def grid_geometry(width: int, height: int, spacing: float = 1.0) -> LayerGeometry:
    """Row-major lattice: index i -> ((i % width) * spacing, (i // width) * spacing).

    Matches row-major flattening of an image, so a width x height pixel
    array maps pixel (row, col) onto neuron row*width + col.
    """
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be >= 1")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    pos = np.stack([cols.ravel(), rows.ravel()], axis=1).astype(np.float64) * spacing
    return LayerGeometry(pos)


def line_geometry(n: int, spacing: float = 1.0) -> LayerGeometry:
    """1D chain laid out along the x axis."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    pos = np.stack([np.arange(n) * spacing, np.zeros(n)], axis=1)
    return LayerGeometry(pos)


def load_geometry_csv(path) -> LayerGeometry:
    """Read coordinates from CSV, one neuron per row, columns x,y[,z].

    A non-numeric first row is treated as a header and skipped. Row order
    defines neuron identity.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            row = [c.strip() for c in row if c.strip() != ""]
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if i == 0:
                    continue  # header
                raise ValueError(f"{path}: non-numeric value in row {i + 1}")
    if not rows:
        raise ValueError(f"{path}: no coordinate rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: inconsistent column counts")
    return LayerGeometry(np.asarray(rows, dtype=np.float64))


def distance_matrix(geometry: LayerGeometry, *, wrap_extent: np.ndarray | None = None) -> np.ndarray:
    """Pairwise Euclidean distances; symmetric with zero diagonal.

    With ``wrap_extent`` (box lengths per axis) distances are computed on a
    torus of that extent.
    """
    pos = geometry.positions
    diff = pos[:, None, :] - pos[None, :, :]
    if wrap_extent is not None:
        ext = np.asarray(wrap_extent, dtype=np.float64)
        diff = diff - ext * np.round(diff / ext)
    return np.sqrt((diff**2).sum(axis=2))


def build_adjacency(D: np.ndarray, kernel: KernelParams) -> np.ndarray:
    """Coupling matrix from pairwise distances.

    S[i,j] = a_i * D[i,j]                      for D[i,j] < r_i   ("linear")
             a_i                               for 0 < D[i,j] < r_i ("constant")
             -a_o * exp(-D[i,j]/decay_length)  for D[i,j] > r_o
             0                                 in the dead band [r_i, r_o]
    The diagonal is zero in both variants.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    near = D < kernel.r_i
    far = D > kernel.r_o
    S = np.zeros_like(D)
    if kernel.excitation == "linear":
        S[near] = kernel.a_i * D[near]
    else:
        S[near] = kernel.a_i
        np.fill_diagonal(S, 0.0)
    S[far] = -kernel.a_o * np.exp(-D[far] / kernel.decay_length)
    return S


def build_spike_input_matrix(n: int, gain: float = 1.0) -> np.ndarray:
    """Input routing matrix; the default is a (possibly scaled) identity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.eye(n) * gain


def _lattice_extent(pos: np.ndarray) -> np.ndarray:
    """Torus period per axis: occupied span plus one lattice spacing."""
    extent = np.empty(pos.shape[1])
    for ax in range(pos.shape[1]):
        coords = np.unique(pos[:, ax])
        spacing = np.diff(coords).min() if coords.size > 1 else 1.0
        extent[ax] = coords[-1] - coords[0] + spacing
    return extent


def build_layer_coupling(geometry: LayerGeometry, kernel: KernelParams) -> np.ndarray:
    """Distance matrix + kernel in one step, honoring the wrap flag."""
    wrap_extent = _lattice_extent(geometry.positions) if kernel.wrap else None
    return build_adjacency(distance_matrix(geometry, wrap_extent=wrap_extent), kernel)
