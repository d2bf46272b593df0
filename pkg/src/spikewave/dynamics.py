"""Per-layer spiking dynamics: leaky voltage, homeostatic threshold, RK4 stepping.

Each neuron carries a voltage v and a firing threshold theta. The voltage
leaks toward zero, integrates recurrent drive from spiking neighbors and
external input current, and is reset after a spike. The threshold climbs at
a fixed rate while the neuron spikes and relaxes exponentially back to the
default threshold otherwise, so no neuron can fire indefinitely.

Spike flags are held fixed over a whole step: the Heaviside terms are
discontinuous, so the flags detected at the end of the previous step are
frozen through all four RK stages, and detection/reset runs once per step.
This keeps every step a smooth ODE solve and avoids intra-step chattering.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InstabilityError


@dataclass(frozen=True)
class LifParams:
    """Neuron constants: decay times, default threshold, growth rate, reset value."""

    tau_v: float
    tau_theta: float
    v_th: float
    theta_plus: float
    v_reset: float

    def __post_init__(self):
        if self.tau_v <= 0 or self.tau_theta <= 0:
            raise ValueError("time constants must be positive")
        if self.theta_plus < 0:
            raise ValueError("theta_plus must be nonnegative")
        if self.v_reset >= self.v_th:
            raise ValueError(
                f"v_reset ({self.v_reset}) must lie below v_th ({self.v_th}); "
                "a reset neuron must not instantly re-spike"
            )


@dataclass(frozen=True)
class LayerState:
    """Voltages, thresholds, and last-detected spike flags of one layer at time t."""

    v: np.ndarray
    theta: np.ndarray
    spikes: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        theta = np.asarray(self.theta, dtype=np.float64)
        spikes = np.asarray(self.spikes, dtype=np.float64)
        if not (v.shape == theta.shape == spikes.shape) or v.ndim != 1:
            raise ValueError(f"state vectors must share one length, got {v.shape}, {theta.shape}, {spikes.shape}")
        for name, arr in (("v", v), ("theta", theta), ("spikes", spikes)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "spikes", spikes)

    @property
    def n(self) -> int:
        return self.v.shape[0]


def initial_state(n: int, params: LifParams, t: float = 0.0) -> LayerState:
    """Quiet layer: zero voltage, threshold at its default, no spikes."""
    return LayerState(np.zeros(n), np.full(n, float(params.v_th)), np.zeros(n), t)


def heaviside_spikes(v: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Spike flags 1.0 where v >= theta (the boundary counts as firing)."""
    return (np.asarray(v) >= np.asarray(theta)).astype(np.float64)


def synaptic_drive(S: np.ndarray, spikes: np.ndarray, sx, x) -> np.ndarray:
    """Constant-per-step drive S @ spikes + Sx @ x.

    ``sx`` is the input routing: None for identity, a scalar gain, or a full
    matrix. Exploits spike sparsity: flags are exactly 0/1, so the recurrent
    term is a column sum over active neurons.
    """
    active = np.flatnonzero(spikes)
    n = S.shape[0]
    if active.size == 0:
        drive = np.zeros(n)
    elif active.size <= n // 8:
        drive = S[:, active].sum(axis=1)
    else:
        drive = S @ spikes
    if x is not None:
        if sx is None:
            drive = drive + x
        elif np.isscalar(sx):
            drive = drive + sx * x
        else:
            drive = drive + sx @ x
    return drive


def lif_rhs(state: LayerState, S: np.ndarray, sx, x, params: LifParams):
    """Time derivatives (dv, dtheta) of the layer at the given state.

    dv     = -v/tau_v + S @ H + Sx @ x
    dtheta = theta_plus            where spiking
             -(theta - v_th)/tau_theta   where not spiking

    H is the state's spike-flag vector. The off-spike branch relaxes theta
    exponentially toward the default threshold v_th.
    """
    n = state.n
    if S.shape != (n, n):
        raise ValueError(f"adjacency shape {S.shape} does not match layer size {n}")
    if x is not None:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (n,):
            raise ValueError(f"input vector shape {x.shape} does not match layer size {n}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input current")
    drive = synaptic_drive(S, state.spikes, sx, x)
    dv = -state.v / params.tau_v + drive
    dtheta = np.where(
        state.spikes > 0,
        params.theta_plus,
        -(state.theta - params.v_th) / params.tau_theta,
    )
    return dv, dtheta


def rk4_step(state: LayerState, S: np.ndarray, sx, x, params: LifParams, dt: float) -> LayerState:
    """Advance (v, theta) by one classical RK4 step of length dt.

    The spike flags and the input current are frozen at the step's start, so
    the synaptic drive is a constant vector across the four stages. The
    spikes field is carried over unchanged; run detect_spikes_and_reset
    afterwards to fire and reset.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    drive = synaptic_drive(S, state.spikes, sx, x)
    spiking = state.spikes > 0
    tv, tth = params.tau_v, params.tau_theta

    def dv(v):
        return -v / tv + drive

    def dtheta(theta):
        return np.where(spiking, params.theta_plus, -(theta - params.v_th) / tth)

    v, theta = state.v, state.theta
    k1v, k1t = dv(v), dtheta(theta)
    k2v, k2t = dv(v + 0.5 * dt * k1v), dtheta(theta + 0.5 * dt * k1t)
    k3v, k3t = dv(v + 0.5 * dt * k2v), dtheta(theta + 0.5 * dt * k2t)
    k4v, k4t = dv(v + dt * k3v), dtheta(theta + dt * k3t)
    v_new = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    theta_new = theta + dt / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)

    bad = ~(np.isfinite(v_new) & np.isfinite(theta_new))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InstabilityError(
            f"non-finite state at neuron {i}, t={state.t + dt:g}; try a smaller dt",
            neuron=i,
            t=state.t + dt,
        )
    return LayerState(v_new, theta_new, state.spikes, state.t + dt)


def detect_spikes_and_reset(state: LayerState, params: LifParams):
    """Fire neurons with v >= theta, reset their voltage, refresh spike flags.

    Returns the post-reset state and the detected spike vector. The detected
    flags become the frozen Heaviside terms of the next step.
    """
    spikes = heaviside_spikes(state.v, state.theta)
    fired = spikes > 0
    if not fired.any():
        return replace(state, spikes=spikes), spikes
    v = state.v.copy()
    v[fired] = params.v_reset
    return LayerState(v, state.theta, spikes, state.t), spikes
