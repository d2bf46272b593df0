"""Multi-layer orchestration: the per-step layer sweep and the outer run loop.

One time-step sweeps the layers in ascending order. Each layer integrates
its voltage/threshold ODEs with the input computed from the layer below at
this same step, detects and resets spikes, applies its output competition
rule, drives the learning rule of the weights behind it, and hands
``input_rule(relu(W @ y))`` to the layer above. All layers advance by the
same dt, so every layer state sits at the same time-level after a sweep.

The weight ODE is integrated with forward Euler: its right-hand side is
piecewise-constant in the frozen spike vectors, so higher-order stages
would evaluate to the same increment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import NetworkConfig
from .dynamics import LayerState, detect_spikes_and_reset, initial_state, rk4_step
from .errors import InstabilityError
from .plasticity import relu, stdp_update_inplace
from .record import SimulationRecord
from .streams import InputStream
from .topology import LayerGeometry, build_layer_coupling

_NOISE_STREAM = 1
_WEIGHT_STREAM = 2
_EVAL_STREAM = 3


@dataclass
class Network:
    """A config realized into coupling matrices and geometries (immutable after build)."""

    config: NetworkConfig
    geometries: list[LayerGeometry]
    coupling: list[np.ndarray]
    input_gains: list[float]
    sizes: list[int]
    probe_idx: list[int]

    @property
    def n_layers(self) -> int:
        return len(self.sizes)


@dataclass
class NetworkState:
    """Layer states plus the inter-layer weight matrices at one time-level.

    Weight arrays are owned by the state chain and updated in place by
    network_step; copy them if you need history.
    """

    layer_states: list[LayerState]
    weights: list[np.ndarray]
    t: float
    step: int


def build_network(config: NetworkConfig) -> Network:
    geometries = [spec.geometry.build() for spec in config.layers]
    coupling = [build_layer_coupling(g, spec.kernel) for g, spec in zip(geometries, config.layers)]
    sizes = [g.n for g in geometries]
    if config.run.probe_neurons is not None:
        probe_idx = list(config.run.probe_neurons)
        for i, (p, n) in enumerate(zip(probe_idx, sizes)):
            if not 0 <= p < n:
                raise ValueError(f"probe neuron {p} out of range for layer {i} (size {n})")
    else:
        probe_idx = [g.center_index() for g in geometries]
    gains = [spec.input_gain for spec in config.layers]
    return Network(config, geometries, coupling, gains, sizes, probe_idx)


def init_weights(n_pre: int, n_post: int, mu: float, sigma: float, seed, w_max: float = np.inf) -> np.ndarray:
    """Gaussian (post x pre) matrix, clamped to [0, w_max]; reproducible under seed."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    W = rng.normal(mu, sigma, size=(n_post, n_pre))
    return np.clip(W, 0.0, w_max)


def init_network_state(net: Network, weights: list[np.ndarray] | None = None) -> NetworkState:
    """Quiet layer states plus freshly drawn (or caller-supplied) weights.

    Supplied weights are used as-is, not copied: freeze learning or copy
    beforehand if the caller needs them preserved.
    """
    cfg = net.config
    states = [initial_state(n, spec.lif) for n, spec in zip(net.sizes, cfg.layers)]
    if weights is None:
        weights = [
            init_weights(
                net.sizes[i],
                net.sizes[i + 1],
                cfg.weight_init.mu,
                cfg.weight_init.sigma,
                (cfg.run.seed, _WEIGHT_STREAM, i),
                cfg.plasticity.w_max,
            )
            for i in range(net.n_layers - 1)
        ]
    else:
        expected = [(net.sizes[i + 1], net.sizes[i]) for i in range(net.n_layers - 1)]
        if [w.shape for w in weights] != expected:
            raise ValueError(f"weight shapes {[w.shape for w in weights]} do not match layers {expected}")
    return NetworkState(states, list(weights), 0.0, 0)


def noise_drive(n: int, amplitude: float, seed, step: int) -> np.ndarray:
    """Per-step i.i.d. uniform [0, amplitude] current; a pure function of (seed, step, n)."""
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    if amplitude == 0:
        return np.zeros(n)
    rng = np.random.default_rng((seed, _NOISE_STREAM, step))
    return rng.uniform(0.0, amplitude, n)


def forward_signal(W: np.ndarray, y: np.ndarray) -> np.ndarray:
    """W @ y exploiting spike sparsity."""
    active = np.flatnonzero(y)
    if active.size == 0:
        return np.zeros(W.shape[0])
    if active.size <= W.shape[1] // 8:
        return W[:, active] @ y[active]
    return W @ y


def _sweep(net: Network, state: NetworkState, x_ext: np.ndarray | None):
    """Advance every layer by one dt. Returns (new_state, per-layer spike index arrays,
    per-layer pre-reset probe voltages)."""
    cfg = net.config
    run = cfg.run
    dt = run.dt
    noise = run.noise
    new_states: list[LayerState] = []
    spike_idx: list[np.ndarray] = []
    probe_v: list[tuple[float, float]] = []
    learn = run.learning_enabled and cfg.plasticity.eta > 0
    y_prev: np.ndarray | None = None
    x_cur = x_ext
    for l in range(net.n_layers):
        spec = cfg.layers[l]
        x_in = x_cur
        if (
            noise.amplitude > 0
            and noise.layer == l
            and (noise.t_stop is None or state.t < noise.t_stop)
        ):
            drive = noise_drive(net.sizes[l], noise.amplitude, run.seed, state.step)
            x_in = drive if x_in is None else x_in + drive
        try:
            advanced = rk4_step(state.layer_states[l], net.coupling[l], net.input_gains[l], x_in, spec.lif, dt)
        except InstabilityError as e:
            raise InstabilityError(
                f"layer {l}: {e}", layer=l, neuron=e.neuron, t=e.t
            ) from e
        p = net.probe_idx[l]
        probe_v.append((float(advanced.v[p]), float(advanced.theta[p])))  # pre-reset
        advanced, spikes = detect_spikes_and_reset(advanced, spec.lif)
        y = spec.output_rule.apply(spikes)
        if l >= 1 and learn and (run.learn_pairs is None or (l - 1) in run.learn_pairs):
            stdp_update_inplace(
                state.weights[l - 1], y_prev, y, cfg.plasticity.eta, dt, cfg.plasticity.w_max
            )
        if l < net.n_layers - 1:
            a = relu(forward_signal(state.weights[l], y))
            x_cur = cfg.layers[l + 1].input_rule.apply(a)
        new_states.append(advanced)
        spike_idx.append(np.flatnonzero(spikes).astype(np.int32))
        y_prev = y
    return NetworkState(new_states, state.weights, state.t + dt, state.step + 1), spike_idx, probe_v


def network_step(net: Network, state: NetworkState, x1: np.ndarray | None = None) -> NetworkState:
    """One synchronous step of the whole stack (Algorithm-1 sweep)."""
    new_state, _, _ = _sweep(net, state, x1)
    return new_state


def run(
    config: NetworkConfig,
    input_stream: InputStream | None = None,
    *,
    net: Network | None = None,
    initial_state: NetworkState | None = None,
    on_snapshot=None,
) -> SimulationRecord:
    """Iterate network_step for run.n_steps, recording as configured.

    Records per-step spike indices (when run.record_spikes), pre-reset
    voltage/threshold traces of the probe neurons, and weight snapshots
    every run.snapshot_every steps (0 disables periodic snapshots; the
    initial weights are always snapshot). When ``on_snapshot(step, weights)``
    is given, periodic snapshots stream to it instead of accumulating in
    the record. Pass a prebuilt ``net`` to amortize kernel construction
    across repeated runs, and ``initial_state`` to continue from an earlier
    state instead of the quiet default.
    """
    if net is None:
        net = build_network(config)
    elif net.config is not config:
        # reuse the compiled kernels under a tweaked config (same structure)
        if [g.n for g in net.geometries] != [s.geometry.build().n for s in config.layers]:
            raise ValueError("prebuilt network does not match the config's layer sizes")
        net = replace(net, config=config)
    run_cfg = config.run
    state = init_network_state(net) if initial_state is None else initial_state
    n_steps = run_cfg.n_steps
    if input_stream is not None and input_stream.frames.shape[1] != net.sizes[0]:
        raise ValueError(
            f"stream frames sized {input_stream.frames.shape[1]} but layer 1 has {net.sizes[0]} neurons"
        )

    n_layers = net.n_layers
    probe_v = np.zeros((n_layers, n_steps + 1))
    probe_theta = np.zeros((n_layers, n_steps + 1))
    for l in range(n_layers):
        probe_v[l, 0] = state.layer_states[l].v[net.probe_idx[l]]
        probe_theta[l, 0] = state.layer_states[l].theta[net.probe_idx[l]]
    spikes: list[list[np.ndarray]] | None = [[] for _ in range(n_layers)] if run_cfg.record_spikes else None
    snapshots = [(state.step, [w.copy() for w in state.weights])]
    if on_snapshot is not None:
        on_snapshot(state.step, state.weights)

    for k in range(n_steps):
        x1 = input_stream.frame_at(state.step, run_cfg.dt) if input_stream is not None else None
        state, spike_idx, probes = _sweep(net, state, x1)
        if spikes is not None:
            for l in range(n_layers):
                spikes[l].append(spike_idx[l])
        for l in range(n_layers):
            probe_v[l, k + 1], probe_theta[l, k + 1] = probes[l]
        if run_cfg.snapshot_every and state.step % run_cfg.snapshot_every == 0:
            if on_snapshot is not None:
                on_snapshot(state.step, state.weights)
            else:
                snapshots.append((state.step, [w.copy() for w in state.weights]))

    return SimulationRecord(
        dt=run_cfg.dt,
        n_steps=n_steps,
        sizes=tuple(net.sizes),
        probe_idx=tuple(net.probe_idx),
        spikes=spikes,
        probe_v=probe_v,
        probe_theta=probe_theta,
        snapshots=snapshots,
        final_weights=[w.copy() for w in state.weights],
        final_state=state,
    )
