"""End-to-end experiment plumbing: dataset split, streamed self-organization,
frozen-weight presentations, and feature matrices for the readout."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .analysis import extract_features
from .config import NetworkConfig
from .mnist import LabeledDataset, build_stream
from .network import Network, build_network, init_network_state, run
from .record import SimulationRecord

_SPLIT_STREAM = 4
_EVAL_STREAM = 3


def split_dataset(dataset: LabeledDataset, n_train: int, n_test: int, seed: int):
    """Deterministic shuffle, then disjoint train/test slices."""
    if n_train + n_test > len(dataset):
        raise ValueError(f"requested {n_train}+{n_test} samples from a pool of {len(dataset)}")
    order = np.random.default_rng((seed, _SPLIT_STREAM)).permutation(len(dataset))
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train : n_train + n_test])


def selforganize_on_stream(
    config: NetworkConfig, dataset: LabeledDataset, *, on_snapshot=None
) -> SimulationRecord:
    """Run the network over the streamed dataset with learning on.

    run.n_steps is derived from the stream length (every frame presented
    exactly once) unless the config pins a smaller positive value.
    """
    task = config.task
    if task is None:
        raise ValueError("config has no task block")
    stream = build_stream(dataset, task.gain, task.hold_duration, task.gap)
    total = stream.total_steps(config.run.dt)
    n_steps = min(config.run.n_steps, total) if config.run.n_steps > 0 else total
    cfg = replace(config, run=replace(config.run, n_steps=n_steps, learning_enabled=True))
    return run(cfg, stream)


def presentation_seed(seed: int, index: int) -> int:
    """Stable per-presentation noise seed."""
    return int(np.random.SeedSequence((seed, _EVAL_STREAM, index)).generate_state(1)[0])


def present_images(
    config: NetworkConfig,
    weights: list[np.ndarray],
    dataset: LabeledDataset,
    layers: list[int],
    *,
    net: Network | None = None,
) -> dict[int, np.ndarray]:
    """Present each image to the frozen network from a quiet state.

    Presentations are independent: each starts from the quiet state with its
    own derived noise seed, holds one frame, and yields each requested
    layer's spike rates over (settle, hold_duration). Returns one
    (n_images, n_neurons) matrix per requested layer.
    """
    task = config.task
    if task is None:
        raise ValueError("config has no task block")
    if net is None:
        net = build_network(config)
    layers = [l % len(config.layers) for l in layers]
    hold_steps = max(1, round(task.hold_duration / config.run.dt))
    window = (task.settle, hold_steps * config.run.dt)
    feats = {l: [] for l in layers}
    for i in range(len(dataset)):
        stream = build_stream(dataset.subset([i]), task.gain, task.hold_duration, 0.0)
        cfg = replace(
            config,
            run=replace(
                config.run,
                seed=presentation_seed(config.run.seed, i),
                n_steps=hold_steps,
                learning_enabled=False,
                record_spikes=True,
                snapshot_every=0,
            ),
        )
        state = init_network_state(replace(net, config=cfg), weights)
        record = run(cfg, stream, net=net, initial_state=state)
        for l in layers:
            feats[l].append(extract_features(record, l, window))
    return {l: np.stack(feats[l]) for l in layers}
