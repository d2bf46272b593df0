"""Frame-hold input scheduling for streamed stimuli."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class InputStream:
    """A sequence of input-current frames, each held for a fixed sim-time.

    ``frames`` has shape (n_frames, n_input). Each frame is presented for
    ``hold_duration`` and followed by ``gap`` sim-time of zero input. After
    the last frame the stream yields no input.
    """

    frames: np.ndarray
    hold_duration: float
    gap: float = 0.0

    def __post_init__(self):
        frames = np.atleast_2d(np.asarray(self.frames, dtype=np.float64))
        if self.hold_duration <= 0:
            raise ValueError("hold_duration must be positive")
        if self.gap < 0:
            raise ValueError("gap must be nonnegative")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def schedule(self, dt: float) -> tuple[int, int]:
        """(hold, gap) durations in whole steps; a frame is held at least one step."""
        hold = max(1, round(self.hold_duration / dt))
        gap = round(self.gap / dt)
        return hold, gap

    def total_steps(self, dt: float) -> int:
        hold, gap = self.schedule(dt)
        return self.n_frames * (hold + gap)

    def frame_at(self, step: int, dt: float) -> np.ndarray | None:
        """Frame presented during step ``step`` -> ``step+1``, or None for zero input."""
        hold, gap = self.schedule(dt)
        idx, offset = divmod(step, hold + gap)
        if idx >= self.n_frames or offset >= hold:
            return None
        return self.frames[idx]
