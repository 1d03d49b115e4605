"""Beat-synchronized retiming of fixed-length synthesized clips.

Every keyframe of the walk path must land exactly on its beat. Within each
inter-beat interval the playback speed follows 1 + A*cos(2*pi*alpha): it
peaks at the surrounding beats and dips mid-interval, which keeps beats
visually salient while the clip still plays end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .segmentation import BeatGrid
from .solver import WalkPath

DEFAULT_INBETWEEN_COUNT = 14
DEFAULT_FPS_OUT = 25.0
DEFAULT_ACCENT = 0.5

_GRID_EPS = 1e-9


def source_time(alpha: float, accent: float) -> float:
    """Normalized source position for normalized output time ``alpha``.

    s(a) = a + (A / 2pi) * sin(2pi a): strictly increasing for A < 1, fixed
    at both endpoints, with speed 1 + A*cos(2pi a) peaking at the beats.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha must be in [0, 1], got {alpha}")
    if not 0.0 <= accent < 1.0:
        raise InputError(f"accent must be in [0, 1), got {accent}")
    if alpha == 0.0:
        return 0.0
    if alpha == 1.0:
        return 1.0
    return alpha + (accent / math.tau) * math.sin(math.tau * alpha)


@dataclass(frozen=True)
class WarpEntry:
    time: float  # output timestamp (seconds)
    interval: int  # inter-beat interval index
    clip: tuple[int, int]  # ordered keyframe pair of the interval's clip
    source: float  # fractional source frame in [0, inbetween_count + 1]


@dataclass(frozen=True, eq=False)
class WarpSchedule:
    """Output-frame schedule mapping timestamps to clip source positions."""

    fps_out: float
    inbetween_count: int
    entries: tuple[WarpEntry, ...]

    @property
    def frames_per_clip(self) -> int:
        # source positions run 0..S with S intervals per clip
        return self.inbetween_count + 1

    def unique_clips(self) -> tuple[tuple[int, int], ...]:
        """Distinct ordered keyframe pairs; only these need synthesis."""
        seen: dict[tuple[int, int], None] = {}
        for e in self.entries:
            seen.setdefault(e.clip, None)
        return tuple(seen)


def build_warp(
    path: WalkPath,
    beats: BeatGrid | Sequence[float],
    inbetween_count: int = DEFAULT_INBETWEEN_COUNT,
    fps_out: float = DEFAULT_FPS_OUT,
    accent: float = DEFAULT_ACCENT,
) -> WarpSchedule:
    """Schedule output frames so each path keyframe lands on its beat.

    Each inter-beat interval restarts the output frame grid at the beat
    itself, so beat timestamps are exact; interior frames advance by
    1/fps_out and sample the clip at S * s(alpha). Interval starts carry
    source position 0; the final beat closes the last interval at S.
    """
    times = beats.beat_times if isinstance(beats, BeatGrid) else np.asarray(beats, dtype=float)
    if times.ndim != 1 or times.shape[0] < 2:
        raise InputError("need at least two beat times")
    if not np.all(np.diff(times) > 0):
        raise InputError("beat times must be strictly increasing")
    n = times.shape[0]
    if len(path.keyframes) != n:
        raise InputError(
            f"path has {len(path.keyframes)} keyframes but the grid has {n} beats"
        )
    if inbetween_count < 1:
        raise InputError(f"inbetween_count must be >= 1, got {inbetween_count}")
    if fps_out <= 0:
        raise InputError(f"fps_out must be positive, got {fps_out}")
    if not 0.0 <= accent < 1.0:
        raise InputError(f"accent must be in [0, 1), got {accent}")

    spans = inbetween_count + 1  # S
    entries: list[WarpEntry] = []
    for i in range(n - 1):
        t0, t1 = float(times[i]), float(times[i + 1])
        duration = t1 - t0
        clip = (path.keyframes[i], path.keyframes[i + 1])
        last = i == n - 2
        steps = int(math.floor(duration * fps_out + _GRID_EPS))
        grid_hits_end = abs(steps / fps_out - duration) <= _GRID_EPS
        inner = steps if grid_hits_end else steps + 1
        for k in range(inner):
            t = t0 if k == 0 else t0 + k / fps_out
            alpha = 0.0 if k == 0 else (k / fps_out) / duration
            entries.append(
                WarpEntry(
                    time=t,
                    interval=i,
                    clip=clip,
                    source=spans * source_time(alpha, accent),
                )
            )
        if last:
            entries.append(WarpEntry(time=t1, interval=i, clip=clip, source=float(spans)))
    return WarpSchedule(fps_out=fps_out, inbetween_count=inbetween_count, entries=tuple(entries))
