"""Beat grids and beat-aligned motion segments.

A motion segment is the pose subsequence between an accented beat and the
following weak beat: segment i spans beats 2i and 2i+1, so every bar of a
4/4 track contributes two segments with a transition gap between them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError, SegmentationError
from .pose import JointPermutation, PoseSequence, segment_direction
from .rotation import rotation_matrices


@dataclass(frozen=True, eq=False)
class BeatGrid:
    """Strictly increasing beat times (seconds) in whole 4/4 bars."""

    beat_times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.beat_times, dtype=float)
        if times.ndim != 1:
            raise InputError("beat_times must be a flat list of seconds")
        n = times.shape[0]
        if n < 4 or n % 4 != 0:
            raise InputError(f"beat count must be a positive multiple of 4, got {n}")
        if times[0] < 0:
            raise InputError(f"first beat must be >= 0, got {times[0]}")
        if not np.all(np.diff(times) > 0):
            raise InputError("beat times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "beat_times", times)

    def __len__(self) -> int:
        return self.beat_times.shape[0]

    @classmethod
    def uniform(cls, bpm: float, bars: int, offset: float = 0.0) -> "BeatGrid":
        """Evenly spaced grid: ``4 * bars`` beats at ``bpm`` starting at ``offset``."""
        if bpm <= 0:
            raise InputError(f"bpm must be positive, got {bpm}")
        if bars < 1:
            raise InputError(f"bars must be >= 1, got {bars}")
        step = 60.0 / bpm
        return cls(offset + step * np.arange(4 * bars))


@dataclass(eq=False)
class MotionSegment:
    """Pose subsequence between beats 2i and 2i+1 (both snapped frames included)."""

    index: int
    poses: np.ndarray  # (n, J+1, 3)
    translations: np.ndarray  # (n, 3)
    span: tuple[int, int]
    permutation: JointPermutation

    def __post_init__(self):
        if self.poses.shape[0] == 0:
            raise InputError(f"segment {self.index} has no frames")
        if self.poses.shape[0] != self.translations.shape[0]:
            raise InputError(
                f"segment {self.index}: {self.poses.shape[0]} poses vs "
                f"{self.translations.shape[0]} translations"
            )

    def __len__(self) -> int:
        return self.poses.shape[0]

    @property
    def joint_count(self) -> int:
        return self.poses.shape[1]

    @cached_property
    def rotmats(self) -> np.ndarray:
        # (n, J+1, 3, 3); cached because DTW touches every pair of frames
        return rotation_matrices(self.poses)

    @cached_property
    def direction(self) -> np.ndarray | None:
        if len(self) < 2:
            return None
        return segment_direction(self.translations)


def snap_to_frame(time_s: float, fps: float) -> int:
    """Nearest frame index for a timestamp (ties go to the even frame)."""
    return int(round(time_s * fps))


def build_segments(seq: PoseSequence, beats: BeatGrid) -> list[MotionSegment]:
    """Slice a pose sequence into its N/2 beat-aligned motion segments.

    Beats are snapped to the nearest frame, so each boundary lands within
    half a frame period of its beat time. Raises if the grid extends past
    the sequence or if a beat pair collapses onto a single frame.
    """
    times = beats.beat_times
    if times[-1] > seq.duration + 1e-9:
        raise SegmentationError(
            f"last beat at {times[-1]:.6f}s exceeds sequence duration {seq.duration:.6f}s"
        )
    snapped = [min(snap_to_frame(t, seq.fps), seq.frame_count - 1) for t in times]
    segments = []
    for i in range(len(beats) // 2):
        a, b = snapped[2 * i], snapped[2 * i + 1]
        if a >= b:
            raise SegmentationError(
                f"empty segment {i}: beats {2 * i} ({times[2 * i]:.6f}s) and "
                f"{2 * i + 1} ({times[2 * i + 1]:.6f}s) snap to frames {a}, {b}"
            )
        segments.append(
            MotionSegment(
                index=i,
                poses=seq.poses[a : b + 1],
                translations=seq.translations[a : b + 1],
                span=(2 * i, 2 * i + 1),
                permutation=seq.permutation,
            )
        )
    return segments
