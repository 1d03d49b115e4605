"""Skeletal pose representation: geodesic distances, sagittal mirroring,
and motion-direction extraction.

A pose is a stack of per-joint axis-angle rotations. Index 0 is the global
rotation, indices 1..J the body joints. Values are canonicalized to rotation
angle <= pi on construction and frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, SkeletonMismatchError
from .rotation import SQRT2, canonicalize, relative_angle, rotation_matrices

#: Displacement (meters) below which a segment counts as static and carries
#: no motion direction.
STATIC_DISPLACEMENT = 1e-4

# Default 22-entry body layout: entry 0 = global rotation, then the standard
# body chain with left/right hips, knees, ankles, feet, collars, shoulders,
# elbows and wrists swapped; pelvis, spine1-3, neck and head stay fixed.
_BODY22_PERMUTATION = (
    0, 2, 1, 3, 5, 4, 6, 8, 7, 9, 11, 10,
    12, 14, 13, 15, 17, 16, 19, 18, 21, 20,
)
_BODY22_CENTRAL = (0, 3, 6, 9, 12, 15)


@dataclass(frozen=True)
class JointPermutation:
    """Left-right joint swap table. ``perm[j]`` is the partner of joint j."""

    perm: tuple[int, ...]
    central: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise InputError("joint permutation must be a bijection on 0..J")
        for j, p in enumerate(self.perm):
            if self.perm[p] != j:
                raise InputError(f"joint permutation is not an involution at joint {j}")
        for j in self.central:
            if not 0 <= j < n:
                raise InputError(f"central joint {j} out of range")
            if self.perm[j] != j:
                raise InputError(f"central joint {j} is not a fixed point")

    @property
    def joint_count(self) -> int:
        return len(self.perm)

    @classmethod
    def default_22(cls) -> "JointPermutation":
        return cls(_BODY22_PERMUTATION, frozenset(_BODY22_CENTRAL))

    @classmethod
    def identity(cls, joint_count: int) -> "JointPermutation":
        return cls(tuple(range(joint_count)), frozenset(range(joint_count)))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(eq=False)
class Pose:
    """Per-joint axis-angle rotations, shape (J+1, 3), canonicalized."""

    joints: np.ndarray

    def __post_init__(self):
        joints = canonicalize(self.joints)
        if joints.ndim != 2 or joints.shape[1] != 3:
            raise InputError(f"pose must have shape (J+1, 3), got {joints.shape}")
        self.joints = _freeze(joints)

    @property
    def joint_count(self) -> int:
        return self.joints.shape[0]


@dataclass(eq=False)
class PoseSequence:
    """A fixed-frame-rate stream of poses with global translations."""

    fps: float
    poses: np.ndarray  # (T, J+1, 3) axis-angle
    translations: np.ndarray  # (T, 3) meters
    permutation: JointPermutation

    def __post_init__(self):
        if not self.fps > 0:
            raise InputError(f"fps must be positive, got {self.fps}")
        poses = canonicalize(self.poses)
        trans = np.asarray(self.translations, dtype=float)
        if poses.ndim != 3 or poses.shape[2] != 3:
            raise InputError(f"poses must have shape (T, J+1, 3), got {poses.shape}")
        if trans.shape != (poses.shape[0], 3):
            raise InputError(
                f"translations shape {trans.shape} does not match {poses.shape[0]} frames"
            )
        if poses.shape[1] != self.permutation.joint_count:
            raise SkeletonMismatchError(
                f"sequence has {poses.shape[1]} joints but the permutation "
                f"covers {self.permutation.joint_count}"
            )
        self.poses = _freeze(poses)
        self.translations = _freeze(trans)

    @property
    def frame_count(self) -> int:
        return self.poses.shape[0]

    @property
    def joint_count(self) -> int:
        return self.poses.shape[1]

    @property
    def duration(self) -> float:
        """Time of the last frame, in seconds."""
        return (self.frame_count - 1) / self.fps

    def frame_time(self, index: int) -> float:
        return index / self.fps


def joint_geodesic_distance(a, b) -> float:
    """Geodesic distance between two joint rotations.

    Equals the Frobenius norm of the matrix log of the relative rotation,
    i.e. sqrt(2) times the relative rotation angle. Symmetric, zero iff the
    rotations coincide.
    """
    ra = rotation_matrices(canonicalize(a))
    rb = rotation_matrices(canonicalize(b))
    return float(SQRT2 * relative_angle(ra, rb))


def pose_distance(p1: Pose, p2: Pose, divisor: int | None = None) -> float:
    """Mean per-joint geodesic distance between two poses.

    ``divisor`` defaults to the number of joints (a true mean); pass an
    explicit value to reproduce other normalizations.
    """
    if p1.joints.shape != p2.joints.shape:
        raise SkeletonMismatchError(
            f"pose shapes differ: {p1.joints.shape} vs {p2.joints.shape}"
        )
    r1 = rotation_matrices(p1.joints)
    r2 = rotation_matrices(p2.joints)
    angles = relative_angle(r1, r2)
    d = divisor if divisor is not None else p1.joint_count
    return float(SQRT2 * angles.sum() / d)


def mirror_joints(joints: np.ndarray, perm: JointPermutation) -> np.ndarray:
    """Sagittal (YZ-plane) reflection with left/right swap; works on any
    (..., J+1, 3) stack of poses."""
    joints = np.asarray(joints, dtype=float)
    if joints.shape[-2] != perm.joint_count:
        raise SkeletonMismatchError(
            f"pose has {joints.shape[-2]} joints, permutation covers {perm.joint_count}"
        )
    out = joints[..., list(perm.perm), :].copy()
    out[..., 1] = -out[..., 1]
    out[..., 2] = -out[..., 2]
    return out


def mirror_pose(p: Pose, perm: JointPermutation) -> Pose:
    """Mirror a pose across the sagittal plane. Involution."""
    return Pose(mirror_joints(p.joints, perm))


def segment_direction(translations: Sequence | np.ndarray) -> np.ndarray | None:
    """Unit displacement direction from the first to the last sample.

    Returns None for (near-)static segments whose displacement stays below
    ``STATIC_DISPLACEMENT``. Requires at least two samples.
    """
    trans = np.asarray(translations, dtype=float)
    if trans.ndim != 2 or trans.shape[1] != 3:
        raise InputError(f"translations must have shape (T, 3), got {trans.shape}")
    if trans.shape[0] < 2:
        raise InputError("segment direction needs at least two translation samples")
    disp = trans[-1] - trans[0]
    norm = float(np.linalg.norm(disp))
    if norm < STATIC_DISPLACEMENT:
        return None
    return disp / norm


def reflect_direction(d) -> np.ndarray:
    """Reflect across the YZ plane: negate the x component. Involution."""
    out = np.array(d, dtype=float)
    out[..., 0] = -out[..., 0]
    return out
