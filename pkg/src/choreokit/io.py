"""JSON interchange for every artifact the pipeline reads or writes.

Formats are deliberately plain so external pose estimators, flow estimators
and video synthesizers can interoperate through files. Every loader
validates shape and units and raises :class:`InputError` with the offending
field; every writer round-trips exactly through its loader.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InputError
from .graph import FlowMatrix, KeyframeSet
from .pattern import ChoreoPattern, parse_pattern
from .pose import JointPermutation, PoseSequence
from .segmentation import BeatGrid
from .solver import Assignment, CustomConstraints, WalkPath
from .warp import WarpEntry, WarpSchedule


def read_json(path: str | Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: file not found")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _write_json(path: str | Path, data: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _require(data: dict, key: str, context: str) -> Any:
    if key not in data:
        raise InputError(f"{context}: missing field {key!r}")
    return data[key]


# -- pose sequences ---------------------------------------------------------


def load_pose_sequence(path: str | Path) -> PoseSequence:
    data = read_json(path)
    ctx = str(path)
    fps = float(_require(data, "fps", ctx))
    joint_count = int(_require(data, "joint_count", ctx))
    frames = _require(data, "frames", ctx)
    if not frames:
        raise InputError(f"{ctx}: frames list is empty")
    if "permutation" in data:
        perm = JointPermutation(
            tuple(int(j) for j in data["permutation"]),
            frozenset(int(j) for j in data.get("central_joints", [])),
        )
    elif joint_count == 22:
        perm = JointPermutation.default_22()
    else:
        raise InputError(
            f"{ctx}: permutation required for skeletons with {joint_count} joints"
        )
    if perm.joint_count != joint_count:
        raise InputError(
            f"{ctx}: permutation covers {perm.joint_count} joints, expected {joint_count}"
        )
    poses = np.empty((len(frames), joint_count, 3))
    trans = np.empty((len(frames), 3))
    for i, frame in enumerate(frames):
        joints = _require(frame, "joints", f"{ctx}: frame {i}")
        if len(joints) != joint_count:
            raise InputError(f"{ctx}: frame {i} has {len(joints)} joints, expected {joint_count}")
        poses[i] = joints
        trans[i] = _require(frame, "translation", f"{ctx}: frame {i}")
    return PoseSequence(fps=fps, poses=poses, translations=trans, permutation=perm)


def save_pose_sequence(path: str | Path, seq: PoseSequence) -> None:
    _write_json(
        path,
        {
            "fps": seq.fps,
            "joint_count": seq.joint_count,
            "central_joints": sorted(seq.permutation.central),
            "permutation": list(seq.permutation.perm),
            "frames": [
                {
                    "joints": seq.poses[i].tolist(),
                    "translation": seq.translations[i].tolist(),
                }
                for i in range(seq.frame_count)
            ],
        },
    )


# -- beat grids -------------------------------------------------------------


def load_beats(path: str | Path) -> BeatGrid:
    data = read_json(path)
    times = _require(data, "beat_times", str(path))
    try:
        return BeatGrid(np.asarray(times, dtype=float))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_beats(path: str | Path, beats: BeatGrid) -> None:
    _write_json(path, {"beat_times": beats.beat_times.tolist()})


# -- flow matrices ----------------------------------------------------------


def load_flow(path: str | Path) -> FlowMatrix:
    data = read_json(path)
    ctx = str(path)
    k = int(_require(data, "keyframe_count", ctx))
    raw = _require(data, "magnitudes", ctx)
    resolution = tuple(int(x) for x in data.get("resolution", (1024, 576)))
    arr = np.asarray(raw, dtype=float)
    t = 2 * k
    if arr.ndim == 1:
        if arr.size != t * t:
            raise InputError(f"{ctx}: flat magnitudes must hold {t * t} values, got {arr.size}")
        arr = arr.reshape(t, t)
    try:
        return FlowMatrix(keyframes=KeyframeSet(k), magnitudes=arr, resolution=resolution)
    except InputError as exc:
        raise InputError(f"{ctx}: {exc}") from None


def save_flow(path: str | Path, flow: FlowMatrix) -> None:
    _write_json(
        path,
        {
            "keyframe_count": flow.keyframes.count,
            "resolution": list(flow.resolution),
            "magnitudes": flow.magnitudes.tolist(),
        },
    )


# -- patterns ---------------------------------------------------------------


def load_pattern(path: str | Path) -> ChoreoPattern:
    data = read_json(path)
    labels = _require(data, "labels", str(path))
    try:
        return parse_pattern(labels)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_pattern(path: str | Path, pattern: ChoreoPattern) -> None:
    _write_json(path, {"labels": pattern.labels()})


# -- walk paths -------------------------------------------------------------


def load_walk_path(path: str | Path) -> tuple[WalkPath, dict[str, tuple[int, int]]]:
    data = read_json(path)
    ctx = str(path)
    keyframes = tuple(int(k) for k in _require(data, "keyframes", ctx))
    cost = float(_require(data, "cost", ctx))
    assignment = {
        label: (int(node[0]), int(node[1]))
        for label, node in _require(data, "assignment", ctx).items()
    }
    return WalkPath(keyframes=keyframes, cost=cost), assignment


def save_walk_path(path: str | Path, walk: WalkPath, assignment: Assignment) -> None:
    _write_json(
        path,
        {
            "keyframes": list(walk.keyframes),
            "cost": walk.cost,
            "assignment": assignment.as_dict(),
        },
    )


# -- custom constraints -----------------------------------------------------


def load_pins(path: str | Path) -> CustomConstraints:
    data = read_json(path)
    try:
        return CustomConstraints.from_dict(data)
    except (InputError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def save_pins(path: str | Path, custom: CustomConstraints) -> None:
    _write_json(path, custom.to_dict())


# -- warp schedules ---------------------------------------------------------


def load_schedule(path: str | Path) -> WarpSchedule:
    data = read_json(path)
    ctx = str(path)
    entries = tuple(
        WarpEntry(
            time=float(_require(e, "t", f"{ctx}: entry {i}")),
            interval=int(_require(e, "interval", f"{ctx}: entry {i}")),
            clip=tuple(int(x) for x in _require(e, "clip", f"{ctx}: entry {i}")),
            source=float(_require(e, "src", f"{ctx}: entry {i}")),
        )
        for i, e in enumerate(_require(data, "entries", ctx))
    )
    return WarpSchedule(
        fps_out=float(_require(data, "fps_out", ctx)),
        inbetween_count=int(_require(data, "inbetween_count", ctx)),
        entries=entries,
    )


def save_schedule(path: str | Path, schedule: WarpSchedule) -> None:
    _write_json(
        path,
        {
            "fps_out": schedule.fps_out,
            "inbetween_count": schedule.inbetween_count,
            "entries": [
                {"t": e.time, "interval": e.interval, "clip": list(e.clip), "src": e.source}
                for e in schedule.entries
            ],
        },
    )
