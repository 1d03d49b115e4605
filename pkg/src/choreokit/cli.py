"""Command-line interface.

Subcommands cover the full pipeline: ``label`` extracts a choreography
pattern from a pose sequence, ``solve`` plans the keyframe walk, ``warp``
retimes it to the beats, and ``pipeline`` chains all three. ``tempo-grid``,
``mirror-pose`` and ``synth-eval`` are supporting utilities.

Exit codes: 0 success, 2 invalid input, 3 infeasible optimization,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import io as cio
from .errors import ChoreokitError, Infeasible, InputError
from .graph import DEFAULT_M_HIGH, DEFAULT_M_LOW, build_graph
from .labeling import (
    DEFAULT_EPS_D,
    DEFAULT_EPS_THETA,
    DEFAULT_EPS_THETA_PRIME,
    label_analysis,
)
from .pose import mirror_joints, reflect_direction
from .pose import PoseSequence
from .segmentation import BeatGrid
from .solver import solve
from .synthetic import run_eval, suite_from_dict
from .warp import DEFAULT_ACCENT, DEFAULT_FPS_OUT, DEFAULT_INBETWEEN_COUNT, build_warp

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="choreokit",
        description="Choreography pattern extraction and beat-synchronized "
        "keyframe dance planning.",
    )
    parser.add_argument("--version", action="version", version=f"choreokit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("label", help="extract a choreography pattern from poses and beats")
    p.add_argument("--poses", required=True, help="pose sequence JSON")
    p.add_argument("--beats", required=True, help="beat times JSON")
    p.add_argument("--eps-theta", type=float, default=DEFAULT_EPS_THETA)
    p.add_argument("--eps-theta-prime", type=float, default=DEFAULT_EPS_THETA_PRIME)
    p.add_argument("--eps-d", type=float, default=DEFAULT_EPS_D)
    p.add_argument(
        "--dump-clusters",
        metavar="PATH",
        help="also write per-cluster members and representative segment indices",
    )
    p.add_argument("-o", "--output", required=True, help="pattern JSON to write")
    p.set_defaults(handler=_cmd_label)

    p = sub.add_parser("solve", help="assign pattern labels to keyframe-graph nodes")
    p.add_argument("--pattern", required=True, help="pattern JSON")
    p.add_argument("--flow", required=True, help="flow magnitude matrix JSON")
    p.add_argument("--m-low", type=float, default=DEFAULT_M_LOW)
    p.add_argument("--m-high", type=float, default=DEFAULT_M_HIGH)
    p.add_argument("--pins", help="custom constraints JSON (pins, self-mirrored labels)")
    p.add_argument(
        "--strict-eq9",
        action="store_true",
        help="forbid consecutive distinct labels from sharing a keyframe in any position",
    )
    p.add_argument(
        "--beam",
        type=int,
        metavar="WIDTH",
        help="approximate beam search instead of the exact solver",
    )
    p.add_argument("-o", "--output", required=True, help="walk path JSON to write")
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("warp", help="retime a walk path so keyframes land on beats")
    p.add_argument("--path", required=True, help="walk path JSON")
    p.add_argument("--beats", required=True, help="beat times JSON")
    p.add_argument("--inbetweens", type=int, default=DEFAULT_INBETWEEN_COUNT)
    p.add_argument("--fps", type=float, default=DEFAULT_FPS_OUT)
    p.add_argument("--accent", type=float, default=DEFAULT_ACCENT)
    p.add_argument("-o", "--output", required=True, help="warp schedule JSON to write")
    p.set_defaults(handler=_cmd_warp)

    p = sub.add_parser("synth-eval", help="score the labeler on synthetic instances")
    p.add_argument("--spec", required=True, help="suite JSON (defaults + instances)")
    p.add_argument("--report", required=True, help="report JSON to write")
    p.add_argument("--csv", help="also write per-instance metrics as CSV")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
    p.set_defaults(handler=_cmd_synth_eval)

    p = sub.add_parser("mirror-pose", help="mirror every pose in a sequence file")
    p.add_argument("--poses", required=True, help="pose sequence JSON")
    p.add_argument(
        "--reflect-translations",
        action="store_true",
        help="also reflect global translations across the sagittal plane",
    )
    p.add_argument("-o", "--output", required=True, help="mirrored pose JSON to write")
    p.set_defaults(handler=_cmd_mirror_pose)

    p = sub.add_parser("tempo-grid", help="emit a uniform 4/4 beat grid")
    p.add_argument("--bpm", type=float, required=True)
    p.add_argument("--offset", type=float, default=0.0, help="time of the first beat")
    p.add_argument("--bars", type=int, required=True)
    p.add_argument("-o", "--output", required=True, help="beats JSON to write")
    p.set_defaults(handler=_cmd_tempo_grid)

    p = sub.add_parser("pipeline", help="label (optional), solve, and warp in one run")
    p.add_argument("--poses", help="reference pose sequence JSON (enables the label stage)")
    p.add_argument("--pattern", help="pattern JSON (skips the label stage)")
    p.add_argument("--beats", required=True, help="beat times JSON")
    p.add_argument("--flow", required=True, help="flow magnitude matrix JSON")
    p.add_argument("--pins", help="custom constraints JSON")
    p.add_argument("--m-low", type=float, default=DEFAULT_M_LOW)
    p.add_argument("--m-high", type=float, default=DEFAULT_M_HIGH)
    p.add_argument("--eps-theta", type=float, default=DEFAULT_EPS_THETA)
    p.add_argument("--eps-theta-prime", type=float, default=DEFAULT_EPS_THETA_PRIME)
    p.add_argument("--eps-d", type=float, default=DEFAULT_EPS_D)
    p.add_argument("--strict-eq9", action="store_true")
    p.add_argument("--inbetweens", type=int, default=DEFAULT_INBETWEEN_COUNT)
    p.add_argument("--fps", type=float, default=DEFAULT_FPS_OUT)
    p.add_argument("--accent", type=float, default=DEFAULT_ACCENT)
    p.add_argument("--out-dir", required=True, help="directory for the three artifacts")
    p.set_defaults(handler=_cmd_pipeline)

    return parser


class _StageError(Exception):
    """Wraps a failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage}: {cause}")


def _cmd_label(args) -> int:
    seq = cio.load_pose_sequence(args.poses)
    beats = cio.load_beats(args.beats)
    result = label_analysis(
        seq, beats, args.eps_theta, args.eps_theta_prime, args.eps_d
    )
    cio.save_pattern(args.output, result.pattern)
    if args.dump_clusters:
        reps = result.representatives()
        tokens = result.pattern.tokens
        dump = {
            "clusters": [
                {
                    "label": str(tokens[members[0]]),
                    "segments": list(members),
                    "representative": reps[ci],
                }
                for ci, members in enumerate(result.clustering.clusters)
            ]
        }
        Path(args.dump_clusters).write_text(json.dumps(dump, indent=2) + "\n")
    print(f"pattern: {result.pattern}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    pattern = cio.load_pattern(args.pattern)
    flow = cio.load_flow(args.flow)
    custom = cio.load_pins(args.pins) if args.pins else None
    graph = build_graph(flow, args.m_low, args.m_high)
    assignment, path = solve(
        graph, pattern, custom, strict_eq9=args.strict_eq9, beam_width=args.beam
    )
    cio.save_walk_path(args.output, path, assignment)
    print(f"cost: {path.cost:.6f}  keyframes: {list(path.keyframes)}")
    return EXIT_OK


def _cmd_warp(args) -> int:
    walk, _ = cio.load_walk_path(args.path)
    beats = cio.load_beats(args.beats)
    schedule = build_warp(walk, beats, args.inbetweens, args.fps, args.accent)
    cio.save_schedule(args.output, schedule)
    print(
        f"entries: {len(schedule.entries)}  clips: {len(schedule.unique_clips())}  "
        f"fps: {schedule.fps_out}"
    )
    return EXIT_OK


def _cmd_synth_eval(args) -> int:
    from . import report as creport

    specs = suite_from_dict(cio.read_json(args.spec))
    report = run_eval(specs)
    creport.write_report_json(args.report, report)
    if args.csv:
        creport.write_report_csv(args.csv, report)
    if args.figures:
        creport.render_figures(args.figures, report)
    mean = report.mean
    print(
        f"instances: {len(report.instances)}  mean ARI {mean.ari:.3f}  "
        f"NMI {mean.nmi:.3f}  F1 {mean.mirror_f1:.3f}"
    )
    return EXIT_OK


def _cmd_mirror_pose(args) -> int:
    seq = cio.load_pose_sequence(args.poses)
    poses = mirror_joints(seq.poses, seq.permutation)
    trans = reflect_direction(seq.translations) if args.reflect_translations else seq.translations
    mirrored = PoseSequence(
        fps=seq.fps, poses=poses, translations=trans, permutation=seq.permutation
    )
    cio.save_pose_sequence(args.output, mirrored)
    print(f"mirrored {mirrored.frame_count} frames")
    return EXIT_OK


def _cmd_tempo_grid(args) -> int:
    beats = BeatGrid.uniform(args.bpm, bars=args.bars, offset=args.offset)
    cio.save_beats(args.output, beats)
    print(f"beats: {len(beats)} at {args.bpm} bpm")
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.pattern is None and args.poses is None:
        raise InputError("pipeline needs either --poses (to label) or --pattern")

    pattern_path = out_dir / "pattern.json"
    if args.pattern is not None:
        try:
            pattern = cio.load_pattern(args.pattern)
            cio.save_pattern(pattern_path, pattern)
        except ChoreokitError as exc:
            raise _StageError("label", exc) from exc
    else:
        try:
            seq = cio.load_pose_sequence(args.poses)
            beats = cio.load_beats(args.beats)
            pattern = label_analysis(
                seq, beats, args.eps_theta, args.eps_theta_prime, args.eps_d
            ).pattern
            cio.save_pattern(pattern_path, pattern)
        except ChoreokitError as exc:
            raise _StageError("label", exc) from exc

    try:
        flow = cio.load_flow(args.flow)
        custom = cio.load_pins(args.pins) if args.pins else None
        graph = build_graph(flow, args.m_low, args.m_high)
        assignment, path = solve(graph, pattern, custom, strict_eq9=args.strict_eq9)
        cio.save_walk_path(out_dir / "path.json", path, assignment)
    except ChoreokitError as exc:
        raise _StageError("solve", exc) from exc

    try:
        beats = cio.load_beats(args.beats)
        schedule = build_warp(path, beats, args.inbetweens, args.fps, args.accent)
        cio.save_schedule(out_dir / "schedule.json", schedule)
    except ChoreokitError as exc:
        raise _StageError("warp", exc) from exc

    print(f"pattern: {pattern}")
    print(f"wrote {pattern_path}, {out_dir / 'path.json'}, {out_dir / 'schedule.json'}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, Infeasible):
            return EXIT_INFEASIBLE
        if isinstance(exc.cause, InputError):
            return EXIT_INVALID_INPUT
        return EXIT_INTERNAL
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except ChoreokitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    raise SystemExit(main())
