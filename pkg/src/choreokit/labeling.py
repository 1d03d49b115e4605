"""Choreography pattern extraction.

Motion segments are quantized by complete-linkage clustering over pairwise
DTW distances, mirrored structure is detected first at the pose level and
then, for leftover clusters, via opposed travel directions; finally clusters
are named in order of first occurrence, mirrored partners sharing a letter
with a prime.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InputError
from .pattern import ChoreoPattern, PatternToken, base_letter
from .pose import Pose, PoseSequence, mirror_joints, reflect_direction
from .rotation import SQRT2
from .segmentation import BeatGrid, MotionSegment, build_segments

DEFAULT_EPS_THETA = 0.21
DEFAULT_EPS_THETA_PRIME = 0.25
DEFAULT_EPS_D = 0.1

THREADS_ENV_VAR = "CHOREOKIT_THREADS"


def thread_count() -> int:
    """Parallelism cap, from the CHOREOKIT_THREADS environment variable."""
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# DTW over the pose metric


def _local_cost_matrix(s1: MotionSegment, s2: MotionSegment) -> np.ndarray:
    # Pairwise mean geodesic distance between every frame of s1 and s2.
    r1 = s1.rotmats  # (n1, J, 3, 3)
    r2 = s2.rotmats  # (n2, J, 3, 3)
    m = np.einsum("ajyx,bjyz->abjxz", r1, r2)  # per-joint relative rotations
    cos = 0.5 * (m[..., 0, 0] + m[..., 1, 1] + m[..., 2, 2] - 1.0)
    sx = m[..., 2, 1] - m[..., 1, 2]
    sy = m[..., 0, 2] - m[..., 2, 0]
    sz = m[..., 1, 0] - m[..., 0, 1]
    sin = 0.5 * np.sqrt(sx * sx + sy * sy + sz * sz)
    angles = np.arctan2(sin, cos)  # (n1, n2, J)
    return SQRT2 * angles.mean(axis=2)


def _dp_normalized(costs: np.ndarray) -> float:
    # Classic DTW with steps {(1,1), (1,0), (0,1)}, boundary to boundary.
    # Tracks (accumulated cost, path length) lexicographically so the value
    # returned is total cost divided by the length of the cheapest (then
    # shortest) warping path. Tie order: diagonal, up, left.
    n, m = costs.shape
    acc = np.empty((n, m))
    plen = np.empty((n, m), dtype=np.int64)
    acc[0, 0] = costs[0, 0]
    plen[0, 0] = 1
    for j in range(1, m):
        acc[0, j] = acc[0, j - 1] + costs[0, j]
        plen[0, j] = j + 1
    for i in range(1, n):
        acc[i, 0] = acc[i - 1, 0] + costs[i, 0]
        plen[i, 0] = i + 1
        row = costs[i]
        for j in range(1, m):
            best_c, best_l = acc[i - 1, j - 1], plen[i - 1, j - 1]
            if acc[i - 1, j] < best_c or (acc[i - 1, j] == best_c and plen[i - 1, j] < best_l):
                best_c, best_l = acc[i - 1, j], plen[i - 1, j]
            if acc[i, j - 1] < best_c or (acc[i, j - 1] == best_c and plen[i, j - 1] < best_l):
                best_c, best_l = acc[i, j - 1], plen[i, j - 1]
            acc[i, j] = best_c + row[j]
            plen[i, j] = best_l + 1
    return float(acc[-1, -1]) / int(plen[-1, -1])


def dtw_distance(
    s1: MotionSegment,
    s2: MotionSegment,
    local: Callable[[Pose, Pose], float] | None = None,
) -> float:
    """Path-length-normalized DTW distance between two motion segments.

    ``local`` overrides the frame metric (default: mean per-joint geodesic
    distance). Symmetric; zero for identical segments.
    """
    if len(s1) == 0 or len(s2) == 0:
        raise InputError("DTW requires nonempty segments")
    if local is None:
        costs = _local_cost_matrix(s1, s2)
    else:
        costs = np.empty((len(s1), len(s2)))
        for i in range(len(s1)):
            pi = Pose(s1.poses[i])
            for j in range(len(s2)):
                costs[i, j] = local(pi, Pose(s2.poses[j]))
    return _dp_normalized(costs)


def mirror_segment(s: MotionSegment) -> MotionSegment:
    """Pose-mirrored copy of a segment; translations are left untouched."""
    return MotionSegment(
        index=s.index,
        poses=mirror_joints(s.poses, s.permutation),
        translations=s.translations,
        span=s.span,
        permutation=s.permutation,
    )


def _map_pairs(pairs, fn, threads: int | None):
    workers = thread_count() if threads is None else max(1, threads)
    if workers <= 1 or len(pairs) < 2:
        return [fn(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, pairs))


def pairwise_dtw(segments: Sequence[MotionSegment], threads: int | None = None) -> np.ndarray:
    """Symmetric matrix of DTW distances between all segment pairs."""
    n = len(segments)
    out = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    vals = _map_pairs(pairs, lambda p: dtw_distance(segments[p[0]], segments[p[1]]), threads)
    for (i, j), v in zip(pairs, vals):
        out[i, j] = out[j, i] = v
    return out


def mirrored_dtw(segments: Sequence[MotionSegment], threads: int | None = None) -> np.ndarray:
    """Matrix m[i, j] = DTW(mirror(segment i), segment j).

    Mirroring is an isometry of the pose metric, so m is symmetric and only
    the upper triangle (plus diagonal) is computed.
    """
    n = len(segments)
    mirrored = [mirror_segment(s) for s in segments]
    out = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    vals = _map_pairs(pairs, lambda p: dtw_distance(mirrored[p[0]], segments[p[1]]), threads)
    for (i, j), v in zip(pairs, vals):
        out[i, j] = out[j, i] = v
    return out


# ---------------------------------------------------------------------------
# Quantization


@dataclass(frozen=True)
class Clustering:
    """Disjoint, covering groups of segment indices."""

    clusters: tuple[tuple[int, ...], ...]
    count: int  # total number of segments

    def __post_init__(self):
        flat = sorted(i for c in self.clusters for i in c)
        if flat != list(range(self.count)):
            raise InputError("clusters must partition the segment indices")

    def labels(self) -> np.ndarray:
        out = np.empty(self.count, dtype=np.int64)
        for ci, members in enumerate(self.clusters):
            out[list(members)] = ci
        return out


@dataclass(frozen=True)
class MirrorPairs:
    """Unordered cluster-index pairs; each cluster joins at most one pair."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for a, b in self.pairs:
            if a == b:
                raise InputError(f"cluster {a} cannot mirror itself")
            if a in seen or b in seen:
                raise InputError("a cluster may appear in at most one mirror pair")
            seen.update((a, b))

    def partner(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a, b in self.pairs:
            out[a] = b
            out[b] = a
        return out


def cluster_segments(
    segments: Sequence[MotionSegment],
    eps_theta: float = DEFAULT_EPS_THETA,
    distances: np.ndarray | None = None,
    threads: int | None = None,
) -> Clustering:
    """Complete-linkage agglomerative clustering under a hard diameter cap.

    Clusters merge greedily by smallest complete-linkage distance while the
    merged cluster's maximum intra-pair DTW stays strictly below eps_theta,
    so the output partition satisfies that bound by construction.
    """
    if eps_theta <= 0:
        raise InputError(f"eps_theta must be positive, got {eps_theta}")
    n = len(segments)
    if distances is None:
        distances = pairwise_dtw(segments, threads=threads)
    clusters: list[list[int]] = [[i] for i in range(n)]
    while len(clusters) > 1:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                link = max(distances[i, j] for i in clusters[a] for j in clusters[b])
                key = (link, clusters[a][0], clusters[b][0])
                if best is None or key < best[0]:
                    best = (key, a, b)
        (link, _, _), a, b = best
        if link >= eps_theta:
            break
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
    clusters.sort(key=lambda c: c[0])
    return Clustering(tuple(tuple(c) for c in clusters), count=n)


# ---------------------------------------------------------------------------
# Mirror structure


def detect_mirrored_clusters(
    clustering: Clustering,
    segments: Sequence[MotionSegment],
    eps_theta_prime: float = DEFAULT_EPS_THETA_PRIME,
    mirrored_distances: np.ndarray | None = None,
    threads: int | None = None,
) -> MirrorPairs:
    """Pair clusters whose members mirror each other at the pose level.

    A candidate pair qualifies when the minimum DTW between a mirrored
    member of one cluster and a member of the other drops below
    eps_theta_prime; qualifying pairs commit greedily by ascending distance
    so each cluster joins at most one pair.
    """
    if eps_theta_prime <= 0:
        raise InputError(f"eps_theta_prime must be positive, got {eps_theta_prime}")
    if mirrored_distances is None:
        mirrored_distances = mirrored_dtw(segments, threads=threads)
    candidates = []
    cl = clustering.clusters
    for a in range(len(cl)):
        for b in range(a + 1, len(cl)):
            m = min(mirrored_distances[i, j] for i in cl[a] for j in cl[b])
            if m < eps_theta_prime:
                candidates.append((m, a, b))
    candidates.sort()
    used: set[int] = set()
    pairs = []
    for _, a, b in candidates:
        if a in used or b in used:
            continue
        pairs.append((a, b))
        used.update((a, b))
    return MirrorPairs(tuple(pairs))


def _max_bipartite_matching(adjacency: dict[int, list[int]]) -> dict[int, int]:
    # Kuhn's augmenting-path algorithm; deterministic given sorted inputs.
    match_right: dict[int, int] = {}

    def try_assign(u: int, seen: set[int]) -> bool:
        for v in adjacency.get(u, ()):
            if v in seen:
                continue
            seen.add(v)
            if v not in match_right or try_assign(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    for u in sorted(adjacency):
        try_assign(u, set())
    return {u: v for v, u in match_right.items()}


def partition_by_direction(
    cluster: Sequence[int],
    segments: Sequence[MotionSegment],
    eps_d: float = DEFAULT_EPS_D,
) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Split a cluster into two directionally mirrored groups, if possible.

    Candidate edges join segments whose reflected travel direction matches
    another's within eps_d; a maximum-cardinality matching over those edges
    decides whether mirrored travel exists at all. When it does, every
    segment is assigned by the sign of its dot product with the reference
    direction (the earlier segment of the first matched pair); static and
    tied segments stay with the reference group. Returns None when no pair
    matches or when all segments fall on one side.
    """
    members = sorted(cluster)
    if len(members) < 2:
        return None
    directions = {i: segments[i].direction for i in members}
    adjacency: dict[int, list[int]] = {}
    for i in members:
        di = directions[i]
        if di is None:
            continue
        refl = reflect_direction(di)
        targets = [
            j
            for j in members
            if j != i
            and directions[j] is not None
            and float(np.linalg.norm(refl - directions[j])) < eps_d
        ]
        if targets:
            adjacency[i] = targets
    if not adjacency:
        return None
    matching = _max_bipartite_matching(adjacency)
    matched_pairs = sorted({tuple(sorted((u, v))) for u, v in matching.items()})
    if not matched_pairs:
        return None
    reference = directions[matched_pairs[0][0]]
    group0, group1 = [], []
    for i in members:
        d = directions[i]
        if d is None or float(np.dot(d, reference)) >= 0.0:
            group0.append(i)
        else:
            group1.append(i)
    if not group0 or not group1:
        return None
    return tuple(group0), tuple(group1)


# ---------------------------------------------------------------------------
# Label assignment


def assign_labels(clustering: Clustering, mirror_pairs: MirrorPairs) -> ChoreoPattern:
    """Name clusters in order of first occurrence.

    Mirrored pairs share a letter, the earlier-occurring cluster unprimed;
    unpaired clusters get fresh unprimed letters.
    """
    clusters = clustering.clusters
    partner = mirror_pairs.partner()
    for a, b in mirror_pairs.pairs:
        if a >= len(clusters) or b >= len(clusters):
            raise InputError(f"mirror pair ({a}, {b}) references a missing cluster")
    order = sorted(range(len(clusters)), key=lambda ci: clusters[ci][0])
    token_of: dict[int, PatternToken] = {}
    next_letter = 0
    for ci in order:
        if ci in token_of:
            continue
        letter = base_letter(next_letter)
        next_letter += 1
        token_of[ci] = PatternToken(letter, False)
        if ci in partner:
            token_of[partner[ci]] = PatternToken(letter, True)
    tokens: list[PatternToken | None] = [None] * clustering.count
    for ci, members in enumerate(clusters):
        for i in members:
            tokens[i] = token_of[ci]
    return ChoreoPattern(tuple(tokens))


@dataclass(frozen=True)
class LabelingResult:
    """Everything the extraction pipeline produced, for inspection."""

    pattern: ChoreoPattern
    clustering: Clustering
    mirror_pairs: MirrorPairs
    segments: tuple[MotionSegment, ...]
    distances: np.ndarray
    mirrored_distances: np.ndarray

    def representatives(self) -> list[int]:
        """Medoid segment per cluster (minimum summed DTW to its peers)."""
        out = []
        for members in self.clustering.clusters:
            best = min(members, key=lambda i: (sum(self.distances[i, j] for j in members), i))
            out.append(best)
        return out


def label_analysis(
    seq: PoseSequence,
    beats: BeatGrid,
    eps_theta: float = DEFAULT_EPS_THETA,
    eps_theta_prime: float = DEFAULT_EPS_THETA_PRIME,
    eps_d: float = DEFAULT_EPS_D,
    threads: int | None = None,
) -> LabelingResult:
    """Full extraction pipeline with intermediate artifacts retained."""
    segments = build_segments(seq, beats)
    distances = pairwise_dtw(segments, threads=threads)
    mirrored = mirrored_dtw(segments, threads=threads)
    clustering = cluster_segments(segments, eps_theta, distances=distances)
    pose_pairs = detect_mirrored_clusters(
        clustering, segments, eps_theta_prime, mirrored_distances=mirrored
    )
    paired = set(pose_pairs.partner())
    final_clusters: list[tuple[int, ...]] = []
    index_map: dict[int, int] = {}
    split_pairs: list[tuple[int, int]] = []
    for ci, members in enumerate(clustering.clusters):
        if ci in paired or len(members) < 2:
            index_map[ci] = len(final_clusters)
            final_clusters.append(members)
            continue
        split = partition_by_direction(members, segments, eps_d)
        if split is None:
            index_map[ci] = len(final_clusters)
            final_clusters.append(members)
        else:
            split_pairs.append((len(final_clusters), len(final_clusters) + 1))
            final_clusters.extend(split)
    all_pairs = [(index_map[a], index_map[b]) for a, b in pose_pairs.pairs]
    all_pairs.extend(split_pairs)
    final_clustering = Clustering(tuple(final_clusters), count=clustering.count)
    final_pairs = MirrorPairs(tuple(all_pairs))
    pattern = assign_labels(final_clustering, final_pairs)
    return LabelingResult(
        pattern=pattern,
        clustering=final_clustering,
        mirror_pairs=final_pairs,
        segments=tuple(segments),
        distances=distances,
        mirrored_distances=mirrored,
    )


def label_pipeline(
    seq: PoseSequence,
    beats: BeatGrid,
    eps_theta: float = DEFAULT_EPS_THETA,
    eps_theta_prime: float = DEFAULT_EPS_THETA_PRIME,
    eps_d: float = DEFAULT_EPS_D,
    threads: int | None = None,
) -> ChoreoPattern:
    """Segment, cluster, detect mirrors, and name: the end-to-end labeler."""
    return label_analysis(seq, beats, eps_theta, eps_theta_prime, eps_d, threads).pattern
