"""Directed graph over ordered keyframe pairs.

Keyframes come in mirror twins: ids 0..K-1 are the originals, K..2K-1 their
mirrored counterparts. A node (u, v) is a candidate dance segment from
keyframe u to keyframe v; transitions chain segments through the flow
magnitude between the outgoing and incoming keyframes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GraphBuildError, InputError

DEFAULT_M_LOW = 12.0
DEFAULT_M_HIGH = 60.0
DEFAULT_RESOLUTION = (1024, 576)

Node = tuple[int, int]

INFEASIBLE = math.inf


@dataclass(frozen=True)
class KeyframeSet:
    """K originals plus their mirrors; id k+K mirrors id k."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise InputError(f"keyframe count must be >= 1, got {self.count}")

    @property
    def total(self) -> int:
        return 2 * self.count

    def mirror(self, k: int) -> int:
        if not 0 <= k < self.total:
            raise InputError(f"keyframe id {k} out of range 0..{self.total - 1}")
        return k + self.count if k < self.count else k - self.count

    def mirror_node(self, node: Node) -> Node:
        u, v = node
        return (self.mirror(u), self.mirror(v))


@dataclass(frozen=True, eq=False)
class FlowMatrix:
    """Average foreground flow magnitude (pixels) between every keyframe pair.

    The matrix may be asymmetric (flow magnitude is direction dependent) and
    is never symmetrized. The diagonal is unused.
    """

    keyframes: KeyframeSet
    magnitudes: np.ndarray  # (2K, 2K)
    resolution: tuple[int, int] = DEFAULT_RESOLUTION

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=float)
        t = self.keyframes.total
        if mags.shape != (t, t):
            raise InputError(f"flow matrix must be {t}x{t}, got {mags.shape}")
        if not np.all(np.isfinite(mags)):
            raise InputError("flow magnitudes must be finite")
        if np.any(mags < 0):
            raise InputError("flow magnitudes must be nonnegative")
        mags.setflags(write=False)
        object.__setattr__(self, "magnitudes", mags)

    def __getitem__(self, pair: Node) -> float:
        return float(self.magnitudes[pair])


def mirror_consistent(flow: FlowMatrix, tol: float = 0.0) -> bool:
    """True when F[mirror(u), mirror(v)] matches F[u, v] everywhere."""
    ks = flow.keyframes
    idx = np.array([ks.mirror(k) for k in range(ks.total)])
    return bool(np.all(np.abs(flow.magnitudes - flow.magnitudes[np.ix_(idx, idx)]) <= tol))


@dataclass(frozen=True, eq=False)
class KeyframeGraph:
    """Nodes are ordered keyframe pairs inside the accepted motion band.

    The edge set is dense and therefore kept implicit: a transition is
    feasible iff its cost is finite under :meth:`transition_cost`.
    """

    flow: FlowMatrix
    m_low: float
    m_high: float

    @property
    def keyframes(self) -> KeyframeSet:
        return self.flow.keyframes

    @cached_property
    def nodes(self) -> tuple[Node, ...]:
        t = self.keyframes.total
        mags = self.flow.magnitudes
        return tuple(
            (u, v)
            for u in range(t)
            for v in range(t)
            if u != v and self.m_low < mags[u, v] < self.m_high
        )

    @cached_property
    def node_set(self) -> frozenset[Node]:
        return frozenset(self.nodes)

    def has_node(self, node: Node) -> bool:
        return node in self.node_set

    def mirror_node(self, node: Node) -> Node:
        return self.keyframes.mirror_node(node)

    def transition_cost(self, from_node: Node, to_node: Node) -> float:
        """Flow magnitude spent between two chained segments.

        Zero when the segments share the boundary keyframe (no in-between
        motion has to be synthesized); infinite when the connecting flow
        falls outside the accepted band.
        """
        v, w = from_node[1], to_node[0]
        if v == w:
            return 0.0
        mag = float(self.flow.magnitudes[v, w])
        return mag if mag < self.m_high else INFEASIBLE


def build_graph(
    flow: FlowMatrix,
    m_low: float = DEFAULT_M_LOW,
    m_high: float = DEFAULT_M_HIGH,
) -> KeyframeGraph:
    """Filter keyframe pairs into the accepted motion band (strict bounds)."""
    if not 0 <= m_low < m_high:
        raise InputError(f"need 0 <= m_low < m_high, got {m_low}, {m_high}")
    graph = KeyframeGraph(flow=flow, m_low=m_low, m_high=m_high)
    if not graph.nodes:
        raise GraphBuildError(
            f"no keyframe pair has flow strictly inside ({m_low}, {m_high}); "
            "lower m_low or raise m_high to admit more candidate nodes"
        )
    return graph


def partially_mirrored(n1: Node, n2: Node, ks: KeyframeSet) -> bool:
    """True when the nodes share one keyframe (in either position) and the
    remaining keyframes are mirrors of each other. Symmetric."""
    a, b = n1
    c, d = n2
    return (
        (a == c and b == ks.mirror(d))
        or (a == d and b == ks.mirror(c))
        or (b == c and a == ks.mirror(d))
        or (b == d and a == ks.mirror(c))
    )
