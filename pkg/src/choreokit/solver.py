"""Optimal assignment of choreography labels to keyframe-graph nodes.

Each base label becomes one decision variable over the graph's nodes; primed
labels resolve to the mirrored node of their base. The search is a
branch-and-bound over base labels in order of first occurrence, seeded with
a deterministic beam upper bound, and returns the cost-minimal assignment
with the lexicographically smallest node vector among optima. A product
enumeration with the identical feasibility predicate serves as the oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, Infeasible, InputError
from .graph import INFEASIBLE, KeyframeGraph, KeyframeSet, Node, partially_mirrored
from .pattern import ChoreoPattern, PatternToken, parse_token

_PRUNE_MARGIN = 1e-9
_SEED_BEAM_WIDTH = 16


@dataclass(frozen=True)
class CustomConstraints:
    """User-imposed hard constraints on the assignment.

    ``pins`` maps a label (optionally primed) to the node it must take;
    ``self_mirrored_labels`` forces a label onto a node whose end keyframe is
    the mirror of its start keyframe.
    """

    pins: tuple[tuple[str, Node], ...] = ()
    self_mirrored_labels: frozenset[str] = frozenset()

    @classmethod
    def from_dict(cls, data: dict) -> "CustomConstraints":
        pins = tuple(
            (label, (int(node[0]), int(node[1])))
            for label, node in sorted(data.get("pins", {}).items())
        )
        return cls(pins=pins, self_mirrored_labels=frozenset(data.get("self_mirrored", [])))

    def to_dict(self) -> dict:
        return {
            "pins": {label: list(node) for label, node in self.pins},
            "self_mirrored": sorted(self.self_mirrored_labels),
        }


@dataclass(frozen=True, eq=False)
class Assignment:
    """Base label -> node map; primed labels resolve through the mirror map."""

    nodes: dict[str, Node]
    keyframes: KeyframeSet

    def node_for(self, token: PatternToken) -> Node:
        node = self.nodes[token.base]
        return self.keyframes.mirror_node(node) if token.primed else node

    def as_dict(self) -> dict[str, list[int]]:
        return {base: list(node) for base, node in self.nodes.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, Assignment) and self.nodes == other.nodes


@dataclass(frozen=True)
class WalkPath:
    """Keyframe ids, one per beat, plus the total transition cost."""

    keyframes: tuple[int, ...]
    cost: float


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    position: int | None = None


class _Compiled:
    """Pattern, graph and constraints flattened for fast repeated checks."""

    def __init__(
        self,
        graph: KeyframeGraph,
        pattern: ChoreoPattern,
        custom: CustomConstraints | None,
        strict_eq9: bool,
    ):
        if len(pattern) == 0:
            raise InputError("pattern must contain at least one token")
        self.graph = graph
        self.pattern = pattern
        self.strict_eq9 = strict_eq9
        self.ks = graph.keyframes
        self.mirror = [self.ks.mirror(k) for k in range(self.ks.total)]
        self.flow = graph.flow.magnitudes.tolist()
        self.m_high = graph.m_high
        self.bases = pattern.bases
        self.base_idx = {b: i for i, b in enumerate(self.bases)}
        self.variants: dict[int, set[bool]] = {i: set() for i in range(len(self.bases))}
        self.tokens: list[tuple[int, bool]] = []
        for tok in pattern.tokens:
            bi = self.base_idx[tok.base]
            self.variants[bi].add(tok.primed)
            self.tokens.append((bi, tok.primed))
        self.transitions: list[tuple[int, bool, int, bool]] = [
            (*self.tokens[i], *self.tokens[i + 1]) for i in range(len(self.tokens) - 1)
        ]
        # Cross-base token-value pairs carry the exclusivity constraints;
        # same-base pairs are discharged by the mirror map itself.
        values = [(self.base_idx[t.base], t.primed) for t in pattern.token_values]
        self.value_pairs = [
            (v1, v2)
            for i, v1 in enumerate(values)
            for v2 in values[i + 1 :]
            if v1[0] != v2[0]
        ]
        self.pins, self.self_mirrored = self._normalize_custom(custom)

    def _normalize_custom(self, custom: CustomConstraints | None):
        pins: dict[int, Node] = {}
        self_mirrored: set[int] = set()
        if custom is None:
            return pins, self_mirrored
        for label, node in custom.pins:
            tok = parse_token(label)
            if tok.base not in self.base_idx:
                raise InputError(f"pinned label {label!r} does not occur in the pattern")
            node = (int(node[0]), int(node[1]))
            if not self.graph.has_node(node):
                raise InputError(f"pinned node {node} for label {label!r} is not in the graph")
            base_node = self.ks.mirror_node(node) if tok.primed else node
            bi = self.base_idx[tok.base]
            if bi in pins and pins[bi] != base_node:
                raise InputError(f"conflicting pins for label base {tok.base!r}")
            pins[bi] = base_node
        for label in custom.self_mirrored_labels:
            tok = parse_token(label)
            if tok.base not in self.base_idx:
                raise InputError(f"self-mirrored label {label!r} does not occur in the pattern")
            self_mirrored.add(self.base_idx[tok.base])
        return pins, self_mirrored

    def node_for(self, node: Node, primed: bool) -> Node:
        if primed:
            return (self.mirror[node[0]], self.mirror[node[1]])
        return node

    def transition_value(self, n1: Node, n2: Node) -> float:
        # Cost of chaining n1 into n2: free through a shared keyframe,
        # infeasible above the motion band.
        v, w = n1[1], n2[0]
        if v == w:
            return 0.0
        mag = self.flow[v][w]
        return mag if mag < self.m_high else INFEASIBLE

    def path_cost(self, nodes: list[Node]) -> float:
        total = 0.0
        for bi, pi, bj, pj in self.transitions:
            c = self.transition_value(self.node_for(nodes[bi], pi), self.node_for(nodes[bj], pj))
            if c == INFEASIBLE:
                return INFEASIBLE
            total += c
        return total

    def violations(self, nodes: list[Node]) -> list[Violation]:
        out: list[Violation] = []
        for bi, base in enumerate(self.bases):
            for primed in sorted(self.variants[bi]):
                nd = self.node_for(nodes[bi], primed)
                if not self.graph.has_node(nd):
                    tok = base + ("'" if primed else "")
                    out.append(
                        Violation("node", f"label {tok} maps to {nd}, not a graph node")
                    )
        for bi, pin in self.pins.items():
            if nodes[bi] != pin:
                out.append(
                    Violation(
                        "pin",
                        f"label {self.bases[bi]} pinned to {pin} but assigned {nodes[bi]}",
                    )
                )
        for bi in self.self_mirrored:
            u, v = nodes[bi]
            if v != self.mirror[u]:
                out.append(
                    Violation(
                        "self-mirror",
                        f"label {self.bases[bi]} must end on the mirror of its start "
                        f"keyframe, got {nodes[bi]}",
                    )
                )
        for (b1, p1), (b2, p2) in self.value_pairs:
            n1 = self.node_for(nodes[b1], p1)
            n2 = self.node_for(nodes[b2], p2)
            t1 = self.bases[b1] + ("'" if p1 else "")
            t2 = self.bases[b2] + ("'" if p2 else "")
            if n1 == n2:
                out.append(Violation("overlap", f"labels {t1} and {t2} share node {n1}"))
            elif n1 == self.node_for(n2, True):
                out.append(
                    Violation("mirror", f"labels {t1} and {t2} map to mirrored nodes")
                )
            elif partially_mirrored(n1, n2, self.ks):
                out.append(
                    Violation(
                        "partial-mirror",
                        f"labels {t1} and {t2} map to partially mirrored nodes {n1}, {n2}",
                    )
                )
        for pos, (bi, pi, bj, pj) in enumerate(self.transitions):
            n1 = self.node_for(nodes[bi], pi)
            n2 = self.node_for(nodes[bj], pj)
            if bi != bj:
                if n1[0] == n2[0] or n1[1] == n2[1]:
                    out.append(
                        Violation(
                            "repeat",
                            f"consecutive distinct labels at beats {2 * pos}-{2 * pos + 3} "
                            f"repeat a keyframe position: {n1} -> {n2}",
                            position=pos,
                        )
                    )
                elif self.strict_eq9 and (n1[0] == n2[1] or n1[1] == n2[0]):
                    out.append(
                        Violation(
                            "repeat-strict",
                            f"consecutive distinct labels share a keyframe across "
                            f"positions: {n1} -> {n2}",
                            position=pos,
                        )
                    )
            if self.transition_value(n1, n2) == INFEASIBLE:
                out.append(
                    Violation(
                        "transition",
                        f"transition {n1} -> {n2} exceeds the flow bound",
                        position=pos,
                    )
                )
        return out

    def is_feasible(self, nodes: list[Node]) -> bool:
        # Early-exit twin of violations(); same predicate, no messages.
        for bi in range(len(self.bases)):
            for primed in self.variants[bi]:
                if not self.graph.has_node(self.node_for(nodes[bi], primed)):
                    return False
        for bi, pin in self.pins.items():
            if nodes[bi] != pin:
                return False
        for bi in self.self_mirrored:
            u, v = nodes[bi]
            if v != self.mirror[u]:
                return False
        for (b1, p1), (b2, p2) in self.value_pairs:
            n1 = self.node_for(nodes[b1], p1)
            n2 = self.node_for(nodes[b2], p2)
            if n1 == n2 or n1 == self.node_for(n2, True):
                return False
            if partially_mirrored(n1, n2, self.ks):
                return False
        for bi, pi, bj, pj in self.transitions:
            n1 = self.node_for(nodes[bi], pi)
            n2 = self.node_for(nodes[bj], pj)
            if bi != bj:
                if n1[0] == n2[0] or n1[1] == n2[1]:
                    return False
                if self.strict_eq9 and (n1[0] == n2[1] or n1[1] == n2[0]):
                    return False
            if self.transition_value(n1, n2) == INFEASIBLE:
                return False
        return True

    # -- search support ----------------------------------------------------

    def build_domains(self) -> list[list[Node]]:
        domains: list[list[Node]] = []
        for bi, base in enumerate(self.bases):
            candidates = list(self.graph.nodes)
            stage = "graph nodes"
            if bi in self.pins:
                candidates = [n for n in candidates if n == self.pins[bi]]
                stage = "pin constraint"
            if not candidates:
                raise Infeasible(f"no candidate nodes survive the {stage}", label=base)
            if bi in self.self_mirrored:
                candidates = [n for n in candidates if n[1] == self.mirror[n[0]]]
                if not candidates:
                    raise Infeasible(
                        "no graph node has a mirrored end keyframe for the "
                        "self-mirrored constraint",
                        label=base,
                    )
            if True in self.variants[bi]:
                candidates = [
                    n for n in candidates if self.graph.has_node(self.node_for(n, True))
                ]
                if not candidates:
                    raise Infeasible(
                        "the pattern uses this label's mirror, but no candidate's "
                        "mirrored node is in the graph",
                        label=base,
                    )
            intra = {(pi, pj) for (b1, pi, b2, pj) in self.transitions if b1 == b2 == bi}
            for pi, pj in sorted(intra):
                candidates = [
                    n
                    for n in candidates
                    if self.transition_value(self.node_for(n, pi), self.node_for(n, pj))
                    != INFEASIBLE
                ]
            if not candidates:
                raise Infeasible(
                    "no candidate supports the label's own consecutive repetitions "
                    "within the flow bound",
                    label=base,
                )
            domains.append(candidates)
        return domains

    def compatible(self, depth: int, node: Node, chosen: list[Node]) -> bool:
        # Pairwise and chain constraints against already assigned bases.
        for (b1, p1), (b2, p2) in self.value_pairs:
            hi, lo = (b1, b2) if b1 > b2 else (b2, b1)
            if hi != depth or lo > depth:
                continue
            n_hi = self.node_for(node, p1 if b1 == depth else p2)
            n_lo = self.node_for(chosen[lo] if lo < depth else node, p1 if b1 == lo else p2)
            if n_hi == n_lo or n_hi == self.node_for(n_lo, True):
                return False
            if partially_mirrored(n_hi, n_lo, self.ks):
                return False
        for bi, pi, bj, pj in self.transitions:
            if max(bi, bj) != depth or min(bi, bj) > depth:
                continue
            n1 = self.node_for(node if bi == depth else chosen[bi], pi)
            n2 = self.node_for(node if bj == depth else chosen[bj], pj)
            if bi != bj:
                if n1[0] == n2[0] or n1[1] == n2[1]:
                    return False
                if self.strict_eq9 and (n1[0] == n2[1] or n1[1] == n2[0]):
                    return False
            if self.transition_value(n1, n2) == INFEASIBLE:
                return False
        return True

    def prepare_bounds(self, domains: list[list[Node]]) -> None:
        # Admissible per-transition lower bounds for unassigned endpoints.
        mags = self.graph.flow.magnitudes
        self._firsts: dict[tuple[int, bool], tuple[set[int], np.ndarray]] = {}
        self._seconds: dict[tuple[int, bool], tuple[set[int], np.ndarray]] = {}
        for bi in range(len(self.bases)):
            for primed in self.variants[bi]:
                firsts = sorted({self.node_for(n, primed)[0] for n in domains[bi]})
                seconds = sorted({self.node_for(n, primed)[1] for n in domains[bi]})
                self._firsts[(bi, primed)] = (set(firsts), mags[:, firsts].min(axis=1))
                self._seconds[(bi, primed)] = (set(seconds), mags[seconds, :].min(axis=0))
        self._static_min: list[float] = []
        for bi, pi, bj, pj in self.transitions:
            sec_set, _ = self._seconds[(bi, pi)]
            fst_set, _ = self._firsts[(bj, pj)]
            if sec_set & fst_set:
                self._static_min.append(0.0)
            else:
                block = mags[np.ix_(sorted(sec_set), sorted(fst_set))]
                self._static_min.append(float(block.min()))

    def lower_bound(self, depth: int, node: Node, chosen: list[Node]) -> float:
        # Assigned transitions contribute exactly; half-assigned ones their
        # best completion; untouched ones a precomputed static minimum.
        total = 0.0
        for t, (bi, pi, bj, pj) in enumerate(self.transitions):
            i_node = node if bi == depth else (chosen[bi] if bi < depth else None)
            j_node = node if bj == depth else (chosen[bj] if bj < depth else None)
            if i_node is not None and j_node is not None:
                c = self.transition_value(self.node_for(i_node, pi), self.node_for(j_node, pj))
                if c == INFEASIBLE:
                    return INFEASIBLE
                total += c
            elif i_node is not None:
                v = self.node_for(i_node, pi)[1]
                fst_set, mins = self._firsts[(bj, pj)]
                total += 0.0 if v in fst_set else float(mins[v])
            elif j_node is not None:
                w = self.node_for(j_node, pj)[0]
                sec_set, mins = self._seconds[(bi, pi)]
                total += 0.0 if w in sec_set else float(mins[w])
            else:
                total += self._static_min[t]
        return total


def _result(inst: _Compiled, nodes: list[Node]) -> tuple[Assignment, WalkPath]:
    assignment = Assignment(
        nodes={base: nodes[i] for i, base in enumerate(inst.bases)},
        keyframes=inst.ks,
    )
    path = assignment_to_path(assignment, inst.pattern, inst.graph)
    return assignment, path


def _beam_best(inst: _Compiled, domains: list[list[Node]], width: int) -> list[Node] | None:
    states: list[tuple[float, tuple[Node, ...]]] = [(0.0, ())]
    for depth in range(len(domains)):
        expanded: list[tuple[float, tuple[Node, ...]]] = []
        for _, vec in states:
            chosen = list(vec)
            for node in domains[depth]:
                if not inst.compatible(depth, node, chosen):
                    continue
                bound = inst.lower_bound(depth, node, chosen)
                if bound == INFEASIBLE:
                    continue
                expanded.append((bound, vec + (node,)))
        expanded.sort(key=lambda s: (s[0], s[1]))
        states = expanded[:width]
        if not states:
            return None
    best = min(states, key=lambda s: (inst.path_cost(list(s[1])), s[1]))
    return list(best[1])


def solve(
    graph: KeyframeGraph,
    pattern: ChoreoPattern,
    custom: CustomConstraints | None = None,
    strict_eq9: bool = False,
    beam_width: int | None = None,
) -> tuple[Assignment, WalkPath]:
    """Minimize total transition cost over all feasible assignments.

    The result is exact and deterministic: among cost-optimal assignments,
    the node vector (ordered by label first occurrence) is lexicographically
    smallest. ``beam_width`` switches to an approximate beam search that may
    miss the optimum (or a feasible solution entirely).

    Raises :class:`Infeasible` when no assignment satisfies the constraints.
    """
    inst = _Compiled(graph, pattern, custom, strict_eq9)
    domains = inst.build_domains()
    inst.prepare_bounds(domains)

    if beam_width is not None:
        if beam_width < 1:
            raise InputError(f"beam width must be >= 1, got {beam_width}")
        vec = _beam_best(inst, domains, beam_width)
        if vec is None:
            raise Infeasible("beam search found no feasible assignment")
        return _result(inst, vec)

    seed = _beam_best(inst, domains, _SEED_BEAM_WIDTH)
    limit = inst.path_cost(seed) if seed is not None else None

    m = len(domains)
    best_cost: float | None = None
    best_vec: list[Node] | None = None
    deepest = 0
    chosen: list[Node] = [None] * m  # type: ignore[list-item]

    def dfs(depth: int) -> None:
        nonlocal best_cost, best_vec, deepest
        for node in domains[depth]:
            if not inst.compatible(depth, node, chosen):
                continue
            bound = inst.lower_bound(depth, node, chosen)
            cap = best_cost if best_cost is not None else limit
            if cap is not None and bound >= cap + _PRUNE_MARGIN:
                continue
            chosen[depth] = node
            deepest = max(deepest, depth + 1)
            if depth + 1 == m:
                cost = inst.path_cost(chosen)
                if cost != INFEASIBLE and (best_cost is None or cost < best_cost):
                    best_cost = cost
                    best_vec = chosen.copy()
            else:
                dfs(depth + 1)
            chosen[depth] = None  # type: ignore[assignment]

    dfs(0)
    if best_vec is None:
        raise Infeasible(
            "no candidate extends the partial assignment past this label "
            "(pairwise exclusivity or chain constraints)",
            label=inst.bases[min(deepest, m - 1)],
        )
    return _result(inst, best_vec)


def brute_force_solve(
    graph: KeyframeGraph,
    pattern: ChoreoPattern,
    custom: CustomConstraints | None = None,
    strict_eq9: bool = False,
    budget: int = 10**8,
) -> tuple[Assignment, WalkPath]:
    """Exhaustive oracle: enumerate every node vector, keep the feasible one
    with smallest (cost, vector). Shares the feasibility predicate and
    tie-break with :func:`solve` and must agree with it bit for bit."""
    inst = _Compiled(graph, pattern, custom, strict_eq9)
    m = len(inst.bases)
    if len(graph.nodes) ** m > budget:
        raise BudgetExceeded(
            f"{len(graph.nodes)}^{m} assignments exceed the budget of {budget}"
        )
    best_cost: float | None = None
    best_vec: tuple[Node, ...] | None = None
    for vec in itertools.product(graph.nodes, repeat=m):
        nodes = list(vec)
        if not inst.is_feasible(nodes):
            continue
        cost = inst.path_cost(nodes)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_vec = vec
    if best_vec is None:
        raise Infeasible("exhaustive enumeration found no feasible assignment")
    return _result(inst, list(best_vec))


def check_feasible(
    assignment: Assignment,
    pattern: ChoreoPattern,
    graph: KeyframeGraph,
    custom: CustomConstraints | None = None,
    strict_eq9: bool = False,
) -> list[Violation]:
    """All constraint violations of an assignment; empty means feasible."""
    inst = _Compiled(graph, pattern, custom, strict_eq9)
    missing = [b for b in inst.bases if b not in assignment.nodes]
    if missing:
        raise InputError(f"assignment is missing base labels: {', '.join(missing)}")
    nodes = [tuple(assignment.nodes[b]) for b in inst.bases]
    return inst.violations(nodes)


def assignment_to_path(
    assignment: Assignment, pattern: ChoreoPattern, graph: KeyframeGraph
) -> WalkPath:
    """Expand an assignment into the beat-indexed walk path.

    The cost is recomputed from the flow matrix by summing the transitions
    in sequence order.
    """
    keyframes: list[int] = []
    node_seq: list[Node] = []
    for tok in pattern.tokens:
        node = assignment.node_for(tok)
        node_seq.append(node)
        keyframes.extend(node)
    total = 0.0
    for i in range(len(node_seq) - 1):
        c = graph.transition_cost(node_seq[i], node_seq[i + 1])
        if c == INFEASIBLE:
            return WalkPath(tuple(keyframes), INFEASIBLE)
        total += c
    return WalkPath(tuple(keyframes), total)
