"""Partition-agreement and mirror-pair retrieval metrics.

Implemented directly from the contingency table so the package carries no
heavyweight dependency; the test suite checks them against independent
pair-counting oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import InputError
from .pattern import ChoreoPattern


def _canonical_labels(partition: Sequence[Hashable]) -> np.ndarray:
    # Relabel clusters by first occurrence so results are exactly invariant
    # under any renaming of cluster ids.
    ids: dict[Hashable, int] = {}
    out = np.empty(len(partition), dtype=np.int64)
    for i, label in enumerate(partition):
        out[i] = ids.setdefault(label, len(ids))
    return out


def _contingency(pred: Sequence[Hashable], gt: Sequence[Hashable]) -> np.ndarray:
    if len(pred) != len(gt):
        raise InputError(
            f"partitions cover different element counts: {len(pred)} vs {len(gt)}"
        )
    if len(pred) == 0:
        raise InputError("partitions must be nonempty")
    p = _canonical_labels(pred)
    g = _canonical_labels(gt)
    table = np.zeros((p.max() + 1, g.max() + 1), dtype=np.int64)
    np.add.at(table, (p, g), 1)
    return table


def _comb2(x: np.ndarray) -> np.ndarray:
    return x * (x - 1) // 2


def adjusted_rand_index(pred: Sequence[Hashable], gt: Sequence[Hashable]) -> float:
    """Chance-adjusted pair agreement between two partitions, in [-1, 1]."""
    table = _contingency(pred, gt)
    n = int(table.sum())
    sum_cells = int(_comb2(table).sum())
    a = int(_comb2(table.sum(axis=1)).sum())
    b = int(_comb2(table.sum(axis=0)).sum())
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = a * b / total
    maximum = 0.5 * (a + b)
    if maximum == expected:
        # Both partitions are all-singletons or single-cluster; they agree.
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))


def normalized_mutual_information(
    pred: Sequence[Hashable], gt: Sequence[Hashable], average: str = "arithmetic"
) -> float:
    """Mutual information normalized by the mean of the two entropies.

    ``average`` picks the mean: "arithmetic" (default) or "geometric".
    Identical partitions score 1; if either partition carries no information
    (a single cluster) and they differ, the score is 0 by convention.
    """
    if average not in ("arithmetic", "geometric"):
        raise InputError(f"unknown NMI average {average!r}")
    table = _contingency(pred, gt).astype(float)
    n = table.sum()
    pi = table.sum(axis=1) / n
    pj = table.sum(axis=0) / n
    joint = table / n
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / np.outer(pi, pj)[nz])).sum())
    h_pred = float(-(pi[pi > 0] * np.log(pi[pi > 0])).sum())
    h_gt = float(-(pj[pj > 0] * np.log(pj[pj > 0])).sum())
    if h_pred == 0.0 and h_gt == 0.0:
        return 1.0  # both single-cluster partitions: identical
    if h_pred == 0.0 or h_gt == 0.0:
        return 0.0
    if average == "arithmetic":
        denom = 0.5 * (h_pred + h_gt)
    else:
        denom = float(np.sqrt(h_pred * h_gt))
    value = mi / denom
    # Guard against log round-off pushing identical partitions past 1.
    return float(min(1.0, max(0.0, value)))


def mirror_pair_prf(
    pred_pairs: Iterable[tuple[int, int]], gt_pairs: Iterable[tuple[int, int]]
) -> tuple[float, float, float]:
    """Precision, recall and F1 over unordered segment-index pairs.

    Empty prediction against nonempty truth scores (0, 0, 0); two empty
    sets count as a perfect match.
    """
    pred = {tuple(sorted(p)) for p in pred_pairs}
    gt = {tuple(sorted(p)) for p in gt_pairs}
    if not pred and not gt:
        return 1.0, 1.0, 1.0
    hits = len(pred & gt)
    precision = hits / len(pred) if pred else 0.0
    recall = hits / len(gt) if gt else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def pattern_mirror_pairs(pattern: ChoreoPattern) -> set[tuple[int, int]]:
    """All cross-cluster segment pairs implied by a pattern's primes."""
    by_token: dict[str, list[int]] = {}
    for i, tok in enumerate(pattern.tokens):
        by_token.setdefault(str(tok), []).append(i)
    pairs: set[tuple[int, int]] = set()
    for base in pattern.bases:
        plain = by_token.get(base, [])
        primed = by_token.get(base + "'", [])
        for i in plain:
            for j in primed:
                pairs.add(tuple(sorted((i, j))))
    return pairs


@dataclass(frozen=True)
class LabelMetrics:
    """Scores for one labeling run against ground truth."""

    ari: float
    nmi: float
    mirror_precision: float
    mirror_recall: float
    mirror_f1: float

    @classmethod
    def compare(cls, predicted: ChoreoPattern, truth: ChoreoPattern) -> "LabelMetrics":
        pred_labels = predicted.labels()
        true_labels = truth.labels()
        p, r, f1 = mirror_pair_prf(
            pattern_mirror_pairs(predicted), pattern_mirror_pairs(truth)
        )
        return cls(
            ari=adjusted_rand_index(pred_labels, true_labels),
            nmi=normalized_mutual_information(pred_labels, true_labels),
            mirror_precision=p,
            mirror_recall=r,
            mirror_f1=f1,
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "ari": self.ari,
            "nmi": self.nmi,
            "precision": self.mirror_precision,
            "recall": self.mirror_recall,
            "f1": self.mirror_f1,
        }
