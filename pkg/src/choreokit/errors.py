"""Exception types shared across the package.

The CLI maps these onto stable exit codes: invalid input -> 2,
infeasible optimization -> 3, anything else -> 4.
"""

from __future__ import annotations


class ChoreokitError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ChoreokitError):
    """Malformed file, argument, or value supplied by the caller."""


class SkeletonMismatchError(InputError):
    """Two poses or sequences do not share the same skeleton layout."""


class SegmentationError(InputError):
    """Beat grid and pose sequence cannot be combined into segments."""


class GraphBuildError(InputError):
    """Keyframe graph construction produced an unusable graph."""


class Infeasible(ChoreokitError):
    """No assignment satisfies the pattern constraints.

    ``label`` names the first base label with an empty candidate set, or the
    label at which the search could no longer be extended; ``reason`` is a
    human-readable description of the binding constraint.
    """

    def __init__(self, reason: str, label: str | None = None):
        self.label = label
        self.reason = reason
        prefix = f"label {label}: " if label is not None else ""
        super().__init__(f"infeasible: {prefix}{reason}")


class BudgetExceeded(ChoreokitError):
    """Exhaustive enumeration would exceed its configured budget."""


class GenerationError(ChoreokitError):
    """The synthetic generator failed to draw well-separated motions."""
