"""Choreography pattern tokens.

A pattern is an ordered list of tokens such as A-A'-B-C: repeated letters
mark repeated motion segments, a trailing apostrophe marks the mirrored
counterpart of the same base motion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import InputError

_TOKEN_RE = re.compile(r"^([A-Z]+)(')?$")


@dataclass(frozen=True, order=True)
class PatternToken:
    base: str
    primed: bool = False

    def __post_init__(self):
        if not re.fullmatch(r"[A-Z]+", self.base):
            raise InputError(f"token base must be uppercase letters, got {self.base!r}")

    def __str__(self) -> str:
        return self.base + ("'" if self.primed else "")

    def toggled(self) -> "PatternToken":
        return PatternToken(self.base, not self.primed)


def parse_token(text: str) -> PatternToken:
    m = _TOKEN_RE.match(text)
    if m is None:
        raise InputError(f"malformed pattern token {text!r}")
    return PatternToken(m.group(1), m.group(2) is not None)


def base_letter(index: int) -> str:
    """0 -> A, 25 -> Z, 26 -> AA, spreadsheet style."""
    if index < 0:
        raise InputError(f"letter index must be >= 0, got {index}")
    out = ""
    index += 1
    while index:
        index, r = divmod(index - 1, 26)
        out = chr(ord("A") + r) + out
    return out


@dataclass(frozen=True, eq=True)
class ChoreoPattern:
    """Ordered token sequence, one token per motion segment.

    Every primed token's base must also occur unprimed, unless the base is
    declared mirror-only (a cluster whose two orientations never co-occur
    with an unprimed reference).
    """

    tokens: tuple[PatternToken, ...]
    mirror_only_bases: frozenset[str] = frozenset()

    def __post_init__(self):
        unprimed = {t.base for t in self.tokens if not t.primed}
        for pos, tok in enumerate(self.tokens):
            if tok.primed and tok.base not in unprimed and tok.base not in self.mirror_only_bases:
                raise InputError(
                    f"token {pos}: primed base {tok.base!r} never appears unprimed "
                    "and is not declared mirror-only"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[PatternToken]:
        return iter(self.tokens)

    def __str__(self) -> str:
        return "-".join(str(t) for t in self.tokens)

    @property
    def bases(self) -> tuple[str, ...]:
        """Distinct base labels in order of first occurrence."""
        seen: dict[str, None] = {}
        for t in self.tokens:
            seen.setdefault(t.base, None)
        return tuple(seen)

    @property
    def token_values(self) -> tuple[PatternToken, ...]:
        """Distinct token values (base + prime) in order of first occurrence."""
        seen: dict[PatternToken, None] = {}
        for t in self.tokens:
            seen.setdefault(t, None)
        return tuple(seen)

    def labels(self) -> list[str]:
        return [str(t) for t in self.tokens]

    def toggled(self) -> "ChoreoPattern":
        """Flip the prime on every token (the globally mirrored pattern)."""
        return ChoreoPattern(
            tuple(t.toggled() for t in self.tokens),
            mirror_only_bases=frozenset(self.bases),
        )

    def canonicalized(self) -> "ChoreoPattern":
        """Re-normalize prime orientation so each base's first occurrence is
        unprimed, matching what the labeling stage emits."""
        flip: dict[str, bool] = {}
        out = []
        for t in self.tokens:
            if t.base not in flip:
                flip[t.base] = t.primed
            out.append(PatternToken(t.base, t.primed != flip[t.base]))
        return ChoreoPattern(tuple(out))


def parse_pattern(tokens: Iterable[str] | str) -> ChoreoPattern:
    """Parse a dash-separated string or an iterable of token strings."""
    if isinstance(tokens, str):
        parts = tokens.split("-")
    else:
        parts = list(tokens)
    parsed = []
    for pos, part in enumerate(parts, start=1):
        try:
            parsed.append(parse_token(part.strip()))
        except InputError as exc:
            raise InputError(f"pattern token {pos}: {exc}") from None
    if not parsed:
        raise InputError("pattern must contain at least one token")
    return ChoreoPattern(tuple(parsed))
