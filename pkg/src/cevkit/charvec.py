"""Text normalization and bag-of-characters count vectors.

Every metric in the package consumes :class:`CharVector` instances built
here, so the counting rules live in one place:

* a character token is one Unicode scalar value after NFC composition;
* whitespace is left out of character vectors unless ``count_spaces`` is set;
* word tokens are whitespace-delimited.
"""

from __future__ import annotations

import enum
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

__all__ = [
    "PUNCTUATION_TABLE",
    "CountUnit",
    "NormalizationPolicy",
    "CharVector",
    "CharDistribution",
    "IncomparableVectorsError",
    "EmptyDistributionError",
    "normalize_text",
    "char_vector",
    "l1_distance",
    "to_distribution",
]


class IncomparableVectorsError(ValueError):
    """Raised when two vectors count different kinds of token."""


class EmptyDistributionError(ValueError):
    """Raised when a distribution is requested from an empty vector."""


# Typographic variants folded onto their ASCII counterparts.
PUNCTUATION_TABLE: dict[str, str] = {
    "‘": "'",  # LEFT SINGLE QUOTATION MARK
    "’": "'",  # RIGHT SINGLE QUOTATION MARK
    "‚": "'",  # SINGLE LOW-9 QUOTATION MARK
    "‛": "'",  # SINGLE HIGH-REVERSED-9 QUOTATION MARK
    "′": "'",  # PRIME
    "ʼ": "'",  # MODIFIER LETTER APOSTROPHE
    "“": '"',  # LEFT DOUBLE QUOTATION MARK
    "”": '"',  # RIGHT DOUBLE QUOTATION MARK
    "„": '"',  # DOUBLE LOW-9 QUOTATION MARK
    "‟": '"',  # DOUBLE HIGH-REVERSED-9 QUOTATION MARK
    "″": '"',  # DOUBLE PRIME
    "«": '"',  # LEFT-POINTING DOUBLE ANGLE QUOTATION MARK
    "»": '"',  # RIGHT-POINTING DOUBLE ANGLE QUOTATION MARK
    "‐": "-",  # HYPHEN
    "‑": "-",  # NON-BREAKING HYPHEN
    "‒": "-",  # FIGURE DASH
    "–": "-",  # EN DASH
    "—": "-",  # EM DASH
    "―": "-",  # HORIZONTAL BAR
    "−": "-",  # MINUS SIGN
    "…": "...",  # HORIZONTAL ELLIPSIS
}
_PUNCT_TRANSLATION = str.maketrans(PUNCTUATION_TABLE)


class CountUnit(str, enum.Enum):
    CHARACTER = "character"
    WORD = "word"


@dataclass(frozen=True)
class NormalizationPolicy:
    """Switches controlling :func:`normalize_text` and character counting.

    The defaults lowercase, fold typographic punctuation, collapse
    whitespace and compose to NFC. ``count_spaces`` does not change the
    text; it is carried here so one object configures a whole run.
    """

    lowercase: bool = True
    unify_punctuation: bool = True
    collapse_whitespace: bool = True
    unicode_form: str = "NFC"  # "NFC" or "none"
    count_spaces: bool = False

    def __post_init__(self):
        if self.unicode_form not in ("NFC", "none"):
            raise ValueError(f"unicode_form must be 'NFC' or 'none', got {self.unicode_form!r}")


def normalize_text(raw: str, policy: NormalizationPolicy | None = None) -> str:
    policy = policy or NormalizationPolicy()
    text = raw
    if policy.unicode_form == "NFC":
        text = unicodedata.normalize("NFC", text)
    if policy.unify_punctuation:
        text = text.translate(_PUNCT_TRANSLATION)
    if policy.lowercase:
        text = text.lower()
        # lower() can emit decomposed sequences (e.g. U+0130)
        if policy.unicode_form == "NFC":
            text = unicodedata.normalize("NFC", text)
    if policy.collapse_whitespace:
        text = " ".join(text.split())
    return text


class CharVector(Mapping[str, int]):
    """Immutable sparse token -> count map. Zero counts are never stored."""

    __slots__ = ("_counts", "_unit", "_total")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = (), unit: CountUnit = CountUnit.CHARACTER):
        items = counts.items() if isinstance(counts, Mapping) else counts
        clean: dict[str, int] = {}
        for token, n in items:
            if isinstance(n, bool) or int(n) != n:
                raise TypeError(f"count for {token!r} must be an integer, got {n!r}")
            n = int(n)
            if n < 0:
                raise ValueError(f"negative count for {token!r}: {n}")
            if n:
                clean[token] = clean.get(token, 0) + n
        self._counts = clean
        self._unit = CountUnit(unit)
        self._total = sum(clean.values())

    @property
    def unit(self) -> CountUnit:
        return self._unit

    def total(self) -> int:
        return self._total

    def __getitem__(self, token: str) -> int:
        return self._counts[token]

    def get(self, token, default=0):
        return self._counts.get(token, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __eq__(self, other) -> bool:
        if isinstance(other, CharVector):
            return self._unit == other._unit and self._counts == other._counts
        return NotImplemented

    def __hash__(self):
        return hash((self._unit, frozenset(self._counts.items())))

    def __add__(self, other: CharVector) -> CharVector:
        _check_units(self, other)
        merged = Counter(self._counts)
        merged.update(other._counts)
        return CharVector(merged, self._unit)

    def scaled(self, k: int) -> CharVector:
        return CharVector({t: n * k for t, n in self._counts.items()}, self._unit)

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self._counts.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{t!r}: {n}" for t, n in sorted(self._counts.items()))
        return f"CharVector({{{body}}}, unit={self._unit.value})"

    @classmethod
    def empty(cls, unit: CountUnit = CountUnit.CHARACTER) -> CharVector:
        return cls({}, unit)

    @classmethod
    def sum(cls, vectors: Iterable[CharVector], unit: CountUnit = CountUnit.CHARACTER) -> CharVector:
        acc: Counter = Counter()
        for v in vectors:
            if v.unit != unit:
                raise IncomparableVectorsError(f"cannot add {v.unit.value} vector to {unit.value} sum")
            acc.update(v._counts)
        return cls(acc, unit)


def _check_units(a, b) -> None:
    if a.unit != b.unit:
        raise IncomparableVectorsError(
            f"incomparable vectors: {a.unit.value} counts vs {b.unit.value} counts"
        )


@dataclass(frozen=True)
class CharDistribution:
    probs: Mapping[str, float]
    unit: CountUnit = CountUnit.CHARACTER

    def __post_init__(self):
        probs = dict(self.probs)
        for token, p in probs.items():
            if not (0.0 < p <= 1.0):
                raise ValueError(f"probability for {token!r} outside (0, 1]: {p}")
        if probs and abs(math.fsum(probs.values()) - 1.0) > 1e-12:
            raise ValueError("probabilities do not sum to 1")
        if not probs:
            raise EmptyDistributionError("empty distribution")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "unit", CountUnit(self.unit))

    def __getitem__(self, token: str) -> float:
        return self.probs[token]

    def get(self, token: str, default: float = 0.0) -> float:
        return self.probs.get(token, default)


def char_vector(text: str, unit: CountUnit = CountUnit.CHARACTER, count_spaces: bool = False) -> CharVector:
    """Count tokens of already-normalized ``text``.

    >>> char_vector("aab").to_dict()
    {'a': 2, 'b': 1}
    """
    unit = CountUnit(unit)
    if unit is CountUnit.WORD:
        return CharVector(Counter(text.split()), unit)
    if count_spaces:
        return CharVector(Counter(text), unit)
    return CharVector(Counter(c for c in text if not c.isspace()), unit)


def l1_distance(a: CharVector, b: CharVector) -> int:
    _check_units(a, b)
    keys = a.keys() | b.keys()
    return sum(abs(a.get(k, 0) - b.get(k, 0)) for k in keys)


def to_distribution(v: CharVector) -> CharDistribution:
    total = v.total()
    if total == 0:
        raise EmptyDistributionError("empty distribution")
    return CharDistribution({t: n / total for t, n in v.items()}, v.unit)
