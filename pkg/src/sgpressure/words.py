"""Finite words over the alphabet ``{0, ..., k-1}``.

A word ``w = i1 i2 ... in`` is stored first-symbol-first.  How a word acts on
points (composition order) is decided in :mod:`sgpressure.systems`, not here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import BudgetExceededError

DEFAULT_BUDGET = 2**24


def check_budget(k: int, n: int, budget: int | None = None) -> int:
    """Return ``k**n`` or raise :class:`BudgetExceededError`."""
    budget = DEFAULT_BUDGET if budget is None else budget
    size = k**n
    if size > budget:
        raise BudgetExceededError(
            f"level k={k}, n={n} holds {size} words, budget is {budget}"
        )
    return size


@dataclass(frozen=True)
class Word:
    symbols: tuple[int, ...]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("alphabet size must be >= 1")
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        for s in self.symbols:
            if not 0 <= s < self.k:
                raise ValueError(f"symbol {s} outside alphabet of size {self.k}")

    @classmethod
    def from_string(cls, text: str, k: int) -> "Word":
        return cls(tuple(int(c) for c in text), k)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(str(s) for s in self.symbols)

    def __add__(self, other: "Word") -> "Word":
        if other.k != self.k:
            raise ValueError("cannot concatenate words over different alphabets")
        return Word(self.symbols + other.symbols, self.k)

    def index(self) -> int:
        """Position of the word in the lexicographic order of its level."""
        idx = 0
        for s in self.symbols:
            idx = idx * self.k + s
        return idx


def reverse(w: Word) -> Word:
    return Word(w.symbols[::-1], w.k)


def is_suffix(w_prime: Word, w: Word) -> bool:
    """True iff ``w = w'' w_prime`` for some (possibly empty) word ``w''``."""
    if w_prime.k != w.k:
        raise ValueError("words over different alphabets")
    m = len(w_prime)
    return m <= len(w) and w.symbols[len(w) - m:] == w_prime.symbols


def suffixes(w: Word) -> list[Word]:
    """All suffixes of ``w``, shortest (empty) first."""
    n = len(w)
    return [Word(w.symbols[n - m:], w.k) for m in range(n + 1)]


def word_from_index(index: int, k: int, n: int) -> Word:
    symbols = []
    for _ in range(n):
        index, s = divmod(index, k)
        symbols.append(s)
    return Word(tuple(reversed(symbols)), k)


@dataclass(frozen=True)
class WordLevel:
    """The level ``F_k^+(n)``: all words of length ``n``, lexicographic."""

    k: int
    n: int
    budget: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.n < 0:
            raise ValueError("need k >= 1 and n >= 0")
        check_budget(self.k, self.n, self.budget)

    def __len__(self) -> int:
        return self.k**self.n

    def __iter__(self) -> Iterator[Word]:
        for symbols in itertools.product(range(self.k), repeat=self.n):
            yield Word(symbols, self.k)

    def range(self, start: int, stop: int) -> Iterator[Word]:
        """Words with lexicographic index in ``[start, stop)``."""
        for idx in range(max(start, 0), min(stop, len(self))):
            yield word_from_index(idx, self.k, self.n)

    def split(self, parts: int) -> list[tuple[int, int]]:
        """Disjoint index ranges covering the level, for parallel consumers."""
        size = len(self)
        bounds = [size * p // parts for p in range(parts + 1)]
        return [(a, b) for a, b in zip(bounds[:-1], bounds[1:])]


def enumerate_level(k: int, n: int, budget: int | None = None) -> Iterator[Word]:
    """Yield all ``k**n`` words of length ``n`` in lexicographic order."""
    return iter(WordLevel(k, n, budget))


def as_word(w: Word | str | Sequence[int], k: int) -> Word:
    if isinstance(w, Word):
        return w
    if isinstance(w, str):
        return Word.from_string(w, k)
    return Word(tuple(w), k)
