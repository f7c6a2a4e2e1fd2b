"""Interval exchange transformations and their affine cousins.

A permutation here is a pair of bijections (top, bottom) from a finite
alphabet onto {1..d}; together with a positive length vector it determines
an exchange of half-open intervals [a, b).  All structural decisions at
interval boundaries follow the left-closed convention; no tolerances are
involved in locating a point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NotBijection, ParityError, Reducible


@dataclass(frozen=True)
class Permutation:
    """An irreducible pair of orderings of a common alphabet."""

    alphabet: tuple[str, ...]
    top: tuple[str, ...]      # letters in top order, position i+1 holds top[i]
    bottom: tuple[str, ...]

    @property
    def d(self) -> int:
        return len(self.alphabet)

    def top_index(self, letter: str) -> int:
        """1-based position of ``letter`` before the exchange."""
        return self.top.index(letter) + 1

    def bottom_index(self, letter: str) -> int:
        """1-based position of ``letter`` after the exchange."""
        return self.bottom.index(letter) + 1

    def rank(self, letter: str) -> int:
        return self.alphabet.index(letter)

    def __str__(self) -> str:
        return " ".join(self.top) + " / " + " ".join(self.bottom)


def validate_permutation(alphabet: Sequence[str], top: Sequence[str],
                         bottom: Sequence[str]) -> Permutation:
    """Check bijectivity and irreducibility of a raw top/bottom pair.

    Irreducibility means no proper prefix of the top order is a
    permutation of the same-length prefix of the bottom order; a common
    prefix set at index k would split the exchange into two independent
    blocks.
    """
    alphabet = tuple(alphabet)
    top = tuple(top)
    bottom = tuple(bottom)
    d = len(alphabet)
    if d < 2:
        raise NotBijection(f"alphabet must have at least 2 letters, got {d}")
    if len(set(alphabet)) != d:
        raise NotBijection("alphabet letters are not distinct")
    for name, row in (("top", top), ("bottom", bottom)):
        if sorted(row) != sorted(alphabet):
            raise NotBijection(f"{name} row is not a bijection of the alphabet")
    for k in range(1, d):
        if set(top[:k]) == set(bottom[:k]):
            raise Reducible(k)
    return Permutation(alphabet, top, bottom)


def omega_matrix(perm: Permutation) -> np.ndarray:
    """Antisymmetric translation matrix: entry (a, b) is +1 when b precedes a
    after the exchange but follows it before.  Displacements are Omega @ lengths."""
    d = perm.d
    om = np.zeros((d, d), dtype=np.int64)
    for a, b in itertools.permutations(perm.alphabet, 2):
        if perm.bottom_index(a) > perm.bottom_index(b) and perm.top_index(a) < perm.top_index(b):
            om[perm.rank(a), perm.rank(b)] = 1
        elif perm.bottom_index(a) < perm.bottom_index(b) and perm.top_index(a) > perm.top_index(b):
            om[perm.rank(a), perm.rank(b)] = -1
    return om


def _exact_rank(mat: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals by fraction-free Gaussian elimination."""
    rows = [[Fraction(x) for x in row] for row in mat]
    n = len(rows)
    m = len(rows[0]) if rows else 0
    rank = 0
    col = 0
    while rank < n and col < m:
        pivot = next((r for r in range(rank, n) if rows[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        for r in range(rank + 1, n):
            if rows[r][col] != 0:
                factor = rows[r][col] / pv
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def genus_kappa(perm: Permutation) -> tuple[int, int]:
    """Genus and singularity count of the suspended surface.

    The kernel dimension of the translation matrix is computed exactly over
    the integers; d = 2g + kappa - 1 always holds afterwards.
    """
    d = perm.d
    om = omega_matrix(perm)
    kernel_dim = d - _exact_rank(om.tolist())
    if (d - kernel_dim) % 2 != 0:
        raise ParityError(f"rank of antisymmetric matrix is odd for {perm}")
    g = (d - kernel_dim) // 2
    kappa = kernel_dim + 1
    return g, kappa


@dataclass(frozen=True)
class Iet:
    """Interval exchange: permutation plus positive lengths summing to 1."""

    perm: Permutation
    lengths: np.ndarray

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float)
        object.__setattr__(self, "lengths", lengths)
        if not (lengths > 0).all():
            raise ValueError("lengths must be strictly positive")
        if abs(lengths.sum() - 1.0) > 1e-9:
            raise ValueError(f"lengths must sum to 1, got {lengths.sum()!r}")

    @property
    def displacement(self) -> np.ndarray:
        return omega_matrix(self.perm) @ self.lengths

    def interval_starts(self) -> np.ndarray:
        """Left endpoints of the exchanged intervals, in top order index space."""
        starts = np.zeros(self.perm.d)
        acc = 0.0
        for letter in self.perm.top:
            starts[self.perm.rank(letter)] = acc
            acc += self.lengths[self.perm.rank(letter)]
        return starts

    def letter_at(self, x: float) -> str:
        """Letter of the interval containing x, boundaries resolved leftward."""
        acc = 0.0
        for letter in self.perm.top[:-1]:
            acc += self.lengths[self.perm.rank(letter)]
            if x < acc:
                return letter
        return self.perm.top[-1]


def iet_apply(iet: Iet, x: float) -> float:
    """Evaluate the exchange at a point of [0, 1)."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"point {x} outside [0, 1)")
    letter = iet.letter_at(x)
    return x + iet.displacement[iet.perm.rank(letter)]


def iet_apply_many(iet: Iet, xs: np.ndarray) -> np.ndarray:
    """Vectorized exchange evaluation (same convention as iet_apply)."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < 0.0 or xs.max() >= 1.0):
        raise ValueError("points outside [0, 1)")
    top_ranks = np.array([iet.perm.rank(letter) for letter in iet.perm.top])
    boundaries = np.cumsum(iet.lengths[top_ranks])[:-1]
    idx = np.searchsorted(boundaries, xs, side="right")
    return xs + iet.displacement[top_ranks[idx]]


@dataclass(frozen=True)
class Aiet:
    """Affine exchange: slope exp(logslopes[a]) on the a-th interval.

    The image intervals must tile [0, 1) in the bottom order, which pins
    sum(exp(logslopes) * lengths) = 1.
    """

    perm: Permutation
    lengths: np.ndarray
    logslopes: np.ndarray
    tiling_tol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float)
        logslopes = np.asarray(self.logslopes, dtype=float)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "logslopes", logslopes)
        if not (lengths > 0).all():
            raise ValueError("lengths must be strictly positive")
        if abs(lengths.sum() - 1.0) > 1e-9:
            raise ValueError(f"lengths must sum to 1, got {lengths.sum()!r}")
        image_total = float(np.exp(logslopes) @ lengths)
        if abs(image_total - 1.0) > self.tiling_tol:
            raise ValueError(
                f"image intervals do not tile [0,1): total {image_total!r}")

    def interval_starts(self) -> np.ndarray:
        starts = np.zeros(self.perm.d)
        acc = 0.0
        for letter in self.perm.top:
            starts[self.perm.rank(letter)] = acc
            acc += self.lengths[self.perm.rank(letter)]
        return starts

    def image_starts(self) -> np.ndarray:
        """Left endpoints of the image intervals, tiling in bottom order."""
        starts = np.zeros(self.perm.d)
        acc = 0.0
        for letter in self.perm.bottom:
            r = self.perm.rank(letter)
            starts[r] = acc
            acc += np.exp(self.logslopes[r]) * self.lengths[r]
        return starts

    def letter_at(self, x: float) -> str:
        acc = 0.0
        for letter in self.perm.top[:-1]:
            acc += self.lengths[self.perm.rank(letter)]
            if x < acc:
                return letter
        return self.perm.top[-1]


def aiet_apply(aiet: Aiet, x: float) -> float:
    """Evaluate the affine exchange at a point of [0, 1)."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"point {x} outside [0, 1)")
    letter = aiet.letter_at(x)
    r = aiet.perm.rank(letter)
    start = aiet.interval_starts()[r]
    return aiet.image_starts()[r] + np.exp(aiet.logslopes[r]) * (x - start)
