"""Renormalization of interval exchanges along a periodic induction path.

One elementary induction step compares the two rightmost intervals (before
and after the exchange), shortens the longer one by the shorter, and
updates the permutation.  Unrolling a periodic path of such steps yields,
for each letter, the itinerary of its renormalized interval through the
original partition (a "tower word"); letter counts of these words form the
integer self-similarity matrix, and exponentially weighted counts form the
matrices that drive every dimension formula downstream.

The brute-force oracle at the bottom of this module recomputes tower words
by exact rational simulation of first returns; tests require it to agree
with the substitution rules to the letter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    KeaneViolation,
    NotOrthogonal,
    NotPrimitive,
    NotRealizable,
    NumericalFailure,
    Tie,
)
from .iet_core import Aiet, Permutation

TOP = "t"
BOTTOM = "b"

_FLOAT_TIE_TOL = 1e-14
_PF_RESIDUAL = 1e-13
_PF_MAX_ITER = 100_000
_CONE_DIAMETER = 1e-12
_CONE_MAX_ITER = 10_000


def move_type(lengths, top_letter_rank: int, bottom_letter_rank: int) -> str:
    """Induction type from the two rightmost lengths; Tie when equal."""
    lt = lengths[top_letter_rank]
    lb = lengths[bottom_letter_rank]
    if isinstance(lt, Fraction) or isinstance(lb, Fraction):
        if lt == lb:
            raise Tie("rightmost intervals have exactly equal length")
    elif abs(lt - lb) <= _FLOAT_TIE_TOL * max(abs(lt), abs(lb)):
        raise Tie(f"rightmost intervals nearly equal: {lt!r} vs {lb!r}")
    return TOP if lb < lt else BOTTOM


def rauzy_move_perm(perm: Permutation, kind: str) -> Permutation:
    """The combinatorial move: the loser leaves the end of one row and
    re-enters just after the winner."""
    top, bottom = list(perm.top), list(perm.bottom)
    if kind == TOP:
        winner, loser = top[-1], bottom[-1]
        bottom.pop()
        bottom.insert(bottom.index(winner) + 1, loser)
    elif kind == BOTTOM:
        winner, loser = bottom[-1], top[-1]
        top.pop()
        top.insert(top.index(winner) + 1, loser)
    else:
        raise ValueError(f"move kind must be '{TOP}' or '{BOTTOM}', got {kind!r}")
    return Permutation(perm.alphabet, tuple(top), tuple(bottom))


def rauzy_step(perm: Permutation, lengths):
    """One elementary induction step.

    Returns (new_perm, new_lengths, kind, winner, loser).  Works on float
    and on Fraction length vectors alike; exactness is the caller's choice.
    """
    alpha_t = perm.top[-1]
    alpha_b = perm.bottom[-1]
    kind = move_type(lengths, perm.rank(alpha_t), perm.rank(alpha_b))
    winner, loser = (alpha_t, alpha_b) if kind == TOP else (alpha_b, alpha_t)
    new_lengths = list(lengths)
    new_lengths[perm.rank(winner)] = new_lengths[perm.rank(winner)] - new_lengths[perm.rank(loser)]
    return rauzy_move_perm(perm, kind), new_lengths, kind, winner, loser


@dataclass(frozen=True)
class RauzyLoop:
    """A periodic path in the Rauzy graph: a permutation plus its move word."""

    perm: Permutation
    moves: str

    def __post_init__(self):
        if not self.moves:
            raise ValueError("loop must contain at least one move")
        bad = set(self.moves) - {TOP, BOTTOM}
        if bad:
            raise ValueError(f"moves must be over '{TOP}'/'{BOTTOM}', found {sorted(bad)}")
        p = self.perm
        for k, mv in enumerate(self.moves):
            p = rauzy_move_perm(p, mv)
        if p != self.perm:
            raise ValueError(
                f"moves {self.moves!r} do not close up: end at {p}, started at {self.perm}")

    @property
    def period(self) -> int:
        return len(self.moves)

    def repeated(self, k: int) -> "RauzyLoop":
        return RauzyLoop(self.perm, self.moves * k)


@dataclass(frozen=True)
class TowerTable:
    """Tower itineraries: words[r] lists the letter rank under each floor of
    the tower over the renormalized interval of the letter with rank r."""

    alphabet: tuple[str, ...]
    words: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.alphabet)

    def heights(self) -> list[int]:
        return [len(w) for w in self.words]

    def prefix_sums(self, rank: int, v) -> np.ndarray:
        """Birkhoff sums S_0..S_{q-1} of the vector v along the tower word."""
        word = self.words[rank]
        out = np.empty(len(word))
        acc = 0.0
        for i, b in enumerate(word):
            out[i] = acc
            acc += v[b]
        return out

    def occurrence_matrix(self) -> list[list[int]]:
        """Exact letter counts; row r counts the letters of words[r]."""
        counts = [[0] * self.d for _ in range(self.d)]
        for r, word in enumerate(self.words):
            for b in word:
                counts[r][b] += 1
        return counts

    def weighted_matrix(self, v) -> np.ndarray:
        """Entry (a, b): sum of exp(S_i(v)) over floors i of tower a lying in
        interval b.  With v = 0 this is the integer matrix."""
        W = np.zeros((self.d, self.d))
        for r, word in enumerate(self.words):
            acc = 0.0
            for b in word:
                W[r, b] += np.exp(acc)
                acc += v[b]
        return W


@dataclass(frozen=True)
class CocycleMatrix:
    """Integer matrix of a loop with its exponentially weighted variants."""

    towers: TowerTable

    @property
    def integer(self) -> list[list[int]]:
        return self.towers.occurrence_matrix()

    def weighted(self, v) -> np.ndarray:
        return self.towers.weighted_matrix(v)


def unroll_loop(loop: RauzyLoop) -> tuple[TowerTable, CocycleMatrix]:
    """Build tower words by substitution along the loop.

    Top move appends the winner's word to the loser's, bottom move prepends
    it; both mirror how a first-return orbit threads the old towers.
    """
    perm = loop.perm
    rank = perm.rank
    words: list[list[int]] = [[r] for r in range(perm.d)]
    for mv in loop.moves:
        alpha_t, alpha_b = perm.top[-1], perm.bottom[-1]
        winner, loser = (alpha_t, alpha_b) if mv == TOP else (alpha_b, alpha_t)
        w, l = rank(winner), rank(loser)
        if mv == TOP:
            words[l] = words[l] + words[w]
        else:
            words[l] = words[w] + words[l]
        perm = rauzy_move_perm(perm, mv)
    towers = TowerTable(loop.perm.alphabet, tuple(tuple(w) for w in words))
    return towers, CocycleMatrix(towers)


def _is_primitive(mat: Sequence[Sequence[int]]) -> bool:
    d = len(mat)
    reach = np.array([[1 if x else 0 for x in row] for row in mat], dtype=bool)
    power = reach.copy()
    # Wielandt bound: a primitive matrix has a positive power by (d-1)^2 + 1
    for _ in range((d - 1) ** 2 + 1):
        if power.all():
            return True
        power = (power.astype(np.int64) @ reach.astype(np.int64)) > 0
    return bool(power.all())


def perron_pair(matrix: np.ndarray, residual: float = _PF_RESIDUAL):
    """Left and right Perron-Frobenius data of a primitive nonnegative matrix
    by power iteration from the uniform vector.

    Returns (rho, left, right) with |left|_1 = 1, <left, right> = 1 and
    rho the log of the eigenvalue.
    """
    W = np.asarray(matrix, dtype=float)
    d = W.shape[0]

    def iterate(action):
        v = np.full(d, 1.0 / d)
        for _ in range(_PF_MAX_ITER):
            w = action(v)
            scale = w.sum()
            w = w / scale
            if np.abs(action(w) - scale * w).max() <= residual * np.abs(w).max() * scale:
                return w, scale
            v = w
        raise NumericalFailure(
            f"power iteration did not reach residual {residual} in {_PF_MAX_ITER} steps")

    left, scale = iterate(lambda v: v @ W)
    right, _ = iterate(lambda v: W @ v)
    right = right / float(left @ right)
    return float(np.log(scale)), left, right


@dataclass(frozen=True)
class SelfSimilarSystem:
    """A realizable periodic loop with its Perron-Frobenius data.

    lam is the left eigenvector normalized to |lam|_1 = 1 (the exchanged
    lengths), theta the right eigenvector with <lam, theta> = 1, and rho_T
    the log of the eigenvalue.  When the original loop was primitive but
    not positive it has been internally repeated; ``multiplier`` records by
    how much, and rho_T refers to the repeated period.
    """

    loop: RauzyLoop
    multiplier: int
    towers: TowerTable
    cocycle: CocycleMatrix
    rho_T: float
    lam: np.ndarray
    theta: np.ndarray

    @property
    def perm(self) -> Permutation:
        return self.loop.perm

    @property
    def d(self) -> int:
        return self.perm.d

    @property
    def matrix(self) -> list[list[int]]:
        return self.cocycle.integer

    def matrix_float(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def weighted(self, v) -> np.ndarray:
        return self.towers.weighted_matrix(v)

    def evolve_slopes(self, omega: np.ndarray, periods: int = 1) -> np.ndarray:
        """Exact integer-matrix push-forward of a slope vector over whole periods."""
        M = [[int(x) for x in row] for row in self.matrix]
        v = [float(x) for x in omega]
        for _ in range(periods):
            v = [sum(M[i][j] * v[j] for j in range(self.d)) for i in range(self.d)]
        return np.array(v)

    def strip_perron(self, omega: np.ndarray) -> np.ndarray:
        """Remove the Perron component (float hygiene for evolved slopes)."""
        return omega - float(omega @ self.lam) * self.theta


def build_self_similar(loop: RauzyLoop) -> SelfSimilarSystem:
    """Validate a loop and assemble the self-similar exchange it defines."""
    towers, cocycle = unroll_loop(loop)
    M = cocycle.integer
    if not _is_primitive(M):
        raise NotPrimitive(f"loop {loop.moves!r} has an imprimitive matrix")
    multiplier = 1
    d = loop.perm.d
    while any(x == 0 for row in M for x in row):
        multiplier += 1
        if multiplier > d * d:
            raise NotPrimitive(
                f"matrix of {loop.moves!r} not positive after {d * d} repetitions")
        towers, cocycle = unroll_loop(loop.repeated(multiplier))
        M = cocycle.integer
    working = loop.repeated(multiplier) if multiplier > 1 else loop

    rho, lam, theta = perron_pair(np.array(M, dtype=float))

    # replay the loop from the eigenvector lengths: every declared move must
    # be the type the lengths dictate
    perm, lengths = working.perm, list(lam)
    for k, mv in enumerate(working.moves):
        try:
            perm, lengths, kind, _, _ = rauzy_step(perm, lengths)
        except Tie as exc:
            raise NotRealizable(k, f"tie at step {k}: {exc}") from exc
        if kind != mv:
            raise NotRealizable(
                k, f"step {k}: lengths force type {kind!r}, loop declares {mv!r}")
    scaled = np.array(lengths) * np.exp(rho)
    if np.abs(scaled - lam).max() > 1e-10:
        raise NotRealizable(len(working.moves),
                            "replayed lengths do not reproduce the eigenvector")
    return SelfSimilarSystem(working, multiplier, towers, cocycle, rho, lam, theta)


def _hilbert_diameter(rows: np.ndarray) -> float:
    diam = 0.0
    n = rows.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            ratio = rows[i] / rows[j]
            diam = max(diam, float(np.log(ratio.max() / ratio.min())))
    return diam


def conformal_vector(sys: SelfSimilarSystem, omega: np.ndarray,
                     diameter: float = _CONE_DIAMETER,
                     max_iter: int = _CONE_MAX_ITER) -> tuple[np.ndarray, int]:
    """Interval weights of the conformal measure with potential ``omega``.

    Left-multiplies the one-period weighted matrices built with the evolving
    slope vectors; the rows of the accumulated product all converge to the
    weight vector (nested cones).  Returns (weights, periods used).  For an
    invariant omega this is the left Perron eigenvector of the weighted
    matrix.  Raises NumericalFailure if the cone fails to contract (which
    is the case for unstable potentials).
    """
    P = np.eye(sys.d)
    om = np.asarray(omega, dtype=float)
    for k in range(max_iter):
        P = sys.weighted(om) @ P
        P /= P.max()        # scalar rescale only: rows must stay comparable
        om = sys.strip_perron(sys.evolve_slopes(om))
        if _hilbert_diameter(P) < diameter:
            nu = P.sum(axis=0)
            return nu / nu.sum(), k + 1
        if not np.isfinite(P).all():
            break
    raise NumericalFailure(
        f"cone iteration did not contract to diameter {diameter} in {max_iter} periods")


def construct_aiet(sys: SelfSimilarSystem, omega: np.ndarray) -> Aiet:
    """The affine exchange with the given log-slopes over the loop.

    Its lengths are the conformal weights of the potential: they renormalize
    back to themselves through the weighted cocycle and make the image
    intervals tile [0, 1).  For slope vectors with an expanding component no
    honest choice exists (wandering intervals); we then fall back to the
    left Perron eigenvector of the weighted matrix, which is self-consistent
    over one period but tiles only approximately.
    """
    om = np.asarray(omega, dtype=float)
    inner = float(om @ sys.lam)
    if abs(inner) > 1e-10 * max(1.0, float(np.abs(om).max())):
        raise NotOrthogonal(inner)
    try:
        lengths, _ = conformal_vector(sys, om)
        return Aiet(sys.perm, lengths, om)
    except NumericalFailure:
        _, lengths, _ = perron_pair(sys.weighted(om))
        return Aiet(sys.perm, lengths, om, tiling_tol=float("inf"))


# ---------------------------------------------------------------------------
# exact rational oracle


def brute_force_first_return(perm: Permutation, lengths: Sequence[Fraction],
                             steps: int):
    """Recompute tower words by literal simulation.

    Performs ``steps`` elementary inductions in exact rational arithmetic,
    then walks one point of each renormalized interval through the original
    partition until first return, recording the visited letters.

    Returns (TowerTable, observed move word).
    """
    lengths = [Fraction(x) for x in lengths]
    total = sum(lengths)
    if total != 1:
        lengths = [x / total for x in lengths]

    from .iet_core import omega_matrix

    om = omega_matrix(perm)
    d = perm.d
    delta = [sum(Fraction(int(om[i, j])) * lengths[j] for j in range(d)) for i in range(d)]

    starts0 = {}
    acc = Fraction(0)
    for letter in perm.top:
        starts0[letter] = acc
        acc += lengths[perm.rank(letter)]

    p, cur = perm, list(lengths)
    observed = []
    for _ in range(steps):
        try:
            p, cur, kind, _, _ = rauzy_step(p, cur)
        except Tie as exc:
            raise KeaneViolation(str(exc)) from exc
        observed.append(kind)
    span = sum(cur)

    def letter_of(x: Fraction) -> int:
        acc = Fraction(0)
        for letter in perm.top:
            acc += lengths[perm.rank(letter)]
            if x < acc:
                return perm.rank(letter)
        raise AssertionError(f"point {x} beyond the unit interval")

    words = []
    acc = Fraction(0)
    starts_n = {}
    for letter in p.top:
        starts_n[letter] = acc
        acc += cur[p.rank(letter)]
    cap = 2 ** steps + 4   # row sums at most double per elementary step
    for letter in perm.alphabet:
        x = starts_n[letter] + cur[p.rank(letter)] / 2
        word = []
        while True:
            r = letter_of(x)
            word.append(r)
            x = x + delta[r]
            if x < span:
                break
            if len(word) > cap:
                raise NumericalFailure("first return not found; runaway orbit")
        words.append(tuple(word))
    return TowerTable(perm.alphabet, tuple(words)), "".join(observed)
