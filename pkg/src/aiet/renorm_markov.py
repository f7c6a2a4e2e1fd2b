"""The renormalization Markov chain and its Monte-Carlo estimators.

Renormalization acts on pairs (letter, floor); conditioned on the current
pair, the next one is distributed like the relative measure of the floors
that refine it, so the process is a stationary Markov chain (ergodic, since
the square of its transition matrix is positive).  Birkhoff averages of the
shrinkage weight along simulated paths estimate the dimension quantities G
and H independently of their closed forms; the chain runs entirely in
coding space, never on floating-point orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dimension import central_data
from .errors import NumericalFailure, UnstableInput
from .rauzy import SelfSimilarSystem
from .spectral import SlopeDecomposition

_BATCHES = 100


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic transitions over Sigma = {(letter, floor)} together
    with the closed-form stationary law (floor measure times the matching
    right eigenvector component at the floor's letter)."""

    states: tuple[tuple[int, int], ...]
    P: np.ndarray
    stationary: np.ndarray
    base_measure_tag: str        # "invariant" (Lebesgue side) | "conformal"

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, state: tuple[int, int]) -> int:
        return self.states.index(state)


def transition_matrix(sys: SelfSimilarSystem, m: np.ndarray, rho_m: float,
                      theta: np.ndarray, omega_c: np.ndarray,
                      tag: str) -> TransitionMatrix:
    """Chain of the renormalization with base measure weights ``m``.

    m must be a left eigenvector of the weighted matrix at omega_c with
    eigenvalue exp(rho_m) (Lebesgue: m = lambda, rho_m = rho_T, omega_c = 0);
    theta the matching right eigenvector with <m, theta> = 1.  The entry
    into (b, j) is the measure of floor j of tower b relative to its parent
    interval, nonzero only from pairs whose letter is that floor's letter.
    """
    states: list[tuple[int, int]] = []
    level_measure: list[float] = []
    beta: list[int] = []
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for i, b in enumerate(word):
            states.append((r, i))
            level_measure.append(math.exp(S - rho_m) * m[r])
            beta.append(b)
            S += omega_c[b]
    n = len(states)
    P = np.zeros((n, n))
    for tgt in range(n):
        parent = beta[tgt]
        prob = level_measure[tgt] / m[parent]
        for src in range(n):
            if states[src][0] == parent:
                P[src, tgt] = prob
    stationary = np.array([level_measure[k] * theta[beta[k]] for k in range(n)])
    stationary /= stationary.sum()
    return TransitionMatrix(tuple(states), P, stationary, tag)


def lebesgue_chain(sys: SelfSimilarSystem) -> TransitionMatrix:
    return transition_matrix(sys, sys.lam, sys.rho_T, sys.theta,
                             np.zeros(sys.d), "invariant")


def conformal_chain(sys: SelfSimilarSystem, decomp: SlopeDecomposition) -> TransitionMatrix:
    rho_c, ell_c, theta_c = central_data(sys, decomp)
    return transition_matrix(sys, ell_c, rho_c, theta_c, decomp.omega_c, "conformal")


@dataclass(frozen=True)
class ChainSample:
    seed: int
    path: np.ndarray             # state indices into TransitionMatrix.states
    birkhoff_sums: np.ndarray    # running sums of the edge functional


def simulate_chain(chain: TransitionMatrix, seed: int, length: int,
                   functional: Callable[[int, int], float]) -> ChainSample:
    """Sample a stationary path and accumulate an edge functional.

    The generator is numpy's PCG64 seeded with ``seed``; sampling is by
    inverse CDF, so identical (seed, length) give identical paths.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = np.random.default_rng(seed)
    n = chain.size
    # rows coincide for states sharing a letter: per letter, keep only the
    # reachable targets with their cumulative probabilities, so roundoff at
    # the top of the CDF can never leave the chain's support
    rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for a in {s[0] for s in chain.states}:
        src = next(k for k, s in enumerate(chain.states) if s[0] == a)
        targets = np.flatnonzero(chain.P[src] > 0)
        rows[a] = targets, np.cumsum(chain.P[src][targets])
    start = min(int(np.searchsorted(np.cumsum(chain.stationary), rng.random())), n - 1)
    uniforms = rng.random(length)
    path = np.empty(length + 1, dtype=np.int64)
    path[0] = start
    sums = np.empty(length)
    acc = 0.0
    comp = 0.0   # Kahan compensation
    cur = start
    for k in range(length):
        targets, cum = rows[chain.states[cur][0]]
        nxt = int(targets[min(int(np.searchsorted(cum, uniforms[k])), len(targets) - 1)])
        term = functional(cur, nxt) - comp
        tot = acc + term
        comp = (tot - acc) - term
        acc = tot
        path[k + 1] = nxt
        sums[k] = acc
        cur = nxt
    return ChainSample(seed, path, sums)


def shrinkage_functional(sys: SelfSimilarSystem, chain: TransitionMatrix,
                         decomp: SlopeDecomposition) -> Callable[[int, int], float]:
    """The edge weight whose chain average is G (Lebesgue side) or H
    (conformal side): negative log relative measure of the entered floor."""
    rho_c, ell_c, _ = central_data(sys, decomp)
    omc = decomp.omega_c
    head_value = []
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for b in word:
            head_value.append(rho_c - S - math.log(ell_c[r]) + math.log(ell_c[b]))
            S += omc[b]
    values = np.array(head_value)
    return lambda src, tgt: float(values[tgt])


def birkhoff_information(sys: SelfSimilarSystem, decomp: SlopeDecomposition,
                         side: str, seed: int, length: int,
                         batches: int = _BATCHES) -> tuple[float, float]:
    """Monte-Carlo estimate of G or H with a batch-means standard error.

    side "invariant" averages the shrinkage weight along the Lebesgue-side
    chain (estimates G); side "conformal" along the conformal-side chain
    (estimates H).
    """
    if decomp.klass == "unstable":
        raise UnstableInput("Birkhoff information requires a non-expanding slope vector")
    if side == "invariant":
        chain = lebesgue_chain(sys)
    elif side == "conformal":
        chain = conformal_chain(sys, decomp)
    else:
        raise ValueError(f"side must be 'invariant' or 'conformal', got {side!r}")
    sample = simulate_chain(chain, seed, length, shrinkage_functional(sys, chain, decomp))
    estimate = float(sample.birkhoff_sums[-1] / length)
    size = length // batches
    if size == 0:
        raise ValueError("length too small for batch means")
    used = size * batches
    increments = np.diff(np.concatenate(([0.0], sample.birkhoff_sums[:used])))
    means = increments.reshape(batches, size).mean(axis=1)
    stderr = float(means.std(ddof=1) / math.sqrt(batches))
    return estimate, stderr


def empirical_local_dimension(sys: SelfSimilarSystem, decomp: SlopeDecomposition,
                              seed: int, depth: int) -> list[tuple[int, float]]:
    """Coding-level local dimension estimator along one sampled path.

    ratio_n compares n * rho_T (the information content of the invariant
    measure at depth n) to the information content of Lebesgue measure of
    the same affine atom.  Central-stable slopes: the denominator is the
    Birkhoff sum of the shrinkage weight and the ratio converges to the
    Hausdorff dimension.  Unstable slopes: atom measures are recomputed per
    period with the push-forward slope vectors (whose norms blow up), and
    the ratio decays to zero.
    """
    chain = lebesgue_chain(sys)
    if decomp.klass != "unstable":
        functional = shrinkage_functional(sys, chain, decomp)
        sample = simulate_chain(chain, seed, depth, functional)
        return [(n, n * sys.rho_T / float(sample.birkhoff_sums[n - 1]))
                for n in range(1, depth + 1)]

    sample = simulate_chain(chain, seed, depth, lambda s, t: 0.0)
    info = _unstable_information(sys, decomp.omega, sample.path)
    return [(n, n * sys.rho_T / info[n]) for n in range(1, depth + 1)]


def _unstable_information(sys: SelfSimilarSystem, omega: np.ndarray,
                          path: np.ndarray, buffer: int = 8) -> np.ndarray:
    """-log Leb of the nested affine atoms along a coding path.

    Atom measures are accumulated as products of conditional floor
    probabilities.  The affine lengths entering the stage-n conditional are
    evaluated backwards over ``buffer`` periods of the one-period weighted
    matrices built with the exactly evolved slope vectors M^k omega, all in
    log space: the slope entries themselves blow up exponentially, so a
    single global horizon would drown the early stages in cancellation,
    while a sliding local anchor keeps every conditional well-scaled and in
    (0, 1), so the running information increases up to float granularity.
    """
    depth = len(path) - 1
    d = sys.d
    words = sys.towers.words

    omegas = [np.asarray(omega, dtype=float)]
    for _ in range(depth + buffer + 1):
        omegas.append(sys.evolve_slopes(omegas[-1]))
    if not all(np.isfinite(om).all() for om in omegas):
        raise NumericalFailure(
            f"push-forward slopes overflow before depth {depth}; reduce the depth")

    def backstep(logu: np.ndarray, om: np.ndarray) -> np.ndarray:
        """v^(j) = v^(j+1) W_j in log space."""
        terms: list[list[float]] = [[] for _ in range(d)]
        for a in range(d):
            S = 0.0
            for b in words[a]:
                terms[b].append(logu[a] + S)
                S += om[b]
        return np.array([_logsumexp(t) for t in terms])

    info = np.empty(depth + 1)
    total = 0.0
    for n in range(depth + 1):
        anchor = n + buffer
        logu = np.zeros(d)
        down_to = n if n > 0 else 0
        captured = None
        for j in range(anchor - 1, down_to - 1, -1):
            logu = backstep(logu, omegas[j])
            if j == n + 1:
                captured = logu.copy()
        assert captured is not None
        letter, floor = _state_of(sys, int(path[n]))
        om = omegas[n]
        word = words[letter]
        S = 0.0
        for j in range(floor):
            S += om[word[j]]
        if n == 0:
            logp = S + captured[letter] - _logsumexp(list(logu))
        else:
            prev_letter, _ = _state_of(sys, int(path[n - 1]))
            logp = S + captured[letter] - logu[prev_letter]
        total -= logp
        info[n] = total
    return info


def _state_of(sys: SelfSimilarSystem, index: int) -> tuple[int, int]:
    for r, word in enumerate(sys.towers.words):
        if index < len(word):
            return r, index
        index -= len(word)
    raise IndexError("state index out of range")


def _logsumexp(values) -> float:
    m = max(values)
    if m == -math.inf:
        return m
    return m + math.log(sum(math.exp(v - m) for v in values))
