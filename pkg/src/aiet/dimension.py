"""Closed-form Hausdorff dimensions and the thermodynamic curve.

Two quantities drive everything: G, whose ratio under rho_T gives the
dimension of the invariant measure of the affine exchange, and H, whose
ratio over rho_T gives the dimension of the conformal measure of the
underlying exchange.  Both read only the invariant part of the slope
vector.  The scaling family rho(t) = log of the Perron eigenvalue of the
weighted matrix at t*omega ties them together:

    G(t*omega) = rho(t) - t rho'(0),      H(t*omega) = rho(t) - t rho'(t),

with rho'(t) evaluated analytically through the eigenvector pairing
(Hellmann-Feynman); tests cross-check it against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotHyperbolic, NonInvariantOmega, UnstableInput
from .rauzy import SelfSimilarSystem, conformal_vector, perron_pair
from .spectral import SlopeDecomposition, SpectralData, certify_hyperbolic

_INVARIANT_TOL = 1e-9


def _require_measured_class(decomp: SlopeDecomposition, what: str):
    if decomp.klass == "unstable":
        raise UnstableInput(f"{what} is undefined for unstable slope vectors")


def is_invariant(sys: SelfSimilarSystem, omega: np.ndarray,
                 tol: float = _INVARIANT_TOL) -> bool:
    om = np.asarray(omega, dtype=float)
    return float(np.abs(sys.evolve_slopes(om) - om).max()) <= tol * max(1.0, float(np.abs(om).max()))


@dataclass(frozen=True)
class ConformalWeights:
    """Interval weights of the conformal measure for a potential vector."""

    nu: np.ndarray
    rho_nu: float
    mode: str                  # exact_pf | cone_iterated


def conformal_weights(sys: SelfSimilarSystem, decomp: SlopeDecomposition) -> ConformalWeights:
    """Weights of the unique conformal measure for the potential decomp.omega.

    Invariant potentials admit the closed form (left Perron eigenvector of
    the weighted matrix); otherwise the weights are the cone limit of the
    products of weighted matrices along the evolving slopes.
    """
    _require_measured_class(decomp, "the conformal measure")
    om = decomp.omega
    if is_invariant(sys, om):
        rho, nu, _ = perron_pair(sys.weighted(om))
        return ConformalWeights(nu, rho, "exact_pf")
    nu, _ = conformal_vector(sys, om)
    # one-period scale: solve x M(omega) = nu; the mass of x is the weight
    # the measure gives to the renormalized interval
    x = np.linalg.solve(sys.weighted(om).T, nu)
    if not (x > 0).all():
        raise NonInvariantOmega("renormalized conformal weights not positive")
    return ConformalWeights(nu, float(-np.log(x.sum())), "cone_iterated")


def central_data(sys: SelfSimilarSystem, decomp: SlopeDecomposition):
    """(rho_c, ell_c, theta_c): Perron data of the weighted matrix at the
    invariant part of the slope vector."""
    Wc = sys.weighted(decomp.omega_c)
    return perron_pair(Wc)


def big_G(sys: SelfSimilarSystem, decomp: SlopeDecomposition) -> float:
    """Exponential decay rate of the lengths of the affine dynamical atoms."""
    _require_measured_class(decomp, "G")
    rho_c, _, _ = central_data(sys, decomp)
    omc = decomp.omega_c
    theta = sys.theta
    lam = sys.lam
    acc = 0.0
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for b in word:
            acc += theta[b] * math.exp(-sys.rho_T) * lam[r] * S
            S += omc[b]
    return rho_c - acc


def big_H(sys: SelfSimilarSystem, decomp: SlopeDecomposition) -> float:
    """Exponential decay rate of the conformal measure of the dynamical atoms."""
    _require_measured_class(decomp, "H")
    rho_c, ell_c, theta_c = central_data(sys, decomp)
    omc = decomp.omega_c
    acc = 0.0
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for b in word:
            acc += theta_c[b] * math.exp(S - rho_c) * ell_c[r] * S
            S += omc[b]
    return rho_c - acc


def rho_of(sys: SelfSimilarSystem, omega: np.ndarray, t: float) -> float:
    """Log Perron eigenvalue of the weighted matrix at t*omega."""
    rho, _, _ = perron_pair(sys.weighted(t * np.asarray(omega, dtype=float)))
    return rho


def rho_prime(sys: SelfSimilarSystem, omega: np.ndarray, t: float) -> float:
    """Analytic derivative of rho: pair the entrywise derivative of the
    weighted matrix with the normalized eigenvector pair."""
    om = np.asarray(omega, dtype=float)
    rho, ell, theta = perron_pair(sys.weighted(t * om))
    d = sys.d
    dM = np.zeros((d, d))
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for b in word:
            dM[r, b] += S * math.exp(t * S)
            S += om[b]
    return float(math.exp(-rho) * (ell @ dM @ theta))


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


@dataclass(frozen=True)
class DimensionReport:
    klass: str
    rho_T: float
    rho_c: Optional[float]
    G: Optional[float]
    H: Optional[float]
    dim_invariant: float
    dim_conformal: Optional[float]     # None encodes "unknown (conjectured 0)"
    kl_G_residual: Optional[float]
    kl_H_residual: Optional[float]
    theta_c: Optional[np.ndarray]


def dimension_report(sys: SelfSimilarSystem, spec: SpectralData,
                     decomp: SlopeDecomposition) -> DimensionReport:
    """Dimensions of both measures plus the relative-entropy cross-checks.

    The checks re-derive G and H through the divergence identities: G must
    exceed rho_T by the theta-weighted relative entropy of the Lebesgue
    floor distribution against the conformal one, and H must fall short of
    rho_T by the opposite divergence.  Their residuals are reported.
    """
    cert = certify_hyperbolic(sys, spec)
    if not cert.is_hyperbolic:
        raise NotHyperbolic(cert.failure_reason or "not hyperbolic")
    if decomp.klass == "unstable":
        return DimensionReport("unstable", sys.rho_T, None, None, None,
                               0.0, None, None, None, None)

    rho_c, ell_c, theta_c = central_data(sys, decomp)
    G = big_G(sys, decomp)
    H = big_H(sys, decomp)
    lam, theta, rho_T = sys.lam, sys.theta, sys.rho_T

    # floor distributions over each letter's fiber
    fibers: dict[int, list[tuple[int, float]]] = {b: [] for b in range(sys.d)}
    for r, word in enumerate(sys.towers.words):
        S = 0.0
        for b in word:
            fibers[b].append((r, S))
            S += decomp.omega_c[b]
    kl_G = 0.0
    kl_H = 0.0
    for b, floor in fibers.items():
        leb = np.array([math.exp(-rho_T) * lam[r] / lam[b] for r, _ in floor])
        conf = np.array([math.exp(S - rho_c) * ell_c[r] / ell_c[b] for r, S in floor])
        kl_G += _kl(leb, conf) * lam[b] * theta[b]
        kl_H += _kl(conf, leb) * ell_c[b] * theta_c[b]
    kl_G_residual = abs(G - (rho_T + kl_G))
    kl_H_residual = abs(H - (rho_T - kl_H))

    if decomp.klass in ("zero", "stable"):
        dim_inv, dim_conf = 1.0, 1.0
    else:
        dim_inv, dim_conf = rho_T / G, H / rho_T
    return DimensionReport(decomp.klass, rho_T, rho_c, G, H, dim_inv, dim_conf,
                           kl_G_residual, kl_H_residual, theta_c)


@dataclass(frozen=True)
class TSweepRow:
    t: float
    rho: float
    rho_prime: float
    G: float
    H: float
    dim_mu: float
    dim_nu: float
    relation_residual: Optional[float]   # None below |t| = 0.25 (relation singular at 0)


@dataclass(frozen=True)
class TSweep:
    rows: tuple[TSweepRow, ...]
    dim_mu_monotone: bool        # non-decreasing on t<=0, non-increasing on t>=0
    dim_nu_monotone: bool
    bounds: tuple[dict, ...]     # two-sided 1/t bounds at rows with t >= 1

    _MONOTONE_SLACK = 1e-10


def t_sweep(sys: SelfSimilarSystem, omega: np.ndarray,
            t_min: float, t_max: float, steps: int,
            fd_step: float = 1e-4, workers: int = 1) -> TSweep:
    """Evaluate the scaling family on a uniform grid.

    Requires an invariant slope vector (project to the central part first).
    The residual column checks d/dt(1/(t dim_mu)) = -dim_nu/t^2 by central
    differences with the given step.  Grid points are independent; workers
    > 1 evaluates them in a thread pool, order preserved.
    """
    om = np.asarray(omega, dtype=float)
    if not is_invariant(sys, om):
        raise NonInvariantOmega(
            "t-sweep needs an invariant slope vector; pass the central part")
    if steps < 2:
        raise ValueError("grid needs at least 2 steps")
    rho0 = rho_of(sys, om, 0.0)
    rhop0 = rho_prime(sys, om, 0.0)
    ts = np.linspace(t_min, t_max, steps)

    def dim_mu(t: float) -> float:
        return rho0 / (rho_of(sys, om, t) - t * rhop0)

    def row_at(t: float) -> TSweepRow:
        t = float(t)
        rho = rho_of(sys, om, t)
        rp = rho_prime(sys, om, t)
        G = rho - t * rhop0
        H = rho - t * rp
        dmu, dnu = rho0 / G, H / rho0
        residual = None
        if abs(t) >= 0.25:
            h = fd_step
            lhs = (1.0 / ((t + h) * dim_mu(t + h)) - 1.0 / ((t - h) * dim_mu(t - h))) / (2 * h)
            residual = abs(lhs + dnu / t ** 2)
        return TSweepRow(t, rho, rp, G, H, dmu, dnu, residual)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row_at, ts))
    else:
        rows = [row_at(t) for t in ts]

    slack = TSweep._MONOTONE_SLACK

    def monotone(vals):
        ok = True
        for a, b in zip(rows, rows[1:]):
            va, vb = vals(a), vals(b)
            if b.t <= 0:
                ok = ok and (vb >= va - slack)
            if a.t >= 0:
                ok = ok and (vb <= va + slack)
        return ok

    bounds = []
    if t_max >= 1.0:
        dmu1 = dim_mu(1.0)
        for row in rows:
            if row.t >= 1.0:
                lower = dmu1 / row.t
                upper = 1.0 / ((1.0 / dmu1 - 1.0) * row.t + 1.0)
                bounds.append({"t": row.t, "lower": lower, "upper": upper,
                               "ok": bool(lower - 1e-12 <= row.dim_mu <= upper + 1e-12)})
    return TSweep(tuple(rows),
                  monotone(lambda r: r.dim_mu),
                  monotone(lambda r: r.dim_nu),
                  tuple(bounds))
