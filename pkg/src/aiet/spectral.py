"""Spectral analysis of the self-similarity matrix.

The unit eigenspace carries integer structure (the matrix acts as the
identity on the kernel of the translation matrix), so everything touching
it is computed exactly over the rationals: characteristic polynomial,
multiplicity of the root 1, kernel basis, and the projection onto the
kernel along its invariant complement.  The expanding/contracting part of
the spectrum is handled numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import NotHyperbolic, NotOrthogonal
from .iet_core import genus_kappa
from .rauzy import SelfSimilarSystem

_MODULUS_GAP = 1e-7
_CLASS_EPS = 1e-9


def char_poly(mat: Sequence[Sequence[int]]) -> list[int]:
    """Characteristic polynomial coefficients, leading first, exact.

    Faddeev-LeVerrier over rationals; the result of an integer matrix is
    verified to be integral.
    """
    d = len(mat)
    M = [[Fraction(x) for x in row] for row in mat]

    def matmul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(d)) for j in range(d)]
                for i in range(d)]

    def trace(A):
        return sum(A[i][i] for i in range(d))

    coeffs = [Fraction(1)]
    A = [[Fraction(0)] * d for _ in range(d)]
    identity = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for k in range(1, d + 1):
        A = matmul(M, [[A[i][j] + coeffs[-1] * identity[i][j] for j in range(d)]
                       for i in range(d)])
        coeffs.append(-trace(A) / k)
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise AssertionError(f"characteristic polynomial not integral: {c}")
        out.append(int(c))
    return out


def unit_root_multiplicity(poly: Sequence[int]) -> int:
    """Largest k with (x-1)^k dividing the polynomial, by exact division."""
    p = list(poly)
    mult = 0
    while len(p) > 1:
        # synthetic division by (x - 1)
        q = [p[0]]
        for c in p[1:]:
            q.append(q[-1] + c)
        if q[-1] != 0:
            break
        p = q[:-1]
        mult += 1
    return mult


def rational_kernel(mat: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Basis of the kernel over the rationals (Gauss-Jordan)."""
    rows = [[Fraction(x) for x in row] for row in mat]
    n = len(rows)
    m = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(m):
        pivot = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -rows[i][fc]
        basis.append(vec)
    return basis


def _rational_solve(A: list[list[Fraction]], rhs: list[list[Fraction]]):
    """Solve A X = rhs exactly; A square nonsingular."""
    n = len(A)
    aug = [row[:] + r[:] for row, r in zip(A, rhs)]
    width = len(aug[0])
    for c in range(n):
        pivot = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[pivot] = aug[pivot], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:width] for row in aug]


@dataclass(frozen=True)
class SpectralData:
    char_poly: tuple[int, ...]
    unit_dim: int
    eigenvalues: np.ndarray            # complex, sorted by modulus descending
    right_eigenvectors: np.ndarray     # columns paired with eigenvalues
    left_eigenvectors: np.ndarray      # rows paired with eigenvalues
    central_basis: tuple[tuple[Fraction, ...], ...]
    central_projector: tuple[tuple[Fraction, ...], ...]   # onto Ker(M-I) along Im(M-I)

    def central_projector_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.central_projector])


@dataclass(frozen=True)
class HyperbolicityCertificate:
    is_hyperbolic: bool
    g: int
    kappa: int
    failure_reason: Optional[str] = None


@dataclass(frozen=True)
class SlopeDecomposition:
    omega: np.ndarray
    omega_u: np.ndarray
    omega_c: np.ndarray
    omega_s: np.ndarray
    klass: str                      # zero | stable | central_stable | unstable
    alpha_omega: Optional[float]    # defined for the stable class

    @property
    def is_invariant(self) -> bool:
        return self.klass == "zero" or (
            self.klass == "central_stable"
            and float(np.abs(self.omega_s).max()) <= _CLASS_EPS * max(1.0, float(np.abs(self.omega).max()))
            and float(np.abs(self.omega_u).max()) <= _CLASS_EPS * max(1.0, float(np.abs(self.omega).max())))


def analyze_spectrum(sys: SelfSimilarSystem) -> SpectralData:
    """Exact polynomial data plus numeric eigenpairs of the loop matrix."""
    M = sys.matrix
    d = sys.d
    poly = char_poly(M)
    unit_dim = unit_root_multiplicity(poly)

    MmI = [[Fraction(M[i][j]) - Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    kernel = rational_kernel(MmI)

    # projection onto Ker(M-I) along Im(M-I): columns [kernel | image basis]
    # form an exact basis of R^d whenever 1 is semisimple (hyperbolic case)
    projector: tuple[tuple[Fraction, ...], ...]
    image = _column_space(MmI)
    if len(kernel) + len(image) == d and kernel:
        cols = [list(v) for v in kernel] + [list(v) for v in image]
        B = [[cols[j][i] for j in range(d)] for i in range(d)]
        identity = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        Binv = _rational_solve(B, identity)
        proj = [[sum(cols[k][i] * Binv[k][j] for k in range(len(kernel)))
                 for j in range(d)] for i in range(d)]
        projector = tuple(tuple(row) for row in proj)
    else:
        projector = tuple(tuple(Fraction(0) for _ in range(d)) for _ in range(d))

    Mf = sys.matrix_float()
    evals, rvecs = np.linalg.eig(Mf)
    order = np.argsort(-np.abs(evals))
    evals = evals[order]
    rvecs = rvecs[:, order]
    levals, lvecs = np.linalg.eig(Mf.T)
    lvecs_rows = np.empty_like(rvecs)
    used = set()
    for i, ev in enumerate(evals):
        j = min((jj for jj in range(d) if jj not in used),
                key=lambda jj: abs(levals[jj] - ev))
        used.add(j)
        lvecs_rows[i] = lvecs[:, j].T
    return SpectralData(tuple(poly), unit_dim, evals, rvecs, lvecs_rows,
                        tuple(tuple(v) for v in kernel), projector)


def _column_space(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the column space, as vectors."""
    n = len(mat)
    cols = [[mat[i][j] for i in range(n)] for j in range(n)]
    basis: list[list[Fraction]] = []
    rows: list[list[Fraction]] = []   # row-echelon scratch of accepted columns
    for col in cols:
        vec = col[:]
        for r in rows:
            lead = next((i for i, x in enumerate(r) if x != 0), None)
            if lead is not None and vec[lead] != 0:
                f = vec[lead] / r[lead]
                vec = [a - f * b for a, b in zip(vec, r)]
        if any(x != 0 for x in vec):
            rows.append(vec)
            basis.append(col)
    return basis


def certify_hyperbolic(sys: SelfSimilarSystem,
                       spec: Optional[SpectralData] = None) -> HyperbolicityCertificate:
    """Check the spectral shape: g simple real expanding and g contracting
    eigenvalues of pairwise distinct moduli, plus exactly kappa-1 unit ones."""
    spec = spec or analyze_spectrum(sys)
    g, kappa = genus_kappa(sys.perm)

    def fail(reason: str) -> HyperbolicityCertificate:
        return HyperbolicityCertificate(False, g, kappa, reason)

    if spec.unit_dim != kappa - 1:
        return fail(f"unit eigenvalue multiplicity {spec.unit_dim} != kappa-1 = {kappa - 1}")
    if len(spec.central_basis) != spec.unit_dim:
        return fail("eigenvalue 1 is not semisimple: kernel smaller than multiplicity")

    evals = spec.eigenvalues
    # strip the unit block: the unit_dim eigenvalues nearest 1 are accounted
    # for exactly by the polynomial division above
    rest = sorted(range(len(evals)), key=lambda i: abs(evals[i] - 1.0))[spec.unit_dim:]
    logs = []
    for i in rest:
        ev = evals[i]
        if abs(ev.imag) > 1e-9 * (1 + abs(ev)):
            return fail("non-real spectrum off the unit circle")
        lg = np.log(abs(ev))
        if abs(lg) <= _MODULUS_GAP:
            return fail(f"non-unit eigenvalue too close to the unit circle: {ev}")
        logs.append(float(lg))
    expanding = sorted(x for x in logs if x > 0)
    contracting = sorted(-x for x in logs if x < 0)
    if len(expanding) != g or len(contracting) != g:
        return fail(f"expanding/contracting counts {len(expanding)}/{len(contracting)} != genus {g}")
    for group in (expanding, contracting):
        for a, b in zip(group, group[1:]):
            if b - a <= _MODULUS_GAP:
                return fail("two eigenvalues share a modulus within tolerance")
    return HyperbolicityCertificate(True, g, kappa, None)


def central_projection_exact(spec: SpectralData,
                             omega: Sequence[Fraction]) -> list[Fraction]:
    """Central part of a rational slope vector in exact arithmetic.

    The projector onto Ker(M - I) along Im(M - I) has rational entries, so
    rational inputs give a rational central part with (M - I) omega_c = 0
    exactly.
    """
    P = spec.central_projector
    d = len(P)
    om = [Fraction(x) for x in omega]
    return [sum(P[i][j] * om[j] for j in range(d)) for i in range(d)]


def project_orthogonal(sys: SelfSimilarSystem, omega_raw) -> np.ndarray:
    """Strip the Perron component so the result pairs to zero with lambda."""
    om = np.asarray(omega_raw, dtype=float)
    return om - float(om @ sys.lam) * sys.theta


def classify_slope(sys: SelfSimilarSystem, spec: SpectralData,
                   omega, cert: Optional[HyperbolicityCertificate] = None,
                   class_eps: float = _CLASS_EPS) -> SlopeDecomposition:
    """Split a slope vector into unstable/central/stable parts and name its class.

    The central part is the exact-rational projection onto Ker(M - I); the
    expanding and contracting parts come from the numeric eigenbasis of the
    complement.  A component counts as present when its sup-norm exceeds
    class_eps * |omega|.
    """
    cert = cert or certify_hyperbolic(sys, spec)
    if not cert.is_hyperbolic:
        raise NotHyperbolic(cert.failure_reason or "matrix is not of hyperbolic type")
    om = np.asarray(omega, dtype=float)
    inner = float(om @ sys.lam)
    if abs(inner) > 1e-10 * max(1.0, float(np.abs(om).max())):
        raise NotOrthogonal(inner)

    scale = float(np.abs(om).max())
    eps = class_eps * scale if scale > 0 else 0.0
    d = sys.d

    omega_c = spec.central_projector_float() @ om if spec.unit_dim else np.zeros(d)
    rest = om - omega_c

    # indices of non-unit eigenvalues (they were sorted by modulus, unit ones
    # are the unit_dim nearest to 1)
    unit_idx = set(sorted(range(d), key=lambda i: abs(spec.eigenvalues[i] - 1.0))[:spec.unit_dim])
    non_unit = [i for i in range(d) if i not in unit_idx]
    V = np.real(spec.right_eigenvectors[:, non_unit])
    coeffs, *_ = np.linalg.lstsq(V, rest, rcond=None)

    omega_u = np.zeros(d)
    omega_s = np.zeros(d)
    present_contracting: list[float] = []
    pf_index = 0   # eigenvalues sorted by modulus descending: Perron first
    for pos, i in enumerate(non_unit):
        ev = spec.eigenvalues[i].real
        component = coeffs[pos] * V[:, pos]
        if abs(ev) > 1.0:
            if i == pf_index:
                continue   # Perron direction cannot occur for omega orthogonal to lambda
            omega_u += component
        else:
            omega_s += component
            if float(np.abs(component).max()) > eps:
                present_contracting.append(abs(float(np.log(abs(ev)))))

    norm_u = float(np.abs(omega_u).max())
    norm_c = float(np.abs(omega_c).max())
    norm_s = float(np.abs(omega_s).max())
    if scale == 0 or max(norm_u, norm_c, norm_s) <= eps:
        klass = "zero"
    elif norm_u > eps:
        klass = "unstable"
    elif norm_c > eps:
        klass = "central_stable"
    else:
        klass = "stable"

    # Holder regularity of a sum of eigen-coboundaries is set by its slowest
    # contraction, i.e. the present eigenvalue of largest modulus
    alpha = min(present_contracting) if (klass == "stable" and present_contracting) else None
    return SlopeDecomposition(om, omega_u, omega_c, omega_s, klass, alpha)
