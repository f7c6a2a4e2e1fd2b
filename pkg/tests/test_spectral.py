from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dataclasses

from aiet.errors import NotOrthogonal
from aiet.iet_core import validate_permutation
from aiet.rauzy import RauzyLoop, build_self_similar
from aiet.spectral import (
    analyze_spectrum,
    central_projection_exact,
    certify_hyperbolic,
    char_poly,
    classify_slope,
    project_orthogonal,
    rational_kernel,
    unit_root_multiplicity,
)


def test_char_poly_golden(golden):
    spec = analyze_spectrum(golden.system)
    assert spec.char_poly == (1, -3, 1)
    assert spec.unit_dim == 0
    evs = sorted(spec.eigenvalues.real)
    assert evs[1] == pytest.approx((3 + 5 ** 0.5) / 2, abs=1e-10)
    assert evs[0] == pytest.approx((3 - 5 ** 0.5) / 2, abs=1e-10)


def test_char_poly_hand_matrix():
    # x^2 - 5x + 6 for [[2,0],[0,3]]; (x-1)^2 detected exactly for identity
    assert char_poly([[2, 0], [0, 3]]) == [1, -5, 6]
    assert unit_root_multiplicity(char_poly([[1, 0], [0, 1]])) == 2
    assert unit_root_multiplicity([1, -2, 1]) == 2
    assert unit_root_multiplicity([1, -3, 1]) == 0


def test_determinant_is_unimodular(golden, d3_central, d4_central, d4_unstable):
    for bundle in (golden, d3_central, d4_central, d4_unstable):
        poly = analyze_spectrum(bundle.system).char_poly
        d = bundle.system.d
        assert abs(poly[-1]) == 1   # product of roots = det = +-1


def test_unit_dim_equals_kernel_dim(d3_central, d4_central):
    for bundle in (d3_central, d4_central):
        spec = bundle.spectrum
        assert spec.unit_dim == len(spec.central_basis)
        assert spec.unit_dim == bundle.certificate.kappa - 1


def test_reciprocal_spectrum(golden, d3_central, d4_central, d4_unstable):
    for bundle in (golden, d3_central, d4_central, d4_unstable):
        evs = bundle.spectrum.eigenvalues
        for ev in evs:
            assert min(abs(1.0 / ev - other) for other in evs) < 1e-8


def test_certificates(golden, d3_central, d4_central, d4_unstable):
    for bundle, g, kappa in ((golden, 1, 1), (d3_central, 1, 2),
                             (d4_central, 1, 3), (d4_unstable, 2, 1)):
        cert = bundle.certificate
        assert cert.is_hyperbolic
        assert (cert.g, cert.kappa) == (g, kappa)


def test_nonhyperbolic_complex_pair(nonhyperbolic):
    cert = nonhyperbolic.certificate
    assert not cert.is_hyperbolic
    assert "non-real" in cert.failure_reason


def test_rational_kernel_exact(d4_central):
    M = d4_central.system.matrix
    d = 4
    MmI = [[Fraction(M[i][j]) - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    basis = rational_kernel(MmI)
    assert len(basis) == 2
    for vec in basis:
        out = [sum(MmI[i][j] * vec[j] for j in range(d)) for i in range(d)]
        assert all(x == 0 for x in out)    # exact rational arithmetic


def test_central_projection_is_exact_idempotent(d4_central):
    P = d4_central.spectrum.central_projector
    d = 4
    PP = [[sum(P[i][k] * P[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    assert PP == [list(row) for row in P]


def test_central_projection_rational_mode(d4_central):
    # with rational input, (M - I) omega_c = 0 holds over the rationals
    M = d4_central.system.matrix
    omega = [Fraction(1, 3), Fraction(-1, 5), Fraction(7, 11), Fraction(2, 7)]
    omega_c = central_projection_exact(d4_central.spectrum, omega)
    d = 4
    out = [sum(Fraction(M[i][j]) * omega_c[j] for j in range(d)) - omega_c[i]
           for i in range(d)]
    assert all(x == 0 for x in out)


def test_certify_dispatch_on_wrong_unit_dim(d4_central):
    # fabricated spectral data with a broken unit multiplicity must be refused
    fake = dataclasses.replace(d4_central.spectrum, unit_dim=1)
    cert = certify_hyperbolic(d4_central.system, fake)
    assert not cert.is_hyperbolic
    assert "kappa-1" in cert.failure_reason


def test_classify_zero(golden):
    dec = classify_slope(golden.system, golden.spectrum, np.zeros(2))
    assert dec.klass == "zero"
    assert np.abs(dec.omega_u).max() == 0
    assert np.abs(dec.omega_c).max() == 0
    assert np.abs(dec.omega_s).max() == 0


def test_classify_stable_golden(golden_stable):
    dec = golden_stable.decomposition
    assert dec.klass == "stable"
    # the only contracting eigenvalue is exp(-rho_T)
    assert dec.alpha_omega == pytest.approx(golden_stable.system.rho_T, abs=1e-9)


def test_classify_central(d4_central):
    dec = d4_central.decomposition
    assert dec.klass == "central_stable"
    assert dec.is_invariant
    M = d4_central.system.matrix_float()
    assert np.abs(M @ dec.omega_c - dec.omega_c).max() < 1e-9


def test_classify_central_stable_mixture(d4_central_stable):
    dec = d4_central_stable.decomposition
    assert dec.klass == "central_stable"
    assert not dec.is_invariant
    assert np.abs(dec.omega_s).max() > 0.1


def test_classify_unstable(d4_unstable):
    assert d4_unstable.decomposition.klass == "unstable"


def test_recomposition(d4_central_stable, d4_unstable, golden_stable):
    for bundle in (d4_central_stable, d4_unstable, golden_stable):
        dec = bundle.decomposition
        err = np.abs(dec.omega - (dec.omega_u + dec.omega_c + dec.omega_s)).max()
        assert err < 1e-9 * max(1.0, np.abs(dec.omega).max())


def test_classify_requires_orthogonality(golden):
    with pytest.raises(NotOrthogonal):
        classify_slope(golden.system, golden.spectrum, np.array([1.0, 1.0]))


def test_d2_has_no_unstable_directions(golden):
    # at genus 1 the only expanding direction is the Perron one, which is
    # barred by orthogonality: whatever we feed comes back stable or zero
    sys, spec = golden.system, golden.spectrum
    for raw in ([1.0, 0.0], [0.3, -0.7], [-2.0, 1.0]):
        om = project_orthogonal(sys, np.array(raw))
        dec = classify_slope(sys, spec, om)
        assert dec.klass in ("zero", "stable")


def test_project_orthogonal_examples(golden):
    sys = golden.system
    om = 0.5 * np.array([sys.lam[1], -sys.lam[0]])
    assert np.abs(project_orthogonal(sys, om) - om).max() < 1e-14
    assert np.abs(project_orthogonal(sys, sys.theta)).max() < 1e-12


@given(st.lists(st.floats(min_value=-5, max_value=5), min_size=4, max_size=4))
@settings(max_examples=100, deadline=None)
def test_projection_kills_perron_pairing(vals):
    perm = validate_permutation("ABCD", "ABCD", "BCDA")
    sys = build_self_similar(RauzyLoop(perm, "tbttbtttb"))
    om = project_orthogonal(sys, np.array(vals))
    assert abs(om @ sys.lam) < 1e-10 * max(1.0, np.abs(om).max())
