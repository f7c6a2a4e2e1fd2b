import numpy as np
import pytest

from aiet.dimension import big_G, big_H
from aiet.errors import UnstableInput
from aiet.holder import build_graph
from aiet.renorm_markov import (
    birkhoff_information,
    conformal_chain,
    empirical_local_dimension,
    lebesgue_chain,
    simulate_chain,
)


def chains_for(bundle):
    yield lebesgue_chain(bundle.system)
    if bundle.decomposition.klass != "unstable":
        yield conformal_chain(bundle.system, bundle.decomposition)


def test_rows_stochastic(golden, d3_central, d4_central, d4_unstable):
    for bundle in (golden, d3_central, d4_central, d4_unstable):
        for chain in chains_for(bundle):
            assert np.abs(chain.P.sum(axis=1) - 1.0).max() < 1e-12


def test_square_positive(golden, d3_central, d4_central):
    for bundle in (golden, d3_central, d4_central):
        for chain in chains_for(bundle):
            assert (np.linalg.matrix_power(chain.P, 2) > 0).all()


def test_closed_form_stationary(golden, d3_central, d4_central, d4_central_stable):
    for bundle in (golden, d3_central, d4_central, d4_central_stable):
        for chain in chains_for(bundle):
            assert np.abs(chain.stationary @ chain.P - chain.stationary).max() < 1e-10
            assert chain.stationary.sum() == pytest.approx(1.0, abs=1e-12)


def test_support_equals_graph_edges(d4_central):
    chain = lebesgue_chain(d4_central.system)
    graph = build_graph(d4_central.system, np.zeros(4))
    edges = set(graph.edges)
    index = {v: k for k, v in enumerate(graph.vertices)}
    assert graph.vertices == chain.states
    n = chain.size
    support = {(u, v) for u in range(n) for v in range(n) if chain.P[u, v] > 0}
    assert support == edges


def test_golden_chain_is_5x5(golden):
    chain = lebesgue_chain(golden.system)
    assert chain.P.shape == (5, 5)
    # entries are floor-length ratios: entering (b, j) from letter beta(b, j)
    # has probability exp(-rho_T) lam_b / lam_parent
    sys = golden.system
    scale = np.exp(-sys.rho_T)
    for tgt, (b, j) in enumerate(chain.states):
        parent = sys.towers.words[b][j]
        expected = scale * sys.lam[b] / sys.lam[parent]
        for src, (a, _) in enumerate(chain.states):
            assert chain.P[src, tgt] == pytest.approx(
                expected if a == parent else 0.0, abs=1e-14)


def test_simulate_deterministic(golden):
    chain = lebesgue_chain(golden.system)
    a = simulate_chain(chain, 42, 2000, lambda s, t: 1.0)
    b = simulate_chain(chain, 42, 2000, lambda s, t: 1.0)
    assert np.array_equal(a.path, b.path)
    assert np.array_equal(a.birkhoff_sums, b.birkhoff_sums)
    c = simulate_chain(chain, 43, 2000, lambda s, t: 1.0)
    assert not np.array_equal(a.path, c.path)


def test_constant_functional_averages_to_one(golden):
    chain = lebesgue_chain(golden.system)
    sample = simulate_chain(chain, 1, 5000, lambda s, t: 1.0)
    assert sample.birkhoff_sums[-1] == pytest.approx(5000.0)


def test_indicator_matches_stationary(d4_central):
    chain = lebesgue_chain(d4_central.system)
    target = 3
    length = 200_000
    sample = simulate_chain(chain, 99, length,
                            lambda s, t: 1.0 if t == target else 0.0)
    freq = sample.birkhoff_sums[-1] / length
    p = chain.stationary[target]
    # crude chain-CLT band: 4 sigma with the iid variance inflated 3x
    sigma = (p * (1 - p) / length) ** 0.5 * 3
    assert abs(freq - p) < 4 * sigma


def test_estimates_match_closed_forms_short(d3_central):
    G = big_G(d3_central.system, d3_central.decomposition)
    H = big_H(d3_central.system, d3_central.decomposition)
    est_G, se_G = birkhoff_information(d3_central.system, d3_central.decomposition,
                                       "invariant", seed=11, length=200_000)
    est_H, se_H = birkhoff_information(d3_central.system, d3_central.decomposition,
                                       "conformal", seed=12, length=200_000)
    assert abs(est_G - G) < 3 * se_G
    assert abs(est_H - H) < 3 * se_H


def test_zero_slope_estimates_rho(golden):
    est, se = birkhoff_information(golden.system, golden.decomposition,
                                   "invariant", seed=5, length=100_000)
    assert abs(est - golden.system.rho_T) < 3 * se


def test_stderr_scales_like_sqrt_length(d4_central):
    # doubling the length shrinks the batch-means error by sqrt(2) +- 20%
    ses = []
    for length in (200_000, 400_000):
        errs = []
        for seed in (21, 22, 23, 24):
            _, se = birkhoff_information(d4_central.system, d4_central.decomposition,
                                         "invariant", seed=seed, length=length)
            errs.append(se)
        ses.append(np.mean(errs))
    ratio = ses[0] / ses[1]
    assert 2 ** 0.5 * 0.8 < ratio < 2 ** 0.5 * 1.2


def test_unstable_estimator_refused(d4_unstable):
    with pytest.raises(UnstableInput):
        birkhoff_information(d4_unstable.system, d4_unstable.decomposition,
                             "invariant", seed=1, length=1000)


def test_local_dimension_zero_slope(golden):
    seq = empirical_local_dimension(golden.system, golden.decomposition, seed=3,
                                    depth=2000)
    for n, ratio in seq[100:]:
        assert abs(ratio - 1.0) < 20.0 / n


def test_local_dimension_central(d4_central):
    seq = empirical_local_dimension(d4_central.system, d4_central.decomposition,
                                    seed=7, depth=10_000)
    target = d4_central.system.rho_T / big_G(d4_central.system,
                                             d4_central.decomposition)
    assert abs(seq[-1][1] - target) < 0.01


def test_local_dimension_unstable_decays(d4_unstable):
    seq = dict(empirical_local_dimension(d4_unstable.system,
                                         d4_unstable.decomposition,
                                         seed=2024, depth=200))
    assert 0 < seq[200] < 0.5 * seq[50]
    D = {n: n * d4_unstable.system.rho_T / r for n, r in seq.items()}
    assert all(D[n] > 0 for n in D)


def test_local_dimension_deterministic(d4_unstable):
    a = empirical_local_dimension(d4_unstable.system, d4_unstable.decomposition,
                                  seed=9, depth=60)
    b = empirical_local_dimension(d4_unstable.system, d4_unstable.decomposition,
                                  seed=9, depth=60)
    assert a == b
