import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from projlab.errors import ContractViolation, InvalidFieldError, InvalidRankError
from projlab.free_moments import BlockFamily, SingleBlock
from projlab.grassmann_sim import GibbsChain, GibbsPairSpec, MicrostateSpec, canonical_word, \
    estimate_microstate_logprob, microstate_membership, pair_from_eigenvalues, \
    sample_gibbs_pair, sample_gibbs_pair_batch, sample_haar_pair, sample_pair_eigenvalues, \
    sample_pair_eigenvalues_batch, sample_projection, wilson_interval, word_moments
from projlab.linalg_core import as_generator, check_projection, hermitian_eigen, \
    sample_haar_unitary
from projlab.two_projection_model import FunctionOnUnitInterval, arcsine_cdf, words_up_to

from conftest import max_abs


def test_projection_extreme_ranks(rng):
    assert max_abs(sample_projection(5, 0, rng)) == 0.0
    assert max_abs(sample_projection(5, 5, rng) - np.eye(5)) <= 1e-12


@pytest.mark.parametrize("N,k", [(1, 1), (7, 3), (32, 8)])
def test_projection_contract(N, k, rng):
    check_projection(sample_projection(N, k, rng), rank=k)


def test_projection_rank_too_large(rng):
    with pytest.raises(InvalidRankError):
        sample_projection(4, 5, rng)


def test_projection_mean_is_scalar(rng):
    # unitary invariance forces E[P] = (k/N) I, so E (1/N)Tr(PD) = k d / N
    N, k, n = 32, 8, 1000
    D = np.diag(np.linspace(0.0, 2.0, N))
    d = np.trace(D) / N
    vals = np.array([np.real(np.trace(sample_projection(N, k, rng) @ D)) / N for _ in range(n)])
    assert abs(vals.mean() - k * d / N) <= 4 * vals.std(ddof=1) / np.sqrt(n)


def test_pair_eigen_k1_beta_mean(rng):
    x = sample_pair_eigenvalues_batch(8, 1, 3, 10_000, rng)[:, 0]
    se = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean() - 0.375) <= 4 * se


def test_pair_eigen_k1_is_beta_law(rng):
    x = sample_pair_eigenvalues_batch(8, 1, 3, 3000, rng)[:, 0]
    assert stats.kstest(x, stats.beta(3, 5).cdf).pvalue > 0.01


def test_pair_eigen_arcsine_ks(rng):
    x = sample_pair_eigenvalues_batch(64, 32, 32, 200, rng).ravel()
    assert stats.kstest(x, arcsine_cdf).statistic <= 0.05


def test_pair_eigen_inside_and_distinct(rng):
    for _ in range(50):
        x = sample_pair_eigenvalues(12, 4, 5, rng)
        assert np.all((x > 0) & (x < 1))
        assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("N,k,l", [(8, 0, 3), (8, 4, 3), (8, 4, 5), (8, -1, 2)])
def test_pair_eigen_rank_errors(N, k, l, rng):
    with pytest.raises(InvalidRankError):
        sample_pair_eigenvalues(N, k, l, rng)


def test_pair_from_eigenvalues_reproduces_spectrum(rng):
    x = np.array([0.1, 0.45, 0.8])
    P, Q = pair_from_eigenvalues(10, 3, 4, x, rng)
    check_projection(P, 3)
    check_projection(Q, 4)
    lam = hermitian_eigen(P @ Q @ P)[0]
    np.testing.assert_allclose(np.sort(lam)[-3:], x, atol=1e-12)


def test_matrix_and_chain_samplers_agree():
    rng = as_generator(11)
    exact = sample_pair_eigenvalues_batch(32, 8, 8, 500, rng).ravel()
    chain = sample_gibbs_pair_batch(GibbsPairSpec(32, 8, 8), rng, 500, burn_in=500, thin=20).ravel()
    assert stats.ks_2samp(exact, chain).pvalue > 0.01


def test_gibbs_zero_field_matches_exact_single_coordinate():
    rng = as_generator(12)
    exact = sample_pair_eigenvalues_batch(8, 1, 3, 500, rng)[:, 0]
    chain = sample_gibbs_pair_batch(GibbsPairSpec(8, 1, 3), rng, 500, burn_in=200, thin=10)[:, 0]
    assert stats.ks_2samp(exact, chain).pvalue > 0.01


def test_gibbs_constant_field_is_zero_field():
    spec0 = GibbsPairSpec(16, 4, 6)
    specc = GibbsPairSpec(16, 4, 6, FunctionOnUnitInterval.constant(3.0))
    a = sample_gibbs_pair_batch(spec0, as_generator(5), 200)
    b = sample_gibbs_pair_batch(specc, as_generator(5), 200)
    # the field table shifts by a constant; the Metropolis ratios are unchanged
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_gibbs_linear_field_pushes_left():
    rng = as_generator(13)
    n = 400
    base = sample_gibbs_pair_batch(GibbsPairSpec(32, 16, 16), rng, n, thin=10).mean(axis=1)
    pushed = sample_gibbs_pair_batch(GibbsPairSpec(32, 16, 16, FunctionOnUnitInterval.polynomial([0, 2])),
                                     rng, n, thin=10).mean(axis=1)
    se = np.sqrt(base.var(ddof=1) / n + pushed.var(ddof=1) / n)
    assert base.mean() - pushed.mean() > 4 * se


def test_gibbs_rejects_nonfinite_field(rng):
    psi = FunctionOnUnitInterval(lambda x: np.where(np.asarray(x) < 0.5, np.inf, 0.0), name="wall")
    with pytest.raises(InvalidFieldError):
        sample_gibbs_pair(GibbsPairSpec(8, 2, 3, psi), rng)


def test_gibbs_rejects_bad_thinning(rng):
    with pytest.raises(ContractViolation):
        sample_gibbs_pair(GibbsPairSpec(8, 2, 3), rng, burn_in=0)


def test_gibbs_sample_shape_and_order(rng):
    x = sample_gibbs_pair(GibbsPairSpec(10, 3, 4), rng)
    assert x.shape == (3,) and np.all(np.diff(x) >= 0) and np.all((x > 0) & (x < 1))


def test_gibbs_chain_acceptance_reasonable():
    chain = GibbsChain(GibbsPairSpec(32, 16, 16), as_generator(3))
    chain.run(500)
    assert 0.1 < chain.acceptance_rate < 0.9


def test_canonical_word_rotation():
    assert canonical_word((1, 0, 2)) == canonical_word((0, 2, 1)) == canonical_word((2, 1, 0))


def test_spec_canonicalises_and_validates():
    spec = MicrostateSpec(8, (4, 4), 2, 0.1, {(1, 0): 0.25, (0,): 0.5})
    assert set(spec.target_moments) == {(0, 1), (0,)}
    with pytest.raises(ContractViolation):
        MicrostateSpec(8, (4,), 2, 0.0, {})
    with pytest.raises(ContractViolation):
        MicrostateSpec(8, (4,), 1, 0.1, {(0, 0): 0.5})
    with pytest.raises(ContractViolation):
        MicrostateSpec(8, (4,), 1, 0.1, {(0,): 1.5})
    with pytest.raises(InvalidRankError):
        MicrostateSpec(8, (9,), 1, 0.1, {})


def test_membership_rank_target_any_eps(rng):
    P = sample_projection(10, 3, rng)
    for eps in (1e-9, 0.1, 1.0):
        spec = MicrostateSpec(10, (3,), 3, eps, {(0,): 0.3, (0, 0): 0.3, (0, 0, 0): 0.3})
        assert microstate_membership([P], spec)


def test_membership_eps_two_always(rng):
    words = words_up_to(range(2), 3)
    spec = MicrostateSpec(12, (3, 9), 3, 2.0, {w: 0.0 for w in words})
    for _ in range(10):
        Ps = [sample_projection(12, 3, rng), sample_projection(12, 9, rng)]
        assert microstate_membership(Ps, spec)


def test_membership_contract_errors(rng):
    spec = MicrostateSpec(6, (2, 3), 1, 0.1, {(0,): 1 / 3})
    with pytest.raises(ContractViolation):
        microstate_membership([sample_projection(6, 2, rng)], spec)
    with pytest.raises(ContractViolation):
        microstate_membership([sample_projection(6, 2, rng), sample_projection(6, 4, rng)], spec)
    with pytest.raises(ContractViolation):
        microstate_membership([sample_projection(5, 2, rng), sample_projection(5, 3, rng)], spec)


def _free_targets(alphas, m):
    fam = BlockFamily([SingleBlock(a) for a in alphas])
    return {w: fam.moment(w) for w in words_up_to(range(len(alphas)), m)}


def test_membership_free_targets_frequency():
    rng = as_generator(21)
    spec = MicrostateSpec(48, (24, 24), 2, 0.1, _free_targets([0.5, 0.5], 2))
    hits = sum(microstate_membership([sample_projection(48, 24, rng), sample_projection(48, 24, rng)], spec)
               for _ in range(200))
    assert hits / 200 >= 0.5


def test_logprob_exact_rank_is_zero(rng):
    est = estimate_microstate_logprob(MicrostateSpec(16, (8,), 1, 0.01, {(0,): 0.5}), 10, rng)
    assert est.estimate == 0.0 and est.accepted == 10
    estimate, accepted = est
    assert (estimate, accepted) == (0.0, 10)


def test_logprob_contradictory_is_minus_inf(rng):
    est = estimate_microstate_logprob(MicrostateSpec(16, (8,), 1, 0.1, {(0,): 0.0}), 10, rng)
    assert est.estimate == -np.inf and est.accepted == 0


def test_logprob_free_targets_lower_bound():
    spec = MicrostateSpec(48, (24, 24), 2, 0.1, _free_targets([0.5, 0.5], 2))
    est = estimate_microstate_logprob(spec, 200, as_generator(22))
    assert est.estimate >= -0.1
    assert est.lower <= est.estimate <= est.upper <= 0.0


def test_logprob_rejects_zero_samples(rng):
    with pytest.raises(ContractViolation):
        estimate_microstate_logprob(MicrostateSpec(4, (2,), 1, 0.1, {}), 0, rng)


def test_rank_choice_stability():
    # ranks k(N) and k(N)+1 both approximate trace 1/2
    targets = _free_targets([0.5, 0.5], 2)
    a = estimate_microstate_logprob(MicrostateSpec(64, (32, 32), 2, 0.1, targets), 200, as_generator(31))
    b = estimate_microstate_logprob(MicrostateSpec(64, (33, 33), 2, 0.1, targets), 200, as_generator(32))
    assert np.isfinite(a.estimate) and np.isfinite(b.estimate)
    assert abs(a.estimate - b.estimate) <= 0.05


def test_unitary_invariance_of_word_moments():
    rng = as_generator(41)
    V = sample_haar_unitary(10, rng)
    words = [(0, 1), (0, 1, 0, 1), (0, 1, 1)]
    plain = {w: [] for w in words}
    conj = {w: [] for w in words}
    for _ in range(500):
        P, Q = sample_haar_pair(10, 4, 5, rng)
        for w, v in word_moments([P, Q], words).items():
            plain[w].append(v)
        P, Q = sample_haar_pair(10, 4, 5, rng)
        for w, v in word_moments([V @ P @ V.conj().T, V @ Q @ V.conj().T], words).items():
            conj[w].append(v)
    for w in words:
        assert stats.ks_2samp(plain[w], conj[w]).pvalue > 0.01


@given(acc=st.integers(0, 50), extra=st.integers(0, 50))
def test_wilson_interval_brackets_proportion(acc, extra):
    n = acc + extra
    if n == 0:
        return
    lo, hi = wilson_interval(acc, n)
    assert 0.0 <= lo <= acc / n <= hi <= 1.0
