import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from projlab.errors import ContractViolation
from projlab.linalg_core import as_generator
from projlab.transport import arcsine_window_state, beta_density_state, hessian_bound_check, \
    hessian_trial, pqp_distribution, surrogate_tci_check, tci_family, wasserstein2_interval
from projlab.two_projection_model import FunctionOnUnitInterval, IntervalMeasure, PairState, \
    free_pair_state


def _uniform(n=2000, lo=0.0, hi=1.0, mass=1.0):
    return IntervalMeasure.from_density(lambda x: np.ones_like(x), n, lo, hi, mass=mass)


def test_two_diracs():
    for a, b in [(0.1, 0.7), (0.02, 0.98), (0.4, 0.4)]:
        d = wasserstein2_interval(IntervalMeasure.from_atoms([a], [1.0]), IntervalMeasure.from_atoms([b], [1.0]))
        assert d == pytest.approx(abs(a - b), abs=1e-14)


def test_uniform_vs_atom():
    d = wasserstein2_interval(_uniform(), IntervalMeasure.from_atoms([0.5], [1.0]))
    assert d == pytest.approx(math.sqrt(1 / 12), abs=1e-12)


def test_mass_mismatch():
    with pytest.raises(ContractViolation):
        wasserstein2_interval(IntervalMeasure.from_atoms([0.5], [1.0]), IntervalMeasure.from_atoms([0.5], [0.9]))


def test_zero_mass():
    assert wasserstein2_interval(IntervalMeasure.empty(), IntervalMeasure.empty()) == 0.0


def test_boundary_atoms_count():
    a = IntervalMeasure(np.array([]), np.array([]), 0.5, 0.5)
    b = IntervalMeasure.from_atoms([0.5], [1.0])
    assert wasserstein2_interval(a, b) == pytest.approx(0.5, abs=1e-14)


def test_translation_equality():
    mu = _uniform(500, 0.0, 0.5)
    nu = _uniform(500, 0.3, 0.8)
    assert wasserstein2_interval(mu, nu) == pytest.approx(0.3, abs=1e-12)


def test_affine_scaling():
    mu = IntervalMeasure.from_atoms([0.1, 0.4, 0.6], [0.2, 0.5, 0.3])
    nu = IntervalMeasure.from_atoms([0.2, 0.3, 0.9], [0.6, 0.1, 0.3])
    f = lambda m: IntervalMeasure.from_atoms(0.5 * m.nodes + 0.25, m.weights)
    assert wasserstein2_interval(f(mu), f(nu)) == pytest.approx(0.5 * wasserstein2_interval(mu, nu), abs=1e-13)


atoms = st.lists(st.tuples(st.floats(1e-6, 1 - 1e-6), st.floats(0.01, 1)), min_size=1, max_size=6)


def _measure(pairs):
    x = np.array([p[0] for p in pairs])
    w = np.array([p[1] for p in pairs])
    return IntervalMeasure.from_atoms(x, w / w.sum())


@settings(max_examples=100)
@given(a=atoms, b=atoms, c=atoms)
def test_metric_axioms(a, b, c):
    mu, nu, la = _measure(a), _measure(b), _measure(c)
    dmn = wasserstein2_interval(mu, nu)
    assert dmn >= 0.0
    assert wasserstein2_interval(mu, mu) == pytest.approx(0.0, abs=1e-7)
    assert dmn == wasserstein2_interval(nu, mu)
    assert dmn <= wasserstein2_interval(mu, la) + wasserstein2_interval(la, nu) + 1e-10


def test_metric_axioms_with_densities():
    rng = as_generator(12)
    for _ in range(20):
        ms = []
        for _ in range(3):
            p = rng.uniform(0.5, 3.0, 2)
            ms.append(IntervalMeasure.from_density(lambda x, p=p: x ** (p[0] - 1) * (1 - x) ** (p[1] - 1), 300, mass=1.0))
        d = lambda i, j: wasserstein2_interval(ms[i], ms[j])
        assert d(0, 1) == d(1, 0)
        assert d(0, 1) <= d(0, 2) + d(2, 1) + 1e-10


def test_pqp_distribution_mass():
    st_ = free_pair_state(0.3, 0.6, 500)
    d = pqp_distribution(st_)
    assert d.total_mass == pytest.approx(1.0, abs=1e-12)
    assert d.atom0 == pytest.approx(st_.a00 + st_.a01 + st_.a10 + 0.5 * st_.nu_mass)


def test_tci_free_state():
    rep = surrogate_tci_check(free_pair_state(0.5, 0.5, 2000), 2000)
    assert rep.lhs == pytest.approx(0.0, abs=1e-12)
    assert rep.rhs == pytest.approx(0.0, abs=0.05)
    assert rep.holds


def test_tci_minus_inf_state():
    nu = IntervalMeasure.from_atoms([0.3, 0.7], [0.5, 0.5])
    rep = surrogate_tci_check(PairState(0.5, 0.5, 0.0, 0.0, 0.0, 0.0, nu))
    assert rep.rhs == math.inf and rep.holds
    assert rep.to_dict()["rhs"] == "inf"


def test_tci_arcsine_window():
    rep = surrogate_tci_check(arcsine_window_state(0.1, 0.9, 2000), 2000)
    assert rep.holds and rep.slack > 0


def test_tci_family_holds():
    fam = tci_family(1000)
    assert len(fam) == 20
    for s in fam:
        assert s.alpha == pytest.approx(0.5, abs=1e-9) and s.beta == pytest.approx(0.5, abs=1e-9)
        rep = surrogate_tci_check(s, 1000)
        assert rep.holds and rep.slack >= 0


def test_window_and_beta_validation():
    with pytest.raises(ContractViolation):
        arcsine_window_state(0.6, 0.2)
    with pytest.raises(ContractViolation):
        beta_density_state(0.3, 1.0)


def test_hessian_constant_psi():
    rng = as_generator(13)
    worst, trials = hessian_bound_check(8, 4, 4, FunctionOnUnitInterval.constant(2.0), 5, rng, return_trials=True)
    assert worst == 0.0
    assert all(abs(t.second_derivative) < 1e-6 for t in trials)


def test_hessian_zero_tangents():
    from projlab.grassmann_sim import sample_haar_pair
    P, Q = sample_haar_pair(6, 3, 3, as_generator(14))
    z = np.zeros_like(P)
    t = hessian_trial(FunctionOnUnitInterval.identity(), P, Q, z, z)
    assert t.ratio == 0.0


def test_hessian_identity_psi():
    worst = hessian_bound_check(16, 8, 8, FunctionOnUnitInterval.identity(), 20, as_generator(15))
    assert 0.0 < worst <= 1.0 + 1e-3


def test_hessian_needs_bounds():
    psi = FunctionOnUnitInterval(lambda x: x)
    with pytest.raises(ContractViolation):
        hessian_bound_check(4, 2, 2, psi, 1, as_generator(0))
