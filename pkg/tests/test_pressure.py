import math

import numpy as np
import pytest

from projlab.entropy_functionals import chi_proj_pair
from projlab.errors import ContractViolation, InvalidRankError, NumericGuardError
from projlab.linalg_core import as_generator
from projlab.pressure import PressureHamiltonian, boundary_weights, conjugate_field, \
    equilibrium_pressure, eta_pair_bound, mc_pressure, pressure_max_over_traces, pressure_single, \
    tau_of_h
from projlab.two_projection_model import FunctionOnUnitInterval, free_pair_state, \
    pushforward_state, rho_of, total_variation

F = FunctionOnUnitInterval
GRID = 400


def _h(A=0.0, B=0.0, psi=None):
    return PressureHamiltonian(A, B, psi if psi is not None else F.constant(0.0))


def test_pressure_single_examples():
    assert pressure_single(0.4, 0.0, 0.0) == 0.0
    assert pressure_single(1.0, 2.5, -7.0) == -2.5
    assert pressure_single(1 / 3, 3.0, -3.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ContractViolation):
        pressure_single(1.2, 0.0, 0.0)


def test_mc_zero_hamiltonian_exact():
    est, se = mc_pressure(16, 5, 9, _h(0.7, -0.3), 100, as_generator(1))
    assert est == pytest.approx(-(0.7 * 5 - 0.3 * 9) / 16, abs=1e-15) and se == 0.0
    est, se = mc_pressure(16, 8, 8, _h(), 100, as_generator(1))
    assert est == 0.0 and se == 0.0 and math.copysign(1.0, est) == 1.0


def test_mc_single_projection_reduction():
    for N, k in [(10, 3), (32, 16), (7, 7)]:
        est, se = mc_pressure(N, k, 0, _h(1.3), 100, as_generator(2))
        assert est == pytest.approx(pressure_single(k / N, 1.3, 0.0), abs=1e-12) and se == 0.0


def test_mc_constant_psi():
    est, se = mc_pressure(12, 4, 6, _h(psi=F.constant(0.25)), 100, as_generator(3))
    assert est == pytest.approx(-0.25, abs=1e-12) and se == 0.0


def test_mc_reweight_guard():
    h = _h(psi=F.identity())
    with pytest.raises(NumericGuardError):
        mc_pressure(64, 32, 32, h, 100, as_generator(4), method="reweight")


def _exact_identity_pressure(N, k, l):
    # Andreief: E prod exp(-N x_i) is a ratio of Hankel determinants against the Jacobi weight
    from scipy.integrate import quad
    from scipy.special import beta as beta_fn
    a, b = l - k, N - k - l
    num = np.array([[quad(lambda x: x ** (i + j + a) * (1 - x) ** b * math.exp(-N * x), 0, 1,
                          epsabs=0, epsrel=1e-13)[0] for j in range(k)] for i in range(k)])
    den = np.array([[beta_fn(i + j + a + 1, b + 1) for j in range(k)] for i in range(k)])
    return math.log(np.linalg.det(num) / np.linalg.det(den)) / N ** 2


@pytest.mark.parametrize("N,k,l", [(4, 2, 2), (8, 3, 5), (12, 6, 6)])
def test_mc_thermodynamic_matches_exact(N, k, l):
    est = mc_pressure(N, k, l, _h(psi=F.identity()), 2000, as_generator(N))
    assert abs(est.estimate - _exact_identity_pressure(N, k, l)) <= 4 * est.std_error + 1e-4


def test_mc_reweight_matches_exact_when_tame():
    est = mc_pressure(4, 2, 2, _h(psi=F.identity()), 4000, as_generator(5), method="reweight")
    assert abs(est.estimate - _exact_identity_pressure(4, 2, 2)) <= 4 * est.std_error


def test_mc_rank_errors():
    with pytest.raises(InvalidRankError):
        mc_pressure(8, 9, 1, _h(psi=F.identity()), 100, as_generator(0))
    with pytest.raises(InvalidRankError):
        mc_pressure(8, 5, 5, _h(psi=F.identity()), 100, as_generator(0))
    with pytest.raises(ContractViolation):
        mc_pressure(8, 4, 4, _h(), 10, as_generator(0))


def test_mc_deterministic_given_seed():
    h = _h(psi=F.identity())
    assert tuple(mc_pressure(16, 8, 8, h, 200, as_generator(7))) == tuple(mc_pressure(16, 8, 8, h, 200, as_generator(7)))


def test_equilibrium_zero_field_is_arcsine():
    sol = equilibrium_pressure(0.5, 0.5, _h(), 2000)
    assert sol.value == pytest.approx(0.0, abs=1e-6)
    assert total_variation(sol.nu_star, free_pair_state(0.5, 0.5, 2000).nu) <= 0.02
    assert sol.kkt_residual <= 1e-4


@pytest.mark.parametrize("alpha,beta", [(0.5, 0.5), (0.3, 0.6), (0.2, 0.2), (0.7, 0.8)])
def test_equilibrium_zero_field_value(alpha, beta):
    sol = equilibrium_pressure(alpha, beta, _h(), 800)
    assert sol.value == pytest.approx(0.0, abs=1e-4)
    assert sol.nu_star.total_mass == pytest.approx(2 * rho_of(alpha, beta), abs=1e-8)
    assert np.all(sol.nu_star.weights >= 0)
    assert sol.state.alpha == pytest.approx(alpha, abs=1e-8)
    assert sol.state.beta == pytest.approx(beta, abs=1e-8)


@pytest.mark.parametrize("alpha,beta", [(0.5, 0.5), (0.3, 0.6), (0.8, 0.4)])
def test_constant_shift(alpha, beta):
    psi = F.power(2.0)
    h = _h(0.2, -0.1, psi)
    c = 0.37
    w0, w1 = boundary_weights(alpha, beta)
    base = equilibrium_pressure(alpha, beta, h, GRID).value
    shifted = equilibrium_pressure(alpha, beta, h.shifted(c), GRID).value
    assert shifted == pytest.approx(base - c * (w0 + w1 + rho_of(alpha, beta)), abs=1e-9)


def test_constant_psi_agrees_with_mc():
    h = _h(psi=F.constant(0.6))
    assert equilibrium_pressure(0.5, 0.5, h, GRID).value == pytest.approx(
        mc_pressure(10, 5, 5, h, 100, as_generator(0)).estimate, abs=1e-6)


def test_monotonicity():
    lo = _h(0.1, 0.0, F.identity())
    hi = _h(0.2, 0.1, F.polynomial([0.1, 1.0, 0.5]))
    for a, b in [(0.5, 0.5), (0.3, 0.6)]:
        assert equilibrium_pressure(a, b, lo, GRID).value >= equilibrium_pressure(a, b, hi, GRID).value


def _random_h(rng):
    c = rng.uniform(-1, 1, 4)
    return _h(rng.uniform(-1, 1), rng.uniform(-1, 1), F.polynomial(list(c)))


def _sup_diff(h1, h2):
    x = np.linspace(0, 1, 4097)
    return abs(h1.A - h2.A) + abs(h1.B - h2.B) + float(np.max(np.abs(h1.psi(x) - h2.psi(x))))


def test_convexity_and_lipschitz():
    rng = as_generator(21)
    for _ in range(50):
        a, b = rng.uniform(0.05, 0.95, 2)
        h1, h2 = _random_h(rng), _random_h(rng)
        v1 = equilibrium_pressure(a, b, h1, 200).value
        v2 = equilibrium_pressure(a, b, h2, 200).value
        vm = equilibrium_pressure(a, b, PressureHamiltonian.combine(h1, h2, 0.5), 200).value
        assert vm <= 0.5 * (v1 + v2) + 1e-6
        assert abs(v1 - v2) <= _sup_diff(h1, h2) + 1e-9


def test_history_monotone_and_kkt():
    sol = equilibrium_pressure(0.3, 0.6, _h(psi=F.power(3.0)), 600)
    assert np.all(np.diff(sol.history) >= -1e-12)
    assert sol.kkt_residual <= 1e-4


def test_identity_field_value_converges():
    vals = [equilibrium_pressure(0.5, 0.5, _h(psi=F.identity()), g).value for g in (300, 1000, 2000)]
    assert abs(vals[-1] - vals[-2]) < 1e-6


def test_degenerate_rho():
    sol = equilibrium_pressure(1.0, 0.3, _h(0.5, 0.2, F.identity()), 100)
    assert sol.nu_star.total_mass == 0.0
    assert sol.value == pytest.approx(-0.5 - 0.2 * 0.3 - 0.3 * 1.0, abs=1e-12)


def test_equilibrium_validation():
    with pytest.raises(ContractViolation):
        equilibrium_pressure(0.5, 0.5, _h(), 50)
    with pytest.raises(ContractViolation):
        equilibrium_pressure(1.5, 0.5, _h(), 200)


def test_max_over_traces():
    h = _h(1.0, 0.0)
    v, (a, b) = pressure_max_over_traces(h, [0.0, 0.5, 1.0], [0.25, 0.75], 100)
    assert a == 0.0 and v == pytest.approx(0.0, abs=1e-4)


def test_tau_of_h_free_identity():
    st_ = free_pair_state(0.5, 0.5, 2000)
    assert tau_of_h(st_, _h(1.0, 2.0, F.identity())) == pytest.approx(0.5 + 1.0 + 0.25, abs=1e-6)


def test_eta_zero_family():
    st_ = free_pair_state(0.3, 0.6, 500)
    v = eta_pair_bound(st_, [_h()], 300)
    assert v == pytest.approx(0.0, abs=1e-4)
    assert v >= chi_proj_pair(st_).chi - 1e-4
    with pytest.raises(ContractViolation):
        eta_pair_bound(st_, [])


def test_eta_free_state_bound():
    st_ = free_pair_state(0.5, 0.5, 1000)
    fam = [_h(), _h(psi=F.identity()), _h(0.3, -0.2, F.power(2.0))]
    assert eta_pair_bound(st_, fam, 500) >= -1e-4


def test_duality_sandwich_conjugate_field():
    st_ = pushforward_state(free_pair_state(0.5, 0.5, 1000), F.power(2.0))
    chi = chi_proj_pair(st_).chi
    fam = [_h(), conjugate_field(st_)]
    eta = eta_pair_bound(st_, fam, 1000)
    assert chi - 1e-4 <= eta <= chi + 0.01
