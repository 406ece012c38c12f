"""One-dimensional optimal transport and two numerical audits.

``wasserstein2_interval`` couples measures on [0, 1] through their quantile
functions. A density-kind measure is treated as uniform on each cell, so its
quantile function is piecewise linear and the integral of the squared
difference is evaluated exactly on the merged breakpoints.

``surrogate_tci_check`` compares the spectral law of ``pqp`` in a state with
the same law in the free state with equal traces. Because
``||pqp - p'q'p'||_2 <= 2||p - p'||_2 + ||q - q'||_2`` and
``(2a + b)^2 <= 5(a^2 + b^2)``, the classical distance divided by sqrt(5)
bounds the free transport distance from below, which in turn is at most
``sqrt(-2 chi)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .entropy_functionals import chi_proj_pair
from .errors import ContractViolation
from .grassmann_sim import sample_haar_pair
from .linalg_core import as_generator, grassmann_geodesic, hermitian_eigen, hs_norm, \
    random_tangent
from .two_projection_model import FunctionOnUnitInterval, IntervalMeasure, PairState, \
    free_pair_state

MASS_TOL = 1e-10


def _quantile_pieces(mu: IntervalMeasure):
    """Breakpoints ``t`` and end values ``lo, hi`` of a piecewise linear quantile function."""
    ws, lo, hi = [], [], []
    if mu.atom0 > 0:
        ws.append(mu.atom0), lo.append(0.0), hi.append(0.0)
    if mu.cells is None:
        for x, w in zip(mu.nodes, mu.weights):
            ws.append(w), lo.append(x), hi.append(x)
    else:
        for (a, b), w in zip(mu.cells, mu.weights):
            ws.append(w), lo.append(a), hi.append(b)
    if mu.atom1 > 0:
        ws.append(mu.atom1), lo.append(1.0), hi.append(1.0)
    ws = np.asarray(ws, dtype=np.float64)
    t = np.concatenate(([0.0], np.cumsum(ws)))
    return t, np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)


def _quantile_at(t, lo, hi, s, side):
    # value of the quantile on the piece containing s (side selects the piece at a break)
    j = np.searchsorted(t, s, side=side) - 1
    j = np.clip(j, 0, lo.size - 1)
    span = t[j + 1] - t[j]
    frac = np.where(span > 0, (s - t[j]) / np.where(span > 0, span, 1.0), 0.0)
    return lo[j] + (hi[j] - lo[j]) * np.clip(frac, 0.0, 1.0)


def wasserstein2_interval(mu1: IntervalMeasure, mu2: IntervalMeasure) -> float:
    """Quadratic Wasserstein distance between equal-mass measures on [0, 1].

    Raises
    ------
    ContractViolation
        If the total masses differ by more than 1e-10.
    """
    m1, m2 = mu1.total_mass, mu2.total_mass
    if abs(m1 - m2) > MASS_TOL:
        raise ContractViolation(f"masses differ: {m1} vs {m2}")
    if m1 == 0:
        return 0.0
    t1, lo1, hi1 = _quantile_pieces(mu1)
    t2, lo2, hi2 = _quantile_pieces(mu2)
    t1[-1] = t2[-1] = m = max(m1, m2)
    br = np.unique(np.concatenate((t1, t2)))
    a, b = br[:-1], br[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    # on each merged interval both quantiles are linear; Simpson is exact for the square
    d_left = _quantile_at(t1, lo1, hi1, a, "right") - _quantile_at(t2, lo2, hi2, a, "right")
    mid = 0.5 * (a + b)
    d_mid = _quantile_at(t1, lo1, hi1, mid, "right") - _quantile_at(t2, lo2, hi2, mid, "right")
    d_right = _quantile_at(t1, lo1, hi1, b, "left") - _quantile_at(t2, lo2, hi2, b, "left")
    val = np.sum((b - a) * (d_left ** 2 + 4.0 * d_mid ** 2 + d_right ** 2) / 6.0)
    return math.sqrt(max(float(val), 0.0))


def pqp_distribution(state: PairState) -> IntervalMeasure:
    """Spectral law of ``pqp`` in ``state`` (a probability measure on [0, 1])."""
    nu = state.nu
    half = 0.5 * nu.weights
    atom0 = state.a00 + state.a01 + state.a10 + 0.5 * nu.total_mass
    cells = nu.cells
    return IntervalMeasure(nu.nodes, half, atom0, state.a11, cells)


@dataclass(frozen=True)
class TransportReport:
    """Both sides of the surrogate transport inequality.

    ``holds`` is ``slack >= -1e-9``.
    """

    lhs: float
    rhs: float
    slack: float
    holds: bool

    def to_dict(self) -> dict:
        return {k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
                for k, v in asdict(self).items()}


def surrogate_tci_check(state: PairState, n_nodes: int = 4000) -> TransportReport:
    """Check ``W2(pqp law, free pqp law)/sqrt(5) <= sqrt(-2 chi)``."""
    ref = free_pair_state(state.alpha, state.beta, n_nodes)
    lhs = wasserstein2_interval(pqp_distribution(state), pqp_distribution(ref)) / math.sqrt(5.0)
    chi = chi_proj_pair(state).chi
    rhs = math.inf if math.isinf(chi) else math.sqrt(max(-2.0 * chi, 0.0))
    slack = rhs - lhs
    return TransportReport(float(lhs), float(rhs), float(slack), bool(slack >= -1e-9))


def arcsine_window_state(a: float, b: float, n_nodes: int = 4000) -> PairState:
    """State at ``alpha = beta = 1/2`` whose ``nu`` is the arcsine law restricted to ``(a, b)``.

    The restriction is renormalised to unit mass, corners are zero.
    """
    if not 0.0 <= a < b <= 1.0:
        raise ContractViolation("need 0 <= a < b <= 1")
    ta, tb = 2.0 * math.asin(math.sqrt(a)), 2.0 * math.asin(math.sqrt(b))
    # arcsine is uniform in theta = 2 asin(sqrt(x)): cells of equal theta width carry equal mass
    te = np.linspace(ta, tb, n_nodes + 1)
    th = 0.5 * (te[:-1] + te[1:])
    x = np.sin(0.5 * th) ** 2
    e = np.sin(0.5 * te) ** 2
    w = np.full(n_nodes, 1.0 / n_nodes)
    nu = IntervalMeasure(x, w, cells=np.column_stack((e[:-1], e[1:])))
    return PairState(0.5, 0.5, 0.0, 0.0, 0.0, 0.0, nu)


def beta_density_state(a: float, b: float, n_nodes: int = 4000) -> PairState:
    """State at ``alpha = beta = 1/2`` with ``nu`` the Beta(a, b) law, ``a, b >= 1/2``."""
    if a < 0.5 or b < 0.5:
        raise ContractViolation("Beta parameters must be at least 1/2")

    def dens(x):
        return x ** (a - 1.0) * (1.0 - x) ** (b - 1.0)

    nu = IntervalMeasure.from_density(dens, n_nodes, 0.0, 1.0, mass=1.0)
    return PairState(0.5, 0.5, 0.0, 0.0, 0.0, 0.0, nu)


def tci_family(n_nodes: int = 2000) -> list[PairState]:
    """Twenty compatible states at ``alpha = beta = 1/2`` used to exercise the check.

    At these traces compatibility forces all corners to vanish, so the states
    differ only through ``nu``: eight arcsine windows, six pushforwards of
    the free state by increasing maps of [0, 1] onto itself and six Beta laws.
    """
    from .two_projection_model import pushforward_state

    out = []
    for a, b in [(0.1, 0.9), (0.05, 0.95), (0.2, 0.8), (0.0, 0.5), (0.5, 1.0),
                 (0.3, 0.7), (0.01, 0.6), (0.25, 0.99)]:
        out.append(arcsine_window_state(a, b, n_nodes))
    free = free_pair_state(0.5, 0.5, n_nodes)
    for p in (0.5, 0.75, 1.5, 2.0, 3.0):
        out.append(pushforward_state(free, FunctionOnUnitInterval.power(p)))
    out.append(pushforward_state(free, FunctionOnUnitInterval.polynomial([0.0, 0.5, 0.5])))
    for a, b in [(1.0, 1.0), (0.75, 0.75), (2.0, 2.0), (0.6, 1.2), (1.5, 0.8), (3.0, 3.0)]:
        out.append(beta_density_state(a, b, n_nodes))
    return out


def _trace_functional(psi: FunctionOnUnitInterval, C1, C2) -> float:
    M = C1 @ C2 @ C1
    lam = hermitian_eigen(0.5 * (M + M.conj().T))[0]
    lam = np.clip(lam, 0.0, 1.0)
    return float(np.sum(psi(lam)))


@dataclass(frozen=True)
class HessianTrial:
    """One geodesic pair: second derivative, the bound, and their ratio."""

    second_derivative: float
    bound: float
    ratio: float


def hessian_trial(psi: FunctionOnUnitInterval, P, Q, X1, X2, h: float = 1e-3) -> HessianTrial:
    """Finite-difference second derivative of ``t -> N Tr psi(C1 C2 C1)`` at 0.

    ``C_i`` are the geodesics from ``P, Q`` with velocities ``X_i``. Central
    differences at ``h`` and ``h/2`` are combined by Richardson extrapolation.
    """
    N = P.shape[0]
    n1, n2 = hs_norm(X1), hs_norm(X2)
    if n1 == 0.0 and n2 == 0.0:
        return HessianTrial(0.0, 0.0, 0.0)

    def f(t):
        return N * _trace_functional(psi, grassmann_geodesic(P, X1, t), grassmann_geodesic(Q, X2, t))

    f0 = f(0.0)

    def d2(step):
        return (f(step) - 2.0 * f0 + f(-step)) / (step * step)

    second = (4.0 * d2(0.5 * h) - d2(h)) / 3.0
    bound = N * (6.0 * psi.d1_bound + 4.5 * psi.d2_bound) * (n1 * n1 + n2 * n2)
    ratio = abs(second) / bound if bound > 0 else 0.0
    return HessianTrial(float(second), float(bound), float(ratio))


def hessian_bound_check(N: int, k: int, l: int, psi: FunctionOnUnitInterval, trials: int, rng,
                        h: float = 1e-3, return_trials: bool = False):
    """Worst ratio of the geodesic second derivative to ``N(6|psi'| + 9/2|psi''|)(|X1|^2 + |X2|^2)``.

    Each trial draws independent Haar projections of ranks ``k`` and ``l``
    and unit tangent vectors at each.

    Raises
    ------
    ContractViolation
        If ``psi`` lacks ``d1_bound`` or ``d2_bound``.
    """
    if psi.d1_bound is None or psi.d2_bound is None:
        raise ContractViolation("psi needs d1_bound and d2_bound")
    rng = as_generator(rng)
    out = []
    for _ in range(trials):
        P, Q = sample_haar_pair(N, k, l, rng)
        X1 = random_tangent(P, rng)
        X2 = random_tangent(Q, rng)
        out.append(hessian_trial(psi, P, Q, X1, X2, h))
    worst = max((t.ratio for t in out), default=0.0)
    return (worst, out) if return_trials else worst
