"""Free pressure of a projection pair.

For ``h = A e + B f + psi(efe)`` and traces ``(alpha, beta)`` the pressure is
the limit of ``N^-2 log E exp(-N Tr h(P, Q))`` over Haar projections of
ranks ``~ alpha N`` and ``~ beta N``. It equals

    -A alpha - B beta - (1 - min(alpha, beta)) psi(0) - max(alpha + beta - 1, 0) psi(1)
    + sup_nu { -1/2 int psi dnu + 1/4 Sigma(nu) + a int log x dnu + b int log(1 - x) dnu } - C

with ``a = |alpha - beta|/2``, ``b = |alpha + beta - 1|/2`` and the supremum
over measures of mass ``2 rho`` on (0, 1). The maximiser is the equilibrium
measure of the field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from . import kernels
from .entropy_functionals import c_constant
from .errors import ContractViolation, ConvergenceError, InvalidRankError, NumericGuardError
from .grassmann_sim import GibbsChain, GibbsPairSpec, sample_pair_eigenvalues
from .linalg_core import as_generator, spawn
from .two_projection_model import FunctionOnUnitInterval, IntervalMeasure, PairState, rho_of, \
    theta_grid

KKT_TOL = 1e-4
REWEIGHT_GUARD = 40.0


@dataclass(frozen=True)
class PressureHamiltonian:
    """``h = A e + B f + psi(efe)``."""

    A: float = 0.0
    B: float = 0.0
    psi: FunctionOnUnitInterval = field(default_factory=lambda: FunctionOnUnitInterval.constant(0.0))

    def __post_init__(self):
        self.psi.check_finite()

    def oscillation(self, n: int = 4097) -> float:
        v = self.psi(np.linspace(0.0, 1.0, n))
        return float(np.max(v) - np.min(v))

    def shifted(self, c: float) -> "PressureHamiltonian":
        """Same ``A, B`` with ``psi + c``."""
        psi = self.psi
        return PressureHamiltonian(self.A, self.B, FunctionOnUnitInterval(
            lambda x: psi(x) + c, psi.d1_bound, psi.d2_bound, psi.monotone, psi.derivative,
            psi.second_derivative, name=f"{psi.name}+{c:g}"))

    @staticmethod
    def combine(h1: "PressureHamiltonian", h2: "PressureHamiltonian", t: float) -> "PressureHamiltonian":
        """Convex combination ``(1 - t) h1 + t h2``."""
        p1, p2 = h1.psi, h2.psi
        return PressureHamiltonian((1 - t) * h1.A + t * h2.A, (1 - t) * h1.B + t * h2.B,
                                   FunctionOnUnitInterval(lambda x: (1 - t) * p1(x) + t * p2(x),
                                                          name=f"mix({p1.name},{p2.name})"))


def pressure_single(alpha: float, h1: float, h2: float) -> float:
    """Pressure of one projection of trace ``alpha`` for ``h = h1 p + h2 (1 - p)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ContractViolation("alpha must lie in [0, 1]")
    return -alpha * h1 - (1.0 - alpha) * h2


def boundary_weights(alpha: float, beta: float) -> tuple[float, float]:
    """Coefficients of ``psi(0)`` and ``psi(1)`` outside the supremum."""
    return 1.0 - min(alpha, beta), max(alpha + beta - 1.0, 0.0)


def tau_of_h(state: PairState, h: PressureHamiltonian) -> float:
    """Trace of ``h`` in ``state``.

    ``tau(psi(efe))`` uses the spectral law of ``efe``: an atom at 0 of mass
    ``a00 + a01 + a10 + |nu|/2``, an atom at 1 of mass ``a11`` and ``nu/2``
    on the interior.
    """
    psi = h.psi
    p0, p1 = float(psi(np.array(0.0))), float(psi(np.array(1.0)))
    nu = state.nu
    interior = 0.5 * nu.integrate(psi) + 0.5 * nu.total_mass * p0
    return (h.A * state.alpha + h.B * state.beta
            + (state.a00 + state.a01 + state.a10) * p0 + state.a11 * p1 + interior)


# ---------------------------------------------------------------------------
# equilibrium measure


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    """Maximiser and value of the pressure variational problem.

    Attributes
    ----------
    nu_star : IntervalMeasure
        Maximising measure (density kind, mass ``2 rho``).
    value : float
        Pressure ``pi_(alpha, beta)(h)``.
    kkt_residual : float
        ``max g - min_{support} g`` for the effective potential ``g``.
    iterations : int
        Frank-Wolfe plus Newton iterations.
    history : ndarray
        Objective after each iteration (nondecreasing).
    state : PairState
        Maximising pair state.
    """

    nu_star: IntervalMeasure
    value: float
    kkt_residual: float
    iterations: int
    history: np.ndarray
    state: PairState

    def to_rows(self) -> list[dict]:
        c = self.nu_star.cells
        return [{"x": float(x), "weight": float(w), "cell_lo": float(a), "cell_hi": float(b)}
                for x, w, (a, b) in zip(self.nu_star.nodes, self.nu_star.weights, c)]


@dataclass
class _Problem:
    K: np.ndarray
    c: np.ndarray
    mass: float

    def objective(self, w):
        return 0.25 * float(w @ (self.K @ w)) + float(self.c @ w)

    def gradient(self, w):
        return 0.5 * (self.K @ w) + self.c


def _kkt(g, w):
    sup = w > 0
    return float(np.max(g) - np.min(g[sup]))


def _pairwise_fw(prob: _Problem, w, tol, max_iter, history):
    K, g = prob.K, prob.gradient(w)
    f = prob.objective(w)
    it = 0
    for it in range(1, max_iter + 1):
        s = int(np.argmax(g))
        sup = np.flatnonzero(w > 0)
        v = int(sup[np.argmin(g[sup])])
        gap = g[s] - g[v]
        if gap <= tol:
            break
        curv = K[s, s] + K[v, v] - 2.0 * K[s, v]
        wv = w[v]
        gam = min(-2.0 * gap / curv, wv) if curv < 0 else wv
        w[s] += gam
        w[v] = 0.0 if gam >= wv else wv - gam
        g += 0.5 * gam * (K[:, s] - K[:, v])
        f_new = f + gam * gap + 0.25 * gam * gam * curv
        f = max(f_new, f)
        history.append(f)
    return w, it


def _newton_active_set(prob: _Problem, w, tol, max_iter, history):
    K, c, M = prob.K, prob.c, prob.mass
    S = w > 0
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(S)
        H = -0.5 * K[np.ix_(idx, idx)]
        try:
            cf = cho_factor(H)
        except LinAlgError:
            break
        z1 = cho_solve(cf, c[idx])
        z2 = cho_solve(cf, np.ones(idx.size))
        lam = (np.sum(z1) - M) / np.sum(z2)
        target = z1 - lam * z2
        cur = w[idx]
        if np.all(target >= 0):
            w_new = w.copy()
            w_new[idx] = target
            if prob.objective(w_new) + 1e-15 < prob.objective(w):
                break
            w = w_new
            g = prob.gradient(w)
            off = np.flatnonzero(~S)
            history.append(prob.objective(w))
            if off.size == 0:
                break
            viol = g[off] - lam
            j = int(np.argmax(viol))
            if viol[j] <= tol:
                break
            S[off[j]] = True
        else:
            neg = target < cur
            t = np.min(np.where(neg & (target < 0), cur / np.where(neg, cur - target, 1.0), np.inf))
            t = min(max(t, 0.0), 1.0)
            step = cur + t * (target - cur)
            hit = step <= 1e-15 * M
            step[hit] = 0.0
            w = w.copy()
            w[idx] = step
            S[idx[hit]] = False
            history.append(prob.objective(w))
    return w, it


def equilibrium_pressure(alpha: float, beta: float, h: PressureHamiltonian, grid_size: int = 2000,
                         tol: float = 1e-10, max_iter: int = 5000) -> EquilibriumSolution:
    """Solve the pressure variational problem on a discretised mass simplex.

    The measure is piecewise constant on ``grid_size`` cells of [0, 1]
    (uniform in ``theta`` with ``x = sin^2(theta/2)``). The objective
    ``1/4 w^T K w + c^T w`` uses the exact cell averages ``K`` of
    ``log|x - y|``; ``-K`` is positive definite, so the problem is strictly
    concave. Pairwise Frank-Wolfe with exact line search finds the support,
    and Newton steps on the support polish the solution.

    Raises
    ------
    ConvergenceError
        If the KKT residual is above 1e-4 after ``max_iter`` iterations;
        ``best`` holds the last iterate.
    """
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ContractViolation("traces must lie in [0, 1]")
    if grid_size < 100:
        raise ContractViolation("grid_size must be at least 100")
    psi = h.psi
    psi.check_finite()
    w0, w1 = boundary_weights(alpha, beta)
    p0, p1 = float(psi(np.array(0.0))), float(psi(np.array(1.0)))
    outside = -h.A * alpha - h.B * beta - w0 * p0 - w1 * p1 - c_constant(alpha, beta)
    rho = rho_of(alpha, beta)
    corners_nu = _free_like_corners(alpha, beta)
    if rho <= 0.0:
        st = PairState(alpha, beta, *corners_nu, IntervalMeasure.empty())
        return EquilibriumSolution(IntervalMeasure.empty(), outside, 0.0, 0, np.zeros(1), st)
    _, x, e = theta_grid(grid_size)
    lo, hi = np.ascontiguousarray(e[:-1]), np.ascontiguousarray(e[1:])
    K = kernels.cell_log_kernel(lo, hi)
    a = 0.5 * abs(alpha - beta)
    b = 0.5 * abs(alpha + beta - 1.0)
    c = -0.5 * np.asarray(psi(x), dtype=np.float64)
    if a > 0:
        c = c + a * np.log(x)
    if b > 0:
        c = c + b * np.log1p(-x)
    M = 2.0 * rho
    prob = _Problem(K, c, M)
    w = np.full(grid_size, M / grid_size)
    history = [prob.objective(w)]
    w, it1 = _pairwise_fw(prob, w, 1e-7, max_iter, history)
    w, it2 = _newton_active_set(prob, w, tol, 200, history)
    w = np.clip(w, 0.0, None)
    w *= M / np.sum(w)
    g = prob.gradient(w)
    res = _kkt(g, w)
    if res > tol:
        # Newton left a small residual; a few more pairwise steps clean it up
        w, it3 = _pairwise_fw(prob, w, tol, max_iter, history)
        it2 += it3
        g = prob.gradient(w)
        res = _kkt(g, w)
    fstar = prob.objective(w)
    keep = w > 0
    nu = IntervalMeasure(x[keep], w[keep], cells=np.column_stack((lo[keep], hi[keep])))
    m = nu.total_mass
    a11, a10, a01, a00 = corners_nu
    a00 = max(1.0 - a11 - a10 - a01 - m, 0.0)
    st = PairState(a11 + a10 + 0.5 * m, a11 + a01 + 0.5 * m, a11, a10, a01, a00, nu)
    sol = EquilibriumSolution(nu, outside + fstar, res, it1 + it2, np.asarray(history), st)
    if res > KKT_TOL:
        raise ConvergenceError(f"KKT residual {res:.3g} after {it1 + it2} iterations", best=sol)
    return sol


def _free_like_corners(alpha, beta):
    return (max(alpha + beta - 1.0, 0.0), max(alpha - beta, 0.0),
            max(beta - alpha, 0.0), max(1.0 - alpha - beta, 0.0))


def pressure_max_over_traces(h: PressureHamiltonian, alphas, betas, grid_size: int = 500):
    """Maximum of the pressure over a grid of traces, with its location."""
    best = (-math.inf, None)
    for al in alphas:
        for be in betas:
            v = equilibrium_pressure(al, be, h, grid_size).value
            if v > best[0]:
                best = (v, (float(al), float(be)))
    return best


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class PressureEstimate:
    """Finite-``N`` pressure estimate; unpacks as ``(estimate, std_error)``."""

    estimate: float
    std_error: float
    method: str
    N: int

    def __iter__(self):
        return iter((self.estimate, self.std_error))


def _normalise_ranks(N: int, k: int, l: int):
    if not (0 <= k <= N and 0 <= l <= N):
        raise InvalidRankError(f"ranks must lie in [0, N], got k={k}, l={l}, N={N}")
    kk, ll = min(k, l), max(k, l)
    if kk > 0 and kk + ll > N:
        raise InvalidRankError("Monte Carlo pressure needs k + l <= N")
    return kk, ll


def _jackknife_logmeanexp(v: np.ndarray) -> tuple[float, float]:
    n = v.size
    m = float(np.max(v))
    e = np.exp(v - m)
    tot = float(np.sum(e))
    est = m + math.log(tot / n)
    if n < 2 or np.all(v == v[0]):
        return est, 0.0
    loo = m + np.log((tot - e) / (n - 1))
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return est, se


def _batch_means(v: np.ndarray, n_batches: int = 20) -> tuple[float, float]:
    n = v.size
    nb = min(n_batches, n)
    size = n // nb
    b = v[: nb * size].reshape(nb, size).mean(axis=1)
    se = float(np.std(b, ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    return float(np.mean(v)), se


def mc_pressure(N: int, k: int, l: int, h: PressureHamiltonian, samples: int, rng,
                method: str = "thermodynamic", n_nodes: int = 8, burn_in: int = 1000,
                thin: int = 5) -> PressureEstimate:
    """Monte Carlo estimate of ``N^-2 log E exp(-N Tr h(P, Q))``.

    ``Tr h = A k + B l + sum of psi over all N eigenvalues of PQP``; the
    ``N - min(k, l)`` zero eigenvalues contribute ``psi(0)`` each, so only
    the Jacobi eigenvalues ``x`` are random, through ``S = sum psi(x_i)``.

    Parameters
    ----------
    method : {"thermodynamic", "reweight"}
        ``"reweight"`` averages ``exp(-N S)`` over exact samples of the Haar
        pair law (jackknife error). Its variance explodes with
        ``N * osc(psi)``, so it refuses when that exceeds 40.
        ``"thermodynamic"`` uses ``log E_0 exp(-N S) = -N int_0^1 E_s[S] ds``
        where ``E_s`` is the law weighted by ``exp(-s N S)``; the ``s``
        integral is Gauss-Legendre with ``n_nodes`` nodes and each ``E_s[S]``
        is a Metropolis average over ``samples`` sweeps spaced ``thin`` apart
        (batch-means error).

    Raises
    ------
    NumericGuardError
        ``method="reweight"`` with ``N * osc(psi) > 40``.
    InvalidRankError
        Ranks outside ``[0, N]`` or ``min(k, l) + max(k, l) > N``.
    """
    if samples < 100:
        raise ContractViolation("samples must be at least 100")
    if method not in ("thermodynamic", "reweight"):
        raise ContractViolation(f"unknown method {method!r}")
    kk, ll = _normalise_ranks(N, k, l)
    rng = as_generator(rng)
    psi = h.psi
    p0 = float(psi(np.array(0.0)))
    base = -(h.A * k + h.B * l + (N - kk) * p0) / N
    osc = h.oscillation()
    if kk == 0 or osc == 0.0:
        return PressureEstimate(base - kk * p0 / N + 0.0, 0.0, method, N)
    if method == "reweight":
        if N * osc > REWEIGHT_GUARD:
            raise NumericGuardError(
                f"N * osc(psi) = {N * osc:.3g} exceeds {REWEIGHT_GUARD:g}; reweighting would be "
                "dominated by rare samples. Use method='thermodynamic' or the equilibrium solver.")
        S = np.array([float(np.sum(psi(sample_pair_eigenvalues(N, kk, ll, rng))))
                      for _ in range(samples)])
        lme, se = _jackknife_logmeanexp(-N * S)
        return PressureEstimate(base + lme / N**2, se / N**2, method, N)
    s_nodes, s_w = np.polynomial.legendre.leggauss(n_nodes)
    s_nodes, s_w = 0.5 * (s_nodes + 1.0), 0.5 * s_w
    child = spawn(rng, n_nodes)
    means, ses = np.zeros(n_nodes), np.zeros(n_nodes)
    for q in range(n_nodes):
        spec = GibbsPairSpec(N, kk, ll, psi, strength=float(s_nodes[q]))
        chain = GibbsChain(spec, child[q])
        chain.run(burn_in)
        traj = chain.run(samples * thin)[thin - 1::thin]
        S = np.sum(psi(traj), axis=1)
        means[q], ses[q] = _batch_means(S)
    integral = float(np.dot(s_w, means))
    se = float(math.sqrt(np.sum((s_w * ses) ** 2)))
    return PressureEstimate(base - integral / N + 0.0, se / N, method, N)


# ---------------------------------------------------------------------------
# duality


def log_potential(nu: IntervalMeasure, x) -> np.ndarray:
    """``U(x) = int log|x - y| dnu(y)``, exact for the cell model of a density."""
    x = np.asarray(x, dtype=np.float64)
    if nu.cells is None:
        raise ContractViolation("the logarithmic potential needs a density-kind measure")

    def H(u):
        au = np.abs(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = u * np.log(au) - u
        return np.where(au == 0.0, 0.0, r)

    a, b = nu.cells[:, 0], nu.cells[:, 1]
    dens = nu.weights / (b - a)
    out = np.empty(x.shape)
    flat, res = x.reshape(-1), out.reshape(-1)
    for start in range(0, flat.size, 256):
        xs = flat[start:start + 256, None]
        res[start:start + 256] = (H(xs - a[None, :]) - H(xs - b[None, :])) @ dens
    return out


def conjugate_field(state: PairState) -> PressureHamiltonian:
    """Hamiltonian whose equilibrium state is ``state``.

    ``psi(x) = U(x) + 2a log x + 2b log(1 - x)`` makes the effective
    potential constant on the support of ``nu``. Outside the convex hull of
    the support the log terms are frozen at its endpoints, which keeps
    ``psi`` finite and the effective potential no larger there.
    """
    nu = state.nu
    if nu.nodes.size == 0:
        return PressureHamiltonian()
    a = 0.5 * abs(state.alpha - state.beta)
    b = 0.5 * abs(state.alpha + state.beta - 1.0)
    lo, hi = float(nu.cells[0, 0]), float(nu.cells[-1, 1])

    def psi(x):
        x = np.asarray(x, dtype=np.float64)
        v = log_potential(nu, x)
        if a > 0:
            v = v + 2.0 * a * np.log(np.clip(x, max(lo, 1e-300), None))
        if b > 0:
            v = v + 2.0 * b * np.log(np.clip(1.0 - x, max(1.0 - hi, 1e-300), None))
        return v

    return PressureHamiltonian(0.0, 0.0, FunctionOnUnitInterval(psi, name="conjugate"))


def eta_pair_bound(state: PairState, h_family, grid_size: int = 1000) -> float:
    """``min_h tau(h) + pi(h)`` over a family of Hamiltonians (an upper bound for chi)."""
    h_family = list(h_family)
    if not h_family:
        raise ContractViolation("the family must be nonempty")
    vals = [tau_of_h(state, h) + equilibrium_pressure(state.alpha, state.beta, h, grid_size).value
            for h in h_family]
    return float(min(vals))
