"""Closed-form entropy of a projection pair and the change-of-variable formula.

For a pair state with traces ``alpha``, ``beta``, interior measure ``nu``
and ``rho = min(alpha, beta, 1 - alpha, 1 - beta)``, the entropy is

    chi = 1/4 Sigma(nu) + |alpha - beta|/2 * int log x dnu
          + |alpha + beta - 1|/2 * int log(1 - x) dnu - C(alpha, beta)

when ``a00 * a11 = a01 * a10 = 0``, and ``-inf`` otherwise. Here
``Sigma(nu)`` is the logarithmic energy and ``C = rho^2 B(u/rho, v/rho)``
with ``u = |alpha - beta|``, ``v = |alpha + beta - 1|``.

Minus infinity is represented by ``-math.inf``; it propagates through sums.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import ContractViolation, DomainError
from .two_projection_model import FunctionOnUnitInterval, IntervalMeasure, PairState, rho_of

NEG_INF = -math.inf
COMPAT_TOL = 1e-9
NEAR_DIAGONAL = 1e-7


def _xlogx2(x: float) -> float:
    """``x^2/2 * log x`` with the value 0 at 0."""
    return 0.0 if x == 0.0 else 0.5 * x * x * math.log(x)


def b_function(s: float, t: float) -> float:
    """The function ``B(s, t)`` entering the entropy constant.

    ``B(s,t) = (1+s)^2/2 log(1+s) - s^2/2 log s + (1+t)^2/2 log(1+t)
    - t^2/2 log t - (2+s+t)^2/2 log(2+s+t) + (1+s+t)^2/2 log(1+s+t)``,
    with ``0 log 0 = 0``.

    Raises
    ------
    DomainError
        If ``s`` or ``t`` is negative.
    """
    s, t = float(s), float(t)
    if s < 0 or t < 0 or math.isnan(s) or math.isnan(t):
        raise DomainError("B(s, t) needs s, t >= 0")
    return (_xlogx2(1.0 + s) - _xlogx2(s) + _xlogx2(1.0 + t) - _xlogx2(t)
            - _xlogx2(2.0 + s + t) + _xlogx2(1.0 + s + t))


def c_constant(alpha: float, beta: float) -> float:
    """The constant ``C = rho^2 B(u/rho, v/rho)``, zero when ``rho = 0``.

    Evaluated in the homogeneous form

        (rho+u)^2/2 log(rho+u) - u^2/2 log u + (rho+v)^2/2 log(rho+v)
        - v^2/2 log v - (2rho+u+v)^2/2 log(2rho+u+v)
        + (rho+u+v)^2/2 log(rho+u+v) + rho^2/2 log rho

    which equals ``rho^2 B(u/rho, v/rho)`` and never divides by ``rho``.
    """
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise DomainError("traces must lie in [0, 1]")
    rho = rho_of(alpha, beta)
    if rho <= 0.0:
        return 0.0
    u = abs(alpha - beta)
    v = abs(alpha + beta - 1.0)
    return (_xlogx2(rho + u) - _xlogx2(u) + _xlogx2(rho + v) - _xlogx2(v)
            - _xlogx2(2.0 * rho + u + v) + _xlogx2(rho + u + v) + _xlogx2(rho))


def log_energy(nu: IntervalMeasure, mode: str = "exact") -> float:
    """Logarithmic energy ``Sigma(nu) = iint log|x - y| dnu(x) dnu(y)``.

    Parameters
    ----------
    nu : IntervalMeasure
        Interior measure (endpoint atoms must be zero).
    mode : {"exact", "offdiag"}
        For the density kind both modes integrate the cell model exactly.
        For atoms, ``"exact"`` returns ``-inf`` as soon as any atom carries
        mass, while ``"offdiag"`` drops the diagonal and returns
        ``sum_{i != j} w_i w_j log|x_i - x_j|``.
    """
    if mode not in ("exact", "offdiag"):
        raise ValueError("mode must be 'exact' or 'offdiag'")
    if nu.atom0 or nu.atom1:
        raise ContractViolation("log_energy needs an interior measure")
    if nu.nodes.size == 0:
        return 0.0
    if nu.cells is not None:
        c = nu.cells
        return float(kernels.cell_log_energy(np.ascontiguousarray(c[:, 0]),
                                             np.ascontiguousarray(c[:, 1]), nu.weights))
    if mode == "exact":
        return NEG_INF
    return float(kernels.offdiag_log_energy(nu.nodes, nu.weights))


def _xlogy_sum(w, f) -> float:
    with np.errstate(divide="ignore"):
        return float(np.dot(w, np.log(f)))


@dataclass(frozen=True)
class EntropyReport:
    """Entropy value with its parts.

    ``chi = sigma_term + logx_term + log1mx_term - c_term`` when
    ``compatible``; otherwise ``chi`` is ``-inf``.
    """

    chi: float
    sigma_term: float
    logx_term: float
    log1mx_term: float
    c_term: float
    rho: float
    compatible: bool

    def to_dict(self) -> dict:
        return {k: _json_float(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


def _json_float(v: float):
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return v


def is_compatible(state: PairState, tol: float = COMPAT_TOL) -> bool:
    """True when ``a00 a11 = 0`` and ``a01 a10 = 0`` within ``tol``."""
    return state.a00 * state.a11 <= tol and state.a01 * state.a10 <= tol


def chi_proj_pair(state: PairState, energy_mode: str = "exact") -> EntropyReport:
    """Free entropy of a projection pair from its canonical model."""
    a, b = state.alpha, state.beta
    u, v = abs(a - b), abs(a + b - 1.0)
    nu = state.nu
    sigma = 0.25 * log_energy(nu, energy_mode)
    w, x = nu.weights, nu.nodes
    lx = 0.5 * u * _xlogy_sum(w, x) if u > 0 else 0.0
    l1x = 0.5 * v * _xlogy_sum(w, 1.0 - x) if v > 0 else 0.0
    c = c_constant(min(max(a, 0.0), 1.0), min(max(b, 0.0), 1.0))
    compatible = is_compatible(state)
    chi = sigma + lx + l1x - c if compatible else NEG_INF
    return EntropyReport(float(chi), float(sigma), float(lx), float(l1x), float(c),
                         state.rho, bool(compatible))


def divided_quotient(psi: FunctionOnUnitInterval, x, y) -> np.ndarray:
    """``(psi(x) - psi(y)) / (x - y)`` with ``psi'`` on and near the diagonal."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x, y = np.broadcast_arrays(x, y)
    d = x - y
    near = np.abs(d) < NEAR_DIAGONAL
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (psi(x) - psi(y)) / np.where(near, 1.0, d)
    if np.any(near):
        q = np.where(near, psi.d1(0.5 * (x + y)), q)
    return q


def change_of_variable_delta(state: PairState, psi: FunctionOnUnitInterval) -> float:
    """Entropy change when ``f`` is replaced by ``q(psi; e)``.

    Returns

        1/4 iint log psi^[1](x, y) dnu dnu
        + |alpha - beta|/2 * int log(psi(x)/x) dnu
        + |alpha + beta - 1|/2 * int log((1 - psi(x))/(1 - x)) dnu

    where ``psi^[1]`` is the divided quotient.

    Raises
    ------
    ContractViolation
        If ``psi`` is not nondecreasing.
    """
    grid = np.linspace(0.0, 1.0, 2049)
    gv = np.asarray(psi(grid), dtype=np.float64)
    if np.any(np.diff(gv) < -1e-14):
        raise ContractViolation("psi must be nondecreasing")
    nu = state.nu
    x, w = nu.nodes, nu.weights
    if x.size == 0:
        return 0.0
    px = np.asarray(psi(x), dtype=np.float64)
    if np.any(np.diff(px) < -1e-14):
        raise ContractViolation("psi must be nondecreasing")
    total = 0.0
    chunk = 512
    with np.errstate(divide="ignore", invalid="ignore"):
        for start in range(0, x.size, chunk):
            sl = slice(start, min(start + chunk, x.size))
            d = x[sl, None] - x[None, :]
            near = np.abs(d) < NEAR_DIAGONAL
            q = (px[sl, None] - px[None, :]) / np.where(near, 1.0, d)
            if np.any(near):
                mid = 0.5 * (x[sl, None] + x[None, :])
                rows, cols = np.nonzero(near)
                q[rows, cols] = psi.d1(mid[rows, cols])
            total += float(w[sl] @ (np.log(q) @ w))
        a, b = state.alpha, state.beta
        u, v = abs(a - b), abs(a + b - 1.0)
        field = 0.0
        if u > 0:
            field += 0.5 * u * float(np.dot(w, np.log(px / x)))
        if v > 0:
            field += 0.5 * v * float(np.dot(w, np.log((1.0 - px) / (1.0 - x))))
    out = 0.25 * total + field
    return float(out) if not math.isnan(out) else NEG_INF
