"""Canonical model of a pair of projections.

A tracial state on the algebra generated by two projections ``e`` and ``f``
is described by four corner weights and a measure ``nu`` on (0, 1). The
corner ``E_ij`` carries the one-dimensional representation ``e -> i``,
``f -> j``. On the generic part the pair is represented by the 2x2 matrices

    e(x) = [[1, 0], [0, 0]],
    f(x) = [[x, sqrt(x(1-x))], [sqrt(x(1-x)), 1-x]],

and the trace is ``1/2 * integral of Tr_2`` against ``nu``. Hence
``nu((0, 1))`` equals the trace of the generic part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractViolation, InvalidFieldError
from .linalg_core import check_projection, hermitian_eigen, projection_rank

MASS_TOL = 1e-10
BOUNDARY_TOL = 1e-8
DEFAULT_NODES = 4000


# ---------------------------------------------------------------------------
# functions on [0, 1]


@dataclass(frozen=True, eq=False)
class FunctionOnUnitInterval:
    """A real function on [0, 1] with optional derivative data.

    Parameters
    ----------
    evaluator : callable
        Vectorised map ``x -> psi(x)``.
    d1_bound, d2_bound : float, optional
        Upper bounds for ``sup |psi'|`` and ``sup |psi''|`` on [0, 1].
    monotone : bool, optional
        ``True`` if known nondecreasing.
    derivative, second_derivative : callable, optional
        Analytic derivatives. A centered finite difference is used otherwise.
    name : str
        Identifier used in reports.
    """

    evaluator: Callable
    d1_bound: float | None = None
    d2_bound: float | None = None
    monotone: bool | None = None
    derivative: Callable | None = None
    second_derivative: Callable | None = None
    name: str = "psi"
    spec: object = field(default=None, repr=False)

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=np.float64))

    def d1(self, x, h: float = 1e-6):
        """First derivative, analytic if available, else centered difference."""
        x = np.asarray(x, dtype=np.float64)
        if self.derivative is not None:
            return np.asarray(self.derivative(x), dtype=np.float64) + 0.0 * x
        lo = np.clip(x - h, 0.0, 1.0)
        hi = np.clip(x + h, 0.0, 1.0)
        return (self(hi) - self(lo)) / (hi - lo)

    def d2(self, x, h: float = 1e-4):
        x = np.asarray(x, dtype=np.float64)
        if self.second_derivative is not None:
            return np.asarray(self.second_derivative(x), dtype=np.float64) + 0.0 * x
        xc = np.clip(x, h, 1.0 - h)
        return (self(xc + h) - 2.0 * self(xc) + self(xc - h)) / (h * h)

    def check_finite(self, n: int = 1025):
        """Raise InvalidFieldError unless the function is finite on a grid of [0, 1]."""
        grid = np.linspace(0.0, 1.0, n)
        try:
            v = np.asarray(self(grid), dtype=np.float64)
        except (FloatingPointError, ValueError, ZeroDivisionError) as exc:
            raise InvalidFieldError(f"{self.name} cannot be evaluated on [0, 1]: {exc}") from exc
        if v.shape != grid.shape or not np.all(np.isfinite(v)):
            raise InvalidFieldError(f"{self.name} is not finite on [0, 1]")
        return v

    def then(self, outer: "FunctionOnUnitInterval") -> "FunctionOnUnitInterval":
        """Composition ``outer o self``."""
        inner = self

        def deriv(x):
            return outer.d1(inner(x)) * inner.d1(x)

        return FunctionOnUnitInterval(
            lambda x: outer(inner(x)),
            monotone=bool(inner.monotone and outer.monotone) or None,
            derivative=deriv,
            name=f"{outer.name}({inner.name})",
        )

    @classmethod
    def constant(cls, c: float) -> "FunctionOnUnitInterval":
        c = float(c)
        return cls(lambda x: np.full(np.shape(x), c), 0.0, 0.0, True,
                   lambda x: np.zeros(np.shape(x)), lambda x: np.zeros(np.shape(x)),
                   name=f"const({c:g})", spec={"kind": "constant", "value": c})

    @classmethod
    def identity(cls) -> "FunctionOnUnitInterval":
        return cls.polynomial([0.0, 1.0], name="x")

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], name: str | None = None) -> "FunctionOnUnitInterval":
        """Polynomial ``sum c_i x**i`` with derivative bounds computed on [0, 1]."""
        p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=np.float64))
        dp, ddp = p.deriv(1), p.deriv(2)
        grid = np.linspace(0.0, 1.0, 4097)
        d1v, d2v = dp(grid), ddp(grid)
        # a polynomial sampled this finely: pad by the grid error of its next derivative
        pad1 = float(np.max(np.abs(ddp(grid)), initial=0.0)) / 8192.0
        pad2 = float(np.max(np.abs(ddp.deriv(1)(grid)), initial=0.0)) / 8192.0
        d1b = float(np.max(np.abs(d1v))) + pad1
        d2b = float(np.max(np.abs(d2v))) + pad2
        mono = bool(np.all(d1v >= -1e-15))
        if name is None:
            name = "poly(" + ",".join(f"{c:g}" for c in coeffs) + ")"
        return cls(p, d1b, d2b, mono, dp, ddp, name=name,
                   spec={"kind": "polynomial", "coeffs": [float(c) for c in coeffs]})

    @classmethod
    def power(cls, exponent: float) -> "FunctionOnUnitInterval":
        """``x**exponent`` for ``exponent > 0``; derivative bounds when finite."""
        a = float(exponent)
        if a <= 0:
            raise InvalidFieldError("power exponent must be positive")
        if a == int(a):
            coeffs = [0.0] * int(a) + [1.0]
            return cls.polynomial(coeffs, name=f"x^{a:g}")
        d1b = a if a >= 1 else None
        d2b = abs(a * (a - 1)) if a >= 2 else None
        return cls(lambda x: np.power(x, a), d1b, d2b, True,
                   lambda x: a * np.power(x, a - 1), lambda x: a * (a - 1) * np.power(x, a - 2),
                   name=f"x^{a:g}", spec={"kind": "power", "exponent": a})

    @classmethod
    def from_spec(cls, spec) -> "FunctionOnUnitInterval":
        """Build from a config value.

        Accepted forms are a number (constant), the strings ``"zero"``,
        ``"identity"``/``"x"``, ``"square"``, ``"const:c"``,
        ``"poly:c0,c1,..."``, ``"power:p"``, or a mapping with ``kind`` in
        ``{constant, polynomial, power}``.
        """
        if isinstance(spec, FunctionOnUnitInterval):
            return spec
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return cls.constant(spec)
        if isinstance(spec, str):
            s = spec.strip()
            if s in ("zero", "0"):
                return cls.constant(0.0)
            if s in ("identity", "x"):
                return cls.identity()
            if s in ("square", "x^2"):
                return cls.power(2)
            head, _, tail = s.partition(":")
            try:
                if head == "const":
                    return cls.constant(float(tail))
                if head == "poly":
                    return cls.polynomial([float(t) for t in tail.split(",")])
                if head == "power":
                    return cls.power(float(tail))
            except ValueError as exc:
                raise InvalidFieldError(f"cannot parse field spec {spec!r}") from exc
            raise InvalidFieldError(f"unknown field spec {spec!r}")
        if isinstance(spec, dict):
            kind = spec.get("kind")
            if kind == "constant":
                return cls.constant(spec["value"])
            if kind == "polynomial":
                return cls.polynomial(spec["coeffs"])
            if kind == "power":
                return cls.power(spec["exponent"])
        raise InvalidFieldError(f"unknown field spec {spec!r}")


# ---------------------------------------------------------------------------
# measures


def theta_grid(n: int, lo: float = 0.0, hi: float = 1.0):
    """Midpoint grid in ``theta`` for the map ``x = lo + (hi - lo) sin^2(theta/2)``.

    Returns
    -------
    theta : ndarray
        Midpoints ``(j + 1/2) pi / n``.
    nodes : ndarray
        Images of the midpoints.
    edges : ndarray
        Images of ``j pi / n`` for ``j = 0..n`` (cell boundaries).
    """
    th = (np.arange(n) + 0.5) * np.pi / n
    te = np.arange(n + 1) * np.pi / n
    nodes = lo + (hi - lo) * np.sin(0.5 * th) ** 2
    edges = lo + (hi - lo) * np.sin(0.5 * te) ** 2
    edges[0], edges[-1] = lo, hi
    return th, nodes, edges


@dataclass(frozen=True, eq=False)
class IntervalMeasure:
    """Finite positive measure on [0, 1].

    Interior mass sits on strictly increasing nodes in (0, 1). When
    ``cells`` is given, the node ``x_j`` stands for a density spread
    uniformly over the cell ``cells[j] = (lo_j, hi_j)``; this is the
    ``"density"`` kind. Otherwise the nodes are genuine atoms.

    Attributes
    ----------
    nodes, weights : ndarray
        Interior support and positive weights.
    atom0, atom1 : float
        Mass at the endpoints.
    cells : ndarray or None
        Shape ``(n, 2)`` cell boundaries for the density kind.
    """

    nodes: np.ndarray
    weights: np.ndarray
    atom0: float = 0.0
    atom1: float = 0.0
    cells: np.ndarray | None = None

    def __post_init__(self):
        x = np.array(self.nodes, dtype=np.float64).reshape(-1)
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if x.shape != w.shape:
            raise ContractViolation("nodes and weights differ in length")
        if x.size and (x[0] <= 0.0 or x[-1] >= 1.0):
            raise ContractViolation("interior nodes must lie strictly inside (0, 1)")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise ContractViolation("nodes must be strictly increasing")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ContractViolation("weights must be positive and finite")
        if self.atom0 < 0 or self.atom1 < 0:
            raise ContractViolation("endpoint atoms must be nonnegative")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "atom0", float(self.atom0))
        object.__setattr__(self, "atom1", float(self.atom1))
        if self.cells is not None:
            c = np.array(self.cells, dtype=np.float64).reshape(-1, 2)
            if c.shape[0] != x.size:
                raise ContractViolation("one cell per node is required")
            if np.any(c[:, 1] <= c[:, 0]) or np.any(c[:, 0] < 0) or np.any(c[:, 1] > 1):
                raise ContractViolation("cells must be nondegenerate subintervals of [0, 1]")
            c.setflags(write=False)
            object.__setattr__(self, "cells", c)

    @property
    def kind(self) -> str:
        return "density" if self.cells is not None else "atoms"

    @property
    def interior_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def total_mass(self) -> float:
        return self.atom0 + self.atom1 + self.interior_mass

    def __len__(self):
        return self.nodes.size

    def integrate(self, f) -> float:
        """Integral of ``f`` over the interior part (node rule)."""
        if self.nodes.size == 0:
            return 0.0
        return float(np.dot(self.weights, f(self.nodes)))

    def moment(self, n: int) -> float:
        """Interior moment ``sum w_j x_j**n``."""
        return float(np.dot(self.weights, self.nodes ** n))

    def scaled(self, factor: float) -> "IntervalMeasure":
        return IntervalMeasure(self.nodes, self.weights * factor, self.atom0 * factor,
                               self.atom1 * factor, self.cells)

    def reflected(self) -> "IntervalMeasure":
        """Image under ``x -> 1 - x``."""
        cells = None if self.cells is None else (1.0 - self.cells[::-1, ::-1])
        return IntervalMeasure(1.0 - self.nodes[::-1], self.weights[::-1], self.atom1, self.atom0, cells)

    @classmethod
    def empty(cls) -> "IntervalMeasure":
        return cls(np.zeros(0), np.zeros(0))

    @classmethod
    def from_atoms(cls, x, w, merge_tol: float = 1e-12) -> "IntervalMeasure":
        """Atoms at arbitrary interior points; sorted, with near-coincident points merged."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        w = np.asarray(w, dtype=np.float64).reshape(-1)
        keep = w > 0
        x, w = x[keep], w[keep]
        if x.size == 0:
            return cls.empty()
        order = np.argsort(x, kind="stable")
        x, w = x[order], w[order]
        start = np.concatenate(([True], np.diff(x) > merge_tol))
        group = np.cumsum(start) - 1
        wm = np.bincount(group, weights=w)
        xm = np.bincount(group, weights=w * x) / wm
        return cls(xm, wm)

    @classmethod
    def from_density(cls, density: Callable, n: int = DEFAULT_NODES, lo: float = 0.0,
                     hi: float = 1.0, mass: float | None = None) -> "IntervalMeasure":
        """Discretise a density on ``(lo, hi)`` with edge-adapted cells.

        The density may have inverse square root singularities at ``lo`` and
        ``hi``; the substitution ``x = lo + (hi - lo) sin^2(theta/2)`` makes
        the midpoint rule in ``theta`` accurate. With ``mass`` given, the
        weights are rescaled to that total.
        """
        th, x, e = theta_grid(n, lo, hi)
        jac = 0.5 * (hi - lo) * np.sin(th)
        w = density(x) * jac * (np.pi / n)
        if mass is not None:
            w = w * (mass / np.sum(w))
        cells = np.column_stack((e[:-1], e[1:]))
        keep = w > 0
        return cls(x[keep], w[keep], cells=cells[keep])

    def to_dict(self) -> dict:
        d = {"atoms": [[float(a), float(b)] for a, b in zip(self.nodes, self.weights)]}
        if self.atom0 or self.atom1:
            d["atom0"], d["atom1"] = self.atom0, self.atom1
        if self.cells is not None:
            d["cells"] = [[float(a), float(b)] for a, b in self.cells]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalMeasure":
        atoms = np.asarray(d.get("atoms", []), dtype=np.float64).reshape(-1, 2)
        cells = d.get("cells")
        return cls(atoms[:, 0], atoms[:, 1], d.get("atom0", 0.0), d.get("atom1", 0.0),
                   None if cells is None else np.asarray(cells, dtype=np.float64))


def total_variation(mu: IntervalMeasure, nu: IntervalMeasure, bins: int = 400) -> float:
    """Total variation distance between interior parts, binned on a uniform grid.

    Uses ``sup_A |mu(A) - nu(A)|`` over unions of bins, i.e. half the L1
    distance of the binned masses.
    """
    edges = np.linspace(0.0, 1.0, bins + 1)

    def binned(m):
        if m.cells is None:
            return np.histogram(m.nodes, bins=edges, weights=m.weights)[0]
        # spread each cell uniformly over the bins it overlaps
        lo, hi = m.cells[:, 0], m.cells[:, 1]
        dens = m.weights / (hi - lo)
        out = np.zeros(bins)
        for b in range(bins):
            ov = np.clip(np.minimum(hi, edges[b + 1]) - np.maximum(lo, edges[b]), 0.0, None)
            out[b] = np.dot(dens, ov)
        return out

    return 0.5 * float(np.sum(np.abs(binned(mu) - binned(nu))))


# ---------------------------------------------------------------------------
# pair states


@dataclass(frozen=True, eq=False)
class PairState:
    """Tracial state on the algebra of two projections.

    Attributes
    ----------
    alpha, beta : float
        Traces of ``e`` and ``f``.
    a11, a10, a01, a00 : float
        Corner weights ``tau(e ^ f)``, ``tau(e ^ f')``, ``tau(e' ^ f)``,
        ``tau(e' ^ f')``.
    nu : IntervalMeasure
        Interior measure, total mass ``1 - (a11 + a10 + a01 + a00)``.
    """

    alpha: float
    beta: float
    a11: float
    a10: float
    a01: float
    a00: float
    nu: IntervalMeasure

    def __post_init__(self):
        for name in ("alpha", "beta", "a11", "a10", "a01", "a00"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if min(self.a11, self.a10, self.a01, self.a00) < -MASS_TOL:
            raise ContractViolation("corner weights must be nonnegative")
        if self.nu.atom0 or self.nu.atom1:
            raise ContractViolation("nu must not carry endpoint atoms")
        m = self.nu.total_mass
        if abs(self.a11 + self.a10 + self.a01 + self.a00 + m - 1.0) > MASS_TOL:
            raise ContractViolation("corner weights and nu mass must sum to 1")
        if abs(self.alpha - (self.a11 + self.a10 + 0.5 * m)) > MASS_TOL:
            raise ContractViolation("alpha is inconsistent with corners and nu")
        if abs(self.beta - (self.a11 + self.a01 + 0.5 * m)) > MASS_TOL:
            raise ContractViolation("beta is inconsistent with corners and nu")

    @property
    def corners(self) -> tuple[float, float, float, float]:
        return (self.a11, self.a10, self.a01, self.a00)

    @property
    def nu_mass(self) -> float:
        return self.nu.total_mass

    @property
    def rho(self) -> float:
        return rho_of(self.alpha, self.beta)

    @classmethod
    def from_parts(cls, corners: Sequence[float], nu: IntervalMeasure) -> "PairState":
        """Build from corners ``(a11, a10, a01, a00)`` and ``nu``; traces are derived."""
        a11, a10, a01, a00 = (float(c) for c in corners)
        m = nu.total_mass
        return cls(a11 + a10 + 0.5 * m, a11 + a01 + 0.5 * m, a11, a10, a01, a00, nu)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "corners": [self.a11, self.a10, self.a01, self.a00],
            "nu": self.nu.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PairState":
        try:
            a11, a10, a01, a00 = d["corners"]
            nu = IntervalMeasure.from_dict(d["nu"])
            return cls(d["alpha"], d["beta"], a11, a10, a01, a00, nu)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ContractViolation):
                raise
            raise ContractViolation(f"malformed PairState document: {exc}") from exc


def rho_of(alpha: float, beta: float) -> float:
    """``min(alpha, beta, 1 - alpha, 1 - beta)``."""
    return float(min(alpha, beta, 1.0 - alpha, 1.0 - beta))


def complement_state(state: PairState) -> PairState:
    """State of the pair ``(1 - e, f)``."""
    return PairState(1.0 - state.alpha, state.beta, state.a01, state.a00, state.a11, state.a10,
                     state.nu.reflected())


def free_corners(alpha: float, beta: float) -> tuple[float, float, float, float]:
    """Corner weights of the free pair with traces ``alpha``, ``beta``."""
    return (max(alpha + beta - 1.0, 0.0), max(alpha - beta, 0.0),
            max(beta - alpha, 0.0), max(1.0 - alpha - beta, 0.0))


def free_pair_state(alpha: float, beta: float, n_nodes: int = DEFAULT_NODES) -> PairState:
    """State of a free pair of projections with traces ``alpha`` and ``beta``.

    The interior measure has density proportional to
    ``sqrt((x - xi)(eta - x)) / (x (1 - x))`` on ``(xi, eta)`` with
    ``xi, eta = alpha + beta - 2 alpha beta -/+ sqrt(4 alpha beta (1 - alpha)(1 - beta))``,
    normalised to mass ``2 rho``. At ``alpha = beta = 1/2`` this is the unit
    arcsine law.
    """
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ContractViolation("traces must lie in [0, 1]")
    corners = free_corners(alpha, beta)
    rho = rho_of(alpha, beta)
    if rho <= 0.0:
        return PairState(alpha, beta, *corners, IntervalMeasure.empty())
    c = alpha + beta - 2.0 * alpha * beta
    r = math.sqrt(max(4.0 * alpha * beta * (1.0 - alpha) * (1.0 - beta), 0.0))
    xi, eta = max(c - r, 0.0), min(c + r, 1.0)

    def density(x):
        return np.sqrt(np.clip((x - xi) * (eta - x), 0.0, None)) / (2.0 * np.pi * x * (1.0 - x))

    nu = IntervalMeasure.from_density(density, n_nodes, xi, eta, mass=2.0 * rho)
    m = nu.total_mass
    # absorb the last rounding bits so the invariants hold exactly
    a11, a10, a01, a00 = corners
    a00 = 1.0 - a11 - a10 - a01 - m
    return PairState(a11 + a10 + 0.5 * m, a11 + a01 + 0.5 * m, a11, a10, a01, max(a00, 0.0), nu)


def arcsine_cdf(x):
    """CDF of the unit arcsine law on [0, 1]."""
    return (2.0 / np.pi) * np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))


def canonical_form(P, Q, tol: float = BOUNDARY_TOL) -> PairState:
    """Empirical pair state of two projection matrices.

    Corner dimensions are eigenvalue counts at 0 and 1 of ``Q`` compressed
    to the ranges of ``P`` and ``1 - P``. Each interior eigenvalue of ``PQP``
    on the range of ``P`` becomes an atom of weight ``2/N``.
    """
    P = check_projection(P, name="P")
    Q = check_projection(Q, name="Q")
    if P.shape != Q.shape:
        raise ContractViolation("P and Q have different dimensions")
    N = P.shape[0]
    k = projection_rank(P)
    _, V = hermitian_eigen(P)
    VP, VPp = V[:, N - k:], V[:, :N - k]
    if k:
        lam = hermitian_eigen(VP.conj().T @ Q @ VP)[0]
    else:
        lam = np.zeros(0)
    if N - k:
        mu = hermitian_eigen(VPp.conj().T @ Q @ VPp)[0]
    else:
        mu = np.zeros(0)
    n11 = int(np.sum(lam >= 1.0 - tol))
    n10 = int(np.sum(lam <= tol))
    interior = lam[(lam > tol) & (lam < 1.0 - tol)]
    n01 = int(np.sum(mu >= 1.0 - tol))
    n00 = N - k - interior.size - n01
    if n00 < 0:
        raise ContractViolation("inconsistent spectra; increase the tolerance")
    nu = IntervalMeasure.from_atoms(interior, np.full(interior.size, 2.0 / N))
    corners = (n11 / N, n10 / N, n01 / N, n00 / N)
    return PairState.from_parts(corners, nu)


# ---------------------------------------------------------------------------
# words and moments


def parse_pair_word(w) -> tuple[str, ...]:
    """Normalise a pair word to a tuple over ``{'e', 'f'}``."""
    letters = tuple(w.replace(" ", "")) if isinstance(w, str) else tuple(w)
    if not letters:
        raise ContractViolation("words must be nonempty")
    for c in letters:
        if c not in ("e", "f"):
            raise ContractViolation(f"pair words use letters e, f; got {c!r}")
    return letters


def cyclic_reduce(letters: Sequence) -> tuple:
    """Remove cyclically adjacent repeats (idempotence plus the trace property)."""
    out = list(letters)
    changed = True
    while changed and len(out) > 1:
        changed = False
        red = [c for i, c in enumerate(out) if c != out[i - 1]]
        if not red:
            red = [out[0]]
        if len(red) != len(out):
            changed = True
        out = red
    return tuple(out)


def pair_moment(state: PairState, w) -> float:
    """Trace of a word in ``e`` and ``f``.

    A word is reduced cyclically to ``e``, ``f`` or ``(ef)^n``. The 2x2
    trace of ``(e(x) f(x))^n`` is ``x^n``.
    """
    red = cyclic_reduce(parse_pair_word(w))
    m = state.nu_mass
    if red == ("e",):
        return state.a11 + state.a10 + 0.5 * m
    if red == ("f",):
        return state.a11 + state.a01 + 0.5 * m
    n = len(red) // 2
    return state.a11 + 0.5 * state.nu.moment(n)


def words_up_to(alphabet: Iterable, max_len: int) -> list[tuple]:
    """All words of length 1..max_len over ``alphabet`` (lexicographic by length)."""
    alphabet = list(alphabet)
    out: list[tuple] = []
    layer: list[tuple] = [()]
    for _ in range(max_len):
        layer = [w + (c,) for w in layer for c in alphabet]
        out.extend(layer)
    return out


def matrix_word_trace(mats: dict, w: Sequence) -> float:
    """Normalised trace ``(1/N) Tr`` of a product of matrices indexed by ``w``."""
    M = None
    for c in w:
        M = mats[c] if M is None else M @ mats[c]
    return float(np.real(np.trace(M))) / M.shape[0]


# ---------------------------------------------------------------------------
# functional calculus


def _check_monotone(values: np.ndarray, what: str):
    if values.size > 1 and np.any(np.diff(values) < -1e-14):
        raise ContractViolation(f"{what} must be nondecreasing")


def pushforward_state(state: PairState, psi: FunctionOnUnitInterval) -> PairState:
    """State of the pair ``(e, q(psi; e))``.

    Interior atoms move by ``psi``; corners are unchanged. Mass pushed onto
    0 is split evenly into ``E_10`` and ``E_01``, mass pushed onto 1 evenly
    into ``E_11`` and ``E_00``, which keeps both traces fixed. Cells of a
    density follow their endpoints; if two nodes collide the result is
    stored as atoms.

    Raises
    ------
    ContractViolation
        If ``psi`` is not nondecreasing or leaves [0, 1].
    """
    grid = np.linspace(0.0, 1.0, 2049)
    gv = np.asarray(psi(grid), dtype=np.float64)
    _check_monotone(gv, "psi")
    nu = state.nu
    if nu.nodes.size == 0:
        return state
    y = np.asarray(psi(nu.nodes), dtype=np.float64)
    _check_monotone(y, "psi")
    if np.any(y < -1e-14) or np.any(y > 1.0 + 1e-14) or not np.all(np.isfinite(y)):
        raise ContractViolation("psi must map (0, 1) into [0, 1]")
    w = nu.weights
    at0 = y <= 0.0
    at1 = y >= 1.0
    inside = ~(at0 | at1)
    m0 = float(np.sum(w[at0]))
    m1 = float(np.sum(w[at1]))
    a11 = state.a11 + 0.5 * m1
    a00 = state.a00 + 0.5 * m1
    a10 = state.a10 + 0.5 * m0
    a01 = state.a01 + 0.5 * m0
    yi, wi = y[inside], w[inside]
    if yi.size > 1 and np.any(np.diff(yi) <= 0):
        new_nu = IntervalMeasure.from_atoms(yi, wi, merge_tol=0.0)
    elif nu.cells is not None:
        c = np.clip(np.asarray(psi(nu.cells.reshape(-1)), dtype=np.float64), 0.0, 1.0).reshape(-1, 2)
        c = c[inside]
        if np.any(c[:, 1] <= c[:, 0]):
            new_nu = IntervalMeasure(yi, wi)
        else:
            new_nu = IntervalMeasure(yi, wi, cells=c)
    else:
        new_nu = IntervalMeasure(yi, wi)
    return PairState(state.alpha, state.beta, a11, a10, a01, a00, new_nu)
