"""Random projections, pair eigenvalue laws, Gibbs ensembles and microstates.

For independent Haar projections of ranks ``k <= l`` with ``k + l <= N``,
the eigenvalues of ``PQP`` on the range of ``P`` have joint density
proportional to

    prod x_i^(l-k) (1 - x_i)^(N-k-l) prod_{i<j} (x_i - x_j)^2

on (0, 1)^k. The weighted ensemble multiplies this by
``exp(-N sum psi(x_i))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import ContractViolation, InvalidFieldError, InvalidRankError
from .linalg_core import as_generator, check_projection, hermitian_eigen, sample_haar_unitary
from .two_projection_model import FunctionOnUnitInterval

FIELD_TABLE_SIZE = 8192


def sample_projection(N: int, k: int, rng) -> np.ndarray:
    """Haar-distributed rank-``k`` projection in dimension ``N``.

    Only the first ``k`` columns of a Haar unitary are needed, so the QR is
    done on an ``N x k`` Ginibre block.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidRankError(f"N must be a positive integer, got {N!r}")
    if not 0 <= k <= N:
        raise InvalidRankError(f"rank {k} outside [0, {N}]")
    rng = as_generator(rng)
    if k == 0:
        return np.zeros((N, N), dtype=complex)
    if k == N:
        return np.eye(N, dtype=complex)
    Z = (rng.standard_normal((N, k)) + 1j * rng.standard_normal((N, k))) / np.sqrt(2.0)
    V, _ = np.linalg.qr(Z)
    P = V @ V.conj().T
    return 0.5 * (P + P.conj().T)


def _check_pair_ranks(N: int, k: int, l: int):
    if not (0 < k <= l and k + l <= N):
        raise InvalidRankError(f"need 0 < k <= l and k + l <= N, got N={N}, k={k}, l={l}")


def sample_pair_eigenvalues(N: int, k: int, l: int, rng) -> np.ndarray:
    """Eigenvalues of ``PQP`` on the range of ``P`` for independent Haar projections.

    By unitary invariance ``P`` can be fixed to the first ``k`` coordinates,
    so only ``Q`` is sampled and the top-left ``k x k`` block of ``Q`` is
    diagonalised.

    Returns
    -------
    numpy.ndarray
        Ascending array of length ``k`` in [0, 1].
    """
    _check_pair_ranks(N, k, l)
    rng = as_generator(rng)
    Z = (rng.standard_normal((N, l)) + 1j * rng.standard_normal((N, l))) / np.sqrt(2.0)
    V, _ = np.linalg.qr(Z)
    B = V[:k]
    lam = hermitian_eigen(B @ B.conj().T)[0]
    return np.clip(lam, 0.0, 1.0)


def sample_pair_eigenvalues_batch(N: int, k: int, l: int, samples: int, rng) -> np.ndarray:
    """``samples`` independent draws of :func:`sample_pair_eigenvalues`, shape ``(samples, k)``."""
    rng = as_generator(rng)
    return np.stack([sample_pair_eigenvalues(N, k, l, rng) for _ in range(samples)])


def sample_haar_pair(N: int, k: int, l: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Independent Haar projections of ranks ``k`` and ``l``."""
    rng = as_generator(rng)
    return sample_projection(N, k, rng), sample_projection(N, l, rng)


def pair_from_eigenvalues(N: int, k: int, l: int, x, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """Projections ``(P, Q)`` in canonical position with prescribed ``PQP`` spectrum.

    ``Q`` is built from 2x2 blocks with angles ``x`` on the first ``2k``
    coordinates plus an identity block of size ``l - k``. With ``rng``
    given, both are conjugated by a common Haar unitary.
    """
    _check_pair_ranks(N, k, l)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (k,):
        raise ContractViolation("need exactly k angles")
    P = np.zeros((N, N), dtype=complex)
    P[:k, :k] = np.eye(k)
    Q = np.zeros((N, N), dtype=complex)
    s = np.sqrt(x * (1.0 - x))
    idx = np.arange(k)
    Q[idx, idx] = x
    Q[idx, k + idx] = s
    Q[k + idx, idx] = s
    Q[k + idx, k + idx] = 1.0 - x
    Q[2 * k:k + l, 2 * k:k + l] = np.eye(l - k)
    if rng is not None:
        U = sample_haar_unitary(N, rng)
        P = U @ P @ U.conj().T
        Q = U @ Q @ U.conj().T
        P, Q = 0.5 * (P + P.conj().T), 0.5 * (Q + Q.conj().T)
    return P, Q


# ---------------------------------------------------------------------------
# weighted ensembles


@dataclass(frozen=True)
class GibbsPairSpec:
    """Weighted pair ensemble ``exp(-N Tr psi(PQP))`` against the Haar pair law.

    Attributes
    ----------
    N, k, l : int
        Matrix size and ranks, ``0 < k <= l``, ``k + l <= N``.
    psi : FunctionOnUnitInterval
        Field, finite on [0, 1].
    strength : float
        Multiplier of the field (``1`` is the ensemble itself).
    """

    N: int
    k: int
    l: int
    psi: FunctionOnUnitInterval = field(default_factory=lambda: FunctionOnUnitInterval.constant(0.0))
    strength: float = 1.0

    def __post_init__(self):
        _check_pair_ranks(self.N, self.k, self.l)

    @property
    def exponents(self) -> tuple[int, int]:
        return self.l - self.k, self.N - self.k - self.l

    def field_table(self, size: int = FIELD_TABLE_SIZE) -> np.ndarray:
        """``-strength * N * psi`` on a uniform grid of [0, 1] (linearly interpolated by the kernel)."""
        v = self.psi.check_finite(size + 1)
        return -self.strength * self.N * v

    def log_density(self, x) -> float:
        """Unnormalised log density at an ordered point of (0, 1)^k."""
        x = np.asarray(x, dtype=np.float64)
        a, b = self.exponents
        with np.errstate(divide="ignore"):
            val = -self.strength * self.N * float(np.sum(self.psi(x)))
            if a:
                val += a * float(np.sum(np.log(x)))
            if b:
                val += b * float(np.sum(np.log1p(-x)))
            d = np.abs(x[:, None] - x[None, :])
            iu = np.triu_indices(x.size, 1)
            val += 2.0 * float(np.sum(np.log(d[iu])))
        return val


class GibbsChain:
    """Metropolis chain for a :class:`GibbsPairSpec`.

    Single-site random-walk proposals with step ``0.5/sqrt(N)``, reflected
    into [0, 1]. The random numbers are drawn here, so the compiled and the
    numpy kernels produce the same chain.
    """

    def __init__(self, spec: GibbsPairSpec, rng, x0=None, backend=None):
        self.spec = spec
        self.rng = as_generator(rng)
        self.step = 0.5 / math.sqrt(spec.N)
        self._field = np.ascontiguousarray(spec.field_table())
        self._kern = backend if backend is not None else kernels
        if x0 is None:
            j = np.arange(spec.k) + 0.5
            x0 = np.sin(0.5 * np.pi * j / spec.k) ** 2
        self.x = np.ascontiguousarray(np.sort(np.asarray(x0, dtype=np.float64)))
        self.accepted = 0
        self.proposed = 0

    def run(self, n_sweeps: int) -> np.ndarray:
        """Advance ``n_sweeps`` sweeps and return the trajectory, shape ``(n_sweeps, k)``."""
        k = self.spec.k
        normals = self.rng.standard_normal((n_sweeps, k))
        uniforms = self.rng.random((n_sweeps, k))
        a, b = self.spec.exponents
        traj, acc = self._kern.metropolis_sweeps(self.x, float(a), float(b), self._field,
                                                 self.step, normals, uniforms)
        self.accepted += int(acc)
        self.proposed += n_sweeps * k
        return traj

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else float("nan")


def sample_gibbs_pair_batch(spec: GibbsPairSpec, rng, samples: int, burn_in: int = 500,
                            thin: int = 10) -> np.ndarray:
    """``samples`` draws from one chain after ``burn_in`` sweeps, ``thin`` sweeps apart.

    Returns
    -------
    numpy.ndarray
        Shape ``(samples, k)``, each row ascending.
    """
    if burn_in < 1 or thin < 1:
        raise ContractViolation("burn_in and thin must be at least 1")
    chain = GibbsChain(spec, rng)
    chain.run(burn_in)
    traj = chain.run(samples * thin)
    return np.sort(traj[thin - 1::thin], axis=1)


def sample_gibbs_pair(spec: GibbsPairSpec, rng, burn_in: int = 500, thin: int = 10) -> np.ndarray:
    """One draw of ``PQP`` eigenvalues from the weighted ensemble.

    Raises
    ------
    InvalidFieldError
        If ``psi`` is not finite on [0, 1].
    """
    return sample_gibbs_pair_batch(spec, rng, 1, burn_in, thin)[0]


# ---------------------------------------------------------------------------
# microstates


def canonical_word(w: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least rotation of ``w``."""
    w = tuple(int(c) for c in w)
    return min(w[i:] + w[:i] for i in range(len(w)))


@dataclass(frozen=True)
class MicrostateSpec:
    """Moment constraints defining a microstate set.

    Attributes
    ----------
    N : int
        Matrix size.
    ranks : tuple of int
        Rank of each projection variable.
    m : int
        Maximal word length.
    eps : float
        Tolerance.
    target_moments : dict
        Map from words (tuples of 0-based generator indices) to targets.
        Words are stored in canonical cyclic form.
    """

    N: int
    ranks: tuple
    m: int
    eps: float
    target_moments: Mapping = field(default_factory=dict)

    def __post_init__(self):
        ranks = tuple(int(k) for k in self.ranks)
        object.__setattr__(self, "ranks", ranks)
        if self.eps <= 0:
            raise ContractViolation("eps must be positive")
        if any(not 0 <= k <= self.N for k in ranks):
            raise InvalidRankError("ranks must lie in [0, N]")
        canon: dict = {}
        for w, v in dict(self.target_moments).items():
            w = (w,) if isinstance(w, (int, np.integer)) else tuple(w)
            if not 1 <= len(w) <= self.m:
                raise ContractViolation(f"word {w} has length outside [1, {self.m}]")
            if any(not 0 <= c < len(ranks) for c in w):
                raise ContractViolation(f"word {w} references an unknown variable")
            if not -1e-12 <= float(v) <= 1.0 + 1e-12:
                raise ContractViolation("target moments must lie in [0, 1]")
            canon[canonical_word(w)] = float(v)
        object.__setattr__(self, "target_moments", canon)

    @property
    def n(self) -> int:
        return len(self.ranks)


def word_moments(Ps: Sequence[np.ndarray], words) -> dict:
    """Normalised traces ``(1/N) Tr(P_w1 ... P_wr)`` for each word."""
    out = {}
    for w in words:
        M = Ps[w[0]]
        for c in w[1:]:
            M = M @ Ps[c]
        out[w] = float(np.real(np.trace(M))) / M.shape[0]
    return out


def microstate_membership(Ps: Sequence[np.ndarray], spec: MicrostateSpec) -> bool:
    """Whether every target moment is matched to within ``eps``."""
    if len(Ps) != spec.n:
        raise ContractViolation(f"expected {spec.n} matrices, got {len(Ps)}")
    for P, k in zip(Ps, spec.ranks):
        if P.shape != (spec.N, spec.N):
            raise ContractViolation("matrix dimension does not match spec")
        check_projection(P, rank=k)
    mom = word_moments(Ps, spec.target_moments.keys())
    return all(abs(mom[w] - t) < spec.eps for w, t in spec.target_moments.items())


@dataclass(frozen=True)
class MicrostateEstimate:
    """Rejection-sampling estimate of a microstate probability.

    ``estimate`` is ``log(accepted / samples) / N**2`` (``-inf`` if nothing
    was accepted); ``lower`` and ``upper`` come from the Wilson interval.
    """

    estimate: float
    accepted: int
    samples: int
    lower: float
    upper: float

    def __iter__(self):
        # unpacks as (estimate, accepted)
        return iter((self.estimate, self.accepted))


def wilson_interval(accepted: int, samples: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    p = accepted / samples
    den = 1.0 + z * z / samples
    c = (p + z * z / (2 * samples)) / den
    h = z * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / den
    # the exact interval always contains p; rounding can push an endpoint past it
    return max(0.0, min(c - h, p)), min(1.0, max(c + h, p))


def estimate_microstate_logprob(spec: MicrostateSpec, samples: int, rng) -> MicrostateEstimate:
    """Estimate ``log P(microstate set) / N**2`` by rejection counting.

    Each sample draws independent Haar projections of the prescribed ranks.
    """
    if samples < 1:
        raise ContractViolation("samples must be at least 1")
    rng = as_generator(rng)
    words = list(spec.target_moments)
    acc = 0
    for _ in range(samples):
        Ps = [sample_projection(spec.N, k, rng) for k in spec.ranks]
        mom = word_moments(Ps, words)
        if all(abs(mom[w] - spec.target_moments[w]) < spec.eps for w in words):
            acc += 1
    n2 = spec.N ** 2
    lo, hi = wilson_interval(acc, samples)

    def lg(p):
        return math.log(p) / n2 if p > 0 else -math.inf

    return MicrostateEstimate(lg(acc / samples), acc, samples, lg(lo), lg(hi))
