"""Dense complex linear algebra: Haar unitaries, Hermitian spectra, Grassmannian geometry.

Projection matrices and tangent vectors are plain ``numpy`` arrays. The
``check_*`` helpers enforce the invariants that the rest of the package
relies on.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractViolation, InvalidDimensionError

SELF_ADJOINT_TOL = 1e-10
PROJECTION_SA_TOL = 1e-12
IDEMPOTENT_TOL = 1e-10
TRACE_TOL = 1e-8


def as_generator(seed_or_rng=None) -> np.random.Generator:
    """Return a ``numpy`` Generator backed by the Philox counter-based bit generator.

    Parameters
    ----------
    seed_or_rng : int, numpy.random.Generator or numpy.random.SeedSequence, optional
        An existing generator is returned unchanged. Anything else seeds
        ``Generator(Philox(seed))``.
    """
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.Generator(np.random.Philox(seed_or_rng))


def spawn(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent child generators from ``rng``.

    Child streams depend only on the parent state, never on scheduling.
    """
    seeds = rng.integers(0, 2**63, size=n, dtype=np.int64)
    return [as_generator(int(s)) for s in seeds]


def hs_norm(X) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(X))


def hs_inner(X, Y) -> float:
    """Real part of Tr(X* Y)."""
    return float(np.real(np.vdot(X, Y)))


def is_self_adjoint(M, tol: float = SELF_ADJOINT_TOL) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.max(np.abs(M - M.conj().T), initial=0.0) <= tol


def check_self_adjoint(M, tol: float = SELF_ADJOINT_TOL, name: str = "matrix"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ContractViolation(f"{name} has non-finite entries")
    if not is_self_adjoint(M, tol):
        raise ContractViolation(f"{name} is not self-adjoint within {tol:g}")
    return M


def projection_rank(P) -> int:
    """Rank of a projection, read off its trace."""
    return int(round(float(np.real(np.trace(P)))))


def check_projection(P, rank: int | None = None, name: str = "P"):
    """Validate the projection invariants and return ``P`` as an array.

    Raises
    ------
    ContractViolation
        If ``P`` is not self-adjoint, not idempotent, or has the wrong trace.
    """
    P = check_self_adjoint(P, PROJECTION_SA_TOL, name)
    if np.max(np.abs(P @ P - P), initial=0.0) > IDEMPOTENT_TOL:
        raise ContractViolation(f"{name} is not idempotent within {IDEMPOTENT_TOL:g}")
    tr = float(np.real(np.trace(P)))
    if abs(tr - round(tr)) > TRACE_TOL:
        raise ContractViolation(f"trace of {name} is not an integer: {tr}")
    if rank is not None and round(tr) != rank:
        raise ContractViolation(f"{name} has rank {round(tr)}, expected {rank}")
    return P


def is_tangent(P, X, tol: float = IDEMPOTENT_TOL) -> bool:
    X = np.asarray(X)
    return is_self_adjoint(X, 1e-12) and np.max(np.abs(X - P @ X - X @ P), initial=0.0) <= tol


def sample_haar_unitary(N: int, rng) -> np.ndarray:
    """Draw a Haar-distributed unitary matrix.

    Uses the QR decomposition of a complex Ginibre matrix with the phases of
    ``diag(R)`` moved into ``Q``, which makes the law exactly Haar.

    Parameters
    ----------
    N : int
        Dimension, at least 1.
    rng : numpy.random.Generator or int
        Random source.

    Returns
    -------
    numpy.ndarray
        Complex array of shape ``(N, N)``.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidDimensionError(f"N must be a positive integer, got {N!r}")
    rng = as_generator(rng)
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    ph = d / np.abs(d)
    return Q * ph[None, :]


def hermitian_eigen(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a self-adjoint matrix.

    Returns
    -------
    eigenvalues : numpy.ndarray
        Ascending real eigenvalues.
    eigenvectors : numpy.ndarray
        Unitary matrix whose columns are the eigenvectors.

    Raises
    ------
    ContractViolation
        If ``M`` is not self-adjoint within 1e-10.
    """
    M = check_self_adjoint(M, SELF_ADJOINT_TOL, "M")
    H = 0.5 * (M + M.conj().T)
    w, V = np.linalg.eigh(H)
    return w, V


def _expm_skew(K) -> np.ndarray:
    # K skew-adjoint: K = iH with H = -iK self-adjoint
    H = -1j * K
    H = 0.5 * (H + H.conj().T)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)[None, :]) @ V.conj().T


def grassmann_geodesic(P, X, t: float) -> np.ndarray:
    """Point at time ``t`` on the geodesic through ``P`` with velocity ``X``.

    ``C(t) = exp(tK) P exp(-tK)`` with ``K = [X, P]``, which satisfies
    ``C(0) = P`` and ``C'(0) = X`` for tangent ``X``.
    """
    P = np.asarray(P)
    X = np.asarray(X)
    if X.shape != P.shape:
        raise ContractViolation("X and P have different shapes")
    if not is_tangent(P, X):
        raise ContractViolation("X is not tangent at P (need X self-adjoint with X = PX + XP)")
    K = X @ P - P @ X
    U = _expm_skew(t * K)
    C = U @ P @ U.conj().T
    return 0.5 * (C + C.conj().T)


def tangent_project(P, H) -> np.ndarray:
    """Orthogonal projection of a self-adjoint ``H`` onto the tangent space at ``P``."""
    P = np.asarray(P)
    H = check_self_adjoint(H, SELF_ADJOINT_TOL, "H")
    Pp = np.eye(P.shape[0]) - P
    X = P @ H @ Pp
    return X + X.conj().T


def random_tangent(P, rng, unit: bool = True) -> np.ndarray:
    """Random tangent vector at ``P`` (Gaussian off-diagonal block)."""
    rng = as_generator(rng)
    N = P.shape[0]
    G = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)
    X = tangent_project(P, G + G.conj().T)
    nrm = hs_norm(X)
    if unit and nrm > 0:
        X = X / nrm
    return X


def random_hermitian(N: int, rng) -> np.ndarray:
    """GUE-type random Hermitian matrix (unnormalised)."""
    rng = as_generator(rng)
    G = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)
    return 0.5 * (G + G.conj().T)
