"""Independent construction of the tangent projection at a Grassmannian point.

Standalone: numpy only. Builds P from an orthonormal basis, forms the
off-diagonal part of H in that basis explicitly, and reports the
Hilbert-Schmidt inner product between the tangent part and the remainder,
which vanishes for an orthogonal projection.
Prints a JSON mapping record id -> value.
"""
import json

import numpy as np

if __name__ == "__main__":
    rng = np.random.default_rng(2024)
    N, k = 8, 3
    Z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    Q, _ = np.linalg.qr(Z)
    H = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    H = (H + H.conj().T) / 2
    Hb = Q.conj().T @ H @ Q
    Xb = np.zeros_like(Hb)
    Xb[:k, k:] = Hb[:k, k:]
    Xb[k:, :k] = Hb[k:, :k]
    X = Q @ Xb @ Q.conj().T
    inner = float(np.real(np.vdot(X, H - X)))
    print(json.dumps({"tangent_project.orthogonality": inner}, sort_keys=True))
