"""Pure numpy versions of the compiled kernels.

Signatures and return values match ``_ckernels`` exactly. Results agree to
rounding; the summation order differs, so the last bits may not.
"""
import numpy as np

_CHUNK = 256


def _g(u):
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = 0.5 * u * u * np.log(au) - 0.75 * u * u
    return np.where(au == 0.0, 0.0, r)


def _cell_block(lo_i, hi_i, lo, hi, thr):
    """Off-diagonal kernel rows for cells ``i`` against all cells."""
    A = lo_i[:, None]
    B = hi_i[:, None]
    C = lo[None, :]
    D = hi[None, :]
    h1 = B - A
    h2 = D - C
    d = np.abs(0.5 * (A + B) - 0.5 * (C + D))
    far = (d > 0.0) & (h1 + h2 <= 2.0 * thr * d)
    with np.errstate(divide="ignore", invalid="ignore"):
        h1s, h2s, d2 = h1 * h1, h2 * h2, d * d
        kf = (np.log(d) - (h1s + h2s) / (24.0 * d2)
              - (h1s * h1s / 80.0 + h1s * h2s / 24.0 + h2s * h2s / 80.0) / (4.0 * d2 * d2))
        kn = (_g(B - C) - _g(B - D) - _g(A - C) + _g(A - D)) / (h1 * h2)
    return np.where(far, kf, kn)


def cell_log_kernel(lo, hi, thr=0.05):
    """Matrix of cell averages of log|x - y| for uniform densities on cells."""
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    n = lo.shape[0]
    out = np.empty((n, n))
    for start in range(0, n, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n))
        out[sl] = _cell_block(lo[sl], hi[sl], lo, hi, thr)
    idx = np.arange(n)
    out[idx, idx] = np.log(hi - lo) - 1.5
    return out


def cell_log_energy(lo, hi, w, thr=0.05):
    """Sum of w_i w_j K_ij without forming the kernel matrix."""
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n = lo.shape[0]
    total = 0.0
    for start in range(0, n, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n))
        block = _cell_block(lo[sl], hi[sl], lo, hi, thr)
        rows = np.arange(start, sl.stop)
        block[rows - start, rows] = np.log(hi[sl] - lo[sl]) - 1.5
        total += float(w[sl] @ (block @ w))
    return total


def offdiag_log_energy(x, w):
    """Sum over i != j of w_i w_j log|x_i - x_j|."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n = x.shape[0]
    total = 0.0
    for start in range(0, n, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n))
        d = np.abs(x[sl, None] - x[None, :])
        rows = np.arange(start, sl.stop)
        d[rows - start, rows] = 1.0
        if np.any(d == 0.0):
            return -np.inf
        total += float(w[sl] @ (np.log(d) @ w))
    return total


def _interp(table, y):
    m = table.shape[0] - 1
    pos = y * m
    i = min(max(int(pos), 0), m - 1)
    t = pos - i
    return table[i] * (1.0 - t) + table[i + 1] * t


def _reflect(y):
    while y < 0.0 or y > 1.0:
        y = -y if y < 0.0 else 2.0 - y
    return y


def metropolis_sweeps(x, a, b, field, step, normals, uniforms):
    """Run single-site Metropolis sweeps on the log-gas in place.

    Returns the trajectory (one row per sweep) and the number of accepted moves.
    """
    n_sweeps, k = normals.shape
    traj = np.empty((n_sweeps, k))
    accepted = 0
    mask = np.ones(k, dtype=bool)
    with np.errstate(divide="ignore"):
        for s in range(n_sweeps):
            for i in range(k):
                xi = x[i]
                y = _reflect(xi + step * normals[s, i])
                delta = _interp(field, y) - _interp(field, xi)
                if a != 0.0:
                    delta += a * (np.log(y) - np.log(xi))
                if b != 0.0:
                    delta += b * (np.log(1.0 - y) - np.log(1.0 - xi))
                mask[i] = False
                others = x[mask]
                mask[i] = True
                delta += 2.0 * float(np.sum(np.log(np.abs(y - others)) - np.log(np.abs(xi - others))))
                if np.log(uniforms[s, i]) < delta:
                    x[i] = y
                    accepted += 1
            traj[s] = x
    return traj, accepted
