# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Every function here has a numpy twin in ``_pykernels`` with the same
signature and the same arithmetic; ``projlab.kernels`` picks one at import.
"""
import numpy as np

from libc.math cimport fabs, log, INFINITY


cdef inline double _g(double u) noexcept nogil:
    # antiderivative of antiderivative of log|u|, minus the quadratic part
    cdef double a = fabs(u)
    if a == 0.0:
        return 0.0
    return 0.5 * u * u * log(a) - 0.75 * u * u


cdef inline double _cell_pair(double a1, double b1, double a2, double b2,
                              double thr) noexcept nogil:
    cdef double h1 = b1 - a1
    cdef double h2 = b2 - a2
    cdef double d = fabs(0.5 * (a1 + b1) - 0.5 * (a2 + b2))
    cdef double h1s, h2s, d2
    if d > 0.0 and (h1 + h2) <= 2.0 * thr * d:
        h1s = h1 * h1
        h2s = h2 * h2
        d2 = d * d
        return (log(d) - (h1s + h2s) / (24.0 * d2)
                - (h1s * h1s / 80.0 + h1s * h2s / 24.0 + h2s * h2s / 80.0) / (4.0 * d2 * d2))
    return (_g(b1 - a2) - _g(b1 - b2) - _g(a1 - a2) + _g(a1 - b2)) / (h1 * h2)


def cell_log_kernel(const double[::1] lo, const double[::1] hi, double thr=0.05):
    """Matrix of cell averages of log|x - y| for uniform densities on cells."""
    cdef Py_ssize_t n = lo.shape[0]
    cdef Py_ssize_t i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = out
    cdef double v
    with nogil:
        for i in range(n):
            K[i, i] = log(hi[i] - lo[i]) - 1.5
            for j in range(i):
                v = _cell_pair(lo[i], hi[i], lo[j], hi[j], thr)
                K[i, j] = v
                K[j, i] = v
    return out


def cell_log_energy(const double[::1] lo, const double[::1] hi, const double[::1] w, double thr=0.05):
    """Sum of w_i w_j K_ij without forming the kernel matrix."""
    cdef Py_ssize_t n = lo.shape[0]
    cdef Py_ssize_t i, j
    cdef double diag = 0.0
    cdef double off = 0.0
    cdef double row
    with nogil:
        for i in range(n):
            diag += w[i] * w[i] * (log(hi[i] - lo[i]) - 1.5)
            row = 0.0
            for j in range(i):
                row += w[j] * _cell_pair(lo[i], hi[i], lo[j], hi[j], thr)
            off += w[i] * row
    return diag + 2.0 * off


def offdiag_log_energy(const double[::1] x, const double[::1] w):
    """Sum over i != j of w_i w_j log|x_i - x_j|."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double off = 0.0
    cdef double row, d
    with nogil:
        for i in range(n):
            row = 0.0
            for j in range(i):
                d = fabs(x[i] - x[j])
                if d == 0.0:
                    row = -INFINITY
                    break
                row += w[j] * log(d)
            off += w[i] * row
    return 2.0 * off


cdef inline double _interp(const double[::1] table, double y) noexcept nogil:
    cdef Py_ssize_t m = table.shape[0] - 1
    cdef double pos = y * m
    cdef Py_ssize_t i = <Py_ssize_t>pos
    if i >= m:
        i = m - 1
    if i < 0:
        i = 0
    cdef double t = pos - i
    return table[i] * (1.0 - t) + table[i + 1] * t


cdef inline double _reflect(double y) noexcept nogil:
    while y < 0.0 or y > 1.0:
        if y < 0.0:
            y = -y
        else:
            y = 2.0 - y
    return y


def metropolis_sweeps(double[::1] x, double a, double b, const double[::1] field,
                      double step, const double[:, ::1] normals, const double[:, ::1] uniforms):
    """Run single-site Metropolis sweeps on the log-gas in place.

    Returns the trajectory (one row per sweep) and the number of accepted moves.
    """
    cdef Py_ssize_t n_sweeps = normals.shape[0]
    cdef Py_ssize_t k = x.shape[0]
    cdef Py_ssize_t s, i, j
    cdef double xi, y, delta, dy, dx
    cdef long accepted = 0
    traj = np.empty((n_sweeps, k), dtype=np.float64)
    cdef double[:, ::1] T = traj
    with nogil:
        for s in range(n_sweeps):
            for i in range(k):
                xi = x[i]
                y = _reflect(xi + step * normals[s, i])
                delta = _interp(field, y) - _interp(field, xi)
                if a != 0.0:
                    delta += a * (log(y) - log(xi))
                if b != 0.0:
                    delta += b * (log(1.0 - y) - log(1.0 - xi))
                for j in range(k):
                    if j != i:
                        dy = fabs(y - x[j])
                        dx = fabs(xi - x[j])
                        delta += 2.0 * (log(dy) - log(dx))
                if log(uniforms[s, i]) < delta:
                    x[i] = y
                    accepted += 1
            for i in range(k):
                T[s, i] = x[i]
    return traj, accepted
