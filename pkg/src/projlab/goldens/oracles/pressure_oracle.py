"""Exact finite-N matrix integral for h = psi(efe) with psi(x) = x.

The Jacobi eigenvalues of PQP (ranks k <= l, k + l <= N) have density
proportional to prod x^(l-k) (1-x)^(N-k-l) times the squared Vandermonde.
By Andreief's identity E prod f(x_i) is a ratio of Hankel determinants of
moments of f against that weight, evaluated here with mpmath at 40 digits.

Standalone: depends on mpmath only. Prints a JSON mapping record id -> value.
"""
import json

import mpmath as mp

mp.mp.dps = 40


def log_expectation(N, k, l):
    a, b = l - k, N - k - l
    num = mp.matrix(k, k)
    den = mp.matrix(k, k)
    for i in range(k):
        for j in range(k):
            num[i, j] = mp.quad(lambda x: x ** (i + j + a) * (1 - x) ** b * mp.exp(-N * x), [0, 1])
            den[i, j] = mp.beta(i + j + a + 1, b + 1)
    return mp.log(mp.det(num) / mp.det(den))


if __name__ == "__main__":
    out = {
        "mc_pressure.identity_n12": log_expectation(12, 6, 6) / 12 ** 2,
        "mc_pressure.identity_n8_k3_l5": log_expectation(8, 3, 5) / 8 ** 2,
    }
    print(json.dumps({k: float(v) for k, v in out.items()}, sort_keys=True))
