"""Quadrature oracles for the unit-mass arcsine law and related measures.

Standalone: depends on mpmath only. Prints a JSON mapping record id -> value.
The arcsine law is written in the angle variable x = sin^2(theta/2), where
it is uniform on [0, pi]; all integrals are done by adaptive mpmath quadrature.
"""
import json

import mpmath as mp

mp.mp.dps = 20


def arcsine_moment(n):
    return mp.quad(lambda th: mp.sin(th / 2) ** (2 * n), [0, mp.pi]) / mp.pi


def arcsine_energy():
    # log|x - y| = log|cos b - cos a| - log 2 in angle variables
    # cos b - cos a = 2 sin((a+b)/2) sin((a-b)/2), which keeps precision near a = b
    def integrand(a, b):
        d = mp.sin((a - b) / 2)
        if d == 0:
            return mp.mpf(0)  # a single point carries no mass
        return mp.log(2) + mp.log(abs(mp.sin((a + b) / 2))) + mp.log(abs(d))

    def inner(b):
        return mp.quad(lambda a: integrand(a, b), [0, b, mp.pi])
    return mp.quad(inner, [0, mp.pi / 2, mp.pi]) / mp.pi ** 2 - mp.log(2)


def w2_uniform_atom(c):
    return mp.sqrt(mp.quad(lambda t: (t - c) ** 2, [0, 1]))


def beta_mean(N, l):
    # k = 1: the single eigenvalue has density proportional to x^(l-1) (1-x)^(N-1-l)
    f = lambda x: x ** (l - 1) * (1 - x) ** (N - 1 - l)
    return mp.quad(lambda x: x * f(x), [0, 1]) / mp.quad(f, [0, 1])


if __name__ == "__main__":
    out = {
        # nu carries mass 1 at traces 1/2, and tau(e f e ...) = (1/2) int x^n dnu
        "free_pair_state.efe": arcsine_moment(1) / 2,
        "pair_moment.efef": arcsine_moment(2) / 2,
        "pushforward_state.square_efe": arcsine_moment(2) / 2,
        "log_energy.arcsine": arcsine_energy(),
        "wasserstein2.uniform_atom": w2_uniform_atom(mp.mpf(1) / 2),
        "sample_pair_eigenvalues.k1_mean": beta_mean(8, 3),
    }
    print(json.dumps({k: float(v) for k, v in out.items()}, sort_keys=True))
