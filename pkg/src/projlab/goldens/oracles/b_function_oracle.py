"""High-precision evaluation of B(s, t) and of C = rho^2 B(u/rho, v/rho).

Standalone: depends on mpmath only. Prints a JSON mapping record id -> value.
"""
import json

import mpmath as mp

mp.mp.dps = 40


def xlogx2(x):
    x = mp.mpf(x)
    return mp.mpf(0) if x == 0 else x * x / 2 * mp.log(x)


def B(s, t):
    s, t = mp.mpf(s), mp.mpf(t)
    return (xlogx2(1 + s) - xlogx2(s) + xlogx2(1 + t) - xlogx2(t)
            - xlogx2(2 + s + t) + xlogx2(1 + s + t))


def C(alpha, beta):
    alpha, beta = mp.mpf(alpha), mp.mpf(beta)
    rho = min(alpha, beta, 1 - alpha, 1 - beta)
    if rho == 0:
        return mp.mpf(0)
    u, v = abs(alpha - beta), abs(alpha + beta - 1)
    return rho ** 2 * B(u / rho, v / rho)


if __name__ == "__main__":
    out = {
        "b_function.one_zero": B(1, 0),
        "b_function.generic": B(mp.mpf("0.3"), mp.mpf("1.7")),
        "c_constant.half_half": C(mp.mpf(1) / 2, mp.mpf(1) / 2),
        "c_constant.generic": C(mp.mpf("0.3"), mp.mpf("0.6")),
    }
    print(json.dumps({k: float(v) for k, v in out.items()}, sort_keys=True))
