"""Brute-force mixed moments of free projections via free cumulants.

Standalone: exact rational arithmetic from the standard library. For free
variables the moment of a word is the sum over non-crossing partitions of
products of free cumulants, where blocks mixing different variables
contribute zero. Cumulants of a projection of trace a (all moments equal a)
come from inverting the same moment-cumulant relation.
Prints a JSON mapping record id -> value.
"""
import json
from fractions import Fraction
from functools import lru_cache


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def non_crossing(part):
    for A in part:
        for B in part:
            if A is B:
                continue
            for a1 in A:
                for a2 in A:
                    for b1 in B:
                        for b2 in B:
                            if a1 < b1 < a2 < b2:
                                return False
    return True


@lru_cache(maxsize=None)
def nc_partitions(n):
    return [p for p in set_partitions(list(range(n))) if non_crossing(p)]


@lru_cache(maxsize=None)
def cumulant(a, n):
    # m_n = sum over NC(n) of prod kappa_|block|; single variable, all moments a
    total = Fraction(0)
    for p in nc_partitions(n):
        if len(p) == 1:
            continue
        prod = Fraction(1)
        for blk in p:
            prod *= cumulant(a, len(blk))
        total += prod
    return a - total


def moment(word, traces):
    total = Fraction(0)
    for p in nc_partitions(len(word)):
        prod = Fraction(1)
        for blk in p:
            letters = {word[i] for i in blk}
            if len(letters) > 1:
                prod = Fraction(0)
                break
            prod *= cumulant(traces[word[blk[0]]], len(blk))
        total += prod
    return total


if __name__ == "__main__":
    half = Fraction(1, 2)
    out = {
        "free_mixed_moment.r1r2r1r2_half": moment((0, 1, 0, 1), (half, half)),
        "free_mixed_moment.r1r2r1r2_generic": moment((0, 1, 0, 1), (Fraction(3, 10), Fraction(3, 5))),
        "free_mixed_moment.three_blocks": moment((0, 1, 2, 0, 1, 2), (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))),
    }
    print(json.dumps({k: float(v) for k, v in out.items()}, sort_keys=True))
