"""Independent reference implementations used only by the tests.

Nothing here calls into the library's fast paths: floors come from mpmath's
low-level routines with directed rounding, inverses from exhaustive search or
Fermat's little theorem, and sums from plain Python loops.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
from mpmath import libmp

_WIDEN = 2.0**-200


def hp_floor_power(n: int, c: Fraction, prec: int = 256) -> int:
    """floor(n**c) from a 256-bit bracket rounded down and up."""
    if n == 1:
        return 1
    a, b = c.numerator, c.denominator
    x = libmp.from_int(n)

    def bound(rnd):
        lg = libmp.mpf_log(x, prec, rnd)
        t = libmp.mpf_div(libmp.mpf_mul(lg, libmp.from_int(a), prec, rnd),
                          libmp.from_int(b), prec, rnd)
        return libmp.mpf_exp(t, prec, rnd)

    lo = bound("f")
    hi = bound("c")
    # widen by a relative 2^-200 to absorb any last-bit slop in log/exp
    lo = libmp.mpf_sub(lo, libmp.mpf_mul(lo, libmp.from_float(_WIDEN)), prec, "f")
    hi = libmp.mpf_add(hi, libmp.mpf_mul(hi, libmp.from_float(_WIDEN)), prec, "c")
    flo, fhi = libmp.to_int(lo, "f"), libmp.to_int(hi, "f")
    if flo == fhi:
        return flo
    # an integer m = fhi sits inside the bracket; settle m <= n^(a/b) exactly
    return fhi if fhi**b <= n**a else fhi - 1


def exhaustive_inverse(a: int, p: int) -> int:
    a %= p
    for b in range(1, p):
        if a * b % p == 1:
            return b
    raise ZeroDivisionError(a)


def exhaustive_inverse_table(p: int) -> np.ndarray:
    """t[a] = a^{-1} mod p by scanning all products (t[0] = 0)."""
    table = np.zeros(p, dtype=np.int64)
    b = np.arange(p, dtype=np.int64)
    block = max(1, 4_000_000 // p)
    for start in range(1, p, block):
        a = np.arange(start, min(start + block, p), dtype=np.int64)
        hit = (a[:, None] * b[None, :]) % p == 1
        table[a] = np.argmax(hit, axis=1)
    return table


def naive_psi(x: int, y: int, p: int, u: int) -> complex:
    u %= p
    if u == 0:
        return 0j
    inv = pow(u, p - 2, p)
    return cmath.exp(2j * math.pi * ((x * u + y * inv) % p) / p)


def naive_sum(c: Fraction, x: int, y: int, p: int, lo: int, hi: int) -> complex:
    """sum over lo < n <= hi of psi(floor(n^c)), term by term."""
    total = 0j
    for n in range(lo + 1, hi + 1):
        total += naive_psi(x, y, p, hp_floor_power(n, c))
    return total


def naive_star_discrepancy(points) -> float:
    """sup_t |#{x < t}/N - t| and |#{x <= t}/N - t| over all breakpoints, O(N^2)."""
    pts = [float(v) for v in points]
    n = len(pts)
    best = 0.0
    for t in pts + [1.0]:
        below = sum(1 for v in pts if v < t)
        upto = sum(1 for v in pts if v <= t)
        best = max(best, abs(below / n - t), abs(upto / n - t))
    return best


def brute_rational_sum(v, w, p: int) -> complex:
    v, w = [int(a) for a in v], [int(b) for b in w]
    total = 0j
    for u in range(p):
        if any((u + a) % p == 0 for a in list(v) + list(w)):
            continue
        r = sum(pow(u + a, p - 2, p) for a in v) - sum(pow(u + a, p - 2, p) for a in w)
        total += cmath.exp(2j * math.pi * (r % p) / p)
    return total
