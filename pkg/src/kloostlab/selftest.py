"""Fast consistency checks behind ``kloostlab selftest``."""

from __future__ import annotations

import math

import numpy as np

from . import (
    PoleVectors,
    PsiParams,
    ResidueInterval,
    SequenceSpec,
    WeightedSet,
    c_constant,
    count_inverses,
    double_sum_completed,
    double_sum_direct,
    existence_xi,
    floor_f,
    inverse_points,
    long_sum,
    mod_inverse,
    rational_sum,
    star_discrepancy,
    theorem_delta,
)


def _checks():
    spec = SequenceSpec.power(1.2)
    yield "mod_inverse(3, 7) == 5", mod_inverse(3, 7) == 5
    yield "floor(32^1.2) == 64 (exact integer power)", floor_f(spec, 32) == 64
    yield "floor(10^1.5) == 31", floor_f(SequenceSpec.power(1.5), 10) == 31
    yield "theorem_delta(0.1, 0.8) == 2e-6", theorem_delta(0.1, 0.8) == 2.0e-6
    yield "c_constant(0.1, 0.8)", abs(c_constant(0.1, 0.8) - 0.064 / 5.96) < 1e-12
    yield "existence_xi(0.8) == 1/6", abs(existence_xi(0.8) - 1 / 6) < 1e-12
    s = long_sum(spec, PsiParams(0, 0, 17), 10)
    yield "long_sum with x=y=0 counts terms", abs(s.value - 10) < 1e-12
    rng = np.random.default_rng(0)
    p = 101
    U = WeightedSet(rng.choice(p, 12, replace=False), rng.normal(size=12), p)
    V = WeightedSet(rng.choice(p, 9, replace=False), rng.normal(size=9), p)
    params = PsiParams(3, 7, p)
    d, c = double_sum_direct(U, V, params), double_sum_completed(U, V, params)
    yield "completion identity at p=101", abs(d - c) <= 1e-9 * max(1.0, abs(d))
    yield "diagonal rational sum", rational_sum(PoleVectors((1, 2), (2, 1), 11)) == 9
    yield "Weil check v=(1), w=(2), p=5", abs(rational_sum(PoleVectors((1,), (2,), 5))) <= 2 * math.sqrt(5)
    res = count_inverses(spec, 500, 101, ResidueInterval(0, 101))
    yield "full interval counts every defined inverse", res.count == 500 - res.skipped
    inv, ok = inverse_points(spec, 200, 101)
    yield "star discrepancy in (0, 1]", 0 < star_discrepancy(inv[ok] / 101) <= 1


def run_selftest() -> bool:
    ok = True
    for name, passed in _checks():
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok &= bool(passed)
    return ok
