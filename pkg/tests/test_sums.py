import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kloostlab import (
    DegenerateDecomposition,
    DomainError,
    PsiParams,
    SequenceSpec,
    SumRecord,
    admissible_N_range,
    bound_ratio,
    c_constant,
    decomposition,
    delta0_short,
    floor_values,
    long_sum,
    range_check_2_1,
    range_check_short,
    short_sum,
    theorem_delta,
    xi0_search,
)
from kloostlab import sums

import oracles

T12 = SequenceSpec.power(1.2)
C12 = Fraction(6, 5)


def test_long_sum_trivial_character():
    rec = long_sum(T12, PsiParams(0, 0, 17), 10)
    assert rec.value == 10
    assert rec.zero_terms == 0
    assert rec.ratio == 1.0 and rec.trivial_bound == 10


@pytest.mark.parametrize("p", [3, 7, 101])
def test_long_sum_trivial_character_counts_zero_terms(p):
    N = 500
    rec = long_sum(T12, PsiParams(0, 0, p), N)
    zeros = sum(1 for n in range(1, N + 1) if oracles.hp_floor_power(n, C12) % p == 0)
    assert rec.value == N - zeros
    assert rec.zero_terms == zeros


def test_long_sum_matches_naive_loop():
    rec = long_sum(T12, PsiParams(1, 1, 101), 200)
    want = oracles.naive_sum(C12, 1, 1, 101, 0, 200)
    assert abs(rec.value - want) < 1e-9


def test_short_sum_examples():
    assert short_sum(T12, PsiParams(0, 0, 1_000_003), 100, 50).value == 50
    params = PsiParams(1, 1, 101)
    diff = long_sum(T12, params, 150).value - long_sum(T12, params, 100).value
    assert abs(short_sum(T12, params, 100, 50).value - diff) < 1e-9
    empty = short_sum(T12, params, 100.2, 0.5)
    assert empty.value == 0 and empty.n_terms == 0


def test_short_sum_real_endpoints():
    params = PsiParams(4, 9, 101)
    rec = short_sum(T12, params, 10.5, 20.25)  # n = 11..30
    assert rec.range == (10, 30)
    assert abs(rec.value - oracles.naive_sum(C12, 4, 9, 101, 10, 30)) < 1e-9


def test_long_equals_short_from_zero():
    params = PsiParams(3, 8, 499)
    assert long_sum(T12, params, 777).value == short_sum(T12, params, 0, 777).value


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3000), st.integers(0, 3000), st.integers(0, 1008), st.integers(0, 1008))
def test_additivity_trivial_bound_and_conjugation(N1, extra, x, y):
    p = 1009
    params = PsiParams(x, y, p)
    N2 = N1 + extra
    a = long_sum(T12, params, N1).value
    b = sums.range_sum(T12, params, N1, N2).value
    c = long_sum(T12, params, N2).value
    assert abs(a + b - c) < 1e-9
    assert abs(c) <= N2 + 1e-6
    conj = long_sum(T12, params.conjugate(), N2).value
    assert abs(conj - c.conjugate()) < 1e-9


def test_sum_deterministic_across_threads(monkeypatch):
    monkeypatch.setattr(sums, "CHUNK_SIZE", 257)
    params = PsiParams(11, 29, 10007)
    one = long_sum(T12, params, 20_000, threads=1)
    four = long_sum(T12, params, 20_000, threads=4)
    assert one.value == four.value
    assert abs(one.value - oracles.naive_sum(C12, 11, 29, 10007, 0, 20_000)) < 1e-9


def test_long_sum_requires_positive_N():
    with pytest.raises(DomainError):
        long_sum(T12, PsiParams(1, 1, 7), 0)


def test_sum_record_invariants():
    rec = long_sum(T12, PsiParams(5, 6, 10007), 2000, theory_delta=2e-6)
    assert 0 <= rec.ratio <= 1 + 1e-9
    assert rec.theory_bound == pytest.approx(2000 * 10007**-2e-6)


# -- constants ---------------------------------------------------------------

def test_theorem_delta():
    assert theorem_delta(0.1, 0.8) == 2.0e-6
    assert theorem_delta(0.2, 0.8) == 8.0e-6
    for bad in [(0, 0.8), (-0.1, 0.8), (0.1, 0.6), (0.1, 1.0)]:
        with pytest.raises(DomainError):
            theorem_delta(*bad)


def test_delta0_short():
    assert delta0_short(0.1) == pytest.approx(3.84615e-4, rel=1e-5)
    assert delta0_short(0.1) == 0.01 / 26
    assert delta0_short(1.0) == 1 / 26
    assert delta0_short(0.2) == pytest.approx(4 * delta0_short(0.1), rel=1e-15)
    with pytest.raises(DomainError):
        delta0_short(0)


def test_c_constant():
    assert abs(c_constant(0.1, 0.8) - 0.064 / 5.96) < 1e-12
    assert c_constant(1e-12, 0.8) < 1e-12
    for eps in (0.01, 0.5, 5.0, 100.0):
        for kappa in (0.67, 0.8, 0.99):
            assert 0 < c_constant(eps, kappa) < 1
    with pytest.raises(DomainError):
        c_constant(0.1, 0.5)


def test_admissible_range_example():
    lo, hi = admissible_N_range(10007, 0.01, 0.8)
    assert lo == math.ceil(10007 ** (0.625 + 0.01)) == 347
    assert hi == math.ceil(10007 ** (1 / 1.2)) - 1 == 2155
    assert lo <= 2000 <= hi


def test_admissible_range_empty_near_two_thirds():
    for p in (101, 10007, 1_000_003):
        lo, hi = admissible_N_range(p, 0.01, 2 / 3 + 1e-9)
        assert lo > hi


def test_admissible_range_monotone_in_p():
    prev = (0, 0)
    for p in (10007, 100_003, 1_000_003, 10_000_019):
        lo, hi = admissible_N_range(p, 0.01, 0.8)
        assert lo > prev[0] and hi > prev[1]
        prev = (lo, hi)


def test_range_check_2_1_examples():
    p = 10007
    assert all(range_check_2_1(p, p, 0.01, 0.8))
    N = 5000
    assert range_check_2_1(N, p, 0.0, 0.8) == [N >= 1, N**0.4 >= 1, N >= p**0.5, N**0.8 >= p**0.5]
    # large c kills the first inequality
    assert not range_check_2_1(p, p, 0.5, 0.8)[0]


@pytest.mark.parametrize("p", [1009, 10007, 1_000_003])
@pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
@pytest.mark.parametrize("kappa", [0.7, 0.75, 0.8, 0.9])
def test_last_inequality_implies_the_others(p, eps, kappa):
    c = c_constant(eps, kappa)
    lo, hi = admissible_N_range(p, eps, kappa)
    for N in (lo, hi, p, p**2):
        checks = range_check_2_1(N, p, c, kappa)
        if checks[3]:
            assert all(checks[:3])


def test_range_check_short():
    p, kappa, eps = 10007, 0.8, 0.01
    K = p ** (1 / (2 - kappa))
    checks = range_check_short(K, K**0.79, p, eps, kappa)
    assert checks[0] and checks[1]
    assert not range_check_short(K, K**0.8, p, eps, kappa)[0]
    assert range_check_short(1e6, 1e6**0.5, p, 0.0, kappa)[0]
    for K in (10.0, 1e3, 1e6):
        assert not range_check_short(K, K, p, eps, kappa)[0]
    with pytest.raises(DomainError):
        range_check_short(0.5, 2, p, eps, kappa)


def test_decomposition_example():
    c = c_constant(0.1, 0.8)
    d = decomposition(1000, 10007, c, 0.8)
    R = math.floor(1000 ** (1 + c - 0.8) * math.log(10007) ** 2)
    assert d.R == R == 363
    assert d.boundaries[0] == 1000
    assert d.boundaries[-1] == pytest.approx(1000 * 10007**-c, rel=1e-9)
    for j in range(1, d.R + 1):
        gap = d.boundaries[j - 1] - d.boundaries[j]
        assert gap == pytest.approx(d.Delta * d.boundaries[j], rel=1e-9)
    assert len(d.segments()) == d.R


def test_decomposition_log_base_and_degenerate():
    c = c_constant(0.1, 0.8)
    d10 = decomposition(1000, 10007, c, 0.8, log_base=10)
    assert d10.R == math.floor(1000 ** (1 + c - 0.8) * math.log10(10007) ** 2)
    with pytest.raises(DegenerateDecomposition):
        decomposition(1, 3, 0.001, 0.99, log_base=1e9)


def _brute_xi_count(pts, xi, bins):
    return int(np.count_nonzero(np.mod(pts - xi, 1.0) < 1.0 / bins))


def test_xi0_integer_slope():
    spec = SequenceSpec.custom(lambda t: 3 * t, lambda t: 3.0, lambda t: 1e-9, kappa=0.8)
    choice = xi0_search(spec, 10.0, 50, 5)
    assert choice.xi0 == 0.0 and choice.count == 50


def test_xi0_golden_ratio():
    phi = (1 + 5**0.5) / 2
    spec = SequenceSpec.custom(lambda t: phi * t, lambda t: phi, lambda t: 1e-9, kappa=0.8)
    choice = xi0_search(spec, 1.0, 10, 5)
    assert choice.count >= 2


@pytest.mark.parametrize("seed", range(5))
def test_xi0_against_exhaustive_scan(seed):
    rng = np.random.default_rng(seed)
    slope = float(rng.uniform(1, 100))
    spec = SequenceSpec.custom(lambda t: slope * t, lambda t: slope, lambda t: 1e-9, kappa=0.8)
    H, bins = 1000, 10
    choice = xi0_search(spec, 1.0, H, bins)
    pts = np.mod(np.arange(1, H + 1) * slope, 1.0)
    assert choice.count >= H / bins
    assert 0 <= choice.xi0 < 1
    assert _brute_xi_count(pts, choice.xi0, bins) == choice.count
    grid_best = max(_brute_xi_count(pts, xi, bins) for xi in np.arange(10_000) / 10_000)
    assert choice.count >= grid_best


def test_xi0_preconditions():
    with pytest.raises(DomainError):
        xi0_search(T12, 10.0, 3, 5)


def test_bound_ratio():
    params = PsiParams(0, 0, 1_000_003)
    rec = long_sum(T12, params, 300)
    assert bound_ratio(rec, 0.01) == pytest.approx(1_000_003**0.01, rel=1e-12)
    zero = SumRecord(0j, 10, params, (0, 10))
    assert bound_ratio(zero, 0.01) == 0
    rnd = long_sum(T12, PsiParams(123, 456, 10007), 2000)
    assert math.isfinite(bound_ratio(rnd, theorem_delta(0.01, 0.8)))
