from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kloostlab import (
    DomainError,
    PsiParams,
    ResidueInterval,
    SequenceSpec,
    count_inverses,
    erdos_turan_bound,
    existence_search,
    existence_xi,
    inverse_points,
    long_sum,
    main_term,
    star_discrepancy,
)

import oracles

SPEC = SequenceSpec.power(1.2)
C12 = Fraction(6, 5)


def brute_count(N, p, K, H):
    """Loop n, floor at high precision, invert by exhaustive search."""
    count = skipped = 0
    for n in range(1, N + 1):
        r = oracles.hp_floor_power(n, C12) % p
        if r == 0:
            skipped += 1
            continue
        if K + 1 <= oracles.exhaustive_inverse(r, p) <= K + H - 1:
            count += 1
    return count, skipped


def test_interval_shape():
    iv = ResidueInterval(3, 5)
    assert list(iv.members) == [4, 5, 6, 7]
    assert iv.cardinality == 4
    with pytest.raises(DomainError):
        ResidueInterval(3, 1)
    with pytest.raises(DomainError):
        ResidueInterval(0, 102).check(101)
    with pytest.raises(DomainError):
        count_inverses(SPEC, 0, 101, ResidueInterval(0, 5))


def test_full_interval_counts_everything():
    res = count_inverses(SPEC, 2000, 101, ResidueInterval(0, 101))
    assert res.count == 2000 - res.skipped
    assert res.skipped > 0


def test_single_term():
    res = count_inverses(SPEC, 1, 101, ResidueInterval(0, 2))
    assert res.count == 1 and res.skipped == 0


def test_against_brute_force_p101():
    res = count_inverses(SPEC, 500, 101, ResidueInterval(0, 51))
    assert (res.count, res.skipped) == brute_count(500, 101, 0, 51)
    assert 0 <= res.count and res.count + res.skipped <= 500


def test_inverse_points_against_exhaustive_table():
    p = 1009
    table = oracles.exhaustive_inverse_table(p)
    inv, ok = inverse_points(SPEC, 3000, p, threads=3)
    r = np.array([oracles.hp_floor_power(n, C12) % p for n in range(1, 3001)])
    assert np.array_equal(ok, r != 0)
    assert np.array_equal(inv, table[r])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 99), st.integers(2, 50), st.integers(1, 40))
def test_monotone_and_additive(K, H, extra):
    p = 101
    H = min(H, p - K)
    if H < 2:
        return
    N = 700
    a = count_inverses(SPEC, N, p, ResidueInterval(K, H)).count
    H2 = min(H + extra, p - K)
    b = count_inverses(SPEC, N, p, ResidueInterval(K, H2)).count
    assert b >= a
    # [K+1, K+H-1] and [K+H, K+H2-1] partition [K+1, K+H2-1]
    if H2 - H >= 2:
        tail = count_inverses(SPEC, N, p, ResidueInterval(K + H - 1, H2 - H + 1)).count
        assert a + tail == b


def test_thread_count_invariance():
    iv = ResidueInterval(100, 4000)
    one = count_inverses(SPEC, 100_000, 10007, iv, threads=1)
    four = count_inverses(SPEC, 100_000, 10007, iv, threads=4)
    assert one == four


def test_main_term():
    assert main_term(1234, 101, 101) == 1234
    assert main_term(10_000, 5000, 10007) == pytest.approx(4996.5, abs=0.01)
    assert main_term(500, 2, 101) == pytest.approx(1000 / 101)
    res = count_inverses(SPEC, 1000, 101, ResidueInterval(0, 11))
    assert res.main_term == pytest.approx(11 * 1000 / 101)
    assert res.main_term_members == pytest.approx(10 * 1000 / 101)
    assert res.error == pytest.approx(res.count - res.main_term)


def test_star_discrepancy_examples():
    assert star_discrepancy([0.5]) == 0.5
    for n in (1, 7, 100):
        assert star_discrepancy(np.arange(n) / n) == pytest.approx(1 / n, abs=1e-15)
    with pytest.raises(DomainError):
        star_discrepancy([])


def test_star_discrepancy_naive_oracle():
    rng = np.random.default_rng(11)
    pts = rng.random(1000)
    assert abs(star_discrepancy(pts) - oracles.naive_star_discrepancy(pts)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=40))
def test_star_discrepancy_property(pts):
    d = star_discrepancy(pts)
    assert 1 / (2 * len(pts)) - 1e-15 <= d <= 1
    assert abs(d - oracles.naive_star_discrepancy(pts)) < 1e-12


def test_erdos_turan_examples():
    assert erdos_turan_bound([0] * 9, 100) == pytest.approx(0.4)
    n = 200
    grid = np.arange(n) / n
    S = [np.exp(2j * np.pi * k * grid).sum() for k in range(1, 51)]
    b = erdos_turan_bound(S, n, 50)
    assert b == pytest.approx(4 / 51, abs=1e-12)
    assert b >= star_discrepancy(grid)
    with pytest.raises(DomainError):
        erdos_turan_bound([1, 2], 10, Kmax=3)


@pytest.mark.parametrize("p,N", [(101, 500), (1009, 1500), (10007, 2000)])
def test_erdos_turan_dominates_inverse_points(p, N):
    inv, ok = inverse_points(SPEC, N, p)
    d = star_discrepancy(inv[ok] / p)
    S = [long_sum(SPEC, PsiParams(0, k, p), N).value for k in range(1, 51)]
    assert erdos_turan_bound(S, int(ok.sum()), 50) >= d


def test_existence_xi():
    assert existence_xi(0.8) == pytest.approx(1 / 6, abs=1e-12)
    assert existence_xi(0.7) == pytest.approx(1 - 1 / 1.3, abs=1e-12)
    assert existence_xi(0.7) == pytest.approx(0.2307692307, abs=1e-9)
    assert existence_xi(0.999999) < 1e-5
    # kappa > 2/3 keeps 1 - 1/(2 - kappa) below the 1/4 cap
    assert existence_xi(0.6667) == pytest.approx(0.25, abs=1e-4)
    assert existence_xi(0.6667) < 0.25
    for bad in (0.5, 1.0):
        with pytest.raises(DomainError):
            existence_xi(bad)


def test_existence_full_interval():
    res = existence_search(SPEC, 101, 50, ResidueInterval(0, 101))
    assert res.witness == 1
    assert res.N0 == 46  # ceil(101^(1/1.2)) - 1


def test_existence_negative_case():
    p, N = 101, 3
    inv, _ = inverse_points(SPEC, N, p)
    missing = next(h for h in range(1, p) if h not in set(inv.tolist()))
    res = existence_search(SPEC, p, N, ResidueInterval(missing - 1, 2))
    assert res.witness is None


def test_existence_under_size_hypothesis():
    p = 101
    rng = np.random.default_rng(5)
    for _ in range(25):
        H = int(rng.integers(70, 101))
        K = int(rng.integers(0, p - H + 1))
        N = int(rng.integers(95, 102))
        res = existence_search(SPEC, p, N, ResidueInterval(K, H), xi=0.1)
        assert res.hypotheses_hold
        assert res.witness is not None
        inv, ok = inverse_points(SPEC, res.witness, p)
        hits = ok & (inv >= K + 1) & (inv <= K + H - 1)
        assert hits[-1] and hits.sum() == 1
