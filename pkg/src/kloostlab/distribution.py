"""Distribution of modular inverses ``floor(f(n))^{-1} mod p``.

Counts of inverses landing in an interval, exact star discrepancy, the
Erdos-Turan upper bound and the existence search.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .modarith import Prime, batch_inverse
from .sequences import SequenceSpec, floor_values
from .sums import CHUNK_SIZE

__all__ = [
    "ResidueInterval",
    "InverseCountResult",
    "ExistenceResult",
    "ERDOS_TURAN_CONSTANT",
    "inverse_points",
    "count_inverses",
    "main_term",
    "star_discrepancy",
    "erdos_turan_bound",
    "existence_xi",
    "existence_search",
]

ERDOS_TURAN_CONSTANT = 4.0


@dataclass(frozen=True)
class ResidueInterval:
    """The integers ``K+1, ..., K+H-1`` (``H - 1`` of them)."""

    K: int
    H: int

    def __post_init__(self) -> None:
        if self.H < 2:
            raise DomainError(f"interval needs H >= 2, got H={self.H}")

    @property
    def lo(self) -> int:
        return self.K + 1

    @property
    def hi(self) -> int:
        return self.K + self.H - 1

    @property
    def cardinality(self) -> int:
        return self.H - 1

    @property
    def members(self) -> range:
        return range(self.lo, self.hi + 1)

    def check(self, p: int) -> None:
        if self.lo < 0 or self.hi > p - 1:
            raise DomainError(f"interval [{self.lo}, {self.hi}] is not inside [0, {p - 1}]")

    def contains(self, r: np.ndarray) -> np.ndarray:
        return (r >= self.lo) & (r <= self.hi)


@dataclass(frozen=True)
class InverseCountResult:
    """``count`` of ``n <= N`` with inverse in the interval, against ``HN/p``.

    ``skipped`` counts ``n`` with ``p | floor(f(n))``; ``main_term_members``
    uses ``|I| = H - 1`` instead of ``H``.
    """

    count: int
    main_term: float
    skipped: int
    N: int
    H: int
    p: int

    @property
    def error(self) -> float:
        return self.count - self.main_term

    @property
    def main_term_members(self) -> float:
        return (self.H - 1) * self.N / self.p


def _inverses_chunk(spec: SequenceSpec, p: int, lo: int, hi: int):
    r = floor_values(spec, lo, hi) % p
    mask = r != 0
    inv = np.zeros(r.shape, dtype=np.int64 if p < 2**62 else object)
    if mask.any():
        inv[mask] = batch_inverse(r[mask].tolist(), p)
    return inv, mask


def inverse_points(spec: SequenceSpec, N: int, p: int, *, threads: int = 1):
    """Inverses of ``floor(f(n)) mod p`` for ``n = 1..N``.

    Returns ``(inv, defined)``: ``inv[n-1]`` is the inverse in ``[1, p)`` or 0
    where ``p | floor(f(n))``, in which case ``defined[n-1]`` is False.
    """
    p = int(Prime(p))
    bounds = list(range(1, N + 1, CHUNK_SIZE)) + [N + 1]
    jobs = list(zip(bounds[:-1], bounds[1:]))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _inverses_chunk(spec, p, *j), jobs))
    else:
        parts = [_inverses_chunk(spec, p, lo, hi) for lo, hi in jobs]
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    return np.concatenate([a for a, _ in parts]), np.concatenate([m for _, m in parts])


def main_term(N: float, H: float, p: int) -> float:
    """Expected count ``H N / p``."""
    return H * N / p


def count_inverses(spec: SequenceSpec, N: int, p: int, interval: ResidueInterval,
                   *, threads: int = 1) -> InverseCountResult:
    """Number of ``n <= N`` whose inverse of ``floor(f(n))`` mod ``p`` lies in ``interval``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    p = int(Prime(p))
    interval.check(p)
    inv, defined = inverse_points(spec, N, p, threads=threads)
    count = int(np.count_nonzero(defined & interval.contains(inv)))
    skipped = int(N - np.count_nonzero(defined))
    return InverseCountResult(count, main_term(N, interval.H, p), skipped, N, interval.H, p)


def star_discrepancy(points: Sequence[float]) -> float:
    """Exact star discrepancy of points in ``[0, 1)``.

    ``D* = max_i max(i/N - x_(i), x_(i) - (i-1)/N)`` over the sorted points.
    """
    x = np.sort(np.asarray(points, dtype=np.float64))
    n = x.size
    if n == 0:
        raise DomainError("star discrepancy needs at least one point")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def erdos_turan_bound(S: Sequence[complex], N: int, Kmax: int | None = None,
                      C: float = ERDOS_TURAN_CONSTANT) -> float:
    """``C (1/(Kmax+1) + (1/N) sum_{k<=Kmax} |S_k| / k)``.

    ``S[k-1]`` is the Weyl sum ``sum_n e(k x_n)`` over the ``N`` points.
    """
    if Kmax is None:
        Kmax = len(S)
    if Kmax < 1 or len(S) < Kmax:
        raise DomainError(f"need 1 <= Kmax <= len(S), got Kmax={Kmax}")
    if N < 1:
        raise DomainError("N must be >= 1")
    tail = math.fsum(abs(S[k - 1]) / k for k in range(1, Kmax + 1))
    return C * (1 / (Kmax + 1) + tail / N)


def existence_xi(kappa: float) -> float:
    """Supremum ``min(1/4, 1 - 1/(2 - kappa))`` of admissible ``xi``."""
    if not 2.0 / 3.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (2/3, 1), got {kappa}")
    k = Fraction(repr(float(kappa)))
    return float(min(Fraction(1, 4), 1 - 1 / (2 - k)))


@dataclass(frozen=True)
class ExistenceResult:
    """Outcome of :func:`existence_search`; ``witness`` is None if none exists."""

    witness: int | None
    N0: int
    xi: float
    p_ge_H: bool
    p_ge_N: bool
    HN_large: bool

    @property
    def hypotheses_hold(self) -> bool:
        return self.p_ge_H and self.p_ge_N and self.HN_large


def existence_search(spec: SequenceSpec, p: int, N: int, interval: ResidueInterval,
                     xi: float | None = None) -> ExistenceResult:
    """Smallest ``n <= N`` whose inverse lies in ``interval``.

    The size hypotheses ``p >= H, N`` and ``HN >= p^{2-xi}`` are reported,
    not enforced; ``xi`` defaults to :func:`existence_xi` of ``spec.kappa``.
    """
    p = int(Prime(p))
    interval.check(p)
    if xi is None:
        xi = existence_xi(spec.kappa)
    N0 = min(N, math.ceil(p ** (1 / (2 - spec.kappa))) - 1)
    witness = None
    for lo in range(1, N + 1, CHUNK_SIZE):
        hi = min(lo + CHUNK_SIZE, N + 1)
        inv, defined = _inverses_chunk(spec, p, lo, hi)
        hits = np.flatnonzero(defined & interval.contains(inv))
        if hits.size:
            witness = lo + int(hits[0])
            break
    H = interval.H
    return ExistenceResult(
        witness=witness, N0=N0, xi=xi, p_ge_H=p >= H, p_ge_N=p >= N,
        HN_large=math.log(H * N) >= (2 - xi) * math.log(p),
    )
