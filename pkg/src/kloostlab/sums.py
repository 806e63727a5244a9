"""Sums of psi_{x,y;p}(floor(f(n))) and the explicit constants around them.

Long and short sums share one kernel: the index range is cut into fixed-size
chunks, each chunk is summed with :func:`math.fsum`, and the chunk partials
are fsum-merged in index order.  Chunk boundaries do not depend on the thread
count, so the result is bit-identical however many workers are used.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateDecomposition, DomainError
from .modarith import Prime, PsiParams, psi_values
from .sequences import SequenceSpec, floor_values

__all__ = [
    "SumRecord",
    "Decomposition",
    "Xi0Choice",
    "CHUNK_SIZE",
    "long_sum",
    "short_sum",
    "range_sum",
    "theorem_delta",
    "delta0_short",
    "c_constant",
    "admissible_N_range",
    "range_check_2_1",
    "range_check_short",
    "decomposition",
    "xi0_search",
    "bound_ratio",
]

CHUNK_SIZE = 1 << 15


@dataclass(frozen=True)
class SumRecord:
    """One computed sum over ``start < n <= end`` with its diagnostics."""

    value: complex
    n_terms: int
    params: PsiParams
    range: tuple[int, int]
    zero_terms: int = 0
    theory_bound: float | None = None

    @property
    def trivial_bound(self) -> float:
        return float(self.n_terms)

    @property
    def ratio(self) -> float:
        return abs(self.value) / self.n_terms if self.n_terms else 0.0


def _chunk_partial(spec: SequenceSpec, params: PsiParams, lo: int, hi: int):
    u = floor_values(spec, lo, hi) % int(params.p)
    vals, zeros = psi_values(params, u)
    return math.fsum(vals.real), math.fsum(vals.imag), zeros


def range_sum(spec: SequenceSpec, params: PsiParams, start: int, end: int,
              *, threads: int = 1, theory_delta: float | None = None) -> SumRecord:
    """Sum of psi(floor(f(n))) over integers ``start < n <= end``."""
    start, end = int(start), int(end)
    if end <= start:
        return SumRecord(0j, 0, params, (start, max(start, end)))
    bounds = list(range(start + 1, end + 1, CHUNK_SIZE)) + [end + 1]
    jobs = list(zip(bounds[:-1], bounds[1:]))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _chunk_partial(spec, params, *j), jobs))
    else:
        parts = [_chunk_partial(spec, params, lo, hi) for lo, hi in jobs]
    re = math.fsum(part[0] for part in parts)
    im = math.fsum(part[1] for part in parts)
    zeros = sum(part[2] for part in parts)
    n_terms = end - start
    bound = None
    if theory_delta is not None:
        bound = n_terms * float(params.p) ** (-theory_delta)
    return SumRecord(complex(re, im), n_terms, params, (start, end), zeros, bound)


def long_sum(spec: SequenceSpec, params: PsiParams, N: int, *, threads: int = 1,
             theory_delta: float | None = None) -> SumRecord:
    """``sum_{n=1}^{N} psi_{x,y;p}(floor(f(n)))``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return range_sum(spec, params, 0, N, threads=threads, theory_delta=theory_delta)


def short_sum(spec: SequenceSpec, params: PsiParams, K: float, L: float, *,
              threads: int = 1, theory_delta: float | None = None) -> SumRecord:
    """Sum over integers ``n`` with ``K < n <= K + L``; ``L < 1`` may be empty."""
    if K < 0:
        raise DomainError(f"K must be >= 0, got {K}")
    start = math.floor(K)
    end = math.floor(K + L)
    return range_sum(spec, params, start, end, threads=threads, theory_delta=theory_delta)


def bound_ratio(record: SumRecord, delta: float) -> float:
    """``|S| / (n_terms p^{-delta})``, the empirical implied constant."""
    if record.n_terms == 0:
        return 0.0
    return abs(record.value) / (record.n_terms * float(record.params.p) ** (-delta))


# -- explicit constants -------------------------------------------------------

def _check_eps_kappa(eps: float, kappa: float) -> None:
    if not eps > 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    if not 2.0 / 3.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (2/3, 1), got {kappa}")


def _dec(x: float) -> Fraction:
    # Inputs such as 0.1 are read as the decimal they print as, so the
    # constants below are the correctly rounded values of the exact formulas.
    return Fraction(repr(float(x)))


def theorem_delta(eps: float, kappa: float) -> float:
    """Power saving ``2**-11 * eps**2 * kappa**4`` of the long-sum bound."""
    _check_eps_kappa(eps, kappa)
    return float(_dec(eps) ** 2 * _dec(kappa) ** 4 / 2048)


def delta0_short(eps: float) -> float:
    """Power saving ``eps**2 / 26`` of the short-sum bound."""
    if not eps > 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    return float(_dec(eps) ** 2 / 26)


def c_constant(eps: float, kappa: float) -> float:
    """``eps kappa^2 / (1 + 6 kappa + 2 eps kappa)``; always in ``(0, 1)``."""
    _check_eps_kappa(eps, kappa)
    e, k = _dec(eps), _dec(kappa)
    return float(e * k**2 / (1 + 6 * k + 2 * e * k))


def admissible_N_range(p: int, eps: float, kappa: float) -> tuple[int, int]:
    """Integer ``N`` window ``p^{1/(2 kappa) + eps} <= N < p^{1/(2 - kappa)}``.

    Returns ``(N_min, N_max)``; the window is empty when ``N_min > N_max``.
    """
    _check_eps_kappa(eps, kappa)
    logp = math.log(Prime(p))
    n_min = math.ceil(math.exp((1 / (2 * kappa) + eps) * logp))
    n_max = math.ceil(math.exp(logp / (2 - kappa))) - 1
    return n_min, n_max


def range_check_2_1(N: float, p: int, c: float, kappa: float) -> list[bool]:
    """The four size conditions linking ``N``, ``p`` and ``c``, in log space.

    Order: ``N^{1-k/2} >= p^{3c}``, ``N^{k/2-c} >= p^{3c}``,
    ``N >= p^{1/2+3c}``, ``N^{k-c} >= p^{1/2+3c}``.
    """
    ln, lp = math.log(N), math.log(p)
    return [
        (1 - kappa / 2) * ln >= 3 * c * lp,
        (kappa / 2 - c) * ln >= 3 * c * lp,
        ln >= (0.5 + 3 * c) * lp,
        (kappa - c) * ln >= (0.5 + 3 * c) * lp,
    ]


def range_check_short(K: float, L: float, p: int, eps: float, kappa: float) -> list[bool]:
    """Admissibility of a short interval ``(K, K+L]``.

    Returns ``[K^{k-eps} >= L >= K^{k/2} p^eps, K <= p^{1/(2-k)}, L >= p^{1/2+eps}]``.
    """
    if K < 1 or L < 1:
        raise DomainError("K and L must be >= 1")
    lk, ll, lp = math.log(K), math.log(L), math.log(p)
    return [
        (kappa - eps) * lk >= ll >= kappa / 2 * lk + eps * lp,
        lk <= lp / (2 - kappa),
        ll >= (0.5 + eps) * lp,
    ]


# -- segment decomposition ----------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """Geometric cut points ``N = K_0 > K_1 > ... > K_R = N p^{-c}``."""

    R: int
    Delta: float
    boundaries: list[float] = field(repr=False)
    c: float
    N: float
    p: int

    def segments(self) -> list[tuple[float, float]]:
        """``(K_j, K_{j-1})`` pairs, largest first."""
        b = self.boundaries
        return [(b[j], b[j - 1]) for j in range(1, len(b))]


def decomposition(N: float, p: int, c: float, kappa: float, *,
                  log_base: float = math.e, rtol: float = 1e-9) -> Decomposition:
    """Cut ``(N p^{-c}, N]`` into ``R = floor(N^{1+c-kappa} log^2 p)`` segments.

    ``log_base`` selects the logarithm used in ``R`` (natural by default).
    Each segment satisfies ``K_{j-1} - K_j = Delta K_j``, checked before return.
    """
    p = Prime(p)
    logp = math.log(p)
    R = math.floor(N ** (1 + c - kappa) * (logp / math.log(log_base)) ** 2)
    if R < 1:
        raise DegenerateDecomposition(f"R = {R} < 1 for N={N}, p={p}, c={c}")
    step = c * logp / R
    delta = math.expm1(step)
    bounds = [N * math.exp(-j * step) for j in range(R + 1)]
    bounds[0] = float(N)
    for j in range(1, R + 1):
        gap, want = bounds[j - 1] - bounds[j], delta * bounds[j]
        if abs(gap - want) > rtol * abs(want):
            raise DegenerateDecomposition(f"segment {j} violates K_(j-1) - K_j = Delta K_j")
    return Decomposition(R=R, Delta=delta, boundaries=bounds, c=c, N=float(N), p=int(p))


# -- pigeonhole choice of the shift xi_0 ---------------------------------------

@dataclass(frozen=True)
class Xi0Choice:
    """Shift ``xi0`` and how many ``h <= H`` have ``{h f'(K) - xi0} < 1/bins``."""

    xi0: float
    count: int
    H: int
    bins: int


def xi0_search(spec: SequenceSpec, K: float, H: int, bins: int) -> Xi0Choice:
    """Best shift ``xi0`` for the pigeonhole step.

    The optimum is attained at one of the points ``{h f'(K)}`` themselves, so
    only those are scanned; ties go to the smallest ``xi0``.  The returned
    count is at least ``H / bins``.
    """
    if bins < 2 or H < bins:
        raise DomainError(f"need H >= bins >= 2, got H={H}, bins={bins}")
    slope = float(spec.f_prime(float(K)))
    pts = np.mod(np.arange(1, H + 1, dtype=np.float64) * slope, 1.0)
    cand = np.unique(pts)
    width = 1.0 / bins
    best_xi, best_count = 0.0, -1
    block = max(1, 4_000_000 // H)
    for i in range(0, cand.size, block):
        xi = cand[i:i + block]
        counts = (np.mod(pts[None, :] - xi[:, None], 1.0) < width).sum(axis=1)
        j = int(np.argmax(counts))
        if counts[j] > best_count:
            best_xi, best_count = float(xi[j]), int(counts[j])
    return Xi0Choice(best_xi, best_count, int(H), int(bins))
