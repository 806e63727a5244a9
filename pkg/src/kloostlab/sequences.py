"""Floor-function sequences ``floor(f(n))`` and the Taylor/carry machinery.

Power functions ``f(t) = t**c`` get certified floors: a double-precision fast
path with a rigorous error margin, then an exact integer root
(``floor(n**(a/b)) = iroot(n**a, b)``) or interval arithmetic with doubling
precision for values that land too close to an integer.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np
from mpmath.ctx_iv import MPIntervalContext
from mpmath.ctx_mp import MPContext
from mpmath.libmp import to_int
from scipy import integrate

from .errors import DomainError, PrecisionExhausted, QuadratureFailure

__all__ = [
    "SequenceSpec",
    "TaylorSplit",
    "floor_f",
    "floor_values",
    "kappa_estimate",
    "check_shape",
    "taylor_split",
    "carry_term",
    "CUSTOM_SEQUENCES",
]

RealFn = Callable[[float], float]

# Relative slack that covers libm pow error plus rounding of c to a double,
# with a 10x safety factor (|dc| * ln(2**63) * 1.4 < 1e-14).
_FLOAT_REL_MARGIN = 1e-13
_INT_ROOT_MAX_BITS = 4_000_000
_IV_START_PREC = 128
_IV_MAX_PREC = 8192
_CARRY_PREC = 256


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        # "1.2" means 6/5, not the nearest binary double.
        return Fraction(repr(c))
    return Fraction(c)


@dataclass(frozen=True)
class SequenceSpec:
    """An evaluable ``f`` with its first two derivatives and growth exponent.

    ``kappa`` is the limit of ``-log f''(t) / log t``.  Use :meth:`power` for
    ``t**c`` (certified floors) and :meth:`custom` for anything else.
    """

    f: RealFn
    f_prime: RealFn
    f_double_prime: RealFn
    kappa: float
    kind: str = "custom"
    exponent: Fraction | None = None
    name: str = ""
    _mp_f: Callable | None = field(default=None, repr=False, compare=False)

    @classmethod
    def power(cls, c, *, theorem_range: bool = False) -> "SequenceSpec":
        """``f(t) = t**c``; ``theorem_range`` enforces ``1 < c < 4/3``."""
        cf = _as_fraction(c)
        if cf <= 1:
            raise DomainError(f"power exponent must exceed 1, got {c}")
        if theorem_range and not (1 < cf < Fraction(4, 3)):
            raise DomainError(f"theorem range needs 1 < c < 4/3, got {c}")
        c_float = float(cf)

        def f(t):
            return np.power(t, c_float)

        def fp(t):
            return c_float * np.power(t, c_float - 1.0)

        def fpp(t):
            return c_float * (c_float - 1.0) * np.power(t, c_float - 2.0)

        def mp_f(ctx, t):
            return ctx.exp(ctx.log(t) * ctx.mpf(cf.numerator) / cf.denominator)

        return cls(
            f, fp, fpp, kappa=2.0 - c_float, kind="power", exponent=cf,
            name=f"t^{cf.numerator}/{cf.denominator}" if cf.denominator != 1 else f"t^{cf}",
            _mp_f=mp_f,
        )

    @classmethod
    def custom(cls, f: RealFn, f_prime: RealFn, f_double_prime: RealFn,
               kappa: float, name: str = "custom") -> "SequenceSpec":
        if not 0.0 < kappa < 1.0:
            raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
        return cls(f, f_prime, f_double_prime, kappa=float(kappa), kind="custom", name=name)

    @property
    def c(self) -> float:
        if self.exponent is None:
            raise AttributeError("custom sequence has no power exponent")
        return float(self.exponent)


def _power_log(c: float) -> SequenceSpec:
    # t^c log t: f'' ~ t^(c-2) log t, so kappa = 2 - c still holds in the limit.
    def f(t):
        return np.power(t, c) * np.log(t)

    def fp(t):
        return np.power(t, c - 1.0) * (c * np.log(t) + 1.0)

    def fpp(t):
        return np.power(t, c - 2.0) * (c * (c - 1.0) * np.log(t) + 2.0 * c - 1.0)

    return SequenceSpec.custom(f, fp, fpp, kappa=2.0 - c, name=f"t^{c}*log(t)")


CUSTOM_SEQUENCES: dict[str, Callable[..., SequenceSpec]] = {
    "power_log": _power_log,
}


def check_shape(spec: SequenceSpec, t_values: Sequence[float]) -> None:
    """Sample-check that f increases and f'' is positive and decreasing.

    Raises :class:`DomainError` on the first violation.
    """
    t = np.sort(np.asarray(t_values, dtype=np.float64))
    fv = np.array([spec.f(s) for s in t], dtype=np.float64)
    fpp = np.array([spec.f_double_prime(s) for s in t], dtype=np.float64)
    if np.any(np.diff(fv) <= 0):
        raise DomainError("f is not increasing on the sampled points")
    if np.any(fpp <= 0):
        raise DomainError("f'' is not positive on the sampled points")
    if np.any(np.diff(fpp) > 0):
        raise DomainError("f'' is not decreasing on the sampled points")


# -- certified floors ---------------------------------------------------------

def _floor_power_interval(n: int, cf: Fraction) -> int:
    prec = _IV_START_PREC
    while prec <= _IV_MAX_PREC:
        iv = MPIntervalContext()
        iv.prec = prec
        val = iv.exp(iv.log(iv.mpf(n)) * iv.mpf(cf.numerator) / iv.mpf(cf.denominator))
        lo_mpf, hi_mpf = val._mpi_
        lo, hi = to_int(lo_mpf, "f"), to_int(hi_mpf, "f")
        if lo == hi:
            return lo
        prec *= 2
    raise PrecisionExhausted(
        f"floor({n}^{cf}) undecided at {_IV_MAX_PREC} bits of precision"
    )


def _floor_power_exact(n: int, cf: Fraction) -> int:
    if n == 1:
        return 1
    a, b = cf.numerator, cf.denominator
    if a * n.bit_length() <= _INT_ROOT_MAX_BITS:
        root, _ = gmpy2.iroot(gmpy2.mpz(n) ** a, b)
        return int(root)
    return _floor_power_interval(n, cf)


def floor_values(spec: SequenceSpec, start: int, stop: int) -> np.ndarray:
    """``floor(f(n))`` for ``start <= n < stop`` as an int64 array."""
    if start < 1:
        raise DomainError("sequence index must be >= 1")
    if stop <= start:
        return np.zeros(0, dtype=np.int64)
    n = np.arange(start, stop, dtype=np.float64)
    v = np.asarray(spec.f(n), dtype=np.float64)
    if not np.all(np.isfinite(v)) or v.max(initial=0.0) >= 2.0**63:
        raise DomainError("f(n) must be finite and below 2**63")
    out = np.floor(v)
    if spec.kind != "power":
        return out.astype(np.int64)
    frac_dist = np.minimum(v - out, out + 1.0 - v)
    unsure = np.flatnonzero(frac_dist <= _FLOAT_REL_MARGIN * np.maximum(v, 1.0))
    result = out.astype(np.int64)
    for i in unsure:
        result[i] = _floor_power_exact(int(start + i), spec.exponent)
    return result


def floor_f(spec: SequenceSpec, n: int) -> int:
    """Exact ``floor(f(n))`` (certified for power functions)."""
    return int(floor_values(spec, int(n), int(n) + 1)[0])


def kappa_estimate(spec: SequenceSpec, t_values: Sequence[float]) -> list[float]:
    """``-log f''(t) / log t`` at each ``t > 1``."""
    out = []
    for t in t_values:
        if t <= 1:
            raise DomainError(f"need t > 1, got {t}")
        fpp = float(spec.f_double_prime(float(t)))
        if not fpp > 0:
            raise DomainError(f"f''({t}) = {fpp} is not positive")
        out.append(-math.log(fpp) / math.log(t))
    return out


# -- Taylor split -------------------------------------------------------------

@dataclass(frozen=True)
class TaylorSplit:
    """``f(n+h) = main + linear + I + J`` with ``main = f(n)``, ``linear = h f'(K)``."""

    main: float
    linear: float
    I: float
    J: float

    @property
    def total(self) -> float:
        return math.fsum((self.main, self.linear, self.I, self.J))

    @property
    def remainder(self) -> float:
        return self.I + self.J


def _binomial_tail(c: float, x: float) -> float:
    """sum_{k>=2} binom(c, k) x^k for |x| <= 1/2."""
    term = c * x
    total = 0.0
    k = 1
    while True:
        term *= (c - k) * x / (k + 1)
        k += 1
        total += term
        if abs(term) <= 1e-18 * abs(total) or k > 200:
            return total


def _power_split(c: float, K: float, n: int, h: int) -> TaylorSplit:
    fn = n**c
    fpK = c * K ** (c - 1.0)
    # f'(n) - f'(K) without cancellation
    dprime = fpK * math.expm1((c - 1.0) * math.log(n / K)) if n != K else 0.0
    x = h / n
    if x <= 0.5:
        J = fn * _binomial_tail(c, x)
    else:
        J = (n + h) ** c - fn - h * c * n ** (c - 1.0)
    return TaylorSplit(main=fn, linear=h * fpK, I=h * dprime, J=J)


def _quad(fn, a, b, rtol):
    if a == b:
        return 0.0
    val, err = integrate.quad(fn, a, b, epsabs=0.0, epsrel=rtol, limit=200)
    if not err <= max(rtol * abs(val), 1e-300):
        raise QuadratureFailure(f"quad error {err:g} exceeds tolerance for value {val:g}")
    return val


def taylor_split(spec: SequenceSpec, K: float, n: int, h: int, *,
                 rtol: float = 1e-10, identity_tol: float = 1e-9) -> TaylorSplit:
    """Split ``f(n+h)`` into ``f(n) + h f'(K) + I + J``.

    ``I = h * int_K^n f''`` and ``J = int_n^{n+h} f''(u) (n+h-u) du``; closed
    forms for power functions, adaptive quadrature otherwise.
    """
    if K > n:
        raise DomainError(f"need K <= n, got K={K}, n={n}")
    if h < 0:
        raise DomainError(f"need h >= 0, got {h}")
    if spec.kind == "power":
        return _power_split(spec.c, float(K), int(n), int(h))
    fpp = spec.f_double_prime
    I = h * _quad(lambda u: float(fpp(u)), float(K), float(n), rtol)
    J = _quad(lambda u: float(fpp(u)) * (n + h - u), float(n), float(n + h), rtol)
    split = TaylorSplit(float(spec.f(float(n))), h * float(spec.f_prime(float(K))), I, J)
    target = float(spec.f(float(n + h)))
    if abs(split.total - target) > identity_tol * abs(target):
        raise QuadratureFailure(
            f"Taylor identity residual {abs(split.total - target):g} exceeds tolerance"
        )
    return split


def carry_term(spec: SequenceSpec, K: float, n: int, h: int, xi0: float) -> int:
    """``floor(f(n+h)) - floor(f(n) + xi0) - floor(h f'(K) - xi0)``.

    Lies in ``{0, 1, 2}`` whenever ``0 <= I + J < 1``.  Power functions are
    evaluated at 256 bits so the two shifted floors are not misrounded.
    """
    if not 0.0 <= xi0 < 1.0:
        raise DomainError(f"xi0 must lie in [0, 1), got {xi0}")
    top = floor_f(spec, n + h)
    if spec.kind == "power":
        ctx = MPContext()
        ctx.prec = _CARRY_PREC
        c = ctx.mpf(spec.exponent.numerator) / spec.exponent.denominator
        xi = ctx.mpf(xi0)
        a = int(ctx.floor(spec._mp_f(ctx, ctx.mpf(n)) + xi))
        b = int(ctx.floor(h * c * ctx.power(ctx.mpf(K), c - 1) - xi))
    else:
        a = math.floor(float(spec.f(float(n))) + xi0)
        b = math.floor(h * float(spec.f_prime(float(K))) - xi0)
    return top - a - b
