"""Arithmetic in F_p and the twisted exponential psi_{x,y;p}.

``psi_{x,y;p}(u) = e_p(x*u + y*u^{-1})`` for ``u != 0`` and ``0`` for ``u = 0``,
with ``e_p(a) = exp(2 pi i a / p)``.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

from .errors import DomainError, ZeroInverse

__all__ = [
    "Prime",
    "PsiParams",
    "mod_inverse",
    "batch_inverse",
    "inverse_table",
    "e_p",
    "e_p_array",
    "eval_psi",
    "psi_values",
    "psi_table",
]

TWO_PI = 2.0 * math.pi
_MAX_P = 2**64


class Prime(int):
    """An ``int`` that is known to be a prime below 2**64."""

    def __new__(cls, p: int) -> "Prime":
        if isinstance(p, Prime):
            return p
        if isinstance(p, bool) or int(p) != p:
            raise DomainError(f"prime must be an integer, got {p!r}")
        p = int(p)
        if p < 2 or p >= _MAX_P:
            raise DomainError(f"prime must lie in [2, 2**64), got {p}")
        # BPSW has no known pseudoprimes and none exist below 2**64.
        if not gmpy2.is_bpsw_prp(p):
            raise DomainError(f"{p} is not prime")
        return super().__new__(cls, p)

    def __repr__(self) -> str:
        return f"Prime({int(self)})"


@dataclass(frozen=True)
class PsiParams:
    """Coefficients ``(x, y)`` of psi_{x,y;p}; inputs are reduced mod p."""

    x: int
    y: int
    p: Prime

    def __post_init__(self) -> None:
        p = Prime(self.p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "x", int(self.x) % p)
        object.__setattr__(self, "y", int(self.y) % p)

    def conjugate(self) -> "PsiParams":
        """Parameters whose psi is the complex conjugate of this one."""
        return PsiParams(-self.x, -self.y, self.p)


def mod_inverse(a: int, p: int) -> int:
    """Inverse of ``a`` modulo ``p`` in ``[1, p)``.

    Uses the extended Euclidean algorithm (CPython's ``pow(a, -1, p)``).
    Raises :class:`ZeroInverse` when ``a`` is divisible by ``p``.
    """
    a = int(a) % p
    if a == 0:
        raise ZeroInverse(f"0 has no inverse modulo {p}")
    return pow(a, -1, int(p))


def batch_inverse(values: Iterable[int], p: int) -> list[int]:
    """Invert many residues with one modular inversion (Montgomery's trick).

    Costs one inversion plus ``3(n-1)`` multiplications.  Every value must be
    nonzero mod ``p``; the output equals ``[mod_inverse(v, p) for v in values]``.
    """
    p = int(p)
    vals = [int(v) % p for v in values]
    n = len(vals)
    if n == 0:
        return []
    prefix = [0] * n
    acc = 1
    for i, v in enumerate(vals):
        if v == 0:
            raise ZeroInverse(f"0 has no inverse modulo {p} (position {i})")
        acc = acc * v % p
        prefix[i] = acc
    inv_acc = pow(acc, -1, p)
    out = [0] * n
    for i in range(n - 1, 0, -1):
        out[i] = inv_acc * prefix[i - 1] % p
        inv_acc = inv_acc * vals[i] % p
    out[0] = inv_acc
    return out


@lru_cache(maxsize=8)
def _inverse_table_cached(p: int) -> np.ndarray:
    table = np.zeros(p, dtype=np.int64 if p < 2**62 else object)
    table[1:] = batch_inverse(range(1, p), p)
    table.setflags(write=False)
    return table


def inverse_table(p: int) -> np.ndarray:
    """Read-only array ``t`` of length ``p`` with ``t[a] = a^{-1}`` and ``t[0] = 0``.

    Meant for moderate ``p`` (memory is ``8p`` bytes); results are cached.
    """
    p = int(p)
    if p > 50_000_000:
        raise DomainError(f"inverse table for p={p} would be too large")
    return _inverse_table_cached(p)


def e_p(a: int, p: int) -> complex:
    """``exp(2 pi i (a mod p) / p)``."""
    p = int(p)
    r = int(a) % p
    return cmath.exp(1j * (TWO_PI * (r / p)))


def e_p_array(a: np.ndarray, p: int) -> np.ndarray:
    """Vectorised :func:`e_p` for an integer array of already reduced residues."""
    phase = np.asarray(a, dtype=np.float64) * (TWO_PI / int(p))
    return np.cos(phase) + 1j * np.sin(phase)


def eval_psi(params: PsiParams, u: int) -> complex:
    """Value of psi_{x,y;p}(u); ``u = 0`` maps to ``0``."""
    p = params.p
    u = int(u) % p
    if u == 0:
        return 0j
    return e_p(params.x * u + params.y * mod_inverse(u, p), p)


def _exponents(params: PsiParams, residues: Sequence[int]) -> list[int]:
    p, x, y = int(params.p), params.x, params.y
    invs = batch_inverse(residues, p)
    return [(x * u + y * v) % p for u, v in zip(residues, invs)]


def psi_values(params: PsiParams, residues: np.ndarray) -> tuple[np.ndarray, int]:
    """psi at every entry of ``residues`` plus the number of zero residues.

    ``residues`` must already be reduced into ``[0, p)``.
    """
    residues = np.asarray(residues)
    out = np.zeros(residues.shape, dtype=np.complex128)
    nz = np.flatnonzero(residues)
    if nz.size:
        exps = _exponents(params, residues[nz].tolist())
        out[nz] = e_p_array(np.array(exps, dtype=np.float64), params.p)
    return out, int(residues.size - nz.size)


def psi_table(params: PsiParams) -> np.ndarray:
    """psi_{x,y;p}(u) for all ``u`` in ``0..p-1``."""
    p = int(params.p)
    inv = inverse_table(p)
    u = np.arange(p, dtype=np.int64)
    exps = (params.x * u + params.y * inv) % p if p < 2**31 else np.array(
        [(params.x * a + params.y * int(b)) % p for a, b in zip(range(p), inv)],
        dtype=np.float64,
    )
    out = e_p_array(exps, p)
    out[0] = 0.0
    return out
