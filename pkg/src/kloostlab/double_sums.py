"""Bilinear sums ``sum_u sum_v a_u b_v psi(u + v)`` and the bounds for them.

Two independent evaluation routes are provided: the direct ``O(|U||V|)`` sum
and the completed form

    S = (1/p) sum_lambda W(lambda) A(lambda) B(lambda),

with ``W(lambda) = sum_w psi_{x-lambda,y}(w)``, ``A(lambda) = sum_u a_u e_p(lambda u)``
and ``B`` likewise, all obtained from length-``p`` cyclic transforms.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, RangeError
from .modarith import Prime, PsiParams, inverse_table, psi_table

__all__ = [
    "WeightedSet",
    "PoleVectors",
    "double_sum_direct",
    "double_sum_completed",
    "complete_sum_array",
    "lemma31_bound",
    "cor_eps_bound",
    "prop42_bound",
    "rational_sum",
    "rational_sums",
    "is_diagonal",
    "holder_step_check",
    "weil_threshold",
]


@dataclass(frozen=True)
class WeightedSet:
    """Distinct residues mod ``p`` with complex weights.

    Elements are stored sorted; ``A`` is the largest weight modulus.
    """

    elements: np.ndarray
    weights: np.ndarray
    p: int

    def __post_init__(self) -> None:
        p = int(Prime(self.p))
        el = np.asarray(self.elements, dtype=np.int64).ravel()
        w = np.asarray(self.weights, dtype=np.complex128).ravel()
        if el.shape != w.shape:
            raise DomainError("elements and weights differ in length")
        if el.size == 0:
            raise DomainError("a weighted set must be nonempty")
        if np.any(el < 0) or np.any(el >= p):
            raise DomainError(f"elements must lie in [0, {p})")
        order = np.argsort(el, kind="stable")
        el, w = el[order], w[order]
        if np.any(np.diff(el) == 0):
            raise DomainError("elements must be distinct")
        if not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite")
        el.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "elements", el)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "p", p)

    @classmethod
    def unit(cls, elements, p: int) -> "WeightedSet":
        el = np.asarray(elements, dtype=np.int64)
        return cls(el, np.ones(el.shape, dtype=np.complex128), p)

    @property
    def A(self) -> float:
        return float(np.max(np.abs(self.weights)))

    def __len__(self) -> int:
        return int(self.elements.size)

    def dense(self) -> np.ndarray:
        """Weights scattered into a length-``p`` array indexed by residue."""
        out = np.zeros(self.p, dtype=np.complex128)
        out[self.elements] = self.weights
        return out


def _same_p(U: WeightedSet, V: WeightedSet, params: PsiParams) -> int:
    p = int(params.p)
    if U.p != p or V.p != p:
        raise DomainError("weighted sets and psi parameters use different primes")
    return p


def double_sum_direct(U: WeightedSet, V: WeightedSet, params: PsiParams) -> complex:
    """Exact double sum by direct evaluation with fsum-compensated reduction."""
    p = _same_p(U, V, params)
    table = psi_table(params)
    total_re, total_im = [], []
    block = max(1, 2_000_000 // len(V))
    for i in range(0, len(U), block):
        u = U.elements[i:i + block]
        a = U.weights[i:i + block]
        terms = a[:, None] * V.weights[None, :] * table[(u[:, None] + V.elements[None, :]) % p]
        total_re.append(math.fsum(terms.real.ravel()))
        total_im.append(math.fsum(terms.imag.ravel()))
    return complex(math.fsum(total_re), math.fsum(total_im))


@lru_cache(maxsize=16)
def _twisted_transform(y: int, p: int) -> np.ndarray:
    g = np.zeros(p, dtype=np.complex128)
    inv = inverse_table(p)
    w = np.arange(1, p)
    phase = (2 * np.pi / p) * ((y * inv[1:]) % p)
    g[w] = np.cos(phase) + 1j * np.sin(phase)
    out = np.fft.fft(g)
    out.setflags(write=False)
    return out


def complete_sum_array(params: PsiParams) -> np.ndarray:
    """``W[lambda] = sum_{w in F_p} psi_{x - lambda, y; p}(w)`` for all ``lambda``.

    Built from one transform of ``w -> e_p(y w^{-1})`` per ``(y, p)``, which is
    cached and shifted by ``x``.
    """
    p = int(params.p)
    G = _twisted_transform(params.y, p)
    lam = np.arange(p)
    return G[(lam - params.x) % p]


def double_sum_completed(U: WeightedSet, V: WeightedSet, params: PsiParams) -> complex:
    """Double sum through the completion identity in ``O(p log p)``."""
    p = _same_p(U, V, params)
    W = complete_sum_array(params)
    # ifft carries 1/p; sum_u a_u e_p(lambda u) = p * ifft(a)[lambda]
    A = np.fft.ifft(U.dense()) * p
    B = np.fft.ifft(V.dense()) * p
    terms = W * A * B
    return complex(math.fsum(terms.real), math.fsum(terms.imag)) / p


# -- bounds -------------------------------------------------------------------

def lemma31_bound(Ucard: float, Vcard: float, A: float, B: float, k: int, p: int) -> float:
    """``AB U^{1-1/(2k)} (V^{1/2} p^{1/(2k)} + V p^{1/(4k)})`` (constant taken as 1)."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return A * B * Ucard ** (1 - 1 / (2 * k)) * (
        math.sqrt(Vcard) * p ** (1 / (2 * k)) + Vcard * p ** (1 / (4 * k))
    )


def cor_eps_bound(Ucard: float, Vcard: float, A: float, B: float, eps: float,
                  p: int) -> tuple[float, int]:
    """``(ABUV p^{-eps^2}, k)`` with ``k = ceil(1/(2 eps))``.

    Requires ``U >= p^{1/2+eps}`` and ``V >= p^eps``; raises :class:`RangeError`
    otherwise.
    """
    if not eps > 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    lp = math.log(p)
    if math.log(Ucard) < (0.5 + eps) * lp:
        raise RangeError(f"U = {Ucard} is below p^(1/2+eps)")
    if math.log(Vcard) < eps * lp:
        raise RangeError(f"V = {Vcard} is below p^eps")
    k = math.ceil(1 / (2 * eps) - 1e-12)
    return A * B * Ucard * Vcard * p ** (-eps * eps), k


def prop42_bound(Ucard: float, Vcard: float, A: float, B: float, p: int) -> float:
    """``AB sqrt(U V p)``."""
    return A * B * math.sqrt(Ucard * Vcard * p)


# -- rational exponential sums ------------------------------------------------

@dataclass(frozen=True)
class PoleVectors:
    """Shift vectors ``v`` and ``w`` of ``R(X) = sum 1/(X+v_r) - sum 1/(X+w_s)``."""

    v: tuple[int, ...]
    w: tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        p = int(Prime(self.p))
        v = tuple(int(a) % p for a in self.v)
        w = tuple(int(a) % p for a in self.w)
        if len(v) != len(w) or not v:
            raise DomainError("v and w must have the same positive length")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return len(self.v)

    def distinct_poles(self) -> int:
        return len(set(self.v) | set(self.w))


def is_diagonal(pv: PoleVectors) -> bool:
    """Whether ``w`` is a permutation of ``v`` (so ``R`` vanishes identically)."""
    return Counter(pv.v) == Counter(pv.w)


def rational_sums(v: np.ndarray, w: np.ndarray, p: int, y: int = 1) -> np.ndarray:
    """Batched :func:`rational_sum`: row ``i`` uses poles ``v[i], w[i]``.

    ``v`` and ``w`` are integer arrays of shape ``(m, k)``.
    """
    p = int(Prime(p))
    if p > 1_000_000:
        raise DomainError("brute-force rational sums are limited to p <= 10**6")
    v = np.atleast_2d(np.asarray(v, dtype=np.int64)) % p
    w = np.atleast_2d(np.asarray(w, dtype=np.int64)) % p
    if v.shape != w.shape:
        raise DomainError("v and w must have the same shape")
    if p <= v.shape[1]:
        raise DomainError(f"need p > k, got p={p}, k={v.shape[1]}")
    inv = inverse_table(p)
    u = np.arange(p, dtype=np.int64)
    out = np.empty(v.shape[0], dtype=np.complex128)
    block = max(1, 2_000_000 // p)
    for i in range(0, v.shape[0], block):
        vb, wb = v[i:i + block], w[i:i + block]
        R = np.zeros((vb.shape[0], p), dtype=np.int64)
        ok = np.ones((vb.shape[0], p), dtype=bool)
        for r in range(vb.shape[1]):
            s = (u[None, :] + vb[:, r:r + 1]) % p
            ok &= s != 0
            R += inv[s]
            s = (u[None, :] + wb[:, r:r + 1]) % p
            ok &= s != 0
            R -= inv[s]
        phase = (2 * np.pi / p) * ((y * R) % p)
        vals = np.where(ok, np.cos(phase) + 1j * np.sin(phase), 0)
        out[i:i + block] = vals.sum(axis=1)
    return out


def rational_sum(pv: PoleVectors, p: int | None = None) -> complex:
    """``sum* e_p(R_{v,w}(u))`` over ``u`` keeping every ``u+v_r``, ``u+w_s`` nonzero."""
    p = pv.p if p is None else int(p)
    return complex(rational_sums(np.array([pv.v]), np.array([pv.w]), p)[0])


def weil_threshold(k: int, p: int, strict: bool = False) -> float:
    """Allowed ``|sum*|`` for non-diagonal poles: ``2k sqrt(p)``.

    ``strict=True`` gives ``(2k-1) sqrt(p) + 2k`` instead.
    """
    if strict:
        return (2 * k - 1) * math.sqrt(p) + 2 * k
    return 2 * k * math.sqrt(p)


def holder_step_check(U: WeightedSet, V: WeightedSet, params: PsiParams,
                      k: int) -> tuple[float, float]:
    """Both sides of ``|S|^{2k} <= A^{2k} U^{2k-1} sum_{u in F_p} |sum_v b_v psi(u+v)|^{2k}``."""
    p = _same_p(U, V, params)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    table = psi_table(params)
    u = np.arange(p)
    inner = (V.weights[None, :] * table[(u[:, None] + V.elements[None, :]) % p]).sum(axis=1)
    lhs = abs(double_sum_direct(U, V, params)) ** (2 * k)
    rhs = U.A ** (2 * k) * len(U) ** (2 * k - 1) * math.fsum(np.abs(inner) ** (2 * k))
    return lhs, rhs
