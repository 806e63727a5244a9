"""Configuration-driven experiments over the library's operations.

A config is a TOML document (see ``README.md`` for the schema).  :func:`run`
expands it into an ordered grid of points, evaluates the points on a worker
pool, and streams one row per point to CSV or JSON lines in grid order.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
import time
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .distribution import (
    ResidueInterval,
    count_inverses,
    erdos_turan_bound,
    existence_search,
    existence_xi,
    inverse_points,
    star_discrepancy,
)
from .double_sums import (
    WeightedSet,
    cor_eps_bound,
    double_sum_completed,
    double_sum_direct,
    lemma31_bound,
    prop42_bound,
    rational_sums,
    weil_threshold,
)
from .errors import ComputeError, ConfigError, FieldError, KloostlabError
from .modarith import Prime, PsiParams
from .sequences import CUSTOM_SEQUENCES, SequenceSpec
from .sums import (
    admissible_N_range,
    bound_ratio,
    c_constant,
    delta0_short,
    long_sum,
    range_check_short,
    short_sum,
    theorem_delta,
)

__all__ = [
    "KINDS",
    "COLUMNS",
    "ExperimentConfig",
    "load_config",
    "grid",
    "run",
    "emit",
    "read_rows",
    "plotdata",
    "format_value",
]

log = logging.getLogger(__name__)

KINDS = (
    "long-sum", "short-sum", "double-sum", "weil-check", "inverses",
    "discrepancy", "existence", "constants", "sweep",
)

_PREFIX = ["experiment", "kind", "point", "seed"]
_KIND_COLUMNS: dict[str, list[str]] = {
    "long-sum": [
        "sequence", "p", "N", "x", "y", "re", "im", "abs", "n_terms", "zero_terms",
        "ratio", "epsilon", "kappa", "delta", "theory_bound", "bound_ratio", "in_window",
    ],
    "short-sum": [
        "sequence", "p", "K", "L", "x", "y", "re", "im", "abs", "n_terms", "zero_terms",
        "ratio", "epsilon", "kappa", "delta0", "bound_ratio", "admissible",
    ],
    "double-sum": [
        "p", "x", "y", "trial", "U", "V", "A", "B", "re", "im", "abs",
        "completed_re", "completed_im", "rel_diff", "k", "lemma31_bound", "empirical_C",
        "prop42_bound", "cor_eps_bound", "cor_k",
    ],
    "weil-check": [
        "p", "k", "checked", "diagonal", "diagonal_mismatch", "violations",
        "max_ratio", "threshold",
    ],
    "inverses": [
        "sequence", "p", "N", "K", "H", "count", "main_term", "main_term_members",
        "error", "skipped", "epsilon", "kappa", "delta", "error_budget",
    ],
    "discrepancy": [
        "sequence", "p", "N", "Kmax", "points", "star_discrepancy", "et_bound", "margin",
    ],
    "existence": [
        "sequence", "p", "N", "K", "H", "witness", "N0", "xi", "p_ge_H", "p_ge_N",
        "HN_large",
    ],
    "constants": [
        "epsilon", "kappa", "p", "delta", "delta0", "c", "xi_max", "N_min", "N_max",
    ],
}
_SUFFIX = ["status", "wall_time"]


def _ordered_union(lists: Iterable[list[str]]) -> list[str]:
    out: list[str] = []
    for lst in lists:
        out.extend(c for c in lst if c not in out)
    return out


COLUMNS: list[str] = _PREFIX + _ordered_union(_KIND_COLUMNS.values()) + _SUFFIX


# -- configuration ------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """One experiment; ``kind = "sweep"`` nests others under ``experiments``."""

    kind: str
    name: str = ""
    sequence: dict[str, Any] = field(default_factory=lambda: {"c": 1.2})
    primes: list[int] = field(default_factory=list)
    N: list[int] = field(default_factory=list)
    K: list[float] = field(default_factory=list)
    L: list[float] = field(default_factory=list)
    psi: Any = field(default_factory=list)
    epsilon: float = 0.01
    kappa: float | None = None
    intervals: Any = field(default_factory=list)
    k: list[int] = field(default_factory=lambda: [1])
    set_sizes: list[int] = field(default_factory=lambda: [10, 10])
    trials: int = 1
    pole_set_size: int = 6
    samples: int = 0
    weil_strict: bool = False
    Kmax: int = 50
    seed: int = 0
    experiments: list["ExperimentConfig"] = field(default_factory=list)
    output: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    # validation --------------------------------------------------------------
    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        for name in ("primes", "N"):
            vals = getattr(self, name)
            if not isinstance(vals, list) or not all(_is_int(v) for v in vals):
                raise ConfigError(f"{name} must be a list of integers")
        for p in self.primes:
            try:
                Prime(p)
            except KloostlabError as exc:
                raise ConfigError(f"primes: {exc}") from None
        if any(n < 1 for n in self.N):
            raise ConfigError("N values must be >= 1")
        for name in ("K", "L"):
            vals = getattr(self, name)
            if not isinstance(vals, list) or not all(_is_real(v) for v in vals):
                raise ConfigError(f"{name} must be a list of numbers")
        self._validate_sequence()
        self._validate_psi()
        self._validate_intervals()
        if not _is_real(self.epsilon) or self.epsilon <= 0:
            raise ConfigError("epsilon must be a positive number")
        if self.kappa is not None and not (_is_real(self.kappa) and 0 < self.kappa < 1):
            raise ConfigError("kappa must lie in (0, 1)")
        if not isinstance(self.k, list) or not all(_is_int(v) and v >= 1 for v in self.k):
            raise ConfigError("k must be a list of positive integers")
        if (not isinstance(self.set_sizes, list) or len(self.set_sizes) != 2
                or not all(_is_int(v) and v >= 1 for v in self.set_sizes)):
            raise ConfigError("set_sizes must be [|U|, |V|] with positive entries")
        for name in ("trials", "Kmax", "pole_set_size"):
            if not _is_int(getattr(self, name)) or getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not _is_int(self.samples) or self.samples < 0:
            raise ConfigError("samples must be a non-negative integer")
        if not _is_int(self.seed) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.output, dict) or set(self.output) - {"path", "format"}:
            raise ConfigError("output accepts only 'path' and 'format'")
        if self.output.get("format", "csv") not in ("csv", "jsonl"):
            raise ConfigError("output.format must be 'csv' or 'jsonl'")
        if self.kind == "sweep":
            if not self.experiments:
                raise ConfigError("a sweep needs at least one [[experiments]] entry")
            for sub in self.experiments:
                if sub.kind == "sweep":
                    raise ConfigError("sweeps cannot be nested")
        elif self.experiments:
            raise ConfigError("only kind = 'sweep' may contain experiments")
        self._validate_required()

    def _validate_sequence(self) -> None:
        seq = self.sequence
        if not isinstance(seq, dict) or set(seq) - {"c", "custom"}:
            raise ConfigError("sequence accepts only 'c' and 'custom'")
        if "c" not in seq or not _is_real(seq["c"]) or seq["c"] <= 1:
            raise ConfigError("sequence.c must be a number > 1")
        if "custom" in seq and seq["custom"] not in CUSTOM_SEQUENCES:
            raise ConfigError(
                f"unknown custom sequence {seq['custom']!r}; known: {sorted(CUSTOM_SEQUENCES)}"
            )

    def _validate_psi(self) -> None:
        if isinstance(self.psi, str):
            _parse_random(self.psi, "psi")
        elif not isinstance(self.psi, list) or not all(
            isinstance(v, list) and len(v) == 2 and all(_is_int(a) for a in v) for v in self.psi
        ):
            raise ConfigError("psi must be a list of [x, y] pairs or 'random:<count>:<seed>'")

    def _validate_intervals(self) -> None:
        if isinstance(self.intervals, str):
            _parse_random(self.intervals, "intervals")
        elif not isinstance(self.intervals, list) or not all(
            isinstance(v, list) and len(v) == 2 and all(_is_int(a) for a in v) and v[1] >= 2
            for v in self.intervals
        ):
            raise ConfigError("intervals must be a list of [K, H] pairs with H >= 2 "
                              "or 'random:<count>:<seed>'")

    def _validate_required(self) -> None:
        need = {
            "long-sum": ("primes", "N", "psi"),
            "short-sum": ("primes", "K", "L", "psi"),
            "double-sum": ("primes", "psi"),
            "weil-check": ("primes",),
            "inverses": ("primes", "N", "intervals"),
            "discrepancy": ("primes", "N"),
            "existence": ("primes", "N", "intervals"),
            "constants": (),
            "sweep": (),
        }[self.kind]
        for name in need:
            if not getattr(self, name):
                raise ConfigError(f"kind {self.kind!r} requires a non-empty {name!r}")

    # helpers ---------------------------------------------------------------
    def sequence_spec(self) -> SequenceSpec:
        seq = self.sequence
        if "custom" in seq:
            return CUSTOM_SEQUENCES[seq["custom"]](float(seq["c"]))
        return SequenceSpec.power(seq["c"])

    def effective_kappa(self) -> float:
        if self.kappa is not None:
            return float(self.kappa)
        return self.sequence_spec().kappa

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            val = getattr(self, f.name)
            if f.name == "experiments":
                if val:
                    out[f.name] = [sub.to_dict() for sub in val]
                continue
            if val is None:
                continue
            out[f.name] = val
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a table")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("config is missing 'kind'")
        data = dict(data)
        subs = data.pop("experiments", [])
        if not isinstance(subs, list):
            raise ConfigError("experiments must be an array of tables")
        data["experiments"] = [cls.from_dict(s) for s in subs]
        return cls(**data)

    @classmethod
    def from_toml(cls, text: str) -> "ExperimentConfig":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from None
        return cls.from_dict(data)


def load_config(path: str | os.PathLike, overrides: dict[str, Any] | None = None,
                kind: str | None = None) -> ExperimentConfig:
    """Read a TOML config file, apply top-level ``overrides`` and validate."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    data.update(overrides or {})
    if kind is not None:
        if data.setdefault("kind", kind) != kind:
            raise ConfigError(f"config kind {data['kind']!r} does not match command {kind!r}")
    return ExperimentConfig.from_dict(data)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _parse_random(spec: str, what: str) -> tuple[int, int | None]:
    parts = spec.split(":")
    try:
        if parts[0] != "random" or len(parts) not in (2, 3):
            raise ValueError
        count = int(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else None
        if count < 1 or (seed is not None and not 0 <= seed < 2**64):
            raise ValueError
    except ValueError:
        raise ConfigError(f"{what} must look like 'random:<count>:<seed>', got {spec!r}") from None
    return count, seed


# -- grid expansion -----------------------------------------------------------

def _psi_pairs(cfg: ExperimentConfig, p: int) -> tuple[list[tuple[int, int]], int]:
    if isinstance(cfg.psi, str):
        count, seed = _parse_random(cfg.psi, "psi")
        seed = cfg.seed if seed is None else seed
        rng = np.random.default_rng([seed, p])
        pairs: list[tuple[int, int]] = []
        while len(pairs) < count:
            x, y = (int(v) for v in rng.integers(0, p, size=2, dtype=np.uint64))
            if (x, y) != (0, 0):
                pairs.append((x, y))
        return pairs, seed
    return [(x % p, y % p) for x, y in cfg.psi], cfg.seed


def _interval_list(cfg: ExperimentConfig, p: int) -> tuple[list[tuple[int, int]], int]:
    if isinstance(cfg.intervals, str):
        count, seed = _parse_random(cfg.intervals, "intervals")
        seed = cfg.seed if seed is None else seed
        rng = np.random.default_rng([seed, p, 1])
        out = []
        for _ in range(count):
            H = int(rng.integers(2, p + 1))
            K = int(rng.integers(-1, p - H + 1))
            out.append((K, H))
        return out, seed
    return [(K, H) for K, H in cfg.intervals], cfg.seed


def _kinds(cfg: ExperimentConfig) -> list[str]:
    if cfg.kind == "sweep":
        return [sub.kind for sub in cfg.experiments]
    return [cfg.kind]


def grid(cfg: ExperimentConfig, name: str | None = None) -> Iterator[dict[str, Any]]:
    """Grid points of ``cfg`` in their fixed order; sweeps concatenate sub-grids."""
    if cfg.kind == "sweep":
        for i, sub in enumerate(cfg.experiments):
            yield from grid(sub, sub.name or f"{cfg.name or 'sweep'}.{i}")
        return
    name = name or cfg.name or cfg.kind
    points: list[dict[str, Any]] = []
    kind = cfg.kind
    if kind == "long-sum":
        for p in cfg.primes:
            pairs, seed = _psi_pairs(cfg, p)
            for N in cfg.N:
                for x, y in pairs:
                    points.append(dict(p=p, N=N, x=x, y=y, seed=seed))
    elif kind == "short-sum":
        for p in cfg.primes:
            pairs, seed = _psi_pairs(cfg, p)
            for K in cfg.K:
                for L in cfg.L:
                    for x, y in pairs:
                        points.append(dict(p=p, K=K, L=L, x=x, y=y, seed=seed))
    elif kind == "double-sum":
        for p in cfg.primes:
            pairs, seed = _psi_pairs(cfg, p)
            for x, y in pairs:
                for t in range(cfg.trials):
                    for k in cfg.k:
                        points.append(dict(p=p, x=x, y=y, trial=t, k=k, seed=seed))
    elif kind == "weil-check":
        for p in cfg.primes:
            for k in cfg.k:
                points.append(dict(p=p, k=k, seed=cfg.seed))
    elif kind in ("inverses", "existence"):
        for p in cfg.primes:
            ivs, seed = _interval_list(cfg, p)
            for N in cfg.N:
                for K, H in ivs:
                    points.append(dict(p=p, N=N, K=K, H=H, seed=seed))
    elif kind == "discrepancy":
        for p in cfg.primes:
            for N in cfg.N:
                points.append(dict(p=p, N=N, seed=cfg.seed))
    elif kind == "constants":
        for p in cfg.primes or [None]:
            points.append(dict(p=p, seed=cfg.seed))
    for i, pt in enumerate(points):
        yield dict(experiment=name, kind=kind, point=i, cfg=cfg, **pt)


# -- per-point evaluation -----------------------------------------------------

def _delta_or_none(eps: float, kappa: float) -> float | None:
    return theorem_delta(eps, kappa) if 2 / 3 < kappa < 1 else None


def _eval_long_sum(cfg, pt):
    spec, kappa = cfg.sequence_spec(), cfg.effective_kappa()
    delta = _delta_or_none(cfg.epsilon, kappa)
    params = PsiParams(pt["x"], pt["y"], pt["p"])
    rec = long_sum(spec, params, pt["N"], theory_delta=delta)
    in_window = None
    if delta is not None:
        lo, hi = admissible_N_range(pt["p"], cfg.epsilon, kappa)
        in_window = lo <= pt["N"] <= hi
    return dict(
        sequence=spec.name, re=rec.value.real, im=rec.value.imag, abs=abs(rec.value),
        n_terms=rec.n_terms, zero_terms=rec.zero_terms, ratio=rec.ratio,
        epsilon=cfg.epsilon, kappa=kappa, delta=delta, theory_bound=rec.theory_bound,
        bound_ratio=bound_ratio(rec, delta) if delta is not None else None,
        in_window=in_window,
    )


def _eval_short_sum(cfg, pt):
    spec, kappa = cfg.sequence_spec(), cfg.effective_kappa()
    d0 = delta0_short(cfg.epsilon)
    params = PsiParams(pt["x"], pt["y"], pt["p"])
    rec = short_sum(spec, params, pt["K"], pt["L"])
    admissible = None
    if pt["K"] >= 1 and pt["L"] >= 1:
        admissible = all(range_check_short(pt["K"], pt["L"], pt["p"], cfg.epsilon, kappa))
    return dict(
        sequence=spec.name, re=rec.value.real, im=rec.value.imag, abs=abs(rec.value),
        n_terms=rec.n_terms, zero_terms=rec.zero_terms, ratio=rec.ratio,
        epsilon=cfg.epsilon, kappa=kappa, delta0=d0, bound_ratio=bound_ratio(rec, d0),
        admissible=admissible,
    )


def _random_weighted_set(rng, size: int, p: int) -> WeightedSet:
    size = min(size, p)
    el = rng.choice(p, size=size, replace=False)
    w = np.exp(2j * np.pi * rng.random(size))
    return WeightedSet(el, w, p)


def _eval_double_sum(cfg, pt):
    p = pt["p"]
    rng = np.random.default_rng([pt["seed"], p, pt["x"], pt["y"], pt["trial"]])
    U = _random_weighted_set(rng, cfg.set_sizes[0], p)
    V = _random_weighted_set(rng, cfg.set_sizes[1], p)
    params = PsiParams(pt["x"], pt["y"], p)
    direct = double_sum_direct(U, V, params)
    completed = double_sum_completed(U, V, params)
    scale = max(abs(direct), 1e-300)
    l31 = lemma31_bound(len(U), len(V), U.A, V.A, pt["k"], p)
    try:
        cor, cor_k = cor_eps_bound(len(U), len(V), U.A, V.A, cfg.epsilon, p)
    except KloostlabError:
        cor, cor_k = None, None
    return dict(
        U=len(U), V=len(V), A=U.A, B=V.A, re=direct.real, im=direct.imag, abs=abs(direct),
        completed_re=completed.real, completed_im=completed.imag,
        rel_diff=abs(direct - completed) / scale, lemma31_bound=l31,
        empirical_C=abs(direct) / l31, prop42_bound=prop42_bound(len(U), len(V), U.A, V.A, p),
        cor_eps_bound=cor, cor_k=cor_k,
    )


def weil_check(p: int, k: int, *, pole_set_size: int = 6, samples: int = 0,
               seed: int = 0, strict: bool = False) -> dict[str, Any]:
    """Check every non-diagonal rational sum against the Weil threshold.

    ``k = 1`` runs over all ``(v, w)`` in ``F_p^2``.  For ``k >= 2`` the poles
    range over all of ``S^k x S^k`` for a random ``S`` of ``pole_set_size``
    residues, plus ``samples`` uniformly random vectors over ``F_p``.
    """
    rng = np.random.default_rng([seed, p, k])
    if k == 1:
        a = np.arange(p)
        v = np.repeat(a, p)[:, None]
        w = np.tile(a, p)[:, None]
    else:
        S = rng.choice(p, size=min(pole_set_size, p), replace=False)
        idx = np.indices((len(S),) * (2 * k)).reshape(2 * k, -1).T
        vw = S[idx]
        v, w = vw[:, :k], vw[:, k:]
    if samples and k >= 2:
        v = np.vstack([v, rng.integers(0, p, size=(samples, k))])
        w = np.vstack([w, rng.integers(0, p, size=(samples, k))])
    sums = rational_sums(v, w, p)
    vs, ws = np.sort(v, axis=1), np.sort(w, axis=1)
    diag = np.all(vs == ws, axis=1)
    thr = weil_threshold(k, p, strict)
    mags = np.abs(sums)
    distinct = np.array([len(set(r)) for r in v[diag].tolist()], dtype=np.int64)
    expected = p - distinct
    diag_mismatch = int(np.count_nonzero(np.abs(sums[diag] - expected) > 1e-6))
    off = mags[~diag]
    return dict(
        checked=int(v.shape[0]), diagonal=int(diag.sum()), diagonal_mismatch=diag_mismatch,
        violations=int(np.count_nonzero(off > thr)),
        max_ratio=float(off.max() / thr) if off.size else 0.0, threshold=thr,
    )


def _eval_weil(cfg, pt):
    return weil_check(pt["p"], pt["k"], pole_set_size=cfg.pole_set_size,
                      samples=cfg.samples, seed=pt["seed"], strict=cfg.weil_strict)


def _eval_inverses(cfg, pt):
    spec, kappa = cfg.sequence_spec(), cfg.effective_kappa()
    res = count_inverses(spec, pt["N"], pt["p"], ResidueInterval(pt["K"], pt["H"]))
    delta = _delta_or_none(cfg.epsilon, kappa)
    budget = None
    if delta is not None:
        budget = pt["N"] * pt["p"] ** (-delta) * math.log(pt["p"])
    return dict(
        sequence=spec.name, count=res.count, main_term=res.main_term,
        main_term_members=res.main_term_members, error=res.error, skipped=res.skipped,
        epsilon=cfg.epsilon, kappa=kappa, delta=delta, error_budget=budget,
    )


def discrepancy_chain(spec: SequenceSpec, p: int, N: int, Kmax: int) -> dict[str, Any]:
    """Star discrepancy of the normalised inverses and its Erdos-Turan bound."""
    inv, defined = inverse_points(spec, N, p)
    pts = inv[defined] / p
    weyl = [long_sum(spec, PsiParams(0, k, p), N).value for k in range(1, Kmax + 1)]
    d = star_discrepancy(pts)
    bound = erdos_turan_bound(weyl, len(pts), Kmax)
    return dict(points=int(pts.size), star_discrepancy=d, et_bound=bound, margin=bound - d)


def _eval_discrepancy(cfg, pt):
    spec = cfg.sequence_spec()
    return dict(sequence=spec.name, Kmax=cfg.Kmax,
                **discrepancy_chain(spec, pt["p"], pt["N"], cfg.Kmax))


def _eval_existence(cfg, pt):
    spec = cfg.sequence_spec()
    kappa = cfg.effective_kappa()
    xi = existence_xi(kappa) if 2 / 3 < kappa < 1 else 0.0
    res = existence_search(spec, pt["p"], pt["N"], ResidueInterval(pt["K"], pt["H"]), xi=xi)
    return dict(sequence=spec.name, witness=res.witness, N0=res.N0, xi=res.xi,
                p_ge_H=res.p_ge_H, p_ge_N=res.p_ge_N, HN_large=res.HN_large)


def _eval_constants(cfg, pt):
    eps, kappa = cfg.epsilon, cfg.effective_kappa()
    row = dict(epsilon=eps, kappa=kappa, delta=theorem_delta(eps, kappa),
               delta0=delta0_short(eps), c=c_constant(eps, kappa), xi_max=existence_xi(kappa))
    if pt["p"] is not None:
        row["N_min"], row["N_max"] = admissible_N_range(pt["p"], eps, kappa)
    return row


_EVALUATORS = {
    "long-sum": _eval_long_sum,
    "short-sum": _eval_short_sum,
    "double-sum": _eval_double_sum,
    "weil-check": _eval_weil,
    "inverses": _eval_inverses,
    "discrepancy": _eval_discrepancy,
    "existence": _eval_existence,
    "constants": _eval_constants,
}


def _evaluate(pt: dict[str, Any]) -> dict[str, Any]:
    cfg = pt["cfg"]
    row = {k: v for k, v in pt.items() if k != "cfg"}
    t0 = time.perf_counter()
    try:
        row.update(_EVALUATORS[pt["kind"]](cfg, pt))
        row["status"] = "ok"
    except KloostlabError as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    row["wall_time"] = time.perf_counter() - t0
    return row


# -- output -------------------------------------------------------------------

def format_value(v: Any) -> str:
    """Text form used in CSV cells: reals with 17 significant digits."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return float(format(v, ".17g")) if math.isfinite(v) else str(v)
    return v


def columns_for(rows_or_kinds: Iterable) -> list[str]:
    """Documented column order restricted to the kinds present."""
    kinds = []
    for item in rows_or_kinds:
        kind = item["kind"] if isinstance(item, dict) else item
        if kind not in kinds:
            kinds.append(kind)
    present = set(_PREFIX + _SUFFIX)
    for kind in kinds:
        present.update(_KIND_COLUMNS[kind])
    return [c for c in COLUMNS if c in present]


class _RowWriter:
    def __init__(self, path, fmt: str, columns: list[str], append: bool):
        self.fmt, self.columns = fmt, columns
        write_header = not (append and os.path.exists(path) and os.path.getsize(path) > 0)
        try:
            self.fh = open(path, "a" if append else "w", newline="", encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot open {path}: {exc}") from exc
        if fmt == "csv":
            self.writer = csv.writer(self.fh, lineterminator="\n")
            if write_header:
                self.writer.writerow(columns)

    def write(self, row: dict[str, Any]) -> None:
        if self.fmt == "csv":
            self.writer.writerow([format_value(row.get(c)) for c in self.columns])
        else:
            self.fh.write(json.dumps({c: _json_value(row.get(c)) for c in self.columns}) + "\n")
        self.fh.flush()

    def close(self) -> None:
        self.fh.close()


def emit(rows: list[dict[str, Any]], fmt: str = "csv", path=None) -> str | None:
    """Write ``rows`` as CSV or JSON lines; returns the text when ``path`` is None.

    Raises ``ValueError`` for empty ``rows`` (no file is created) and
    ``OSError`` when the file cannot be written.
    """
    if not rows:
        raise ValueError("no rows to emit")
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    cols = columns_for(rows)
    if path is None:
        buf = io.StringIO()
        if fmt == "csv":
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([format_value(r.get(c)) for c in cols])
        else:
            for r in rows:
                buf.write(json.dumps({c: _json_value(r.get(c)) for c in cols}) + "\n")
        return buf.getvalue()
    writer = _RowWriter(path, fmt, cols, append=False)
    try:
        for r in rows:
            writer.write(r)
    finally:
        writer.close()
    return None


def read_rows(path, fmt: str | None = None) -> list[dict[str, Any]]:
    """Load rows written by :func:`emit` or :func:`run` (values as strings for CSV)."""
    fmt = fmt or ("jsonl" if str(path).endswith((".jsonl", ".json")) else "csv")
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            return list(csv.DictReader(fh))
        return [json.loads(line) for line in fh if line.strip()]


def plotdata(rows: list[dict[str, Any]], x_field: str, y_field: str) -> list[tuple[Any, Any]]:
    """``(x, y)`` pairs sorted by ``x`` (stable), e.g. ``ratio`` against ``p``."""
    out = []
    for r in rows:
        for f in (x_field, y_field):
            if f not in r:
                raise FieldError(f"row has no field {f!r}")
        out.append((_numeric(r[x_field]), _numeric(r[y_field])))
    out.sort(key=lambda t: (t[0] is None, t[0]))
    return out


def _numeric(v):
    if isinstance(v, str):
        try:
            return float(v) if any(ch in v for ch in ".eE") else int(v)
        except ValueError:
            return v if v else None
    return v


# -- orchestration ------------------------------------------------------------

def run(cfg: ExperimentConfig, *, out=None, fmt: str | None = None, threads: int = 1,
        strict: bool = False, resume: bool = False) -> list[dict[str, Any]]:
    """Evaluate every grid point of ``cfg`` and return the rows in grid order.

    With ``out`` set, rows are appended to the file as soon as they are
    complete.  ``resume`` skips points already present in ``out``.  Under
    ``strict`` the first failing point raises :class:`ComputeError`.
    """
    fmt = fmt or cfg.output.get("format", "csv")
    out = out or cfg.output.get("path")
    points = list(grid(cfg))
    if not points:
        raise ConfigError("configuration expands to an empty grid")
    done: set[tuple[str, str]] = set()
    if resume and out and os.path.exists(out):
        for r in read_rows(out, fmt):
            if r.get("status") == "ok":
                done.add((str(r["experiment"]), str(r["point"])))
        points = [pt for pt in points if (pt["experiment"], str(pt["point"])) not in done]
        log.info("resume: %d points already complete, %d to go", len(done), len(points))
    writer = None
    if out:
        writer = _RowWriter(out, fmt, columns_for(_kinds(cfg)),
                            append=resume)
    rows: list[dict[str, Any]] = []
    pool = ThreadPoolExecutor(max_workers=max(1, threads)) if threads > 1 else None
    try:
        results = pool.map(_evaluate, points) if pool else map(_evaluate, points)
        for row in results:
            rows.append(row)
            if writer:
                writer.write(row)
            if row["status"] != "ok":
                log.warning("%s point %s failed: %s", row["experiment"], row["point"], row["status"])
                if strict:
                    raise ComputeError(f"{row['experiment']} point {row['point']}: {row['status']}")
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
        if writer:
            writer.close()
    return rows
