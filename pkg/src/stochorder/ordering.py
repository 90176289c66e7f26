"""Empirical CDFs, first-order stochastic dominance and one-sided KS testing.

All comparisons are evaluated on the pooled support of the two samples.
Step functions attain every extremum there, so the suprema below are exact.
Probabilities are compared as integer counts (``cx * m`` against ``cy * n``)
which keeps dominance verdicts free of floating point noise.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from stochorder._parallel import resolve_workers

#: Absolute tolerance used when merging near-identical output values.
MERGE_TOL = 1e-12

#: Permutations drawn per derived generator.
PERMUTATION_CHUNK = 1000

MIN_PERMUTATIONS = 100


class Relation(str, enum.Enum):
    LEFT_DOMINATES = "LEFT_DOMINATES"
    RIGHT_DOMINATES = "RIGHT_DOMINATES"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


class PValueMethod(str, enum.Enum):
    ASYMPTOTIC = "ASYMPTOTIC"
    PERMUTATION = "PERMUTATION"


@dataclass(frozen=True, init=False)
class Sample:
    """One output variable observed ``n`` times, stored sorted ascending."""

    values: np.ndarray
    label: str

    def __init__(self, values: Iterable[float], label: str = ""):
        if not isinstance(values, np.ndarray):
            values = list(values)
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite input")
        arr = np.sort(arr, kind="stable")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "label", label)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(np.mean(self.values))

    def median(self) -> float:
        return float(np.median(self.values))


def as_sample(data, label: str = "") -> Sample:
    if isinstance(data, Sample):
        return data
    return Sample(data, label)


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step function: ``F(t) = probs[i]`` for the largest ``support[i] <= t``."""

    support: np.ndarray
    counts: np.ndarray
    n: int

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.n

    def __call__(self, t):
        return ecdf_eval(self, t)

    def points(self) -> list[tuple[float, float]]:
        return [(float(s), float(p)) for s, p in zip(self.support, self.probs)]


@dataclass(frozen=True)
class DominanceVerdict:
    relation: Relation
    note: str = ""

    @property
    def is_dominance(self) -> bool:
        return self.relation in (Relation.LEFT_DOMINATES, Relation.RIGHT_DOMINATES)


@dataclass(frozen=True)
class TestConfig:
    """Significance level, Bonferroni family size and p-value method."""

    __test__ = False  # keep pytest from collecting this as a test class

    alpha: float = 0.05
    num_comparisons: int = 3
    p_value_method: PValueMethod = PValueMethod.ASYMPTOTIC
    num_permutations: int = 10_000
    seed: int = 0

    def __post_init__(self):
        bonferroni_level(self.alpha, self.num_comparisons)  # validates
        object.__setattr__(self, "p_value_method", PValueMethod(self.p_value_method))

    @property
    def adjusted_level(self) -> float:
        return bonferroni_level(self.alpha, self.num_comparisons)


@dataclass(frozen=True)
class KsResult:
    d_two_sided: float
    d_minus: float
    p_value: Optional[float]
    n: int
    m: int
    adjusted_level: Optional[float] = None
    rejected: Optional[bool] = None
    method: Optional[PValueMethod] = None
    # set when both samples share simulation inputs, so independence fails
    dependent_samples: bool = False
    warnings: tuple[str, ...] = field(default=())


def _merge_clusters(sorted_vals: np.ndarray) -> np.ndarray:
    """Indices of the last element of each run of values closer than MERGE_TOL."""
    if sorted_vals.size == 0:
        return np.empty(0, dtype=np.intp)
    gaps = np.diff(sorted_vals) > MERGE_TOL
    return np.append(np.flatnonzero(gaps), sorted_vals.size - 1)


def build_ecdf(sample) -> EmpiricalCdf:
    s = as_sample(sample)
    ends = _merge_clusters(s.values)
    support = s.values[ends].copy()
    counts = (ends + 1).astype(np.int64)
    support.setflags(write=False)
    counts.setflags(write=False)
    return EmpiricalCdf(support=support, counts=counts, n=s.n)


def ecdf_eval(cdf: EmpiricalCdf, t):
    """P(X <= t). Scalar in, float out; array in, array out."""
    idx = np.searchsorted(cdf.support, t, side="right")
    probs = np.concatenate(([0.0], cdf.probs))
    out = probs[idx]
    return float(out) if np.ndim(out) == 0 else out


def pooled_counts(x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, int]:
    """Cumulative counts of ``x`` and ``y`` at each distinct pooled support point.

    Returns ``(points, cx, cy, n, m)`` so that ``F_x(points[i]) == cx[i] / n``.
    """
    xs, ys = as_sample(x).values, as_sample(y).values
    n, m = xs.size, ys.size
    pooled = np.concatenate((xs, ys))
    is_x = np.concatenate((np.ones(n, dtype=np.int64), np.zeros(m, dtype=np.int64)))
    order = np.argsort(pooled, kind="stable")
    pooled, is_x = pooled[order], is_x[order]
    ends = _merge_clusters(pooled)
    cum_x = np.cumsum(is_x)[ends]
    cum_y = (ends + 1) - cum_x
    return pooled[ends], cum_x, cum_y, n, m


def ks_distance(x, y) -> float:
    """sup_z |F_x(z) - F_y(z)|."""
    _, cx, cy, n, m = pooled_counts(x, y)
    return float(np.max(np.abs(cx * m - cy * n)) / (n * m))


def d_minus(x, y) -> float:
    """sup_z (F_y(z) - F_x(z)), clamped below at 0."""
    _, cx, cy, n, m = pooled_counts(x, y)
    return float(max(0, int(np.max(cy * n - cx * m))) / (n * m))


def fsd_compare(x, y) -> DominanceVerdict:
    """First-order dominance verdict between two samples.

    LEFT_DOMINATES means ``F_x <= F_y`` everywhere with strict inequality
    somewhere, i.e. ``x`` is stochastically larger.
    """
    _, cx, cy, n, m = pooled_counts(x, y)
    diff = cx * m - cy * n  # sign of F_x - F_y, exact
    below = bool(np.any(diff < 0))
    above = bool(np.any(diff > 0))
    if below and above:
        return DominanceVerdict(Relation.INCOMPARABLE, "cdfs cross; first-order dominance does not exist")
    if below:
        return DominanceVerdict(Relation.LEFT_DOMINATES, "left cdf lies below right cdf")
    if above:
        return DominanceVerdict(Relation.RIGHT_DOMINATES, "right cdf lies below left cdf")
    return DominanceVerdict(Relation.EQUAL, "identical empirical cdfs")


def bonferroni_level(alpha: float, n: int) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if int(n) != n or n < 1:
        raise ValueError(f"number of comparisons must be a positive integer, got {n}")
    return alpha / int(n)


def asymptotic_p_value(dm: float, n: int, m: int) -> float:
    """Limiting one-sided KS tail, exp(-2 D^2 nm / (n + m))."""
    return math.exp(-2.0 * dm * dm * n * m / (n + m))


def _permutation_counts(pooled_is_x: np.ndarray, ends: np.ndarray, n: int, m: int,
                        observed: int, seed: int, chunk: int, size: int) -> int:
    rng = np.random.default_rng([seed, chunk])
    labels = np.broadcast_to(pooled_is_x, (size, pooled_is_x.size))
    perm = rng.permuted(labels, axis=1)
    cum_x = np.cumsum(perm, axis=1)[:, ends]
    cum_y = (ends + 1)[None, :] - cum_x
    stat = np.maximum(np.max(cum_y * n - cum_x * m, axis=1), 0)
    return int(np.count_nonzero(stat >= observed))


def permutation_p_value(x, y, num_permutations: int = 10_000, seed: int = 0,
                        workers: Optional[int] = None) -> float:
    """Relabelling p-value for D-, with plus-one smoothing.

    Permutations are drawn in fixed chunks, each from a generator seeded by
    ``(seed, chunk index)``, so the result does not depend on ``workers``.
    """
    if num_permutations < MIN_PERMUTATIONS:
        raise ValueError("insufficient permutations")
    _, cx, cy, n, m = pooled_counts(x, y)
    observed = max(0, int(np.max(cy * n - cx * m)))
    xs, ys = as_sample(x).values, as_sample(y).values
    pooled = np.concatenate((xs, ys))
    order = np.argsort(pooled, kind="stable")
    is_x = np.concatenate((np.ones(n, dtype=np.int64), np.zeros(m, dtype=np.int64)))[order]
    ends = _merge_clusters(pooled[order])

    sizes = [min(PERMUTATION_CHUNK, num_permutations - start)
             for start in range(0, num_permutations, PERMUTATION_CHUNK)]
    jobs = [(is_x, ends, n, m, observed, seed, c, size) for c, size in enumerate(sizes)]
    nworkers = resolve_workers(workers, len(jobs))
    if nworkers > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            hits = sum(pool.map(lambda a: _permutation_counts(*a), jobs))
    else:
        hits = sum(_permutation_counts(*a) for a in jobs)
    return (hits + 1) / (num_permutations + 1)


def ks_one_sided_test(x, y, cfg: Optional[TestConfig] = None, *, distance_only: bool = False,
                      dependent_samples: bool = False, workers: Optional[int] = None) -> KsResult:
    """One-sided KS test of H0: ``y`` dominates ``x`` (F_x >= F_y everywhere).

    Large ``D- = sup(F_y - F_x)`` is evidence against H0. With
    ``distance_only`` the p-value and rejection flag are left as ``None``.
    """
    cfg = cfg or TestConfig()
    if cfg.p_value_method is PValueMethod.PERMUTATION and cfg.num_permutations < MIN_PERMUTATIONS:
        raise ValueError("insufficient permutations")
    _, cx, cy, n, m = pooled_counts(x, y)
    diff = cy * n - cx * m
    d2 = float(np.max(np.abs(diff)) / (n * m))
    dm = float(max(0, int(np.max(diff))) / (n * m))
    notes = ()
    if dependent_samples:
        notes = ("samples share simulation inputs; KS independence assumption does not hold",)
    if distance_only:
        return KsResult(d2, dm, None, n, m, dependent_samples=dependent_samples, warnings=notes)
    if cfg.p_value_method is PValueMethod.ASYMPTOTIC:
        p = asymptotic_p_value(dm, n, m)
    else:
        p = permutation_p_value(x, y, cfg.num_permutations, cfg.seed, workers=workers)
    level = cfg.adjusted_level
    return KsResult(d2, dm, p, n, m, adjusted_level=level, rejected=bool(p <= level),
                    method=cfg.p_value_method, dependent_samples=dependent_samples,
                    warnings=notes)


__all__: Sequence[str] = [
    "MERGE_TOL", "Relation", "PValueMethod", "Sample", "EmpiricalCdf", "DominanceVerdict",
    "TestConfig", "KsResult", "as_sample", "build_ecdf", "ecdf_eval", "pooled_counts",
    "ks_distance", "d_minus", "fsd_compare", "bonferroni_level", "asymptotic_p_value",
    "permutation_p_value", "ks_one_sided_test",
]
