"""Multivariate dispersion orderings built from independent copies.

A dataset is turned into a univariate sample of spreads: draw tuples of
points with replacement, record the L1 or L2 distance between a pair, or the
k-volume of the simplex spanned by ``k + 1`` points.  Two datasets are then
ordered by first-order dominance on those spread samples; the one whose
statistic is stochastically smaller is the less dispersed.
"""
from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from stochorder._parallel import resolve_workers
from stochorder.ordering import (
    DominanceVerdict,
    KsResult,
    Sample,
    TestConfig,
    fsd_compare,
    ks_one_sided_test,
)

log = logging.getLogger(__name__)

MIN_RESAMPLES = 100
#: Relative size of the simplex, against its edge lengths, treated as flat.
DEGENERATE_RTOL = 1e-12
#: Resamples drawn per derived generator.
RESAMPLE_CHUNK = 256


class Metric(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    SIMPLEX = "SIMPLEX"


@dataclass(frozen=True, init=False)
class MultiSample:
    """``n`` points in ``d`` dimensions, one labelled column per output."""

    points: np.ndarray
    labels: tuple[str, ...]
    warnings: tuple[str, ...]

    def __init__(self, points, labels: Optional[Sequence[str]] = None,
                 warnings: Sequence[str] = ()):
        arr = np.array(points, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("points must form an (n, d) array")
        if arr.shape[0] < 2:
            raise ValueError("a MultiSample needs at least 2 points")
        if arr.shape[1] < 1:
            raise ValueError("points must have at least one coordinate")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite input")
        if labels is None:
            labels = tuple(f"x{i}" for i in range(arr.shape[1]))
        labels = tuple(labels)
        if len(labels) != arr.shape[1]:
            raise ValueError(f"expected {arr.shape[1]} labels, got {len(labels)}")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "warnings", tuple(warnings))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def scaled(self, factors: Sequence[float]) -> "MultiSample":
        return MultiSample(self.points * np.asarray(factors, dtype=float), self.labels)


@dataclass(frozen=True)
class DispersionConfig:
    """How spread statistics are drawn.

    ``normalize=None`` picks the per-metric default: rescale to [0, 1] for
    L1/L2 (both are sensitive to units), leave raw for SIMPLEX (volumes only
    pick up a common factor under per-coordinate scaling).

    With ``common_random_numbers`` both sides of a comparison draw their
    resample indices from the same derived seed, so paired datasets of equal
    size are resampled at the same positions.
    """

    metric: Metric = Metric.SIMPLEX
    k: Optional[int] = 2
    num_resamples: int = 1000
    seed: int = 0
    normalize: Optional[bool] = None
    common_random_numbers: bool = True

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric(self.metric))
        if self.num_resamples < MIN_RESAMPLES:
            raise ValueError(f"num_resamples must be >= {MIN_RESAMPLES}")
        if self.metric is Metric.SIMPLEX:
            if self.k is None or self.k < 1:
                raise ValueError("SIMPLEX needs k >= 1")
        else:
            object.__setattr__(self, "k", None)

    @property
    def tuple_size(self) -> int:
        return self.k + 1 if self.metric is Metric.SIMPLEX else 2

    @property
    def effective_normalize(self) -> bool:
        if self.normalize is None:
            return self.metric is not Metric.SIMPLEX
        return self.normalize

    def describe(self) -> str:
        return f"SIMPLEX({self.k})" if self.metric is Metric.SIMPLEX else self.metric.value


@dataclass(frozen=True)
class DispersionSample:
    values: Sample
    config: DispersionConfig
    warnings: tuple[str, ...] = field(default=())


def _pair(r, s) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    return r, s


def l1_distance(r, s) -> float:
    r, s = _pair(r, s)
    return float(np.sum(np.abs(r - s)))


def l2_distance(r, s) -> float:
    r, s = _pair(r, s)
    return float(np.sqrt(np.sum((r - s) ** 2)))


def _check_simplex(points) -> np.ndarray:
    try:
        pts = np.asarray(points, dtype=float)
    except ValueError:
        pts = None
    if pts is None or pts.ndim != 2:
        raise ValueError("dimension mismatch: points must be k+1 vectors of equal length")
    k, d = pts.shape[0] - 1, pts.shape[1]
    if k < 1:
        raise ValueError("a simplex needs at least 2 points")
    if k > d:
        raise ValueError(f"k={k} exceeds dimension d={d}")
    return pts


def _batch_sq_volumes(tuples: np.ndarray) -> np.ndarray:
    """Squared k-volumes for an array of shape (batch, k+1, d).

    The Gram determinant det(M^T M) of the edge matrix M is evaluated as the
    squared product of the diagonal of R in M = QR, which avoids forming
    M^T M and squaring its condition number.
    """
    k = tuples.shape[1] - 1
    edges = np.swapaxes(tuples[:, :k, :] - tuples[:, k:, :], 1, 2)  # (batch, d, k)
    if k == 1:
        gram = np.sum(edges[:, :, 0] ** 2, axis=1)
    else:
        r = np.linalg.qr(edges, mode="r")
        diag = np.diagonal(r, axis1=1, axis2=2)
        gram = np.prod(diag * diag, axis=1)
        # Hadamard: gram <= prod of squared edge lengths; below that by ~eps means dependent
        bound = np.prod(np.sum(edges * edges, axis=1), axis=1)
        gram = np.where(gram <= DEGENERATE_RTOL**2 * bound, 0.0, gram)
    return gram / math.factorial(k) ** 2


def simplex_sq_volume(points) -> float:
    """Squared k-volume of the simplex with vertices ``points`` (k+1 rows, d columns)."""
    pts = _check_simplex(points)
    return float(_batch_sq_volumes(pts[None])[0])


def simplex_volume(points) -> float:
    return math.sqrt(simplex_sq_volume(points))


def normalize_unit_range(data: MultiSample) -> MultiSample:
    """Affine map of each coordinate onto [0, 1]; constant coordinates go to 0."""
    pts = data.points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = hi - lo
    flat = span == 0
    out = (pts - lo) / np.where(flat, 1.0, span)
    out[:, flat] = 0.0
    warnings = list(data.warnings)
    for j in np.flatnonzero(flat):
        msg = f"constant coordinate {data.labels[j]!r} mapped to 0"
        log.warning(msg)
        warnings.append(msg)
    return MultiSample(out, data.labels, warnings)


def _statistics(points: np.ndarray, idx: np.ndarray, metric: Metric) -> np.ndarray:
    tuples = points[idx]  # (batch, t, d)
    if metric is Metric.L1:
        return np.sum(np.abs(tuples[:, 0] - tuples[:, 1]), axis=1)
    if metric is Metric.L2:
        return np.sqrt(np.sum((tuples[:, 0] - tuples[:, 1]) ** 2, axis=1))
    return np.sqrt(_batch_sq_volumes(tuples))


def resample_indices(n: int, tuple_size: int, num_resamples: int, seed: int,
                     stream: int = 0) -> np.ndarray:
    """Index tuples, shape (num_resamples, tuple_size), drawn uniformly with replacement.

    Chunk ``c`` comes from a generator seeded by ``(seed, stream, c)``, so the
    draws are fixed by the arguments alone.
    """
    blocks = []
    for c, start in enumerate(range(0, num_resamples, RESAMPLE_CHUNK)):
        size = min(RESAMPLE_CHUNK, num_resamples - start)
        rng = np.random.default_rng([seed, stream, c])
        blocks.append(rng.integers(0, n, size=(size, tuple_size)))
    return np.concatenate(blocks)


def dispersion_sample(data: MultiSample, cfg: DispersionConfig, *, stream: int = 0,
                      workers: Optional[int] = None) -> DispersionSample:
    """Bootstrap sample of distances or simplex volumes for one dataset.

    Tuples that repeat a point are kept; their zero distance or volume is a
    legitimate with-replacement outcome.
    """
    if cfg.metric is Metric.SIMPLEX and cfg.k > data.dim:
        raise ValueError(f"k={cfg.k} exceeds dimension d={data.dim}")
    if data.n < cfg.tuple_size:
        raise ValueError(f"{cfg.describe()} needs at least {cfg.tuple_size} points, got {data.n}")
    if cfg.effective_normalize:
        data = normalize_unit_range(data)
    idx = resample_indices(data.n, cfg.tuple_size, cfg.num_resamples, cfg.seed, stream)
    splits = np.array_split(idx, max(1, len(idx) // 2048))
    nworkers = resolve_workers(workers, len(splits))
    if nworkers > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            parts = list(pool.map(lambda i: _statistics(data.points, i, cfg.metric), splits))
    else:
        parts = [_statistics(data.points, i, cfg.metric) for i in splits]
    values = np.concatenate(parts)
    label = f"{cfg.describe()} of {', '.join(data.labels)}"
    return DispersionSample(Sample(values, label), cfg, data.warnings)


def compare_dispersion_samples(sa: DispersionSample, sb: DispersionSample,
                               test_cfg: Optional[TestConfig] = None, *,
                               dependent_samples: bool = False,
                               workers: Optional[int] = None) -> tuple[DominanceVerdict, KsResult]:
    """Dominance verdict and one-sided KS test between two precomputed spread samples."""
    verdict = fsd_compare(sa.values, sb.values)
    ks = ks_one_sided_test(sa.values, sb.values, test_cfg or TestConfig(),
                           dependent_samples=dependent_samples, workers=workers)
    notes = sa.warnings + sb.warnings
    if notes:
        ks = replace(ks, warnings=ks.warnings + notes)
    return verdict, ks


def dispersion_compare(a: MultiSample, b: MultiSample, cfg: DispersionConfig,
                       test_cfg: Optional[TestConfig] = None, *,
                       workers: Optional[int] = None) -> tuple[DominanceVerdict, KsResult]:
    """Dispersion ordering of ``a`` against ``b``.

    LEFT_DOMINATES means ``a``'s statistic is stochastically larger, so ``a``
    is the more dispersed dataset. The KS test takes H0 "b's statistic
    dominates a's".
    """
    stream_b = 0 if cfg.common_random_numbers else 1
    sa = dispersion_sample(a, cfg, stream=0, workers=workers)
    sb = dispersion_sample(b, cfg, stream=stream_b, workers=workers)
    return compare_dispersion_samples(sa, sb, test_cfg, workers=workers)


__all__ = [
    "Metric", "MultiSample", "DispersionConfig", "DispersionSample", "l1_distance",
    "l2_distance", "simplex_sq_volume", "simplex_volume", "normalize_unit_range",
    "resample_indices", "dispersion_sample", "compare_dispersion_samples",
    "dispersion_compare",
]
