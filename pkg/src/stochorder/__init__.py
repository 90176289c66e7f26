"""Stochastic dominance and dispersion orderings for comparing options under uncertainty."""
from stochorder.dispersion import (
    DispersionConfig,
    Metric,
    MultiSample,
    dispersion_compare,
    dispersion_sample,
    l1_distance,
    l2_distance,
    normalize_unit_range,
    simplex_sq_volume,
    simplex_volume,
)
from stochorder.ordering import (
    DominanceVerdict,
    EmpiricalCdf,
    KsResult,
    PValueMethod,
    Relation,
    Sample,
    TestConfig,
    bonferroni_level,
    build_ecdf,
    d_minus,
    ecdf_eval,
    fsd_compare,
    ks_distance,
    ks_one_sided_test,
)

__version__ = "0.1.0"

__all__ = [
    "DispersionConfig", "Metric", "MultiSample", "dispersion_compare", "dispersion_sample",
    "l1_distance", "l2_distance", "normalize_unit_range", "simplex_sq_volume", "simplex_volume",
    "DominanceVerdict", "EmpiricalCdf", "KsResult", "PValueMethod", "Relation", "Sample",
    "TestConfig", "bonferroni_level", "build_ecdf", "d_minus", "ecdf_eval", "fsd_compare",
    "ks_distance", "ks_one_sided_test",
]
