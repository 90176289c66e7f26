"""Acceptance suite: one test per numbered criterion, each printing a PASS/FAIL line."""
import json
import math

import numpy as np
import pytest

from oracles import cayley_menger_sq_volume, shoelace_area
from stochorder.cli import EXIT_OK, main
from stochorder.dispersion import (
    DispersionConfig,
    MultiSample,
    dispersion_compare,
    dispersion_sample,
    simplex_volume,
)
from stochorder.experiment import group_outputs
from stochorder.ordering import (
    PValueMethod,
    Relation,
    Sample,
    TestConfig,
    d_minus,
    fsd_compare,
    ks_distance,
    ks_one_sided_test,
)
from stochorder.report import analyze_dataset

pytestmark = pytest.mark.acceptance

LEFT, RIGHT = Relation.LEFT_DOMINATES, Relation.RIGHT_DOMINATES
DESIGN_PAIRS = (("D1", "D2"), ("D1", "D3"), ("D2", "D3"))


@pytest.fixture(scope="module")
def analysis(default_dataset):
    return analyze_dataset(default_dataset)


def test_01_factorial_structure(default_dataset, verdict_line):
    cells = {}
    for r in default_dataset.rows:
        cells.setdefault((r.scenario, r.design), set()).add(r.combo_id)
    sizes = {len(v) for v in cells.values()}
    ok = len(cells) == 9 and sizes == {81} and len(default_dataset) == 729
    verdict_line(1, ok, f"{len(cells)} cells, combos per cell {sorted(sizes)}, "
                        f"{len(default_dataset)} rows")


def test_02_emissions_separation(default_dataset, verdict_line):
    g = group_outputs(default_dataset, "DESIGN_WITHIN_SCENARIO", "EMISSIONS")
    bad = []
    for s, inner in g.items():
        for a, b in DESIGN_PAIRS:
            ks = ks_distance(inner[a], inner[b])
            rel = fsd_compare(inner[a], inner[b]).relation
            if ks != 1.0 or rel is not LEFT:
                bad.append(f"{s} {a}/{b} ks={ks} {rel.value}")
    verdict_line(2, not bad, "D1 > D2 > D3 with ks 1 everywhere" if not bad else "; ".join(bad))


def test_03_npc_ordering_reversal(default_dataset, verdict_line):
    g = group_outputs(default_dataset, "DESIGN_WITHIN_SCENARIO", "NPC")
    # smaller cost is better: under MARKET D1 sits stochastically below D2, D2 below D3
    expected = {"MARKET": RIGHT, "GREEN": LEFT}
    seen = {}
    for s, want in expected.items():
        for a, b in (("D1", "D2"), ("D2", "D3")):
            seen[(s, a, b)] = fsd_compare(g[s][a], g[s][b]).relation
    ok = all(rel is expected[s] for (s, _, _), rel in seen.items())
    verdict_line(3, ok, ", ".join(f"{s} {a}/{b} {r.value}" for (s, a, b), r in seen.items()))


def test_04_bonferroni_recorded(analysis, verdict_line):
    doc = json.loads(json.dumps(analysis.document))
    sig = doc["significance"]
    ok = (sig["adjusted_level_display"] == "0.0167" and round(sig["adjusted_level"], 4) == 0.0167
          and sig["alpha"] == 0.05 and sig["num_comparisons"] == 3)
    verdict_line(4, ok, f"adjusted level {sig['adjusted_level_display']}")


def test_05_one_sided_calibration(verdict_line):
    rng = np.random.default_rng(20240501)
    asym = TestConfig()
    close = 0
    for i in range(200):
        x = rng.normal(size=20)
        y = rng.normal(loc=rng.uniform(-1.0, 1.0), size=20)
        perm = TestConfig(p_value_method=PValueMethod.PERMUTATION, num_permutations=10_000, seed=i)
        pa = ks_one_sided_test(x, y, asym).p_value
        pp = ks_one_sided_test(x, y, perm).p_value
        close += abs(pa - pp) <= 0.05
    verdict_line(5, close >= 190, f"{close}/200 pairs within 0.05")


def test_06_simplex_volume_oracles(verdict_line):
    rng = np.random.default_rng(6)
    worst_tri = 0.0
    for _ in range(1000):
        pts = rng.normal(size=(3, 2)) * rng.uniform(0.1, 10.0)
        ref = shoelace_area(*pts)
        worst_tri = max(worst_tri, abs(simplex_volume(pts) - ref) / ref)
    worst_cm = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 5))
        k = int(rng.integers(1, d + 1))
        pts = rng.normal(size=(k + 1, d))
        ref = math.sqrt(cayley_menger_sq_volume(pts))
        worst_cm = max(worst_cm, abs(simplex_volume(pts) - ref) / ref)
    ok = worst_tri <= 1e-10 and worst_cm <= 1e-8
    verdict_line(6, ok, f"worst rel error shoelace {worst_tri:.2e}, Cayley-Menger {worst_cm:.2e}")


def _dispersion_fingerprint(a, b, cfg):
    verdict, ks = dispersion_compare(a, b, cfg, TestConfig())
    return verdict.relation, ks.d_two_sided, ks.d_minus


def test_07_scale_invariance(default_dataset, verdict_line):
    cfg = DispersionConfig(metric="SIMPLEX", k=2, num_resamples=1000, seed=0)
    rng = np.random.default_rng(7)
    g = group_outputs(default_dataset, "DESIGN_WITHIN_SCENARIO", "BOTH")
    pairs = [(g["GREEN"]["D1"], g["GREEN"]["D2"]), (g["MARKET"]["D2"], g["MARKET"]["D3"]),
             (MultiSample(rng.normal(size=(50, 2))), MultiSample(rng.gamma(2.0, size=(50, 2))))]
    mismatches = 0
    for a, b in pairs:
        base = _dispersion_fingerprint(a, b, cfg)
        for factors in ((7.3, 0.25), (1e-3, 40.0), (2.0, 2.0)):
            if _dispersion_fingerprint(a.scaled(factors), b.scaled(factors), cfg) != base:
                mismatches += 1

    # L1 on raw coordinates: a spreads along x1, b along x2
    l1 = DispersionConfig(metric="L1", num_resamples=1000, seed=0, normalize=False)
    fa = MultiSample([[0.0, 0.0], [3.0, 0.0]])
    fb = MultiSample([[0.0, 0.0], [0.0, 2.0]])
    raw = dispersion_compare(fa, fb, l1)[0].relation
    flipped = dispersion_compare(fa.scaled((0.1, 1.0)), fb.scaled((0.1, 1.0)), l1)[0].relation
    ok = mismatches == 0 and raw is LEFT and flipped is RIGHT
    verdict_line(7, ok, f"simplex mismatches {mismatches}, L1 fixture {raw.value} -> {flipped.value}")


def test_08_k1_reduces_to_l2(verdict_line):
    rng = np.random.default_rng(8)
    data = MultiSample(rng.normal(size=(200, 3)))
    simplex = dispersion_sample(data, DispersionConfig("SIMPLEX", k=1, num_resamples=2000, seed=3))
    l2 = dispersion_sample(data, DispersionConfig("L2", num_resamples=2000, seed=3, normalize=False))
    gap = float(np.max(np.abs(simplex.values.values - l2.values.values)))

    x = rng.normal(size=(1000, 1))
    boot = dispersion_sample(MultiSample(x), DispersionConfig("L2", num_resamples=10_000, seed=0,
                                                               normalize=False))
    ratio = float(np.mean(boot.values.values ** 2) / (2 * np.var(x)))
    ok = gap <= 1e-12 and abs(ratio - 1) <= 0.05
    verdict_line(8, ok, f"max |simplex k=1 - L2| {gap:.1e}, mean sq distance / 2 var {ratio:.4f}")


def test_09_dispersion_reproduction(default_dataset, verdict_line):
    cfg = DispersionConfig(metric="SIMPLEX", k=2, num_resamples=1000, seed=0)
    g = group_outputs(default_dataset, "DESIGN_WITHIN_SCENARIO", "BOTH")
    # LEFT_DOMINATES from dispersion_compare(a, b) means a is more dispersed than b
    required = {"GREEN": DESIGN_PAIRS, "NEUTRAL": DESIGN_PAIRS,
                "MARKET": (("D1", "D3"), ("D2", "D3"))}
    misses = []
    for s, pairs in required.items():
        for a, b in pairs:
            rel = dispersion_compare(g[s][a], g[s][b], cfg)[0].relation
            if rel is not LEFT:
                misses.append(f"{s} {a}/{b} {rel.value}")
    verdict_line(9, not misses, "D3 < D2 < D1 in spread" if not misses else "; ".join(misses))


def _fsd_property_violations(x, y, z) -> list[str]:
    out = []
    rxy = fsd_compare(x, y).relation
    ryx = fsd_compare(y, x).relation
    mirror = {LEFT: RIGHT, RIGHT: LEFT, Relation.EQUAL: Relation.EQUAL,
              Relation.INCOMPARABLE: Relation.INCOMPARABLE}
    if ryx is not mirror[rxy]:
        out.append("antisymmetry")
    ryz = fsd_compare(y, z).relation
    if rxy is LEFT and ryz is LEFT and fsd_compare(x, z).relation is not LEFT:
        out.append("transitivity")

    def g(v):
        return v ** 3 + 7 * v  # strictly increasing, exact on small integers

    if fsd_compare(Sample(g(x.values)), Sample(g(y.values))).relation is not rxy:
        out.append("monotone invariance")
    if d_minus(x, y) > ks_distance(x, y):
        out.append("D- <= D")
    if rxy is LEFT and (x.mean() < y.mean() or x.median() < y.median()):
        out.append("mean/median order")
    if rxy is RIGHT and (x.mean() > y.mean() or x.median() > y.median()):
        out.append("mean/median order")
    return out


def test_10_fsd_property_suite(verdict_line):
    rng = np.random.default_rng(10)
    violations = {}
    dominated = 0
    for _ in range(10_000):
        n, m, k = rng.integers(1, 16, size=3)
        # integer support keeps ties frequent; upward shifts make dominance common
        x = rng.integers(0, 12, size=n) + rng.integers(0, 4)
        y = rng.integers(0, 12, size=m)
        if rng.random() < 0.5:
            y = np.sort(y)
            x = np.sort(rng.choice(y, size=n)) + rng.integers(0, 3, size=n)
        z = y[rng.integers(0, m, size=k)] - rng.integers(0, 3, size=k)
        xs, ys, zs = Sample(x.astype(float)), Sample(y.astype(float)), Sample(z.astype(float))
        dominated += fsd_compare(xs, ys).is_dominance
        for v in _fsd_property_violations(xs, ys, zs):
            violations[v] = violations.get(v, 0) + 1
    total = sum(violations.values())
    verdict_line(10, total == 0, f"10000 pairs ({dominated} dominance verdicts), "
                                 f"violations {violations or 0}")


def test_11_end_to_end_determinism(tmp_path, verdict_line):
    outputs = []
    for run in ("first", "second"):
        out = tmp_path / run
        assert main(["simulate", "--out", str(out)]) == EXIT_OK
        assert main(["analyze", "--out", str(out)]) == EXIT_OK
        outputs.append(((out / "dataset.csv").read_bytes(), (out / "report.json").read_bytes()))
    ok = outputs[0] == outputs[1]
    verdict_line(11, ok, f"dataset {len(outputs[0][0])} bytes, report {len(outputs[0][1])} bytes, "
                         f"identical={ok}")
