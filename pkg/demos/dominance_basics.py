"""
Comparing two uncertain outcomes by their CDFs
===============================================

Two small samples, their empirical CDFs, a dominance verdict and the
one-sided KS test behind it.
"""

import numpy as np

from stochorder import Sample, TestConfig, build_ecdf, fsd_compare, ks_one_sided_test

rng = np.random.default_rng(1)

# Costs of two options; the second is shifted up by one unit
a = Sample(rng.normal(10.0, 1.0, size=60), "option a")
b = Sample(rng.normal(11.0, 1.0, size=60), "option b")

# The empirical CDF is a step function on the sorted distinct values
cdf = build_ecdf(a)
print("first steps of F_a:", [(round(v, 2), round(p, 3)) for v, p in cdf.points()[:4]])

# LEFT_DOMINATES would mean a is stochastically larger; here b is
verdict = fsd_compare(a, b)
print("verdict:", verdict.relation.value, verdict.note)

# H0 "b dominates a" is tested with D- = sup(F_b - F_a)
res = ks_one_sided_test(a, b, TestConfig(alpha=0.05, num_comparisons=3))
print(f"D = {res.d_two_sided:.3f}, D- = {res.d_minus:.3f}, p = {res.p_value:.3f}, "
      f"level = {res.adjusted_level:.4f}, rejected = {res.rejected}")

# The reverse question is strongly rejected
rev = ks_one_sided_test(b, a)
print(f"reverse: D- = {rev.d_minus:.3f}, p = {rev.p_value:.2e}, rejected = {rev.rejected}")

# A permutation p-value agrees closely with the asymptotic one
perm = ks_one_sided_test(b, a, TestConfig(p_value_method="PERMUTATION", num_permutations=5000))
print(f"permutation p = {perm.p_value:.2e}")
