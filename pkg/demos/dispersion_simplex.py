"""
Ordering datasets by spread
===========================

Distances and simplex volumes between random draws give a univariate
statistic whose distribution can be ordered like any other sample.
"""

import numpy as np

from stochorder import DispersionConfig, MultiSample, dispersion_compare, simplex_volume

rng = np.random.default_rng(2)

# A unit right triangle has area one half
print("triangle area:", simplex_volume([[0, 0], [1, 0], [0, 1]]))

# A segment in 3-d has its length as 1-volume
print("segment length:", simplex_volume([[0, 0, 0], [1, 2, 2]]))

# Two clouds in the plane, one stretched in both directions
narrow = MultiSample(rng.normal(size=(80, 2)), labels=("cost", "emissions"))
wide = MultiSample(rng.normal(size=(80, 2)) * [3.0, 2.0], labels=("cost", "emissions"))

cfg = DispersionConfig(metric="SIMPLEX", k=2, num_resamples=1000, seed=0)
verdict, ks = dispersion_compare(wide, narrow, cfg)
print("wide vs narrow:", verdict.relation.value, f"D = {ks.d_two_sided:.3f}")

# Volumes pick up one common factor under per-coordinate scaling,
# so changing units leaves the verdict and distance untouched
v2, ks2 = dispersion_compare(wide.scaled((1e-3, 50.0)), narrow.scaled((1e-3, 50.0)), cfg)
print("after rescaling:", v2.relation.value, f"D = {ks2.d_two_sided:.3f}")

# Raw L1 distances are not scale free
l1 = DispersionConfig(metric="L1", num_resamples=1000, normalize=False)
flat = MultiSample([[0.0, 0.0], [3.0, 0.0]])
tall = MultiSample([[0.0, 0.0], [0.0, 2.0]])
print("L1 raw:", dispersion_compare(flat, tall, l1)[0].relation.value)
print("L1 with x1 in other units:",
      dispersion_compare(flat.scaled((0.1, 1)), tall.scaled((0.1, 1)), l1)[0].relation.value)
