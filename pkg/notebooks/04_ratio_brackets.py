# %% [markdown]
# # Certified brackets for the normalized kernel, metric and curvature
#
# The brackets use I_j of (1 - delta) P and diag(1, d2/d*) P at the origin,
# with P the product of the disc and the unit ball.

# %%
import numpy as np

from flatbergman import ConeStream, ModelDomain
from flatbergman.asymptotics import SCHEDULE, curvature_ratio_bounds, kernel_ratio_bounds, metric_ratio_bounds

model = ModelDomain(n=1)
grid = -np.geomspace(300, 2000, 6)
for eps, delta in SCHEDULE:
    s = kernel_ratio_bounds(model, ConeStream(), eps, delta, grid, T=20)
    r = s.records[-1]
    print(eps, delta, r.lower / s.target, r.upper / s.target, s.contains_target())

# %% [markdown]
# Metric (target 1) and curvature (target -2) brackets on the tightest entry.

# %%
for xi in ([1, 0], [0, 1], [1, 1]):
    m = metric_ratio_bounds(model, ConeStream(), xi, 0.1, 0.01, grid, T=20)
    c = curvature_ratio_bounds(model, ConeStream(), xi, 0.1, 0.01, grid, T=20)
    rm, rc = m.records[-1], c.records[-1]
    print(xi, (rm.lower, rm.upper), (rc.lower, rc.upper))
