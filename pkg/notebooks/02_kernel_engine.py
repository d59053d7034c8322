# %% [markdown]
# # Bergman kernel engine on Reinhardt domains
#
# Monomials are orthogonal on complete Reinhardt domains, so the kernel
# diagonal is a series over the moments N_alpha = ||z^alpha||^2.

# %%
import math

import numpy as np

from flatbergman import parse_domain
from flatbergman.kernel import curvature, extremal, fuchs_check, kernel, metric

P = parse_domain("prod:disc,ball:1")
print(kernel(P, [0, 0]), 1 / math.pi**2)
print(metric(P, [0, 0], [1, 0]), metric(P, [0, 0], [0, 1]), math.sqrt(2))
print(curvature(P, [0, 0], [1, 0]), curvature(P, [0, 0], [1, 1]))

# %% [markdown]
# Extremal integrals by weighted least norm, and the identities linking
# them to kappa, B and H.

# %%
for j in range(3):
    print(j, extremal(P, [0, 0], [1, 0], j).value)
print(math.pi**2, math.pi**2 / 2, math.pi**2 / 12)
print(fuchs_check(parse_domain("egg:2"), [0.2, 0.1], [1, 1]))

# %% [markdown]
# Convergence in the truncation degree at an off-centre point of the disc.

# %%
D = parse_domain("disc")
exact = 1 / (math.pi * (1 - 0.6**2) ** 2)
for T in (20, 40, 60, 80):
    try:
        print(T, abs(kernel(D, [0.6], T) / exact - 1))
    except ArithmeticError as exc:
        print(T, "refused:", exc)
