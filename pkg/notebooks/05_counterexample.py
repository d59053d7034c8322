# %% [markdown]
# # The sqrt(2) threshold
#
# For m = 1, exp(-1/d*^2) = t and exp(-1/d1^2) = t^(1/2) give d1/d* = sqrt(2)
# exactly. The quotient phi(|d* u2|^2)/sqrt(phi(d*^2)) vanishes for
# |u2| < sqrt(2) and diverges above it, so the threshold is not |u2| = 1.

# %%
import math

import numpy as np

from flatbergman.asymptotics import counterexample

rep = counterexample()
print(np.max(np.abs(rep.ratio - math.sqrt(2))))
print(rep.crossing(0))

# %%
small = counterexample([-100.0], [1.0, 1.2, math.sqrt(2), 1.6])
for u, q in zip(small.u_grid, small.log_quotient[0]):
    print(f"{u:.4f}", math.exp(q))

# %% [markdown]
# Along the grid the u2 = 1 column keeps decreasing.

# %%
j = int(np.argmin(np.abs(rep.u_grid - 1.0)))
print(rep.log_t[::8])
print(rep.log_quotient[::8, j])
