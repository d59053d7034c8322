# %% [markdown]
# # Flat profiles and log-domain numbers
#
# The profile phi(x) = exp(-1/x^m) underflows a double as soon as x is
# a little below 0.04 (m = 1). Every quantity along a stream lives at
# t = exp(-2000) or smaller, so values are carried as LogScalar.

# %%
import math

import numpy as np

from flatbergman import FlatProfile, LogScalar

phi = FlatProfile(1)
print(phi(0.25), float(phi(0.25)), math.exp(-4))
print(FlatProfile(2)(0.1))

# %% [markdown]
# Arithmetic stays exact in the log field far outside the double range.

# %%
t = LogScalar(1, -2000.0)
print(t * t, t.sqrt(), t.materialize())
print((t + t) / t)

# %% [markdown]
# The scaling dichotomy: phi(r x)/phi(r) tends to 0 for x < 1 and to
# infinity for x > 1.

# %%
for x in (0.5, 1.0, 2.0):
    print(x, [phi(r * x) / phi(r) for r in (0.1, 0.01, 0.001)])

# %% [markdown]
# Derivatives come from an exact polynomial recurrence. phi'' changes sign
# at the convexity limit (m/(m+1))^(1/m).

# %%
for x in np.linspace(0.3, 0.7, 5):
    print(f"{x:.2f}", phi.derivative(x, 2))
print("convexity limit", phi.convex_limit)

# %% [markdown]
# Inverse: phi^-1(exp(-k)) = 1/k for m = 1, solved in the psi = x^m coordinate.

# %%
print(phi.inverse(LogScalar(1, -100.0)), FlatProfile(2).inverse(LogScalar(1, -10000.0)))
