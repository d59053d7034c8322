# %% [markdown]
# # Scaling geometry near a flat boundary point
#
# Model domain rho = Re z1 + phi(|z'|^2) < 0 and a tilted cone stream.

# %%
import numpy as np

from flatbergman import ConeStream, ModelDomain, build_frame, sandwich_check
from flatbergman.geometry import d_eps, first_inclusion_certified

model = ModelDomain(n=1)
stream = ConeStream(kind="tilted", c=1.0, Nprime=6.0)
for lt in (-50.0, -200.0, -1000.0, -2000.0):
    f = build_frame(model, stream, lt)
    print(lt, f.d, f.foot.p2, f.dstar, d_eps(model, f.foot, 0.5, 2))

# %% [markdown]
# Normal stream: d* solves phi(d*^2) = t, so d* = 1/sqrt(-log t) for m = 1.

# %%
f = build_frame(model, ConeStream(), -100.0)
print(f.dstar, d_eps(model, f.foot, 1.0, 1), d_eps(model, f.foot, 1.0, 2))

# %% [markdown]
# Sandwich inclusions (1 - delta) P inside the scaled region inside the
# dilated product, probed by low-discrepancy sampling. Far from the
# boundary the first inclusion fails and the sampler sees it.

# %%
for lt in (-3.0, -20.0, -200.0):
    f = build_frame(model, ConeStream(), lt)
    rep = sandwich_check(f, 0.5, 0.1, 2000, seed=0)
    print(lt, rep.violations_in, rep.violations_out, rep.certified_in)

# %% [markdown]
# Where the first inclusion becomes certified analytically, per schedule entry.

# %%
for eps, delta in ((1.0, 0.3), (0.5, 0.1), (0.25, 0.03), (0.1, 0.01)):
    grid = -np.geomspace(50, 2000, 60)
    ok = [lt for lt in grid if first_inclusion_certified(build_frame(model, ConeStream(), lt), eps, delta)]
    print(eps, delta, max(ok) if ok else None)
