import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from flatbergman.asymptotics import counterexample
from flatbergman.geometry import ConeStream, ModelDomain, build_frame, dstar_residual, tangent_split
from flatbergman.kernel import curvature, fuchs_check, kernel_jet, random_interior_points
from flatbergman.logscalar import LogScalar
from flatbergman.profile import FlatProfile
from flatbergman.reinhardt import Ball, Disc, Egg, product_domain

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda x: x != 0)
logs = st.floats(min_value=-5000, max_value=5000)
log_t = st.floats(min_value=-2000, max_value=-50)
SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@given(finite, finite)
def test_logscalar_product_matches_float(a, b):
    assert float(LogScalar.from_float(a) * LogScalar.from_float(b)) == pytest.approx(a * b, rel=1e-12)
    assert float(LogScalar.from_float(a) / LogScalar.from_float(b)) == pytest.approx(a / b, rel=1e-12)


@given(finite, finite)
def test_logscalar_sum_matches_float(a, b):
    s = LogScalar.from_float(a) + LogScalar.from_float(b)
    assert float(s) == pytest.approx(a + b, rel=1e-9, abs=1e-9 * (abs(a) + abs(b)))


@given(logs, logs)
def test_logscalar_order_follows_logs(x, y):
    assert (LogScalar(1, x) < LogScalar(1, y)) == (x < y)
    assert (LogScalar(-1, x) < LogScalar(-1, y)) == (x > y)


@given(st.integers(1, 3), st.floats(min_value=1e-3, max_value=0.9))
def test_profile_inverse_roundtrip(m, x):
    p = FlatProfile(m)
    assert p.inverse(p(x)) == pytest.approx(x, rel=1e-10)


@SETTINGS
@given(log_t, st.floats(min_value=0.0, max_value=1.0))
def test_dstar_solves_its_equation(lt, a):
    domain = ModelDomain(n=1)
    stream = ConeStream(kind="tilted", c=1.0, Nprime=6.0, a=a)
    frame = build_frame(domain, stream, lt)
    assert dstar_residual(domain, frame.foot, frame.dstar) < 1e-10
    assert frame.foot.residual_p1 < 1e-10 and frame.foot.residual_p2 < 1e-10


@SETTINGS
@given(log_t, st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda v: any(abs(x) > 1e-3 for x in v)))
def test_tangent_split_is_orthogonal(lt, parts):
    frame = build_frame(ModelDomain(n=1), ConeStream(kind="tilted", c=1.0, Nprime=6.0), lt)
    xi = np.array([parts[0] + 1j * parts[1], parts[2] + 1j * parts[3]])
    s = tangent_split(frame, xi)
    assert np.allclose(s.normal + s.tangential, xi, atol=1e-14)
    assert abs(np.vdot(frame.rotation @ s.normal, frame.rotation @ s.tangential)) < 1e-12


@pytest.mark.parametrize("domain", [Disc(), Ball(2), product_domain(1), Egg(2)], ids=lambda d: d.spec)
def test_fuchs_identities_at_random_points(domain):
    rng = np.random.default_rng(11)
    for z in random_interior_points(domain, 8, seed=7):
        xi = rng.normal(size=domain.dim) + 1j * rng.normal(size=domain.dim)
        assert max(fuchs_check(domain, z, xi)) < 1e-8
        assert kernel_jet(domain, z).min_eigenvalue > 0


@SETTINGS
@given(st.floats(0.1, 3.0), st.floats(0.0, 2 * math.pi))
def test_curvature_is_homogeneous(scale, angle):
    z = [0.2 + 0.1j, -0.1j]
    xi = np.array([0.4 - 0.3j, 0.5 + 0.1j])
    lam = scale * complex(math.cos(angle), math.sin(angle))
    dom = product_domain(1)
    assert curvature(dom, z, lam * xi, 30) == pytest.approx(curvature(dom, z, xi, 30), abs=1e-10)


@SETTINGS
@given(log_t)
def test_counterexample_ratio_is_sqrt2(lt):
    rep = counterexample([lt], [1.0, math.sqrt(2), 1.8])
    assert abs(rep.ratio[0] - math.sqrt(2)) < 1e-12
    q = rep.log_quotient[0]
    assert q[0] < 0 < q[2] and abs(q[1]) < 1e-9
