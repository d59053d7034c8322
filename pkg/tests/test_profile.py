import math

import mpmath
import pytest

from flatbergman.logscalar import LogScalar
from flatbergman.profile import (
    FlatProfile,
    RootFindingError,
    find_root,
    inverse_profile,
    parse_profile,
    profile_derivative,
    profile_eval,
    scaling_dichotomy,
)


def test_flat_side_is_zero():
    for m in (1, 2, 3):
        p = FlatProfile(m)
        for x in (-0.3, 0.0, -5.0):
            assert profile_eval(p, x).is_zero
            for k in range(5):
                assert profile_derivative(p, x, k).is_zero


def test_values():
    assert float(profile_eval(FlatProfile(1), 0.25)) == pytest.approx(math.exp(-4.0), rel=1e-15)
    assert profile_eval(FlatProfile(2), 0.1).log == pytest.approx(-100.0, rel=1e-14)


def test_log_evaluation_agrees_with_direct():
    for m in (1, 2):
        p = FlatProfile(m)
        for x in (0.05, 0.2, 0.5, 1.0, 3.0):
            direct = math.exp(-1.0 / x**m)
            if 1e-300 <= direct <= 1e300:
                assert float(p(x)) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_against_high_precision(m, order):
    mpmath.mp.dps = 40
    f = lambda x: mpmath.exp(-1 / x**m)
    p = FlatProfile(m)
    for x in (0.3, 0.5, 0.9, 1.7):
        ref = float(mpmath.diff(f, mpmath.mpf(x), order))
        got = float(p.derivative(x, order))
        assert got == pytest.approx(ref, rel=1e-11, abs=1e-13)


def test_first_derivative_example_and_finite_difference():
    p = FlatProfile(1)
    got = float(profile_derivative(p, 0.5, 1))
    assert got == pytest.approx(4.0 * math.exp(-2.0), rel=1e-14)
    h = 1e-6
    fd = (float(p(0.5 + h)) - float(p(0.5 - h))) / (2 * h)
    assert got == pytest.approx(fd, rel=1e-6)
    # x = 1/2 is the inflection point for m = 1, so compare the second derivative just inside
    x = 0.4
    fd2 = (float(p(x + 1e-4)) - 2 * float(p(x)) + float(p(x - 1e-4))) / 1e-8
    assert float(profile_derivative(p, x, 2)) > 0
    assert float(profile_derivative(p, x, 2)) == pytest.approx(fd2, rel=1e-5)
    assert abs(float(profile_derivative(p, 0.5, 2))) < 1e-15


def test_second_derivative_sign_changes_at_convex_limit():
    # phi'' = phi x^-(2m+2) m (m - (m+1) x^m), positive exactly below (m/(m+1))^(1/m)
    for m in (1, 2, 3):
        p = FlatProfile(m)
        xc = p.convex_limit
        for k in range(1, 200):
            x = xc * k / 200
            assert p.derivative(x, 2).sign > 0
        assert p.derivative(xc * 1.01, 2).sign < 0


def test_increasing_on_grid():
    p = FlatProfile(2)
    xs = [0.01 * k for k in range(1, 400)]
    logs = [p.log_value(x) for x in xs]
    assert all(b > a for a, b in zip(logs, logs[1:]))


def test_derivative_order_cap():
    with pytest.raises(ValueError):
        FlatProfile(1).derivative(0.5, 5)


def test_scaling_dichotomy():
    p = FlatProfile(1)
    assert scaling_dichotomy(p, 1.0, 0.37).log == 0.0
    assert scaling_dichotomy(p, 0.5, 0.01).log == pytest.approx(-100.0, rel=1e-14)
    assert scaling_dichotomy(p, 2.0, 0.01).log == pytest.approx(50.0, rel=1e-14)
    rs = [10.0 ** (-k / 4) for k in range(4, 40)]
    lo = [scaling_dichotomy(p, 0.7, r).log for r in rs]
    hi = [scaling_dichotomy(p, 1.3, r).log for r in rs]
    assert all(b < a for a, b in zip(lo, lo[1:]))
    assert all(b > a for a, b in zip(hi, hi[1:]))


def test_inverse_profile():
    p1, p2 = FlatProfile(1), FlatProfile(2)
    assert inverse_profile(p1, LogScalar(1, -100.0)) == pytest.approx(0.01, rel=1e-15)
    assert inverse_profile(p1, LogScalar(1, -1.0)) == pytest.approx(1.0, rel=1e-15)
    # m = 2: x = (1/10000)^(1/2); confirmed by evaluating forward
    x = inverse_profile(p2, LogScalar(1, -10000.0))
    assert x == pytest.approx(0.01, rel=1e-14)
    assert p2(x).log == pytest.approx(-10000.0, rel=1e-12)
    with pytest.raises(ValueError):
        inverse_profile(p1, LogScalar(1, 0.0))
    with pytest.raises(ValueError):
        inverse_profile(p1, LogScalar.zero())


def test_inverse_roundtrip():
    for m in (1, 2, 3):
        p = FlatProfile(m)
        for x in (1e-3, 0.05, 0.3, 0.99):
            assert p.inverse(p(x)) == pytest.approx(x, rel=1e-12)


def test_find_root():
    assert find_root(lambda x: x - 1.0, 0.0, 2.0) == pytest.approx(1.0, abs=1e-14)
    assert find_root(lambda x: x * x - 2.0, 1.0, 2.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert find_root(lambda x: x * x - 2.0, 1.0, 2.0, fprime=lambda x: 2 * x) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    # psi-coordinate solve of phi(x) = exp(-100)
    x = find_root(lambda x: x - 1.0 / 100.0, 0.0, 1.0)
    assert x == pytest.approx(inverse_profile(FlatProfile(1), LogScalar(1, -100.0)), rel=1e-14)
    with pytest.raises(RootFindingError):
        find_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_parse_profile():
    assert parse_profile("exp:2") == FlatProfile(2)
    for bad in ("exp", "gauss:1", "exp:x", "exp:0"):
        with pytest.raises(ValueError):
            parse_profile(bad)
