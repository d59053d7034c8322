import math

import pytest

from flatbergman.logscalar import LogScalar, RangeMarker


def test_zero_normalization():
    z = LogScalar(1, -math.inf)
    assert z.sign == 0 and z.is_zero
    assert LogScalar.from_float(0.0) == LogScalar.zero()


def test_nan_rejected():
    with pytest.raises(ValueError):
        LogScalar(1, math.nan)
    with pytest.raises(ValueError):
        LogScalar.from_float(math.nan)


def test_products_are_exact_in_log_field():
    t = LogScalar(1, -2000.0)
    assert (t * t).log == -4000.0
    assert (t / t).log == 0.0
    assert (t**0.5).log == -1000.0


def test_materialize_markers():
    assert LogScalar(1, -2000.0).materialize() is RangeMarker.UNDERFLOW
    assert LogScalar(1, 2000.0).materialize() is RangeMarker.OVERFLOW
    assert LogScalar(-1, math.log(3.0)).materialize() == pytest.approx(-3.0, rel=1e-15)


def test_addition_matches_floats():
    for a, b in [(1.5, 2.25), (-3.0, 1.0), (1e-300, 1e-301), (2.0, -2.0), (0.0, -4.0)]:
        got = float(LogScalar.from_float(a) + LogScalar.from_float(b))
        assert got == pytest.approx(a + b, rel=1e-14, abs=0.0)


def test_addition_far_below_double_range():
    a = LogScalar(1, -5000.0)
    b = LogScalar(1, -5000.0 + math.log(3.0))
    s = a + b
    assert s.log == pytest.approx(-5000.0 + math.log(4.0), abs=1e-12)
    d = b - a
    assert d.log == pytest.approx(-5000.0 + math.log(2.0), abs=1e-12)


def test_ordering_across_signs():
    vals = [LogScalar(-1, 10.0), LogScalar(-1, -10.0), LogScalar.zero(), LogScalar(1, -3000.0), LogScalar(1, 5.0)]
    assert sorted(reversed(vals)) == vals
    assert LogScalar(1, -3000.0) > 0
    assert LogScalar(-1, -3000.0) < 0


def test_format():
    assert LogScalar(1, -2000.0).format() == "exp(-2000)"
    assert LogScalar(-1, 3000.5).format() == "-exp(3000.5)"
    assert LogScalar.from_float(0.25).format() == "0.25"


def test_fractional_power_of_negative_rejected():
    with pytest.raises(ValueError):
        LogScalar(-1, 0.0) ** 0.5
    assert (LogScalar(-1, 1.0) ** 3).sign == -1
