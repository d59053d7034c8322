import math

import numpy as np
import pytest

from flatbergman.asymptotics import (
    SCHEDULE,
    counterexample,
    curvature_ratio_bounds,
    kernel_ratio_bounds,
    lemma31_series,
    metric_ratio_bounds,
    normalization_identity,
    parallel_map,
)
from flatbergman.geometry import ConeStream, ModelDomain, geometric_log_t_grid
from flatbergman.profile import FlatProfile

GRID = [-300.0, -600.0, -1200.0]
TARGET = 1 / (4 * math.pi**2)


def test_lemma31_normal_stream(model, normal_stream):
    table = lemma31_series(model, normal_stream, [-100.0, -500.0])
    for row in table.rows:
        assert row.log_phi_over_d == -math.inf
        assert row.log_p2_over_dstar == -math.inf
        assert row.ratio2[1.0] == pytest.approx(0.5, rel=1e-14)
        assert row.ratio1[1.0] == pytest.approx(2 ** -0.5, rel=1e-14)
    assert all(all(v) for v in table.liminf_ok().values())


def test_lemma31_tilted_stream(model, tilted_stream):
    table = lemma31_series(model, tilted_stream)
    assert len(table.rows) == 40
    assert all(table.below(-300.0).values())
    assert all(table.monotone(-300.0).values())
    assert all(all(v) for v in table.liminf_ok().values())
    assert len(table.records()[0]) == len(table.columns())


def test_lemma31_parallel_matches_serial(model, tilted_stream):
    grid = geometric_log_t_grid(-50, -2000, 6)
    a = lemma31_series(model, tilted_stream, grid, jobs=1)
    b = lemma31_series(model, tilted_stream, grid, jobs=2)
    assert a.records() == b.records()


def test_parallel_map_order():
    assert parallel_map(abs, [-3, 2, -1], jobs=2) == [3, 2, 1]


def test_kernel_bracket_examples(model, normal_stream):
    s = kernel_ratio_bounds(model, normal_stream, 1.0, 0.1, GRID, T=20)
    assert s.target == pytest.approx(TARGET, rel=1e-15)
    for r in s.records:
        assert r.upper / s.target == pytest.approx(1 / 0.9**4, rel=1e-12)
        assert r.lower / s.target == pytest.approx(0.25, rel=1e-12)
        assert r.lower <= r.center <= r.upper


def test_kernel_bracket_closed_form_width(model, tilted_stream):
    eps, delta = 0.5, 0.1
    s = kernel_ratio_bounds(model, tilted_stream, eps, delta, GRID, T=20)
    for r in s.records:
        assert r.upper / r.lower == pytest.approx((r.d2 / r.dstar) ** 2 / (1 - delta) ** 4, rel=1e-10)


def test_kernel_brackets_nest_along_schedule(model, normal_stream):
    series = [kernel_ratio_bounds(model, normal_stream, e, d, [-1000.0], T=20) for e, d in SCHEDULE]
    for loose, tight in zip(series, series[1:]):
        a, b = loose.records[0], tight.records[0]
        assert a.lower <= b.lower * (1 + 1e-10)
        assert b.upper <= a.upper * (1 + 1e-10)
    assert all(s.contains_target() for s in series)


def test_metric_and_curvature_brackets(model, normal_stream):
    for xi in ([1, 0], [0, 1], [1, 1]):
        m = metric_ratio_bounds(model, normal_stream, xi, 0.1, 0.01, [-400.0, -800.0], T=20)
        c = curvature_ratio_bounds(model, normal_stream, xi, 0.1, 0.01, [-400.0, -800.0], T=20)
        assert m.contains_target() and c.contains_target()
        for r in m.records + c.records:
            assert r.lower <= r.upper


def test_uncertified_rows_are_tagged(model, normal_stream):
    s = kernel_ratio_bounds(model, normal_stream, 0.1, 0.01, [-50.0, -1000.0], T=20)
    assert [r.certified for r in s.records] == [False, True]
    assert s.threshold_log_t() is None or s.threshold_log_t() <= -1000.0
    assert s.rows()[0][-1] == "non-certified"


def test_ratio_validation(model, normal_stream):
    with pytest.raises(ValueError):
        kernel_ratio_bounds(model, normal_stream, 0.5, 0.0, GRID)
    with pytest.raises(ValueError):
        metric_ratio_bounds(model, normal_stream, [1, 0, 0], 0.5, 0.1, GRID)


def test_normalization_identity():
    for n in (1, 2, 3, 4):
        lhs, rhs = normalization_identity(n)
        assert lhs == pytest.approx(rhs, rel=1e-15)


def test_counterexample_examples():
    rep = counterexample([-100.0], [1.0, 1.2, math.sqrt(2), 1.6])
    assert rep.dstar[0] == pytest.approx(0.1, rel=1e-14)
    assert rep.d1[0] == pytest.approx(math.sqrt(2) * 0.1, rel=1e-14)
    assert rep.ratio[0] == pytest.approx(math.sqrt(2), rel=1e-12)
    assert rep.log_quotient[0, 1] == pytest.approx(-100 * 0.56 / 2.88, rel=1e-12)
    assert rep.log_quotient[0, 3] == pytest.approx(100 * 0.56 / 5.12, rel=1e-12)
    assert abs(rep.log_quotient[0, 2]) < 1e-9
    assert float(rep.quotient(0, 1)) == pytest.approx(3.6e-9, rel=0.02)


def test_counterexample_dichotomy():
    rep = counterexample()
    assert np.all(np.abs(rep.ratio - math.sqrt(2)) < 1e-12)
    assert np.all(np.diff(rep.log_quotient, axis=1) > 0)
    lo, hi = rep.crossing(0)
    assert lo <= math.sqrt(2) <= hi
    u = rep.u_grid
    below = u < math.sqrt(2) - 1e-9
    above = u > math.sqrt(2) + 1e-9
    # further from the boundary the quotient is larger below the threshold and smaller above it
    assert np.all(np.diff(rep.log_quotient[:, below], axis=0) < 0)
    assert np.all(np.diff(rep.log_quotient[:, above], axis=0) > 0)
    assert np.allclose(rep.inverse_check, rep.dstar, rtol=1e-12)


def test_counterexample_requires_m1():
    with pytest.raises(ValueError):
        counterexample([-100.0], profile=FlatProfile(2))
