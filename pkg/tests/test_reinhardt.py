import math

import numpy as np
import pytest
from scipy import integrate

from flatbergman.reinhardt import (
    AnisoScaled,
    Ball,
    Disc,
    Egg,
    Polydisc,
    Product,
    Scaled,
    inclusion_certified,
    log_moments,
    moment,
    multi_indices,
    parse_domain,
    product_domain,
)


def test_disc_moments():
    for k in range(6):
        assert moment(Disc(), k) == pytest.approx(math.pi / (k + 1), rel=1e-15)


def test_ball_and_product_moments():
    assert moment(Ball(2), (1, 0)) == pytest.approx(math.pi**2 / 6, rel=1e-14)
    assert moment(Ball(2), (0, 0)) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    assert moment(product_domain(1), (1, 0)) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    assert moment(Polydisc(2), (2, 1)) == pytest.approx(math.pi**2 / 6, rel=1e-14)


def egg_moment_quadrature(m, a, b):
    # radial integral over r1^2 + r2^(2m) < 1, polar in each factor
    def inner(r1):
        top = (1 - r1 * r1) ** (1 / (2 * m))
        return r1 ** (2 * a + 1) * top ** (2 * b + 2) / (2 * b + 2)

    val, _ = integrate.quad(inner, 0, 1, epsabs=0, epsrel=1e-13)
    return 4 * math.pi**2 * val


@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (0, 1), (2, 3)])
def test_egg_moments_match_quadrature(a, b):
    assert moment(Egg(2), (a, b)) == pytest.approx(egg_moment_quadrature(2, a, b), rel=1e-11)


def test_scaled_moments():
    base = product_domain(1)
    assert moment(Scaled(base, 0.5), (1, 2)) == pytest.approx(0.5 ** (2 * 3 + 4) * moment(base, (1, 2)), rel=1e-14)
    an = AnisoScaled(base, 1.0, 2.0)
    assert moment(an, (1, 2)) == pytest.approx(2.0 ** (2 * 2 + 2) * moment(base, (1, 2)), rel=1e-14)


def test_multi_indices_ordering():
    idx = multi_indices(2, 3)
    assert len(idx) == 10
    assert np.all(np.diff(idx.sum(axis=1)) >= 0)
    lm = log_moments(Ball(2), 3)
    assert lm.shape == (10,)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("disc", Disc()),
        ("ball:2", Ball(2)),
        ("polydisc:3", Polydisc(3)),
        ("prod:disc,ball:1", Product((Disc(), Ball(1)))),
        ("egg:2", Egg(2)),
        ("scale:0.5:disc", Scaled(Disc(), 0.5)),
        ("anisoscale:1,2:prod:disc,ball:1", AnisoScaled(Product((Disc(), Ball(1))), 1.0, 2.0)),
    ],
)
def test_parse_roundtrip(text, expected):
    dom = parse_domain(text)
    assert dom == expected
    assert parse_domain(dom.spec) == dom


@pytest.mark.parametrize("bad", ["", "cube", "ball:x", "scale::disc", "prod:"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_domain(bad)


def test_contains_and_volume():
    assert Disc().contains([0.99]) and not Disc().contains([1.0])
    assert Ball(2).volume() == pytest.approx(math.pi**2 / 2)
    assert Egg(2).contains([0.9, 0.4]) and not Egg(2).contains([0.9, 0.7])


def test_inclusion_certified():
    P = product_domain(1)
    assert inclusion_certified(Scaled(P, 0.9), P)
    assert inclusion_certified(P, AnisoScaled(P, 1.0, 1.2))
    assert not inclusion_certified(AnisoScaled(P, 1.0, 1.2), P)
    assert inclusion_certified(Scaled(Disc(), 0.5), Disc())
