import math

import numpy as np
import pytest

from flatbergman.kernel import (
    DiscAutomorphism,
    Dilation,
    TruncationError,
    Unitary,
    curvature,
    extremal,
    fuchs_check,
    kernel,
    kernel_jet,
    metric,
    monotonicity_check,
    product_closed_forms,
    transform_check,
)
from flatbergman.reinhardt import AnisoScaled, Ball, Disc, Egg, Scaled, product_domain

P = product_domain(1)


def disc_kernel(z):
    return 1.0 / (math.pi * (1 - abs(z) ** 2) ** 2)


def test_kernel_examples():
    assert kernel(Disc(), [0]) == pytest.approx(1 / math.pi, rel=1e-15)
    assert kernel(Disc(), [0.5]) == pytest.approx(16 / (9 * math.pi), rel=1e-12)
    for n in (1, 2, 3):
        assert kernel(product_domain(n), np.zeros(n + 1)) == pytest.approx(math.factorial(n) / math.pi ** (n + 1), rel=1e-13)


def test_disc_closed_form_off_origin():
    for z in (0.3, 0.2 + 0.4j, -0.5j):
        assert kernel(Disc(), [z]) == pytest.approx(disc_kernel(z), rel=1e-10)
        g = 2 / (1 - abs(z) ** 2) ** 2
        assert metric(Disc(), [z], [1]) == pytest.approx(math.sqrt(g), rel=1e-9)
        # constant curvature -1 for this normalization of the disc
        assert curvature(Disc(), [z], [1]) == pytest.approx(-1.0, abs=1e-8)


def test_metric_examples():
    assert metric(P, [0, 0], [1, 0]) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert metric(P, [0, 0], [0, 1]) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert metric(product_domain(2), [0, 0, 0], [0, 1, 1]) == pytest.approx(math.sqrt(6), rel=1e-12)
    assert metric(P, [0.1, 0.2], [0, 0]) == 0.0


def test_curvature_examples():
    assert curvature(P, [0, 0], [1, 0]) == pytest.approx(-1.0, abs=1e-10)
    assert curvature(P, [0, 0], [1, 1]) == pytest.approx(-0.5, abs=1e-10)
    z = [0.1 + 0.05j, -0.2j]
    xi = np.array([0.3 - 0.1j, 0.7 + 0.2j])
    h = curvature(P, z, xi)
    assert curvature(P, z, 3 * xi) == pytest.approx(h, abs=1e-10)
    assert curvature(P, z, (2 - 1j) * xi) == pytest.approx(h, abs=1e-10)


def test_closed_forms_against_engine():
    rng = np.random.default_rng(4)
    for n in (1, 2):
        Pn = product_domain(n)
        for _ in range(3):
            eta = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
            ref = product_closed_forms(n, eta)
            z = np.zeros(n + 1)
            assert metric(Pn, z, eta) == pytest.approx(ref.B, rel=1e-12)
            assert curvature(Pn, z, eta) == pytest.approx(ref.H, rel=1e-10)
            for j, val in enumerate((ref.I0, ref.I1, ref.I2)):
                assert extremal(Pn, z, eta, j).value == pytest.approx(val, rel=1e-10)


def test_series_convergence_in_T():
    pts = [(Disc(), [0.4]), (Ball(2), [0.3, 0.2j]), (P, [0.3, 0.2]), (Egg(2), [0.2, 0.1])]
    for dom, z in pts:
        xi = np.ones(dom.dim)
        a = kernel_jet(dom, z, 40)
        b = kernel_jet(dom, z, 80)
        assert abs(a.kappa - b.kappa) / b.kappa < 1e-8
        assert abs(a.metric_norm(xi) - b.metric_norm(xi)) / b.metric_norm(xi) < 1e-8
        assert abs(a.curvature(xi) - b.curvature(xi)) < 1e-8


def test_hermitian_and_curvature_symmetry():
    jet = kernel_jet(Egg(2), [0.2 + 0.1j, 0.15 - 0.05j], 60)
    assert np.allclose(jet.g, jet.g.conj().T, atol=1e-13)
    assert jet.min_eigenvalue > 0
    R = jet.curvature_tensor()
    assert np.allclose(R, R.transpose(0, 2, 1, 3), atol=1e-10)


def test_extremal_examples_and_monotone_in_T():
    z = [0, 0]
    e1 = [1, 0]
    assert extremal(P, z, None, 0).value == pytest.approx(math.pi**2, rel=1e-12)
    assert extremal(P, z, e1, 1).value == pytest.approx(math.pi**2 / 2, rel=1e-12)
    assert extremal(P, z, e1, 2).value == pytest.approx(math.pi**2 / 12, rel=1e-12)
    zz = [0.4, 0.3]
    vals = [extremal(P, zz, [1, 1], 2, T, tail_tol=math.inf).value for T in (10, 20, 40)]
    assert vals[0] >= vals[1] >= vals[2]
    errs = [abs(extremal(P, zz, None, 0, T, tail_tol=math.inf).value * kernel(P, zz, 80) - 1) for T in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_extremal_validation():
    with pytest.raises(ValueError):
        extremal(P, [0, 0], None, 1)
    with pytest.raises(ValueError):
        extremal(P, [0, 0], [1, 0], 3)


def test_truncation_refusal():
    with pytest.raises(TruncationError):
        kernel(Disc(), [0.999], 20)
    with pytest.raises(ValueError):
        kernel(Disc(), [1.2])


def test_fuchs_examples():
    res = fuchs_check(P, [0, 0], [1, 0])
    assert max(res) < 1e-10
    assert max(fuchs_check(Disc(), [0.3], [1])) < 1e-8
    assert max(fuchs_check(Egg(2), [0.2, 0.1], [1, 1])) < 1e-6


def test_transform_examples():
    assert max(transform_check(Dilation(0.5), Disc(), [0.1], [1])) < 1e-10
    assert extremal(Scaled(Disc(), 0.5), [0], None, 0).value == pytest.approx(math.pi / 4, rel=1e-14)
    auto = DiscAutomorphism(0.5)
    assert max(transform_check(auto, Disc(), [0.0], [1])) < 1e-8
    assert extremal(Disc(), [0.5], None, 0).value == pytest.approx(0.5625 * math.pi, rel=1e-10)
    th = 0.7
    U = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]], dtype=complex)
    assert max(transform_check(Unitary(U), Ball(2), [0.2, 0.1j], [1, 0.5])) < 1e-10
    with pytest.raises(ValueError):
        Unitary(U).image(P)
    with pytest.raises(ValueError):
        DiscAutomorphism(1.0)


def test_monotonicity_examples():
    assert all(monotonicity_check(Scaled(Disc(), 0.5), Disc(), [0], [1]))
    d = 0.1
    inner = Scaled(P, 1 - d)
    assert extremal(inner, [0, 0], None, 0).value / extremal(P, [0, 0], None, 0).value == pytest.approx((1 - d) ** 4, rel=1e-12)
    assert all(monotonicity_check(inner, P, [0, 0], [1, 1]))
    outer = AnisoScaled(P, 1.0, 1.2)
    assert extremal(outer, [0, 0], None, 0).value / extremal(P, [0, 0], None, 0).value == pytest.approx(1.44, rel=1e-12)
    assert all(monotonicity_check(P, outer, [0, 0], [1, 1]))
    with pytest.raises(ValueError):
        monotonicity_check(P, inner, [0, 0], [1, 1])
