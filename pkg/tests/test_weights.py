import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardykit._numerics import LogGrid, Tail
from hardykit.core import INF, DomainError, Scenario, derive_exponents
from hardykit.weights import (
    Profile,
    U_envelope,
    V_envelope,
    calU,
    dual_transform,
    lanczos_gamma,
    piecewise,
    power,
    primitive_U,
    shell_norm,
    sphere_area,
    sup_product,
    tabulated,
    tail_norm_V,
)


def test_primitive_U_examples():
    assert primitive_U(power(1, 0), 5.0) == pytest.approx(5.0, rel=1e-14)
    assert primitive_U(power(1, 3), 2.0) == pytest.approx(4.0, rel=1e-14)
    assert primitive_U(power(1, 3), 2.0, method="quad") == pytest.approx(4.0, rel=1e-10)
    assert primitive_U(power(1, -1), 0.3) == INF
    assert primitive_U(power(1, -1), 7.0, method="quad") == INF


def test_tail_norm_examples():
    v = power(1, 3)
    assert tail_norm_V(v, 2, 2.0) == pytest.approx(0.5, rel=1e-14)
    assert tail_norm_V(v, 2, 2.0, method="quad") == pytest.approx(0.5, rel=1e-10)
    assert tail_norm_V(power(1, 0), 2, 1.0) == INF
    assert tail_norm_V(power(1, 0), 2, 1.0, method="quad") == INF


def test_tail_norm_theta_one_is_ess_sup():
    v = piecewise([1.0, 3.0], [1.0, 4.0, 1.0], [0.0, 0.0, 2.0])
    # 1/v = 1 on (0,1), 1/4 on (1,3), t^-2 beyond
    assert tail_norm_V(v, 1, 0.5) == pytest.approx(1.0)
    assert tail_norm_V(v, 1, 1.5) == pytest.approx(0.25)
    assert tail_norm_V(v, 1, 2.5) == pytest.approx(0.25)
    assert tail_norm_V(v, 1, 4.0) == pytest.approx(1.0 / 16.0)


def test_tail_norm_theta_inf_is_l1():
    # ||1/v||_1 over |x| > t for v = |x|^2 in R^1: 2/t
    assert tail_norm_V(power(1, 2), INF, 4.0) == pytest.approx(0.5)


def test_shell_norm_matches_closed_form():
    assert shell_norm(power(1, 3), 2, 1.0, 2.0) == pytest.approx(math.sqrt(0.75), rel=1e-14)
    assert shell_norm(power(1, 3), 2, 1.0, 2.0, method="quad") == pytest.approx(math.sqrt(0.75), rel=1e-10)


def test_radial_reduction_in_higher_dimension():
    # n = 3, v = |x|^5, theta = 2: int_{|x|>t} |x|^-5 dx = 4 pi t^-2 / 2
    v = power(1, 5, dim=3)
    assert tail_norm_V(v, 2, 2.0) ** 2 == pytest.approx(4 * math.pi / 2 / 4)


@pytest.mark.parametrize("x,ref", [(0.5, math.sqrt(math.pi)), (1.0, 1.0), (5.0, 24.0),
                                   (7.5, math.gamma(7.5)), (-0.5, -2 * math.sqrt(math.pi))])
def test_lanczos_gamma(x, ref):
    assert lanczos_gamma(x) == pytest.approx(ref, rel=1e-12)


def test_lanczos_gamma_poles():
    assert lanczos_gamma(0.0) == INF
    assert lanczos_gamma(-2.0) == INF


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    with pytest.raises(DomainError):
        sphere_area(0)


def test_calU_examples():
    U = U_envelope(power(1, 0))
    assert calU(2.0, 2.0, U) == pytest.approx(0.5)
    assert calU(1.0, 0.0, U) == pytest.approx(1.0)
    assert calU(1.0, 3.0, U) == pytest.approx(0.25)


def test_calU_quasiconcave_in_x():
    U = U_envelope(power(1, 1.5))
    x = np.geomspace(1e-3, 1e3, 400)
    vals = calU(x, 2.0, U)
    assert np.all(np.diff(vals) >= 0)
    assert np.all(np.diff(vals / U(x)) <= 1e-15)


def test_envelopes_monotone():
    grid = LogGrid()
    U = U_envelope(piecewise([1.0], [1.0, 2.0], [0.5, -0.5]))
    V = V_envelope(piecewise([0.5, 4.0], [1.0, 1.0, 1.0], [1.0, 3.0, 2.5]), 2.0)
    assert np.all(np.diff(U(grid.t)) >= 0)
    assert np.all(np.diff(V(grid.t)) <= 0)


def test_quad_matches_closed_form_on_powers():
    grid = LogGrid()
    u = piecewise([1.0, 10.0], [1.0, 1.0, 10.0], [2.0, 0.5, -0.5])
    Uc, Uq = U_envelope(u, "closed"), U_envelope(u, "quad", grid)
    t = grid.t[::25]  # sampled envelopes are exact at grid points
    np.testing.assert_allclose(Uq(t), Uc(t), rtol=1e-10)
    v = piecewise([2.0], [1.0, 0.5], [1.5, 3.0])
    Vc, Vq = V_envelope(v, 3.0, "closed"), V_envelope(v, 3.0, "quad", grid)
    np.testing.assert_allclose(Vq(grid.t[::50]), Vc(grid.t[::50]), rtol=1e-10)


def test_tabulated_weight_roundtrip():
    r = np.geomspace(0.1, 10.0, 9)
    w = tabulated(r, r ** 2, 2.0, 2.0)
    t = np.geomspace(1e-3, 1e3, 21)
    np.testing.assert_allclose(w(t), t ** 2, rtol=1e-12)
    with pytest.raises(DomainError):
        tabulated([1.0], [1.0], 0, 0)
    with pytest.raises(DomainError):
        tabulated([1.0, 2.0], [1.0, -1.0], 0, 0)


def test_dual_transform_power_exponents():
    ex = derive_exponents(2, 3, 2, 2)
    sc = Scenario(ex, power(1, 1.5), power(1, 0.5, 2), power(1, 4, 2), form="ball")
    d = dual_transform(sc)
    assert d.form == "dual"
    assert d.u.alphas[0] == pytest.approx(-1.5 - 2)
    assert d.v1.alphas[0] == pytest.approx(-0.5 - 2 * 2 * (1 - 3))
    assert d.v2.alphas[0] == pytest.approx(-4 - 2 * 2 * (1 - 2))


def test_dual_transform_involution_e1():
    from conftest import e1

    sc = e1(form="ball")
    back = dual_transform(dual_transform(sc))
    t = np.geomspace(1e-3, 1e3, 61)
    for a, b in ((sc.u, back.u), (sc.v1, back.v1), (sc.v2, back.v2)):
        np.testing.assert_allclose(b(t), a(t), rtol=1e-12)
    pw = dual_transform(dual_transform(sc, "pointwise"), "pointwise")
    np.testing.assert_allclose(pw.u(t), sc.u(t), rtol=1e-12)


def test_sup_product_examples():
    F = Profile(lambda t: 1.0 / t, Tail(-1.0), Tail(-1.0))
    G = Profile(lambda t: t, Tail(1.0), Tail(1.0))
    assert sup_product(F, G, direction=-1) == pytest.approx(1.0)
    zero = Profile(lambda t: np.zeros_like(t), Tail.zero(), Tail.zero())
    assert sup_product(zero, G, direction=-1) == 0.0
    F2 = Profile(lambda t: np.minimum(1.0, 1.0 / t), Tail(0.0), Tail(-1.0))
    assert sup_product(F2, G, direction=-1) == pytest.approx(1.0)


@given(x=st.floats(1e-4, 1e4), t=st.floats(1e-4, 1e4), a=st.floats(-0.9, 4.0))
def test_calU_symmetry_exact(x, t, a):
    U = U_envelope(power(1, a))
    assert calU(x, t, U) + calU(t, x, U) == 1.0
