import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardykit.core import (
    CASE_TAGS,
    INF,
    DomainError,
    ExtReal,
    Scenario,
    classify_case,
    classify_iterated,
    conjugate,
    derive_exponents,
    ext_div,
    ext_mul,
    ext_pow,
    recip,
)
from hardykit.weights import power


def test_extreal_conventions():
    zero, inf = ExtReal(0.0), ExtReal(INF)
    assert zero * inf == 0.0
    assert inf * zero == 0.0
    assert inf / inf == 0.0
    assert zero / zero == 0.0
    assert ExtReal(3.0) / zero == INF
    assert (inf + ExtReal(2.0)).is_inf
    assert max(inf, ExtReal(5.0)) == INF


def test_extreal_rejects_negative_and_nan():
    with pytest.raises(DomainError):
        ExtReal(-1.0)
    with pytest.raises(DomainError):
        ExtReal(float("nan"))


def test_ext_helpers_on_arrays():
    assert list(ext_mul([0.0, 2.0, INF], [INF, 3.0, 0.0])) == [0.0, 6.0, 0.0]
    assert list(ext_div([0.0, INF, 1.0], [0.0, INF, 0.0])) == [0.0, 0.0, INF]
    assert ext_pow(0.0, -1.0) == INF
    assert ext_pow(INF, -2.0) == 0.0
    assert ext_pow(INF, 0.0) == 1.0


def test_recip_and_conjugate():
    assert recip(INF) == 0.0
    assert recip(4.0) == 0.25
    assert conjugate(1.0) == INF
    assert conjugate(INF) == 1.0
    assert conjugate(3.0) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        conjugate(0.5)


def test_derive_r1():
    ex = derive_exponents(1, 4, 2, 2, 4)
    assert ex.r1 == pytest.approx(4.0)


def test_derive_r1_absent_at_boundary():
    assert derive_exponents(1, 2, 2, 2, 2).r1 is None


def test_derive_rho_with_infinite_theta():
    ex = derive_exponents(2, INF, 2, 1, INF)
    assert ex.rho == pytest.approx(1.0)


def test_derive_rejects_bad_input():
    for args in [(1, 2, 2, 0), (1, 2, 2, -1), (1, 0.5, 2, 2), (1, 2, 0.9, 2), (0, 2, 2, 2)]:
        with pytest.raises(DomainError):
            derive_exponents(*args)


def test_small_q_allowed():
    ex = derive_exponents(1, 2, 2, 0.5)
    assert ex.r1 == pytest.approx(1.0 / (2.0 - 0.5))


def test_l_exponent():
    ex = derive_exponents(1, 4, 8, 2)
    assert ex.r1 == pytest.approx(4.0)
    assert ex.l == pytest.approx(8.0)
    assert derive_exponents(1, 4, 4, 2).l is None


@pytest.mark.parametrize("p1,p2,q,tag", [
    (2, 2, 3, "T52a"),
    (4, 2, 2, "T53i"),
    (INF, 2, 1, "T54ii"),
    (2, 4, 2, "T52b"),
    (2, INF, 2, "T52c"),
    (4, 4, 2, "T53ii"),
    (4, 8, 2, "T53iii"),
    (4, INF, 2, "T53iv"),
    (INF, 1, 1, "T54i"),
    (INF, INF, 1, "T54iii"),
    (2, 2, INF, "T55a"),
    (2, INF, INF, "T55b"),
    (INF, INF, INF, "T55c"),
])
def test_classify_case(p1, p2, q, tag):
    assert classify_case(derive_exponents(1, p1, p2, q)) == tag


def test_boundary_ties():
    # p1 = q belongs to T52, p2 = q to (a), p2 = r1 to (ii)
    assert classify_case(derive_exponents(1, 3, 3, 3)) == "T52a"
    ex = derive_exponents(1, 4, 4, 2)
    assert ex.r1 == pytest.approx(4.0)
    assert classify_case(ex) == "T53ii"


_exp = st.one_of(st.floats(1.0, 12.0), st.just(INF))


@given(p1=_exp, p2=_exp, q=st.one_of(st.floats(0.2, 12.0), st.just(INF)))
def test_classification_is_total(p1, p2, q):
    assert classify_case(derive_exponents(1, p1, p2, q)) in CASE_TAGS


@given(p1=_exp, p2=_exp, q=st.one_of(st.floats(0.2, 12.0), st.just(INF)))
def test_swap_symmetry(p1, p2, q):
    a = derive_exponents(1, p1, p2, q)
    b = derive_exponents(1, p2, p1, q)
    assert a.r1 == b.r2 and a.r2 == b.r1


@given(p=st.floats(1.0, 50.0))
def test_conjugate_identity(p):
    assert recip(p) + recip(conjugate(p)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p,q,theta,tag", [
    (2, 2, 1, "I1"),
    (2, 1, 2, "I2"),
    (1, 2, 2, "I3"),
    (1, 1, 2, "I4"),
    (1, 1, INF, "I5"),
])
def test_classify_iterated(p, q, theta, tag):
    ex = derive_exponents(1, max(theta, 1), max(theta, 1), q, theta, p)
    assert classify_iterated(ex) == tag


def test_iterated_needs_finite_p_q():
    ex = derive_exponents(1, 2, 2, INF, 2, 1)
    with pytest.raises(DomainError):
        classify_iterated(ex)


def test_scenario_validation():
    ex = derive_exponents(1, 2, 2, 2)
    with pytest.raises(DomainError):
        Scenario(ex, power(1, 3), power(1, 3))
    with pytest.raises(DomainError):
        Scenario(ex, power(1, 3), power(1, 3), power(1, 3), form="sphere")
    with pytest.raises(DomainError):
        Scenario(ex, power(1, 3), power(1, 3), mode="iterated")
    sc = Scenario(ex, power(1, 3), power(1, 3), power(1, 3))
    assert sc.case == "T52a"
    assert math.isinf(sc.exponents.p1c) is False
