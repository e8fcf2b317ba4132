import math

import numpy as np
import pytest

from hardykit.core import INF, DomainError
from hardykit.hardy_core import LinearHardyProblem, certify, dual_hardy_norm, shell_ratio
from hardykit.weights import piecewise, power


def test_balanced_power_example():
    prob = LinearHardyProblem(power(1, 1), power(1, 3), 2.0, 2.0)
    assert dual_hardy_norm(prob) == pytest.approx(2 ** -0.5, rel=1e-12)
    assert dual_hardy_norm(prob, method="quad") == pytest.approx(2 ** -0.5, rel=1e-9)


def test_divergent_and_zero():
    # v^(1-p') = t^-1 is not integrable at infinity
    assert dual_hardy_norm(LinearHardyProblem(power(1, 1), power(1, 1), 2.0, 2.0)) == INF
    assert dual_hardy_norm(LinearHardyProblem(power(0, 0), power(1, 3), 2.0, 2.0)) == 0.0


def test_other_branches():
    # q < p with r = 2 and u supported on [1, 2)
    u = piecewise([1.0, 2.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0])
    val = dual_hardy_norm(LinearHardyProblem(u, power(1, 5), 4.0, 4.0 / 3.0))
    assert 0 < val < INF
    # q = inf: sup_t u(t) V_2(t) = sup t * t^-1
    assert dual_hardy_norm(LinearHardyProblem(power(1, 1), power(1, 3), 2.0, INF)) == pytest.approx(1.0)
    # p = inf: int u V_inf^q with V_inf(t) = int_t^inf 2/s^3 = t^-2 (two-sided ball in R^1)
    uc = piecewise([1.0], [0.0, 1.0], [0.0, 0.0])
    val = dual_hardy_norm(LinearHardyProblem(uc, power(1, 3), INF, 1.0))
    assert val == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("cu,cv", [(3.0, 1.0), (1.0, 5.0), (0.25, 0.5)])
def test_homogeneity(cu, cv):
    base = dual_hardy_norm(LinearHardyProblem(power(1, 1), power(1, 3), 2.0, 3.0))
    val = dual_hardy_norm(LinearHardyProblem(power(cu, 1), power(cv, 3), 2.0, 3.0))
    assert val == pytest.approx(base * cu ** (1 / 3) * cv ** -0.5, rel=1e-12)


def test_restricted_problem():
    full = LinearHardyProblem(power(1, 1), power(1, 3), 2.0, 2.0)
    part = LinearHardyProblem(power(1, 1), power(1, 3), 2.0, 2.0, interval=(1.0, 2.0))
    assert 0 < dual_hardy_norm(part) <= dual_hardy_norm(full) * (1 + 1e-12)
    with pytest.raises(DomainError):
        LinearHardyProblem(power(1, 1), power(1, 3), 2.0, 2.0, interval=(2.0, 1.0))


@pytest.mark.parametrize("u,v,p,q", [
    (power(1, 1), power(1, 3), 2.0, 2.0),
    (power(1, 0.5), power(1, 2), 2.0, 3.0),
    (piecewise([1.0], [1.0, 1.0], [2.0, -0.5]), power(1, 2.5), 3.0, 3.0),
])
def test_shell_certification(u, v, p, q):
    prob = LinearHardyProblem(u, v, p, q)
    res = certify(prob, np.geomspace(1e-3, 1e3, 25))
    assert res["over"] <= 4.0
    assert res["under"] <= 4.0


def test_shell_ratio_bounds():
    prob = LinearHardyProblem(power(1, 1), power(1, 3), 2.0, 2.0)
    assert shell_ratio(prob, 1.0, 1.0 + 1e-9) <= dual_hardy_norm(prob) * 4
    with pytest.raises(DomainError):
        shell_ratio(LinearHardyProblem(power(1, 1), power(1, 3), 2.0, INF), 1.0, 2.0)
