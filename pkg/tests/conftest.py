import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from hardykit import Scenario, derive_exponents, piecewise, power, with_density

settings.register_profile(
    "hardykit",
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("hardykit")

sys.path.insert(0, os.path.dirname(__file__))

INF = float("inf")


def e1(**kw) -> Scenario:
    """n=1, u=t^3, v1=v2=|x|^3, p1=p2=q=2."""
    return Scenario(derive_exponents(1, 2, 2, 2), power(1, 3), power(1, 3), power(1, 3), **kw)


def e3() -> Scenario:
    """Iterated p=q=theta=1, U(t)=t, dmu=t^-1/2 dt, V_1(t)=min(1, 1/t)."""
    ex = derive_exponents(1, 1, 1, 1, 1, 1)
    v = piecewise([1.0], [1.0, 1.0], [0.0, 1.0])
    return Scenario(ex, power(1, 0), v, mu=with_density(power(1, -0.5)), mode="iterated", name="E3")


@pytest.fixture
def scenario_e1():
    return e1(name="E1")


@pytest.fixture
def scenario_e3():
    return e3()


E1_TEXT = """\
name E1
mode bilinear
n 1
p1 2
p2 2
q 2
u  power 1 3
v1 power 1 3
v2 power 1 3
"""


@pytest.fixture
def e1_file(tmp_path):
    path = tmp_path / "e1.txt"
    path.write_text(E1_TEXT)
    return path


# acceptance summary lines, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
