import os
from fractions import Fraction

import pytest

from services.berk_points import BerkPoint
from services.ext_field import FieldSpec
from services.julia_struct import MarkovState, MarkovSystem, build_partition
from services.map_action import RationalMap

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


def zeta(field, center, q) -> BerkPoint:
    """zeta(center, p^-q) with an integer/rational center or an ExtElem."""
    if not hasattr(center, "coeffs"):
        center = field.const(Fraction(center))
    return BerkPoint.at(center, Fraction(q))


def sextic_map(field, a=3, b=-1) -> RationalMap:
    a = a if hasattr(a, "coeffs") else field.const(a)
    b = b if hasattr(b, "coeffs") else field.const(b)
    return RationalMap.sextic(a, b)


@pytest.fixture
def K6():
    return FieldSpec(3, 6)


@pytest.fixture
def phi(K6):
    return sextic_map(K6)


@pytest.fixture
def gauss(K6):
    return zeta(K6, 0, 0)


@pytest.fixture
def sextic_system(phi):
    return build_partition(phi)


@pytest.fixture
def self_loop():
    return MarkovSystem(1, [MarkovState("A", ("A",), 1)])


@pytest.fixture
def full_two_shift():
    return MarkovSystem(2, [MarkovState("A", ("A", "B"), 1), MarkovState("B", ("A", "B"), 1)])


@pytest.fixture
def two_cycle():
    return MarkovSystem(2, [MarkovState("A", ("B",), 1), MarkovState("B", ("A",), 1)])


@pytest.fixture(autouse=True)
def bundled_examples(monkeypatch):
    monkeypatch.setenv("BERKDYN_EXAMPLES", DATA_DIR)
