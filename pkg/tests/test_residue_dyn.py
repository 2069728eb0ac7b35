import pytest
from hypothesis import assume, given, settings, strategies as st

from services.errors import InseparableMap
from services.residue_dyn import (
    ResidueMap,
    ResiduePoint,
    SeparabilityClass,
    apply,
    backward_counts,
    critical_points,
    forward_orbit,
    postcritical_avoids,
    preimages,
    separability_class,
)

P = 3


@pytest.fixture
def psi():
    return ResidueMap.from_expr("1/(z**3 - z)", P)


def test_parse_normalizes(psi):
    assert psi.num == (1,)
    assert psi.den == (1, 0, 2, 0)
    assert psi.degree == 3
    assert str(psi) == "(1)/(z**3 - z)"


def test_values(psi):
    assert psi.value_at(None) == 0
    assert psi.value_at(0) is None
    assert psi.value_at(2) is None
    assert apply(psi, None) == ResiduePoint.rational(0, P)
    assert apply(psi, 0).is_infinity


def test_critical_points_only_at_infinity(psi):
    crit = critical_points(psi)
    assert crit.points() == [ResiduePoint.infinity(P)]
    assert crit.total == 2 * psi.degree - 2


def test_postcritical_orbit(psi):
    trace = postcritical_avoids(psi, [1, -1])
    assert trace
    assert set(trace.orbit) == {ResiduePoint.rational(0, P), ResiduePoint.infinity(P)}
    assert trace.hits == ()
    assert not postcritical_avoids(psi, [0])


def test_preimages_of_one_are_three_simple_conjugates(psi):
    fiber = preimages(psi, 1)
    assert fiber.total == 3
    assert fiber.is_simple
    assert fiber.count_points() == 3
    (entry,) = fiber.entries
    assert entry.point.degree == 3
    # the class is mapped back onto 1
    assert apply(psi, entry.point) == ResiduePoint.rational(1, P)


def test_preimages_of_infinity(psi):
    fiber = preimages(psi, None)
    assert {str(x) for x in fiber.points()} == {"0", "1", "2"}
    assert fiber.total == 3


def test_backward_tree_is_simple_and_ternary(psi):
    counts = backward_counts(psi, 1, 3)
    assert counts.counts == (1, 3, 9, 27)
    assert counts.simple


def test_forward_orbit_closes(psi):
    orbit = forward_orbit(psi, ResiduePoint.rational(1, P))
    assert orbit[0] == apply(psi, 1)
    assert len(orbit) == len(set(orbit))


def test_compose():
    square = ResidueMap.from_expr("z**2", P)
    shift = ResidueMap.from_expr("z + 1", P)
    assert square.compose(shift) == ResidueMap.from_expr("z**2 + 2*z + 1", P)


@pytest.mark.parametrize("expr, kind, r", [
    ("z**3", SeparabilityClass.PURELY_INSEPARABLE, 1),
    ("z**9", SeparabilityClass.PURELY_INSEPARABLE, 2),
    ("z**6 + z**3", SeparabilityClass.INSEPARABLE_NOT_PURE, 1),
    ("1/(z**3 - z)", SeparabilityClass.SEPARABLE, 0),
])
def test_separability(expr, kind, r):
    cls = separability_class(ResidueMap.from_expr(expr, P))
    assert (cls.kind, cls.r) == (kind, r)


def test_inseparable_map_has_no_critical_points():
    with pytest.raises(InseparableMap):
        critical_points(ResidueMap.from_expr("z**3", P))


@pytest.mark.parametrize("expr, expected", [
    ("z**2", {ResiduePoint.rational(0, 5), ResiduePoint.infinity(5)}),
    ("(z**2 + 1)/z", {ResiduePoint.rational(1, 5), ResiduePoint.rational(-1, 5)}),
])
def test_critical_points_over_f5(expr, expected):
    crit = critical_points(ResidueMap.from_expr(expr, 5))
    assert set(crit.points()) == expected
    assert crit.total == 2


primes = st.sampled_from([2, 3, 5, 7])


@st.composite
def residue_maps(draw):
    p = draw(primes)
    num = draw(st.lists(st.integers(0, p - 1), min_size=1, max_size=5))
    den = draw(st.lists(st.integers(0, p - 1), min_size=1, max_size=5))
    assume(any(num) or any(den))
    psi = ResidueMap.from_pair(num, den, p)
    assume(not psi.is_constant)
    return psi


@settings(max_examples=80, deadline=None)
@given(residue_maps(), st.data())
def test_every_fiber_counts_the_degree(psi, data):
    t = data.draw(st.sampled_from([None] + list(range(psi.p))))
    assert preimages(psi, t).total == psi.degree


@settings(max_examples=60, deadline=None)
@given(residue_maps())
def test_frobenius_precomposition_adds_one_to_r(psi):
    assume(separability_class(psi).kind == SeparabilityClass.SEPARABLE)
    frobenius = ResidueMap.from_expr(f"z**{psi.p}", psi.p)
    cls = separability_class(psi.compose(frobenius))
    assert cls.r == 1
    expected = SeparabilityClass.PURELY_INSEPARABLE if psi.degree == 1 else SeparabilityClass.INSEPARABLE_NOT_PURE
    assert cls.kind == expected
