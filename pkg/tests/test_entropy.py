import math
from fractions import Fraction

import pytest
from sympy import Poly, Rational, Symbol, log, simplify

from services.entropy import (
    RationalGenFn,
    first_return_gf,
    gurevich_entropy,
    lumped_graph,
    measure_entropy,
    path_count_series,
    same_growth,
    sandwich,
    solve_masses,
    truncation_entropy,
    truncation_sweep,
    verify_interval_null,
)
from services.errors import CountableState, MalformedCertificate, NotStronglyConnected, SingularSystem
from services.julia_struct import MarkovState, MarkovSystem, TailFamily

T = Symbol("t")


def largest_root(descending):
    (lo, hi), _ = Poly(descending, T).intervals(eps=Rational(1, 10 ** 15))[-1]
    return float((lo + hi) / 2)


# growth rate of the sextic coding: largest root of t^3 - 4 t^2 - t + 6
LAMBDA = largest_root([1, -4, -1, 6])


@pytest.fixture
def masses(sextic_system):
    return solve_masses(sextic_system)


class TestMasses:
    def test_core_masses(self, masses):
        assert masses.core_masses["U_inf1"] == Fraction(1, 2)
        assert masses.core_masses["U_inf2"] == Fraction(1, 22)
        for name in ("U'_0", "U'_1", "U_bbar"):
            assert masses.core_masses[name] == Fraction(1, 11)

    def test_countable_states_are_null(self, masses):
        for name in ("V", "V_0", "V_1", "V_inf"):
            assert masses.core_masses[name] == 0

    def test_families(self, masses):
        for key in ("U_inf1->U'_1", "U_inf1->U_bbar"):
            family = masses.family_masses[key]
            assert family.aggregate == Fraction(1, 11)
            assert family.depth_factor == Fraction(1, 2)
            assert sum(family.at_depth(k) for k in range(1, 60)) == pytest.approx(float(family.aggregate))

    def test_total_is_one(self, masses):
        assert masses.total_check == 1

    def test_full_shift(self, full_two_shift):
        masses = solve_masses(full_two_shift)
        assert masses.core_masses == {"A": Fraction(1, 2), "B": Fraction(1, 2)}

    def test_unanchored_system_uses_the_kernel(self):
        # neither state maps onto everything
        sys = MarkovSystem(2, [MarkovState("A", ("B",), 2), MarkovState("B", ("A",), 2)])
        masses = solve_masses(sys)
        assert masses.total_check == 1
        assert masses.core_masses == {"A": Fraction(1, 2), "B": Fraction(1, 2)}

    def test_infinite_family_mass(self):
        sys = MarkovSystem(2, [MarkovState("A", ("A",), 1)], [TailFamily("A", "A", 2)])
        with pytest.raises(SingularSystem):
            solve_masses(sys)

    def test_refuses_an_unreachable_state(self):
        sys = MarkovSystem(2, [MarkovState("A", ("A",), 1), MarkovState("B", ("B",), 1)])
        with pytest.raises(MalformedCertificate):
            solve_masses(sys)


def test_measure_entropy_is_exact(sextic_system, masses):
    h = measure_entropy(sextic_system, masses)
    assert h.terms == ((Fraction(1), 2), (Fraction(5, 11), 3))
    assert simplify(h.to_sympy() - (log(2) + Rational(5, 11) * log(3))) == 0
    assert h.nats == pytest.approx(math.log(2) + 5 / 11 * math.log(3))


def test_measure_entropy_of_the_full_shift(full_two_shift):
    h = measure_entropy(full_two_shift, solve_masses(full_two_shift))
    assert h.nats == pytest.approx(math.log(2))


class TestGeneratingFunction:
    def test_first_return_at_the_root(self, sextic_system):
        gf = first_return_gf(sextic_system, "U_inf1")
        # (z - 3 z^3) / ((1 - z^2)(1 - 3 z))
        assert gf.numerator == (0, 1, 0, -3)
        assert gf.denominator == (1, -3, -1, 3)
        assert gf.one_minus_numerator() == (1, -4, -1, 6)

    def test_first_returns_by_length(self, sextic_system):
        gf = first_return_gf(sextic_system, "U_inf1")
        assert gf.series(3) == [0, 1, 3, 7]

    def test_two_cycle(self, two_cycle):
        assert first_return_gf(two_cycle, "A") == RationalGenFn((Fraction(0), Fraction(0), Fraction(1)), (Fraction(1),))

    def test_closed_paths_match_the_series(self, sextic_system):
        gf = first_return_gf(sextic_system, "U_inf1")
        closed = RationalGenFn(gf.denominator, gf.one_minus_numerator())
        assert path_count_series(sextic_system, "U_inf1", 20) == closed.series(20)

    def test_countable_state(self, sextic_system):
        with pytest.raises(CountableState):
            first_return_gf(sextic_system, "V")

    def test_not_strongly_connected(self):
        sys = MarkovSystem(2, [MarkovState("A", ("A", "B"), 1), MarkovState("B", ("B",), 1)])
        with pytest.raises(NotStronglyConnected):
            first_return_gf(sys, "A")

    def test_refuses_a_degree_above_d(self):
        sys = MarkovSystem(2, [MarkovState("A", ("A",), 3)])
        with pytest.raises(MalformedCertificate):
            first_return_gf(sys, "A")


class TestGurevich:
    def test_sextic(self, sextic_system):
        h = gurevich_entropy(sextic_system)
        assert h.minpoly == (6, -1, -4, 1)
        lo, hi = h.interval
        assert lo <= hi
        assert h.value == pytest.approx(LAMBDA, abs=1e-9)
        assert h.nats == pytest.approx(math.log(LAMBDA), abs=1e-9)
        assert LAMBDA == pytest.approx(3.8557725066, abs=1e-9)

    def test_self_loop(self, self_loop):
        h = gurevich_entropy(self_loop)
        assert h.minpoly == (-1, 1)
        assert h.nats == pytest.approx(0.0, abs=1e-12)

    def test_full_shift(self, full_two_shift):
        h = gurevich_entropy(full_two_shift)
        assert h.minpoly == (-2, 1)
        assert h.nats == pytest.approx(math.log(2))

    @pytest.mark.parametrize("state", ["U_inf2", "U'_0", "U'_1", "U_bbar"])
    def test_independent_of_the_state(self, sextic_system, state):
        assert same_growth(gurevich_entropy(sextic_system), gurevich_entropy(sextic_system, state))

    def test_sandwich(self, sextic_system, masses):
        h_mu = measure_entropy(sextic_system, masses).nats
        h_top = gurevich_entropy(sextic_system).nats
        assert sandwich(h_mu, h_top, 6)
        assert not sandwich(h_top, h_mu, 6)


class TestTruncation:
    def test_lumped_graph_labels(self, sextic_system):
        labels, weights = lumped_graph(sextic_system, 2)
        assert labels[5:] == ["U_inf1->U'_1@1", "U_inf1->U'_1@2", "U_inf1->U_bbar@1", "U_inf1->U_bbar@2"]
        assert weights[(0, 6)] == 9

    def test_increases_towards_the_limit(self, sextic_system):
        values = [truncation_entropy(sextic_system, depth) for depth in range(0, 17)]
        limit = gurevich_entropy(sextic_system).nats
        for a, b in zip(values, values[1:]):
            assert a <= b + 1e-9
        assert all(v <= limit + 1e-9 for v in values)

    def test_depth_sixteen_is_close(self, sextic_system):
        assert truncation_entropy(sextic_system, 16) == pytest.approx(math.log(LAMBDA), abs=1e-2)

    def test_sweep_does_not_depend_on_workers(self, sextic_system):
        serial = truncation_sweep(sextic_system, range(6), workers=1)
        threaded = truncation_sweep(sextic_system, range(6), workers=3)
        assert serial == threaded

    def test_negative_depth(self, sextic_system):
        with pytest.raises(ValueError):
            truncation_entropy(sextic_system, -1)


@pytest.mark.parametrize("subdivision, d, coefficient, null", [
    ([(2, 3, 3)] * 3, 6, Fraction(1, 4), True),
    ([(1, 2, 6)], 6, Fraction(1), False),
    ([(1, 2, 2)], 6, Fraction(1, 3), True),
])
def test_interval_null(subdivision, d, coefficient, null):
    report = verify_interval_null(subdivision, d)
    assert report.coefficient == coefficient
    assert report.null is null
    assert report.leaf_mass_one is null
