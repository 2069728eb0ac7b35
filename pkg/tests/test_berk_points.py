from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from services.berk_points import (
    BerkPoint,
    Interval,
    convex_hull,
    dist_H,
    embed_point,
    join,
    lies_below,
    on_segment,
    same_point,
    subdivide,
)
from services.errors import CutOffPath, TypeIPoint
from services.ext_field import INFINITY, FieldSpec

from conftest import zeta

K6 = FieldSpec(3, 6)

points = st.builds(
    lambda c0, c1, q: BerkPoint(K6.element([c0, c1]), Fraction(q, 6)),
    st.integers(-9, 9),
    st.integers(-9, 9),
    st.integers(-12, 12),
)


def test_same_point_ignores_center_inside_disk():
    assert same_point(zeta(K6, 0, 0), zeta(K6, 1, 0))
    assert same_point(zeta(K6, 0, 1), zeta(K6, 3, 1))
    assert not same_point(zeta(K6, 0, 1), zeta(K6, 1, 1))
    assert zeta(K6, 0, Fraction(1, 2)) == zeta(K6, 3, Fraction(1, 2))


def test_join_and_distance():
    x, y = zeta(K6, 0, Fraction(1, 2)), zeta(K6, 1, Fraction(1, 2))
    assert same_point(join(x, y), zeta(K6, 0, 0))
    assert dist_H(x, y) == 1
    assert dist_H(zeta(K6, 0, 0), zeta(K6, 0, Fraction(-1, 2))) == Fraction(1, 2)


def test_lies_below():
    assert lies_below(zeta(K6, 1, Fraction(1, 2)), zeta(K6, 0, 0))
    assert not lies_below(zeta(K6, 0, 0), zeta(K6, 1, Fraction(1, 2)))
    assert lies_below(zeta(K6, 0, 0), BerkPoint.point_at_infinity())


def test_type_one_points_have_no_distance():
    x = BerkPoint.at(K6.one(), INFINITY)
    assert x.is_type_one
    with pytest.raises(TypeIPoint):
        dist_H(x, zeta(K6, 0, 0))
    with pytest.raises(TypeIPoint):
        Interval(x, zeta(K6, 0, 0))


def test_interval_through_join():
    I = Interval(zeta(K6, 0, Fraction(1, 2)), zeta(K6, 1, Fraction(1, 2)))
    assert not I.on_ray()
    rays = I.rays()
    assert len(rays) == 2
    assert same_point(rays[0].y, zeta(K6, 0, 0))
    assert I.contains(zeta(K6, 0, 0))
    assert I.contains(zeta(K6, 1, Fraction(1, 6)))
    assert not I.contains(zeta(K6, 2, Fraction(1, 6)))
    assert same_point(I.point_at_distance(Fraction(3, 4)), zeta(K6, 1, Fraction(1, 4)))
    with pytest.raises(CutOffPath):
        I.point_at_distance(2)


def test_subdivide_in_path_order():
    I = Interval(zeta(K6, 0, 0), zeta(K6, 0, Fraction(-1, 2)))
    pieces = subdivide(I, [Fraction(-1, 3), Fraction(-1, 6)])
    assert [p.x.logradius for p in pieces] == [0, Fraction(-1, 6), Fraction(-1, 3)]
    assert sum(p.length for p in pieces) == I.length
    with pytest.raises(CutOffPath):
        subdivide(I, [Fraction(1, 6)])


def test_convex_hull_of_sextic_tree():
    tree = convex_hull([
        zeta(K6, 0, Fraction(-1, 2)),
        zeta(K6, 0, Fraction(1, 2)),
        zeta(K6, 1, Fraction(1, 2)),
        zeta(K6, -1, Fraction(1, 2)),
    ])
    assert len(tree.vertices) == 5
    assert len(tree.edges) == 4
    gauss = tree.index_of(zeta(K6, 0, 0))
    assert gauss is not None and tree.degree(gauss) == 4
    assert tree.is_connected()
    assert tree.contains(zeta(K6, 0, Fraction(-1, 3)))
    assert not tree.contains(zeta(K6, 1, 1))


def test_embed_point_keeps_geometry():
    x, y = zeta(K6, 1, Fraction(1, 3)), zeta(K6, 0, Fraction(-1, 6))
    assert dist_H(embed_point(x, 12), embed_point(y, 12)) == dist_H(x, y)


@settings(max_examples=1000, deadline=None)
@given(points, points, points)
def test_hyperbolic_metric_axioms(x, y, z):
    assert dist_H(x, x) == 0
    assert dist_H(x, y) == dist_H(y, x)
    assert dist_H(x, y) >= 0
    assert (dist_H(x, y) == 0) == same_point(x, y)
    assert dist_H(x, z) <= dist_H(x, y) + dist_H(y, z)
    # trees: the join of two points lies on the path between them
    assert on_segment(join(x, y), x, y)
