# services/berk_points.py
"""
Type I/II points of the Berkovich projective line, as disks zeta(c, p^-q).

A point is stored by a center in K_e and a log-radius q (radius p^-q); q = +inf
is the type I point c. The hyperbolic metric is measured in units of log p.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

from services.errors import CutOffPath, TypeIPoint
from services.ext_field import INFINITY, ExtElem, FieldSpec, embed, val

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BerkPoint:
    center: Optional[ExtElem]
    logradius: Union[Fraction, float]
    infinity: bool = False

    @classmethod
    def at(cls, center: ExtElem, logradius) -> "BerkPoint":
        q = logradius if logradius == INFINITY else Fraction(logradius)
        return cls(center, q)

    @classmethod
    def gauss(cls, field_spec: FieldSpec) -> "BerkPoint":
        return cls(field_spec.zero(), Fraction(0))

    @classmethod
    def point_at_infinity(cls) -> "BerkPoint":
        return cls(None, -INFINITY, infinity=True)

    @property
    def is_type_one(self) -> bool:
        return self.infinity or self.logradius == INFINITY

    def __str__(self):
        if self.infinity:
            return "inf"
        return f"zeta({self.center}, q={self.logradius})"

    def __eq__(self, other):
        return isinstance(other, BerkPoint) and same_point(self, other)

    def __hash__(self):
        # equal points share the log-radius; centers are only defined up to the disk
        return hash((self.infinity, self.logradius))


def same_point(x: BerkPoint, y: BerkPoint) -> bool:
    if x.infinity or y.infinity:
        return x.infinity and y.infinity
    if x.logradius != y.logradius:
        return False
    return val(x.center - y.center) >= x.logradius


def lies_below(x: BerkPoint, y: BerkPoint) -> bool:
    """True when the disk of x is contained in the disk of y."""
    if y.infinity:
        return True
    if x.infinity:
        return False
    return x.logradius >= y.logradius and val(x.center - y.center) >= y.logradius


def join(x: BerkPoint, y: BerkPoint) -> BerkPoint:
    """Smallest disk containing both."""
    if x.infinity or y.infinity:
        raise ValueError("join with infinity needs a coordinate swap")
    q = min(x.logradius, y.logradius, val(x.center - y.center))
    return BerkPoint(x.center, q)


def dist_H(x: BerkPoint, y: BerkPoint) -> Fraction:
    if x.is_type_one or y.is_type_one:
        raise TypeIPoint(f"hyperbolic distance undefined at {x if x.is_type_one else y}")
    j = join(x, y)
    return (x.logradius - j.logradius) + (y.logradius - j.logradius)


@dataclass(frozen=True)
class Interval:
    x: BerkPoint
    y: BerkPoint

    def __post_init__(self):
        if self.x.is_type_one or self.y.is_type_one:
            raise TypeIPoint("interval endpoints must lie in hyperbolic space")

    @property
    def length(self) -> Fraction:
        return dist_H(self.x, self.y)

    @property
    def is_degenerate(self) -> bool:
        return same_point(self.x, self.y)

    def top(self) -> BerkPoint:
        return join(self.x, self.y)

    def on_ray(self) -> bool:
        """Both endpoints lie on one center-ray (one is above the other)."""
        return lies_below(self.x, self.y) or lies_below(self.y, self.x)

    def rays(self) -> List["Interval"]:
        """Split [x, y] through the join into at most two center-ray pieces."""
        j = self.top()
        pieces = [Interval(self.x, j), Interval(j, self.y)]
        return [piece for piece in pieces if not piece.is_degenerate] or [self]

    def point_at(self, q) -> BerkPoint:
        """Point with log-radius q on a center-ray interval."""
        if not self.on_ray():
            raise ValueError("point_at needs an interval on one center-ray")
        lower = self.x if self.x.logradius >= self.y.logradius else self.y
        return BerkPoint(lower.center, Fraction(q))

    def point_at_distance(self, delta) -> BerkPoint:
        """Point of [x, y] at hyperbolic distance delta from x, walking up through the join."""
        delta = Fraction(delta)
        if not 0 <= delta <= self.length:
            raise CutOffPath(f"distance {delta} outside [0, {self.length}]")
        j = self.top()
        up = self.x.logradius - j.logradius
        if delta <= up:
            return BerkPoint(self.x.center, self.x.logradius - delta)
        return BerkPoint(self.y.center, j.logradius + (delta - up))

    def contains(self, z: BerkPoint) -> bool:
        return on_segment(z, self.x, self.y)

    def __str__(self):
        return f"[{self.x}, {self.y}]"


def on_segment(z: BerkPoint, x: BerkPoint, y: BerkPoint) -> bool:
    if z.is_type_one:
        return False
    return dist_H(x, z) + dist_H(z, y) == dist_H(x, y)


def embed_point(x: BerkPoint, e_new: int) -> BerkPoint:
    if x.infinity:
        return x
    return BerkPoint(embed(x.center, e_new), x.logradius)


def subdivide(interval: Interval, cuts: Sequence) -> List[Interval]:
    """Cut a center-ray interval at the given log-radii, in path order."""
    if not cuts:
        return [interval]
    if not interval.on_ray():
        raise CutOffPath("subdivide needs an interval on one center-ray")
    qx, qy = interval.x.logradius, interval.y.logradius
    lo, hi = min(qx, qy), max(qx, qy)
    qs = [Fraction(c) for c in cuts]
    for q in qs:
        if not lo < q < hi:
            raise CutOffPath(f"cut {q} is not strictly inside ({lo}, {hi})")
    qs = sorted(set(qs), reverse=qx > qy)
    points = [interval.x] + [interval.point_at(q) for q in qs] + [interval.y]
    return [Interval(a, b) for a, b in zip(points, points[1:])]


@dataclass
class FiniteTree:
    vertices: List[BerkPoint]
    edges: List[Tuple[int, int]] = field(default_factory=list)

    def edge_intervals(self) -> List[Interval]:
        return [Interval(self.vertices[i], self.vertices[j]) for i, j in self.edges]

    def index_of(self, x: BerkPoint) -> Optional[int]:
        for i, v in enumerate(self.vertices):
            if same_point(v, x):
                return i
        return None

    def contains(self, z: BerkPoint) -> bool:
        if self.index_of(z) is not None:
            return True
        return any(edge.contains(z) for edge in self.edge_intervals())

    def contains_interval(self, interval: Interval) -> bool:
        return any(
            edge.contains(interval.x) and edge.contains(interval.y)
            for edge in self.edge_intervals()
        ) or (interval.is_degenerate and self.contains(interval.x))

    def degree(self, i: int) -> int:
        return sum(1 for a, b in self.edges if i in (a, b))

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adjacency: Dict[int, List[int]] = {i: [] for i in range(len(self.vertices))}
        for a, b in self.edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        seen, stack = {0}, [0]
        while stack:
            for nxt in adjacency[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.vertices)


def _dedupe(points: Sequence[BerkPoint]) -> List[BerkPoint]:
    out: List[BerkPoint] = []
    for pt in points:
        if not any(same_point(pt, q) for q in out):
            out.append(pt)
    return out


def convex_hull(points: Sequence[BerkPoint]) -> FiniteTree:
    """Join-closure of the points, with an edge from each vertex to its nearest strict ancestor."""
    if not points:
        raise ValueError("convex hull of an empty set")
    for pt in points:
        if pt.is_type_one:
            raise TypeIPoint(f"{pt} is not in hyperbolic space")
    vertices = _dedupe(points)
    while True:
        joins = _dedupe([join(a, b) for a, b in combinations(vertices, 2)])
        fresh = [j for j in joins if not any(same_point(j, v) for v in vertices)]
        if not fresh:
            break
        vertices.extend(fresh)
    # deterministic order: highest (smallest q) first
    vertices.sort(key=lambda v: v.logradius)
    edges = []
    for i, v in enumerate(vertices):
        ancestors = [
            j for j, w in enumerate(vertices)
            if j != i and lies_below(v, w) and not same_point(v, w)
        ]
        if ancestors:
            parent = max(ancestors, key=lambda j: vertices[j].logradius)
            edges.append((parent, i))
    tree = FiniteTree(vertices, edges)
    logger.debug(f"convex hull: {len(vertices)} vertices, {len(edges)} edges")
    return tree
