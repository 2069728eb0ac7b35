# services/map_action.py
"""
Action of a rational map over K_e on type I/II points and on segments.

Images are certified, never guessed: a candidate image zeta(d, q') is
accepted only when the conjugated map (w - d)/pi^(e q') o phi o (c + pi^(e q) u)
has nonconstant reduction, and its local degree is the degree of that
reduction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from services.berk_points import BerkPoint, Interval, dist_H, same_point
from services.errors import (
    CenterNotRepresentable,
    DegenerateMap,
    NotCoprime,
    RamificationNeeded,
    ZeroPolynomial,
)
from services.ext_field import (
    INFINITY,
    ExtElem,
    FieldSpec,
    Polynomial,
    embed,
    inv,
    multiplication_rows,
    poly_add,
    poly_degree,
    poly_gauss_val,
    poly_mul,
    poly_scale,
    poly_sub,
    poly_trim,
    reduce_integral,
    val,
)
from services.residue_dyn import ResidueMap
from services.tropical import taylor_shift, trop_of, trop_profile

logger = logging.getLogger(__name__)

MAX_REFINEMENTS = 10_000


def _sylvester_is_singular(f: Polynomial, g: Polynomial) -> bool:
    """Resultant test: True when the Sylvester matrix of f and g has zero determinant.

    Entries of K_e are replaced by their e x e multiplication matrices over QQ;
    the block matrix has determinant the norm of the resultant, so the ranks agree.
    """
    m, n = poly_degree(f), poly_degree(g)
    if m <= 0 or n <= 0:
        return False
    field = f[0].field
    e, size = field.e, m + n
    zero_block = [[QQ(0)] * e for _ in range(e)]
    fd, gd = list(reversed(f)), list(reversed(g))
    rows: List[List] = []
    for shift, coeffs in [(i, fd) for i in range(n)] + [(i, gd) for i in range(m)]:
        blocks = [zero_block] * shift + [multiplication_rows(c) for c in coeffs]
        blocks += [zero_block] * (size - len(blocks))
        for r in range(e):
            rows.append([entry for block in blocks for entry in block[r]])
    sylvester = DomainMatrix(rows, (size * e, size * e), QQ)
    return sylvester.rank() < size * e


def _normalized(num: Polynomial, den: Polynomial) -> Tuple[Polynomial, Polynomial]:
    field = (num or den)[0].field
    shift = poly_gauss_val(num + den) * field.e
    if Fraction(shift).denominator != 1:
        raise DegenerateMap(f"coefficient valuation {shift} outside the value group")
    scale = field.pi_power(-int(shift))
    return poly_scale(num, scale), poly_scale(den, scale)


@dataclass(frozen=True)
class RationalMap:
    """phi = num/den with ascending coefficient tuples over one K_e, stored normalized."""

    num: Polynomial
    den: Polynomial

    @classmethod
    def create(cls, num: Sequence[ExtElem], den: Sequence[ExtElem], check_coprime: bool = True) -> "RationalMap":
        num, den = poly_trim(num), poly_trim(den)
        if not num or not den:
            raise ZeroPolynomial("numerator and denominator must be nonzero")
        if num[0].field != den[0].field:
            raise ValueError("numerator and denominator over different fields")
        if max(poly_degree(num), poly_degree(den)) < 1:
            raise ValueError("constant maps are not supported")
        if check_coprime and _sylvester_is_singular(num, den):
            raise NotCoprime("numerator and denominator share a root (resultant is 0)")
        num, den = _normalized(num, den)
        return cls(num, den)

    @classmethod
    def sextic(cls, a: ExtElem, b: ExtElem) -> "RationalMap":
        """(a z^6 + 1) / (a z^6 + z (z - 1) (z - b))."""
        field = a.field
        if not a:
            raise ValueError("a must be nonzero")
        zero, one = field.zero(), field.one()
        num = (one, zero, zero, zero, zero, zero, a)
        den = (zero, b, -(one + b), one, zero, zero, a)
        return cls.create(num, den)

    @property
    def field(self) -> FieldSpec:
        return self.num[0].field

    @property
    def degree(self) -> int:
        return max(poly_degree(self.num), poly_degree(self.den))

    def homogeneous(self) -> Tuple[Polynomial, Polynomial]:
        """Coefficients padded to length degree + 1."""
        zero = self.field.zero()
        n = self.degree + 1
        return (
            tuple(self.num) + (zero,) * (n - len(self.num)),
            tuple(self.den) + (zero,) * (n - len(self.den)),
        )

    def compose(self, inner: "RationalMap") -> "RationalMap":
        """self o inner."""
        d = self.degree
        N, D = inner.num, inner.den
        one = (self.field.one(),)
        powers_n, powers_d = [one], [one]
        for _ in range(d):
            powers_n.append(poly_mul(powers_n[-1], N))
            powers_d.append(poly_mul(powers_d[-1], D))

        def substitute(f: Polynomial) -> Polynomial:
            out: Polynomial = ()
            for i, c in enumerate(f):
                if c:
                    out = poly_add(out, poly_scale(poly_mul(powers_n[i], powers_d[d - i]), c))
            return out

        top, bottom = self.homogeneous()
        # homogenized substitution of coprime pairs stays coprime
        return RationalMap.create(substitute(top), substitute(bottom), check_coprime=False)

    def embed(self, e_new: int) -> "RationalMap":
        return RationalMap(
            tuple(embed(c, e_new) for c in self.num),
            tuple(embed(c, e_new) for c in self.den),
        )

    def __str__(self):
        def fmt(f):
            return " + ".join(f"({c})*z^{i}" for i, c in enumerate(f) if c) or "0"

        return f"({fmt(self.num)}) / ({fmt(self.den)})"


@dataclass(frozen=True)
class Degenerate:
    """Constant reduction; value None is the constant infinity."""

    value: Optional[int]


@dataclass(frozen=True)
class MappedPoint:
    image: BerkPoint
    local_degree: int
    reduction: Optional[ResidueMap] = None


@dataclass(frozen=True)
class SegmentPiece:
    source: Interval
    image: Interval
    expansion: int
    orientation: int


@dataclass(frozen=True)
class SegmentImage:
    pieces: Tuple[SegmentPiece, ...]

    @property
    def single(self) -> bool:
        return len(self.pieces) == 1


def reduce_pair(num: Polynomial, den: Polynomial) -> ResidueMap:
    num, den = _normalized(poly_trim(num), poly_trim(den))
    field = (num or den)[0].field
    return ResidueMap.from_ascending(
        [reduce_integral(c) for c in num],
        [reduce_integral(c) for c in den],
        field.p,
    )


def reduction(phi: RationalMap) -> Union[ResidueMap, Degenerate]:
    red = reduce_pair(phi.num, phi.den)
    if red.is_constant:
        return Degenerate(red.constant())
    return red


def invert_point(x: BerkPoint, field: FieldSpec) -> BerkPoint:
    """Image of x under w -> 1/w."""
    if x.infinity:
        return BerkPoint(field.zero(), INFINITY)
    c, q = x.center, x.logradius
    if q == INFINITY:
        return BerkPoint.point_at_infinity() if not c else BerkPoint(inv(c), INFINITY)
    vc = val(c)
    if vc >= q:
        return BerkPoint(field.zero(), -q)
    return BerkPoint(inv(c), q - 2 * vc)


def _shift_scale(f: Polynomial, c: ExtElem, n: int) -> Polynomial:
    """Coefficients of f(c + pi^n u) in u."""
    shifted = taylor_shift(f, c)
    field = c.field
    return poly_trim(a * field.pi_power(n * k) for k, a in enumerate(shifted))


def _require_value_group(field: FieldSpec, q) -> int:
    if not field.in_value_group(q):
        raise RamificationNeeded(Fraction(q).denominator, Fraction(q))
    return int(Fraction(q) * field.e)


def _image_type_two(num: Polynomial, den: Polynomial, c: ExtElem, q) -> MappedPoint:
    field = c.field
    n = _require_value_group(field, q)
    N = _shift_scale(num, c, n)
    D = _shift_scale(den, c, n)
    swapped = not D or not D[0]
    if swapped:
        N, D = D, N
    d0 = N[0] / D[0] if N and N[0] else field.zero()
    for step in range(MAX_REFINEMENTS):
        A = poly_sub(N, poly_scale(D, d0))
        if not A:
            raise DegenerateMap("map is constant along the disk")
        q_img = poly_gauss_val(A) - poly_gauss_val(D)
        m = _require_value_group(field, q_img)
        red = reduce_pair(A, poly_scale(D, field.pi_power(m)))
        if not red.is_constant:
            break
        gamma = red.constant()
        if gamma is None:
            raise CenterNotRepresentable(f"residue direction at infinity while refining zeta({c}, {q})")
        d0 = d0 + field.const(gamma) * field.pi_power(m)
        logger.debug(f"refine image of zeta({c}, {q}): direction {gamma}, new center {d0}, q' = {q_img}")
    else:
        raise CenterNotRepresentable(f"no certified image of zeta({c}, {q}) after {MAX_REFINEMENTS} refinements")
    image = BerkPoint(d0, q_img)
    if swapped:
        image = invert_point(image, field)
        # 1/phi vanishes at c, so its image disk holds 0 and inversion just flips the reduction
        red = red.reciprocal()
    return MappedPoint(image, red.degree, red)


def _image_type_one(num: Polynomial, den: Polynomial, c: ExtElem) -> MappedPoint:
    field = c.field
    N = taylor_shift(num, c)
    D = taylor_shift(den, c)
    if D and D[0]:
        d0 = N[0] / D[0] if N and N[0] else field.zero()
        A = poly_sub(N, poly_scale(D, d0))
        order = next(i for i, a in enumerate(A) if a)
        return MappedPoint(BerkPoint(d0, INFINITY), order)
    order = next(i for i, a in enumerate(D) if a)
    return MappedPoint(BerkPoint.point_at_infinity(), order)


def image_point(phi: RationalMap, x: BerkPoint) -> MappedPoint:
    """Certified image and local degree of a type I or II point."""
    if x.infinity:
        # phi(1/z) at z = 0: reversed homogeneous coefficients
        top, bottom = phi.homogeneous()
        return _image_type_one(tuple(reversed(top)), tuple(reversed(bottom)), phi.field.zero())
    if x.center.field != phi.field:
        raise ValueError(f"point over {x.center.field} but map over {phi.field}")
    if x.logradius == INFINITY:
        return _image_type_one(phi.num, phi.den, x.center)
    return _image_type_two(phi.num, phi.den, x.center, x.logradius)


@dataclass(frozen=True)
class OrbitStep:
    point: BerkPoint
    local_degree: int
    cumulative_degree: int
    reduction: Optional[ResidueMap]


def orbit(phi: RationalMap, x: BerkPoint, n: int) -> List[OrbitStep]:
    """phi(x), ..., phi^n(x); local_degree is the degree of phi at the preceding point."""
    steps: List[OrbitStep] = []
    current, total = x, 1
    for _ in range(n):
        mapped = image_point(phi, current)
        total *= mapped.local_degree
        steps.append(OrbitStep(mapped.image, mapped.local_degree, total, mapped.reduction))
        current = mapped.image
    return steps


def _ray_profile_at(num_c: Polynomial, den_c: Polynomial, d: ExtElem, t0, t1):
    """q-profile of join(d, phi(zeta(c, t))) for t in [t0, t1], i.e. v(phi - d) on the disk."""
    top = poly_sub(num_c, poly_scale(den_c, d))
    return trop_profile(trop_of(top), t0, t1) - trop_profile(trop_of(den_c), t0, t1)


class _RaySegment:
    """Image computation along one center-ray, caching endpoint images."""

    def __init__(self, phi: RationalMap, c: ExtElem):
        self.phi = phi
        self.c = c
        self.num_c = taylor_shift(phi.num, c)
        self.den_c = taylor_shift(phi.den, c)
        self._images: Dict[Fraction, MappedPoint] = {}

    def image(self, t: Fraction) -> MappedPoint:
        if t not in self._images:
            self._images[t] = image_point(self.phi, BerkPoint(self.c, t))
        return self._images[t]

    def initial_cuts(self, lo: Fraction, hi: Fraction) -> List[Fraction]:
        cuts = set()
        for f in (self.num_c, self.den_c):
            cuts.update(trop_profile(trop_of(f), lo, hi).breakpoints)
        return sorted(cut for cut in cuts if lo < cut < hi)

    def pieces(self, lo: Fraction, hi: Fraction) -> List[Tuple[Fraction, Fraction, int, int]]:
        edges = [lo] + self.initial_cuts(lo, hi) + [hi]
        out: List[Tuple[Fraction, Fraction, int, int]] = []
        for a, b in zip(edges, edges[1:]):
            out.extend(self._refine(a, b))
        return out

    def _refine(self, s0: Fraction, s1: Fraction) -> List[Tuple[Fraction, Fraction, int, int]]:
        P0, P1 = self.image(s0).image, self.image(s1).image
        cuts = set()
        for P in (P0, P1):
            cuts.update(_ray_profile_at(self.num_c, self.den_c, P.center, s0, s1).breakpoints)
        cuts = sorted(cut for cut in cuts if s0 < cut < s1)
        if cuts:
            edges = [s0] + cuts + [s1]
            out = []
            for a, b in zip(edges, edges[1:]):
                out.extend(self._refine(a, b))
            return out
        lower = P0 if P0.logradius >= P1.logradius else P1
        profile = _ray_profile_at(self.num_c, self.den_c, lower.center, s0, s1)
        slope = profile.pieces[0].slope
        if slope == 0:
            raise DegenerateMap(f"image of [{s0}, {s1}] along {self.c} collapses to a point")
        m = abs(slope)
        if dist_H(P0, P1) != m * (s1 - s0):
            raise DegenerateMap(
                f"segment image along {self.c} on [{s0}, {s1}] is not a stretch by {m}"
            )
        return [(s0, s1, m, 1 if slope > 0 else -1)]


def image_segment(phi: RationalMap, interval: Interval) -> SegmentImage:
    """Image of a segment, cut into pieces of constant expansion, in path order."""
    if interval.is_degenerate:
        mapped = image_point(phi, interval.x)
        piece = SegmentPiece(interval, Interval(mapped.image, mapped.image), mapped.local_degree, 1)
        return SegmentImage((piece,))
    pieces: List[SegmentPiece] = []
    for ray in interval.rays():
        qx, qy = ray.x.logradius, ray.y.logradius
        lower = ray.x if qx >= qy else ray.y
        walker = _RaySegment(phi, lower.center)
        lo, hi = min(qx, qy), max(qx, qy)
        found = walker.pieces(lo, hi)
        descending = qx > qy
        if descending:
            found = list(reversed(found))
        for a, b, m, orientation in found:
            start, end = (b, a) if descending else (a, b)
            pieces.append(SegmentPiece(
                Interval(BerkPoint(lower.center, start), BerkPoint(lower.center, end)),
                Interval(walker.image(start).image, walker.image(end).image),
                m,
                orientation,
            ))
    logger.debug(f"image of {interval}: {len(pieces)} pieces, expansions {[p.expansion for p in pieces]}")
    return SegmentImage(tuple(pieces))


def iterate_segment(phi: RationalMap, interval: Interval, n: int) -> SegmentImage:
    """Pieces of the source on which phi^n is a stretch, with cumulative expansion."""
    current = [SegmentPiece(interval, interval, 1, 1)]
    for _ in range(n):
        nxt: List[SegmentPiece] = []
        for piece in current:
            for sub in image_segment(phi, piece.image).pieces:
                a = dist_H(piece.image.x, sub.source.x) / piece.expansion
                b = dist_H(piece.image.x, sub.source.y) / piece.expansion
                source = Interval(piece.source.point_at_distance(a), piece.source.point_at_distance(b))
                nxt.append(SegmentPiece(
                    source,
                    sub.image,
                    piece.expansion * sub.expansion,
                    piece.orientation * sub.orientation,
                ))
        current = nxt
    return SegmentImage(tuple(current))


def verify_preimages(phi: RationalMap, target: BerkPoint, claimed: Sequence[Tuple[BerkPoint, int]]) -> bool:
    """True iff the claimed points map to target with the claimed degrees summing to deg phi."""
    points = [pt for pt, _ in claimed]
    for i, a in enumerate(points):
        if any(same_point(a, b) for b in points[i + 1:]):
            logger.warning(f"preimage claim lists {a} twice")
            return False
    for pt, degree in claimed:
        mapped = image_point(phi, pt)
        if not same_point(mapped.image, target):
            logger.warning(f"claimed preimage {pt} maps to {mapped.image}, not {target}")
            return False
        if mapped.local_degree != degree:
            logger.warning(f"claimed degree {degree} at {pt}, computed {mapped.local_degree}")
            return False
    total = sum(degree for _, degree in claimed)
    if total != phi.degree:
        logger.warning(f"claimed preimage degrees of {target} sum to {total}, map has degree {phi.degree}")
        return False
    return True
