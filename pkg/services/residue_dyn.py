# services/residue_dyn.py
"""
Dynamics of a reduced map over F_p and its finite extensions.

Polynomials follow the sympy galoistools convention: dense lists of ints,
leading coefficient first, the zero polynomial is the empty list. A point of
P^1(F_p-bar) is kept as the minimal polynomial of its conjugacy class, so a
ResiduePoint of degree m stands for m conjugate points.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import Poly, Symbol, fraction, sympify, together
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import (
    gf_add,
    gf_degree,
    gf_diff,
    gf_eval,
    gf_factor,
    gf_gcd,
    gf_gcdex,
    gf_mul,
    gf_mul_ground,
    gf_pow_mod,
    gf_quo,
    gf_rem,
    gf_strip,
    gf_sub,
)

from services.errors import InseparableMap, NotIrreducible, ZeroPolynomial

logger = logging.getLogger(__name__)

Dense = Tuple[int, ...]

_Z = Symbol("z")


def _dense(coeffs: Iterable[int], p: int) -> List[int]:
    return gf_strip([ZZ(int(c) % p) for c in coeffs])


def _pow(f: Sequence[int], n: int, p: int) -> List[int]:
    out = [ZZ(1)]
    for _ in range(n):
        out = gf_mul(out, list(f), p, ZZ)
    return out


def _fmt(f: Sequence[int], p: int) -> str:
    if not f:
        return "0"
    return str(Poly([int(c) for c in f], _Z, modulus=p).as_expr())


@dataclass(frozen=True)
class ResiduePoint:
    """A conjugacy class of points of P^1 over F_p-bar; minpoly None is infinity."""

    p: int
    minpoly: Optional[Dense]

    @classmethod
    def infinity(cls, p: int) -> "ResiduePoint":
        return cls(p, None)

    @classmethod
    def rational(cls, value: int, p: int) -> "ResiduePoint":
        return cls(p, (1, (-value) % p))

    @classmethod
    def coerce(cls, t: Union["ResiduePoint", int, None], p: int) -> "ResiduePoint":
        if isinstance(t, ResiduePoint):
            return t
        if t is None:
            return cls.infinity(p)
        return cls.rational(int(t), p)

    @property
    def is_infinity(self) -> bool:
        return self.minpoly is None

    @property
    def degree(self) -> int:
        return 1 if self.minpoly is None else len(self.minpoly) - 1

    def rational_value(self) -> Optional[int]:
        """The F_p coordinate of a degree-1 point, None at infinity."""
        if self.is_infinity:
            return None
        if self.degree != 1:
            raise ValueError(f"{self} is not defined over F_{self.p}")
        return (-self.minpoly[1]) % self.p

    def __str__(self):
        if self.is_infinity:
            return "inf"
        if self.degree == 1:
            return str(self.rational_value())
        return f"root of {_fmt(self.minpoly, self.p)}"


@dataclass(frozen=True)
class PointEntry:
    point: ResiduePoint
    multiplicity: int
    count: int


@dataclass(frozen=True)
class ResiduePointSet:
    entries: Tuple[PointEntry, ...]

    @property
    def total(self) -> int:
        return sum(entry.multiplicity * entry.count for entry in self.entries)

    @property
    def is_simple(self) -> bool:
        return all(entry.multiplicity == 1 for entry in self.entries)

    def points(self) -> List[ResiduePoint]:
        return [entry.point for entry in self.entries]

    def count_points(self) -> int:
        return sum(entry.count for entry in self.entries)

    def __contains__(self, point) -> bool:
        return any(entry.point == point for entry in self.entries)


@dataclass(frozen=True)
class ResidueMap:
    """A rational map num/den over F_p, stored coprime with a monic denominator."""

    p: int
    num: Dense
    den: Dense

    @classmethod
    def from_pair(cls, num: Iterable[int], den: Iterable[int], p: int) -> "ResidueMap":
        f, g = _dense(num, p), _dense(den, p)
        if not f and not g:
            raise ZeroPolynomial("0/0 is not a residue map")
        if not g:
            return cls(p, (1,), ())
        if not f:
            return cls(p, (), (1,))
        h = gf_gcd(f, g, p, ZZ)
        if gf_degree(h) > 0:
            f, g = gf_quo(f, h, p, ZZ), gf_quo(g, h, p, ZZ)
        scale = pow(int(g[0]), -1, p)
        f, g = gf_mul_ground(f, ZZ(scale), p, ZZ), gf_mul_ground(g, ZZ(scale), p, ZZ)
        return cls(p, tuple(int(c) for c in f), tuple(int(c) for c in g))

    @classmethod
    def from_ascending(cls, num: Sequence[int], den: Sequence[int], p: int) -> "ResidueMap":
        return cls.from_pair(list(reversed(list(num))), list(reversed(list(den))), p)

    @classmethod
    def from_expr(cls, expr: str, p: int) -> "ResidueMap":
        """Parse a rational expression in z, e.g. "1/(z**3 - z)"."""
        top, bottom = fraction(together(sympify(expr, locals={"z": _Z})))
        num = Poly(top, _Z).all_coeffs()
        den = Poly(bottom, _Z).all_coeffs()
        return cls.from_pair([int(c) for c in num], [int(c) for c in den], p)

    @property
    def degree(self) -> int:
        return max(gf_degree(list(self.num)), gf_degree(list(self.den)), 0)

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def constant(self) -> Optional[int]:
        """Value of a constant map; None means the constant infinity."""
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        if not self.den:
            return None
        if not self.num:
            return 0
        return (self.num[0] * pow(self.den[0], -1, self.p)) % self.p

    def value_at(self, t: Optional[int]) -> Optional[int]:
        p = self.p
        f, g = list(self.num), list(self.den)
        if t is None:
            if gf_degree(f) > gf_degree(g):
                return None
            if gf_degree(f) < gf_degree(g):
                return 0
            return (int(f[0]) * pow(int(g[0]), -1, p)) % p
        top, bottom = gf_eval(f, ZZ(t), p, ZZ), gf_eval(g, ZZ(t), p, ZZ)
        if bottom == 0:
            return None
        return (int(top) * pow(int(bottom), -1, p)) % p

    def compose(self, inner: "ResidueMap") -> "ResidueMap":
        """self o inner, by homogenized substitution."""
        p, d = self.p, self.degree
        N, D = list(inner.num), list(inner.den)

        def substitute(f: Dense) -> List[int]:
            out: List[int] = []
            n = len(f) - 1
            for k, c in enumerate(f):
                i = n - k
                term = gf_mul(_pow(N, i, p), _pow(D, d - i, p), p, ZZ)
                out = gf_add(out, gf_mul_ground(term, ZZ(c), p, ZZ), p, ZZ)
            return out

        return ResidueMap.from_pair(substitute(self.num), substitute(self.den), p)

    def reciprocal(self) -> "ResidueMap":
        return ResidueMap.from_pair(self.den, self.num, self.p)

    def __str__(self):
        if not self.den:
            return "inf"
        if self.den == (1,):
            return _fmt(self.num, self.p)
        return f"({_fmt(self.num, self.p)})/({_fmt(self.den, self.p)})"


def _factor_entries(f: List[int], p: int) -> List[PointEntry]:
    _, factors = gf_factor(f, p, ZZ)
    return [
        PointEntry(ResiduePoint(p, tuple(int(c) for c in g)), k, gf_degree(g))
        for g, k in factors
    ]


def fiber_polynomial(psi: ResidueMap, t: ResiduePoint) -> List[int]:
    """Polynomial whose roots (over F_p-bar) are the finite preimages of the class t."""
    p = psi.p
    num, den = list(psi.num), list(psi.den)
    if t.is_infinity:
        return den
    g = t.minpoly
    m = len(g) - 1
    out: List[int] = []
    for k, coeff in enumerate(g):
        i = m - k
        if not coeff:
            continue
        term = gf_mul(_pow(num, i, p), _pow(den, m - i, p), p, ZZ)
        out = gf_add(out, gf_mul_ground(term, ZZ(coeff), p, ZZ), p, ZZ)
    return out


def preimages(psi: ResidueMap, t: Union[ResiduePoint, int, None]) -> ResiduePointSet:
    """All preimages of the conjugacy class t, with multiplicities."""
    p = psi.p
    t = ResiduePoint.coerce(t, p)
    if psi.is_constant:
        raise ValueError("preimages of a constant residue map")
    f = fiber_polynomial(psi, t)
    entries = _factor_entries(f, p)
    # roots lost to a degree drop sit at infinity
    expected = t.degree * psi.degree
    missing = expected - gf_degree(f)
    if missing > 0:
        entries.append(PointEntry(ResiduePoint.infinity(p), missing, 1))
    result = ResiduePointSet(tuple(entries))
    logger.debug(f"preimages of {t} under {psi}: {len(entries)} classes, total {result.total}")
    return result


def wronskian(psi: ResidueMap) -> List[int]:
    p = psi.p
    num, den = list(psi.num), list(psi.den)
    left = gf_mul(gf_diff(num, p, ZZ), den, p, ZZ)
    right = gf_mul(num, gf_diff(den, p, ZZ), p, ZZ)
    return gf_sub(left, right, p, ZZ)


def critical_points(psi: ResidueMap) -> ResiduePointSet:
    """Zeros of num'den - num den', with the ramification at infinity from 2d - 2 - deg W."""
    W = wronskian(psi)
    if not W:
        raise InseparableMap(f"{psi} has identically zero derivative")
    p, d = psi.p, psi.degree
    entries = _factor_entries(W, p)
    at_infinity = 2 * d - 2 - gf_degree(W)
    if at_infinity > 0:
        entries.append(PointEntry(ResiduePoint.infinity(p), at_infinity, 1))
    return ResiduePointSet(tuple(entries))


def _minpoly_in(gamma: List[int], g: List[int], p: int) -> Dense:
    """Minimal polynomial over F_p of gamma in F_p[x]/(g), via its Frobenius conjugates."""
    conjugates = [gamma]
    nxt = gf_pow_mod(gamma, p, g, p, ZZ)
    while nxt != gamma:
        conjugates.append(nxt)
        nxt = gf_pow_mod(nxt, p, g, p, ZZ)
    # product of (X - c), coefficients in F_p[x]/(g), X-coefficients kept ascending
    acc: List[List[int]] = [[ZZ(1)]]
    for c in conjugates:
        neg_c = gf_sub([], c, p, ZZ)
        shifted: List[List[int]] = [[]] + acc
        for k, a in enumerate(acc):
            shifted[k] = gf_rem(gf_add(shifted[k], gf_mul(a, neg_c, p, ZZ), p, ZZ), g, p, ZZ)
        acc = shifted
    coeffs = []
    for a in reversed(acc):
        if gf_degree(a) > 0:
            raise NotIrreducible("minimal polynomial has non-constant coefficients")
        coeffs.append(int(a[0]) if a else 0)
    return tuple(coeffs)


def apply(psi: ResidueMap, point: Union[ResiduePoint, int, None]) -> ResiduePoint:
    """Image of a conjugacy class under psi."""
    p = psi.p
    point = ResiduePoint.coerce(point, p)
    if point.is_infinity:
        return ResiduePoint.coerce(psi.value_at(None), p)
    g = list(point.minpoly)
    top = gf_rem(list(psi.num), g, p, ZZ)
    bottom = gf_rem(list(psi.den), g, p, ZZ)
    if not bottom:
        return ResiduePoint.infinity(p)
    s, _, h = gf_gcdex(bottom, g, p, ZZ)
    if h != [1]:
        raise NotIrreducible(f"{_fmt(g, p)} is not irreducible")
    gamma = gf_rem(gf_mul(top, s, p, ZZ), g, p, ZZ)
    return ResiduePoint(p, _minpoly_in(gamma, g, p))


@dataclass(frozen=True)
class PostcriticalTrace:
    avoids: bool
    orbit: Tuple[ResiduePoint, ...]
    hits: Tuple[ResiduePoint, ...]

    def __bool__(self):
        return self.avoids


def forward_orbit(psi: ResidueMap, start: ResiduePoint) -> List[ResiduePoint]:
    """psi(start), psi^2(start), ... up to the first revisit."""
    seen: List[ResiduePoint] = []
    x = apply(psi, start)
    while x not in seen:
        seen.append(x)
        x = apply(psi, x)
    return seen


def postcritical_avoids(
    psi: ResidueMap,
    targets: Iterable[Union[ResiduePoint, int, None]],
    bound: Optional[int] = None,
) -> PostcriticalTrace:
    """Whether the forward orbits of all critical points miss every target.

    Orbits over a finite field are eventually periodic, so the trace always
    closes; `bound` only flags unusually long orbits in the log.
    """
    p = psi.p
    wanted = [ResiduePoint.coerce(t, p) for t in targets]
    orbit: List[ResiduePoint] = []
    for entry in critical_points(psi).entries:
        for x in forward_orbit(psi, entry.point):
            if x not in orbit:
                orbit.append(x)
    if bound is not None and len(orbit) > bound:
        logger.warning(f"postcritical orbit of {psi} has {len(orbit)} classes, above {bound}")
    hits = tuple(t for t in wanted if t in orbit)
    trace = PostcriticalTrace(not hits, tuple(orbit), hits)
    logger.info(
        f"postcritical set of {psi}: {{{', '.join(str(x) for x in orbit)}}}; "
        f"avoids targets: {trace.avoids}"
    )
    return trace


@dataclass(frozen=True)
class SeparabilityClass:
    kind: str
    r: int = 0

    SEPARABLE = "separable"
    INSEPARABLE_NOT_PURE = "inseparable_not_pure"
    PURELY_INSEPARABLE = "purely_inseparable"

    @property
    def is_purely_inseparable(self) -> bool:
        return self.kind == self.PURELY_INSEPARABLE

    def __str__(self):
        if self.kind == self.PURELY_INSEPARABLE:
            return f"PurelyInseparable({self.r})"
        if self.kind == self.SEPARABLE:
            return "Separable"
        return "InseparableNotPure"


def _frobenius_root(f: Dense, p: int) -> Dense:
    """f(z) = g(z^p) -> g(z)."""
    ascending = list(reversed(f))
    return tuple(reversed(ascending[::p]))


def separability_class(psi: ResidueMap) -> SeparabilityClass:
    if psi.is_constant:
        raise ValueError("separability of a constant residue map")
    r = 0
    current = psi
    while not wronskian(current):
        # coprime num/den with vanishing Wronskian are both polynomials in z^p
        current = ResidueMap(
            psi.p,
            _frobenius_root(current.num, psi.p),
            _frobenius_root(current.den, psi.p),
        )
        r += 1
    if r == 0:
        return SeparabilityClass(SeparabilityClass.SEPARABLE)
    if current.degree == 1:
        return SeparabilityClass(SeparabilityClass.PURELY_INSEPARABLE, r)
    return SeparabilityClass(SeparabilityClass.INSEPARABLE_NOT_PURE, r)


@dataclass(frozen=True)
class BackwardCounts:
    counts: Tuple[int, ...]
    simple: bool


def backward_counts(psi: ResidueMap, target: Union[ResiduePoint, int, None], depth: int) -> BackwardCounts:
    """Number of points of psi^-k(target) over F_p-bar for k = 0..depth."""
    p = psi.p
    level: Dict[ResiduePoint, int] = {ResiduePoint.coerce(target, p): 1}
    counts = [ResiduePoint.coerce(target, p).degree]
    simple = True
    for _ in range(depth):
        nxt: Dict[ResiduePoint, int] = {}
        for point in level:
            fiber = preimages(psi, point)
            simple = simple and fiber.is_simple
            for entry in fiber.entries:
                nxt[entry.point] = entry.count
        level = nxt
        counts.append(sum(level.values()))
    return BackwardCounts(tuple(counts), simple)
