# services/tropical.py
"""
Newton-polygon (min-plus) evaluation of polynomials along center-rays.

Coordinates are valuations: the point zeta(c, p^-t) sits at parameter t, and
|f(zeta(0, p^-t))| = p^-trop_eval(trop_of(f), t).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Sequence, Tuple

from services.errors import ZeroPolynomial
from services.ext_field import ExtElem, Polynomial, poly_trim, val

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TropPoly:
    terms: Tuple[Tuple[int, Fraction], ...]

    def __post_init__(self):
        if not self.terms:
            raise ZeroPolynomial("tropicalization of the zero polynomial")
        indices = [i for i, _ in self.terms]
        if len(set(indices)) != len(indices):
            raise ValueError("repeated exponent in TropPoly")

    @property
    def degree(self) -> int:
        return max(i for i, _ in self.terms)

    def minimizers(self, t) -> List[int]:
        values = [(v + i * t, i) for i, v in self.terms]
        best = min(value for value, _ in values)
        return sorted(i for value, i in values if value == best)


@dataclass(frozen=True)
class AffinePiece:
    start: Fraction
    end: Fraction
    slope: int
    intercept: Fraction

    def __call__(self, t) -> Fraction:
        return self.slope * Fraction(t) + self.intercept


@dataclass(frozen=True)
class PiecewiseAffine:
    pieces: Tuple[AffinePiece, ...]

    @property
    def breakpoints(self) -> List[Fraction]:
        return [piece.end for piece in self.pieces[:-1]]

    @property
    def domain(self) -> Tuple[Fraction, Fraction]:
        return self.pieces[0].start, self.pieces[-1].end

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        for piece in self.pieces:
            if piece.start <= t <= piece.end:
                return piece(t)
        raise ValueError(f"{t} outside {self.domain}")

    def __sub__(self, other: "PiecewiseAffine") -> "PiecewiseAffine":
        if self.domain != other.domain:
            raise ValueError("profiles on different ranges")
        cuts = sorted(set(self.breakpoints) | set(other.breakpoints))
        lo, hi = self.domain
        edges = [lo] + cuts + [hi]
        pieces = []
        for a, b in zip(edges, edges[1:]):
            mid = (a + b) / 2
            f, g = self._piece_at(mid), other._piece_at(mid)
            pieces.append(AffinePiece(a, b, f.slope - g.slope, f.intercept - g.intercept))
        return PiecewiseAffine(tuple(pieces)).merged()

    def _piece_at(self, t) -> AffinePiece:
        for piece in self.pieces:
            if piece.start <= t <= piece.end:
                return piece
        raise ValueError(f"{t} outside {self.domain}")

    def merged(self) -> "PiecewiseAffine":
        out: List[AffinePiece] = []
        for piece in self.pieces:
            if out and out[-1].slope == piece.slope and out[-1].intercept == piece.intercept:
                last = out.pop()
                piece = AffinePiece(last.start, piece.end, piece.slope, piece.intercept)
            out.append(piece)
        return PiecewiseAffine(tuple(out))


def taylor_shift(f: Sequence[ExtElem], c: ExtElem) -> Polynomial:
    """Coefficients of f(c + T)."""
    f = poly_trim(f)
    if not f:
        return ()
    field = c.field
    n = len(f)
    powers = [field.one()]
    for _ in range(n):
        powers.append(powers[-1] * c)
    out = []
    for k in range(n):
        acc = field.zero()
        for i in range(k, n):
            if f[i]:
                acc = acc + f[i] * powers[i - k] * comb(i, k)
        out.append(acc)
    return poly_trim(out)


def trop_of(f: Sequence[ExtElem]) -> TropPoly:
    terms = tuple((i, val(a)) for i, a in enumerate(f) if a)
    if not terms:
        raise ZeroPolynomial("polynomial is identically zero")
    return TropPoly(terms)


def trop_eval(T: TropPoly, t) -> Fraction:
    t = Fraction(t)
    return min(v + i * t for i, v in T.terms)


def slopes(T: TropPoly, t) -> Tuple[int, int]:
    """(left, right) one-sided derivatives of t -> trop_eval(T, t)."""
    winners = T.minimizers(Fraction(t))
    return winners[-1], winners[0]


def trop_profile(T: TropPoly, t0, t1) -> PiecewiseAffine:
    """trop_eval(T, .) on [t0, t1] with its exact breakpoints."""
    t0, t1 = Fraction(t0), Fraction(t1)
    if t0 > t1:
        raise ValueError(f"empty range [{t0}, {t1}]")
    coeff = dict(T.terms)
    pieces = []
    t = t0
    active = slopes(T, t)[1]
    while True:
        nxt = None
        for i, v in T.terms:
            if i >= active:
                continue
            # term i overtakes the active term where v + i*s = coeff[active] + active*s
            s = (v - coeff[active]) / (active - i)
            if s > t and (nxt is None or s < nxt):
                nxt = s
        if t0 == t1:
            pieces.append(AffinePiece(t0, t1, active, coeff[active]))
            break
        if nxt is None or nxt >= t1:
            pieces.append(AffinePiece(t, t1, active, coeff[active]))
            break
        pieces.append(AffinePiece(t, nxt, active, coeff[active]))
        t = nxt
        active = slopes(T, t)[1]
    return PiecewiseAffine(tuple(pieces)).merged()


def ray_profile(phi, c: ExtElem, t0, t1) -> PiecewiseAffine:
    """v(phi(zeta(c, p^-t))) for t in [t0, t1], as trop(num) - trop(den) after recentring at c."""
    num = taylor_shift(phi.num, c)
    den = taylor_shift(phi.den, c)
    profile = trop_profile(trop_of(num), t0, t1) - trop_profile(trop_of(den), t0, t1)
    logger.debug(f"ray profile at {c} on [{t0}, {t1}]: breakpoints {profile.breakpoints}")
    return profile
