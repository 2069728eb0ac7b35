# services/ext_field.py
"""
Exact arithmetic in the Eisenstein extension K_e = Q[pi]/(pi^e - p).

Valuations are additive and normalized so that v(p) = 1; an element
sum c_i pi^i has valuation min(v_p(c_i) + i/e) over its nonzero terms.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

from sympy import isprime, multiplicity
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from services.errors import DivisionByZero, NotAUnit

logger = logging.getLogger(__name__)

INFINITY = math.inf

Scalar = Union[int, Fraction]


def vp(q: Fraction, p: int):
    """p-adic valuation of a rational number."""
    q = Fraction(q)
    if q == 0:
        return INFINITY
    return multiplicity(p, abs(q.numerator)) - multiplicity(p, q.denominator)


@dataclass(frozen=True)
class FieldSpec:
    p: int
    e: int = 1

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.e < 1:
            raise ValueError(f"ramification index must be positive, got {self.e}")

    def element(self, coeffs: Iterable[Scalar]) -> "ExtElem":
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > self.e:
            raise ValueError(f"expected at most {self.e} coefficients, got {len(cs)}")
        cs += [Fraction(0)] * (self.e - len(cs))
        return ExtElem(self, tuple(cs))

    def const(self, c: Scalar) -> "ExtElem":
        return self.element([c])

    def zero(self) -> "ExtElem":
        return self.const(0)

    def one(self) -> "ExtElem":
        return self.const(1)

    def pi(self) -> "ExtElem":
        return self.pi_power(1)

    def pi_power(self, n: int) -> "ExtElem":
        """pi^n for any integer n; pi^e = p."""
        q, r = divmod(n, self.e)
        coeffs = [Fraction(0)] * self.e
        coeffs[r] = Fraction(self.p) ** q
        return ExtElem(self, tuple(coeffs))

    def lift(self, x: Union[int, "ExtElem"]) -> "ExtElem":
        if isinstance(x, ExtElem):
            if x.field != self:
                raise ValueError(f"element of {x.field} used in {self}")
            return x
        return self.const(x)

    def in_value_group(self, q) -> bool:
        return q == INFINITY or (Fraction(q) * self.e).denominator == 1

    def refine(self, e_needed: int) -> "FieldSpec":
        return FieldSpec(self.p, math.lcm(self.e, e_needed))

    def parse(self, text: Sequence[str]) -> "ExtElem":
        """Parse the text form: a list of "num/den" strings, index i = coefficient of pi^i."""
        return self.element(Fraction(str(t)) for t in text)


@dataclass(frozen=True)
class ExtElem:
    field: FieldSpec
    coeffs: Tuple[Fraction, ...]

    # ring structure

    def _coerce(self, other) -> "ExtElem":
        return self.field.lift(other)

    def __add__(self, other):
        other = self._coerce(other)
        return ExtElem(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return ExtElem(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        e, p = self.field.e, self.field.p
        out = [Fraction(0)] * e
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if not b:
                    continue
                k = i + j
                if k >= e:
                    out[k - e] += a * b * p
                else:
                    out[k] += a * b
        return ExtElem(self.field, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * inv(self._coerce(other))

    def __rtruediv__(self, other):
        return self._coerce(other) * inv(self)

    def __pow__(self, n: int):
        if n < 0:
            return inv(self) ** (-n)
        result, base = self.field.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self):
        return any(self.coeffs)

    def is_zero(self) -> bool:
        return not self

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "pi" if i == 1 else f"pi^{i}"
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(terms) if terms else "0"

    def to_text(self) -> list:
        return [str(c) for c in self.coeffs]


def val(x: ExtElem):
    """Additive valuation with v(p) = 1; v(0) = +inf."""
    p, e = x.field.p, x.field.e
    best = INFINITY
    for i, c in enumerate(x.coeffs):
        if c:
            best = min(best, vp(c, p) + Fraction(i, e))
    return best


def add(x: ExtElem, y: ExtElem) -> ExtElem:
    return x + y


def mul(x: ExtElem, y: ExtElem) -> ExtElem:
    return x * y


def neg(x: ExtElem) -> ExtElem:
    return -x


def multiplication_rows(x: ExtElem) -> List[List]:
    """Matrix of y -> x*y over QQ in the pi-basis; column j holds x * pi^j."""
    field = x.field
    e = field.e
    columns = [(x * field.pi_power(j)).coeffs for j in range(e)]
    return [[QQ(columns[j][i].numerator, columns[j][i].denominator) for j in range(e)] for i in range(e)]


def inv(x: ExtElem) -> ExtElem:
    """Solve x*y = 1 as a linear system over Q in the pi-basis."""
    if not x:
        raise DivisionByZero("inverse of zero in K_e")
    field = x.field
    if x.is_rational():
        return field.const(1 / x.coeffs[0])
    e = field.e
    M = DomainMatrix(multiplication_rows(x), (e, e), QQ)
    rhs = DomainMatrix([[QQ(1)]] + [[QQ(0)] for _ in range(e - 1)], (e, 1), QQ)
    sol = M.lu_solve(rhs).to_Matrix()
    coeffs = tuple(Fraction(int(s.p), int(s.q)) for s in sol)
    return ExtElem(field, coeffs)


def reduce_unit(x: ExtElem) -> int:
    """Residue of a unit in F_p."""
    v = val(x)
    if v != 0:
        raise NotAUnit(f"{x} has valuation {v}, not a unit")
    p = x.field.p
    c0 = x.coeffs[0]
    return (c0.numerator * pow(c0.denominator, -1, p)) % p


def reduce_integral(x: ExtElem) -> int:
    """Residue of an integral element: 0 on the maximal ideal."""
    v = val(x)
    if v > 0:
        return 0
    return reduce_unit(x)


def embed(x: ExtElem, e_new: int) -> ExtElem:
    """Re-index coefficients along K_e -> K_e', e | e' (pi_e = pi_e'^(e'/e))."""
    e = x.field.e
    if e_new % e:
        raise ValueError(f"cannot embed K_{e} into K_{e_new}")
    step = e_new // e
    target = FieldSpec(x.field.p, e_new)
    coeffs = [Fraction(0)] * e_new
    for i, c in enumerate(x.coeffs):
        coeffs[i * step] = c
    return ExtElem(target, tuple(coeffs))


# polynomials over K_e are tuples of ExtElem, constant term first

Polynomial = Tuple[ExtElem, ...]


def poly_trim(f: Sequence[ExtElem]) -> Polynomial:
    f = list(f)
    while f and not f[-1]:
        f.pop()
    return tuple(f)


def poly_degree(f: Sequence[ExtElem]) -> int:
    f = poly_trim(f)
    return len(f) - 1 if f else -1


def poly_add(f: Sequence[ExtElem], g: Sequence[ExtElem]) -> Polynomial:
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        a = f[i] if i < len(f) else None
        b = g[i] if i < len(g) else None
        out.append(a + b if a is not None and b is not None else (a if a is not None else b))
    return poly_trim(out)


def poly_scale(f: Sequence[ExtElem], c: ExtElem) -> Polynomial:
    return poly_trim(a * c for a in f)


def poly_sub(f: Sequence[ExtElem], g: Sequence[ExtElem]) -> Polynomial:
    return poly_add(f, tuple(-b for b in g))


def poly_mul(f: Sequence[ExtElem], g: Sequence[ExtElem]) -> Polynomial:
    if not f or not g:
        return ()
    field = f[0].field
    out = [field.zero() for _ in range(len(f) + len(g) - 1)]
    for i, a in enumerate(f):
        if not a:
            continue
        for j, b in enumerate(g):
            if b:
                out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_eval(f: Sequence[ExtElem], x: ExtElem) -> ExtElem:
    acc = x.field.zero()
    for a in reversed(f):
        acc = acc * x + a
    return acc


def poly_gauss_val(f: Sequence[ExtElem]):
    """Minimum coefficient valuation (the Gauss norm in additive form)."""
    return min((val(a) for a in f if a), default=INFINITY)
