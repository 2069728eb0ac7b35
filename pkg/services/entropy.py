# services/entropy.py
"""
Invariant-measure masses, measure-theoretic entropy and Gurevich entropy of a MarkovSystem.

Masses follow the Jacobian rule: a state U mapped injectively with local
degree delta pushes mass(U) forward to (d/delta) * mass(U). Tail families are
summed in closed form. Gurevich entropy comes from the first-return generating
function at a core state, with the convergence conditions checked by exact
root isolation.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix, identity
from sympy import Matrix, Poly, QQ, Rational, Symbol, cancel, factor_list, factorint, fraction, log
from sympy.polys.matrices import DomainMatrix

from config import POWER_MAX_ITER, POWER_TOL
from services.errors import (
    CountableState,
    NegativeMass,
    NoRootInDisk,
    NotStronglyConnected,
    SingularSystem,
)
from services.julia_struct import MarkovSystem, TailFamily, require_structure

logger = logging.getLogger(__name__)

Z = Symbol("z")


def _fraction(x) -> Fraction:
    x = Rational(x)
    return Fraction(int(x.p), int(x.q))


# ---------------------------------------------------------------------------
# masses and measure-theoretic entropy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyMass:
    """Depth-k states of a family together carry depth_factor^k * scale."""

    depth_factor: Fraction
    scale: Fraction
    aggregate: Fraction

    def at_depth(self, k: int) -> Fraction:
        return self.depth_factor ** k * self.scale


@dataclass
class MeasureSolution:
    core_masses: Dict[str, Fraction]
    family_masses: Dict[str, FamilyMass]
    total_check: Fraction

    def mass_of(self, names: Sequence[str]) -> Fraction:
        return sum((self.core_masses.get(name, Fraction(0)) for name in names), Fraction(0))


def _family_factor(sys: MarkovSystem, family: TailFamily) -> Fraction:
    """Sum over k >= 1 of m * (branch * delta / d)^k, the family mass per unit target mass."""
    q = Fraction(family.branch * family.degree, sys.d)
    if q >= 1:
        raise SingularSystem(f"tail family {family.key} carries infinite mass")
    return family.multiplicity * q / (1 - q)


def solve_masses(sys: MarkovSystem) -> MeasureSolution:
    require_structure(sys)
    names = sys.uncountable
    if not names:
        raise SingularSystem("no uncountable states")
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    M = Matrix.zeros(n, n)
    rhs = Matrix.zeros(n, 1)
    anchored = False
    for name in names:
        i = index[name]
        state = sys.state(name)
        M[i, i] += Rational(sys.d, state.degree)
        if sys.covers_everything(name):
            rhs[i] = 1
            anchored = True
            continue
        for target in sys.successors(name):
            M[i, index[target]] -= 1
        for family in sys.families_from(name):
            f = _family_factor(sys, family)
            M[i, index[family.target]] -= Rational(f.numerator, f.denominator)

    if anchored:
        if M.rank() < n:
            raise SingularSystem("mass equations are singular")
        solution = [_fraction(x) for x in M.LUsolve(rhs)]
    else:
        # no state maps onto everything: take the kernel and scale to total mass 1
        kernel = M.nullspace()
        if len(kernel) != 1:
            raise SingularSystem(f"mass equations have a {len(kernel)}-dimensional kernel")
        solution = [_fraction(x) for x in kernel[0]]
        total = sum(solution, Fraction(0)) + sum(
            _family_factor(sys, f) * solution[index[f.target]] for f in sys.families
        )
        if total == 0:
            raise SingularSystem("kernel vector has zero total mass")
        solution = [x / total for x in solution]

    core = {name: solution[index[name]] for name in names}
    for state in sys.states:
        if state.countable:
            core[state.name] = Fraction(0)
    negative = [name for name, mass in core.items() if mass < 0]
    if negative:
        raise NegativeMass(f"negative mass on {negative}")

    families = {}
    for family in sys.families:
        target_mass = core[family.target]
        families[family.key] = FamilyMass(
            depth_factor=Fraction(family.branch * family.degree, sys.d),
            scale=target_mass * family.multiplicity,
            aggregate=_family_factor(sys, family) * target_mass,
        )
    total = sum(core.values(), Fraction(0)) + sum((f.aggregate for f in families.values()), Fraction(0))
    logger.info(f"masses solved: {', '.join(f'{k}={v}' for k, v in core.items())}; total {total}")
    return MeasureSolution(core, families, total)


@dataclass(frozen=True)
class ExactLogCombo:
    """sum of q * log(n) over (q, n) terms, n prime."""

    terms: Tuple[Tuple[Fraction, int], ...]

    @property
    def nats(self) -> float:
        return sum(float(q) * math.log(n) for q, n in self.terms)

    def to_sympy(self):
        return sum((Rational(q.numerator, q.denominator) * log(n) for q, n in self.terms), Rational(0))

    def __str__(self):
        return " + ".join(f"({q})*log({n})" for q, n in self.terms) or "0"


def _log_ratio(d: int, delta: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for prime, k in factorint(d).items():
        out[int(prime)] = out.get(int(prime), 0) + int(k)
    for prime, k in factorint(delta).items():
        out[int(prime)] = out.get(int(prime), 0) - int(k)
    return out


def measure_entropy(sys: MarkovSystem, masses: MeasureSolution) -> ExactLogCombo:
    """Rokhlin integral of log(d / local degree) against the invariant masses."""
    if masses.total_check != 1:
        raise SingularSystem(f"masses sum to {masses.total_check}, not 1")
    acc: Dict[int, Fraction] = {}

    def add(mass: Fraction, delta: int):
        for prime, k in _log_ratio(sys.d, delta).items():
            acc[prime] = acc.get(prime, Fraction(0)) + mass * k

    for name in sys.uncountable:
        add(masses.core_masses[name], sys.state(name).degree)
    for family in sys.families:
        add(masses.family_masses[family.key].aggregate, family.degree)
    terms = tuple((q, prime) for prime, q in sorted(acc.items()) if q != 0)
    combo = ExactLogCombo(terms)
    logger.info(f"measure entropy {combo} = {combo.nats:.12g}")
    return combo


@dataclass(frozen=True)
class IntervalNullReport:
    coefficient: Fraction
    null: bool

    @property
    def leaf_mass_one(self) -> bool:
        # a null spine leaves the whole mass on the leaves
        return self.null


def verify_interval_null(subdivision: Sequence[Tuple[int, int, int]], d: int) -> IntervalNullReport:
    """mu(I) = coefficient * mu(I) with coefficient = sum delta_i / d^b_i over (b_i, c_i, delta_i)."""
    coefficient = sum((Fraction(delta, d ** b) for b, _, delta in subdivision), Fraction(0))
    return IntervalNullReport(coefficient, coefficient < 1)


# ---------------------------------------------------------------------------
# generating functions and Gurevich entropy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalGenFn:
    """numerator/denominator, ascending rational coefficients, coprime with denominator(0) = 1."""

    numerator: Tuple[Fraction, ...]
    denominator: Tuple[Fraction, ...]

    @classmethod
    def from_expr(cls, expr) -> "RationalGenFn":
        top, bottom = fraction(cancel(expr))
        num = [_fraction(c) for c in reversed(Poly(top, Z).all_coeffs())]
        den = [_fraction(c) for c in reversed(Poly(bottom, Z).all_coeffs())]
        if den[0] == 0:
            raise SingularSystem("generating function has a pole at 0")
        scale = den[0]
        num = [c / scale for c in num]
        den = [c / scale for c in den]
        while len(num) > 1 and num[-1] == 0:
            num.pop()
        return cls(tuple(num), tuple(den))

    def to_expr(self):
        def poly(cs):
            return sum((Rational(c.numerator, c.denominator) * Z ** i for i, c in enumerate(cs)), Rational(0))

        return poly(self.numerator) / poly(self.denominator)

    def one_minus_numerator(self) -> Tuple[Fraction, ...]:
        """Numerator of 1 - F, i.e. denominator - numerator."""
        n = max(len(self.numerator), len(self.denominator))
        out = []
        for i in range(n):
            a = self.denominator[i] if i < len(self.denominator) else Fraction(0)
            b = self.numerator[i] if i < len(self.numerator) else Fraction(0)
            out.append(a - b)
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return tuple(out)

    def series(self, order: int) -> List[Fraction]:
        """Power-series coefficients c_0..c_order."""
        den = self.denominator
        out: List[Fraction] = []
        for k in range(order + 1):
            acc = self.numerator[k] if k < len(self.numerator) else Fraction(0)
            for j in range(1, min(k, len(den) - 1) + 1):
                acc -= den[j] * out[k - j]
            out.append(acc / den[0])
        return out

    def __str__(self):
        return str(self.to_expr())


def _check_first_return_state(sys: MarkovSystem, state: str) -> None:
    if sys.state(state).countable:
        raise CountableState(f"{state} is countable")
    forward = sys.reachable(state)
    backward = sys.reachable(state, reverse=True)
    missing = [name for name in sys.uncountable if name not in forward or name not in backward]
    if missing:
        raise NotStronglyConnected(f"states {missing} are not on a loop through {state}")


def edge_weights(sys: MarkovSystem) -> Dict[Tuple[str, str], object]:
    """Generating-function weights between uncountable core states, tail families collapsed."""
    weights: Dict[Tuple[str, str], object] = {}
    for name in sys.uncountable:
        for target in sys.successors(name):
            weights[(name, target)] = weights.get((name, target), 0) + Z
    for family in sys.families:
        key = (family.entry, family.target)
        beta = family.branch
        composite = family.multiplicity * beta * Z ** 2 / (1 - beta * Z)
        weights[key] = weights.get(key, 0) + composite
    return weights


def first_return_gf(sys: MarkovSystem, state: str) -> RationalGenFn:
    """F(z) = W_aa + W_aB (I - W_BB)^-1 W_Ba over the field Q(z)."""
    require_structure(sys)
    _check_first_return_state(sys, state)
    weights = edge_weights(sys)
    others = [name for name in sys.uncountable if name != state]
    K = QQ.frac_field(Z)

    def w(u: str, v: str):
        return K.from_sympy(cancel(weights.get((u, v), 0)))

    F = w(state, state)
    if others:
        n = len(others)
        rows = [
            [(K.one if i == j else K.zero) - w(u, v) for j, v in enumerate(others)]
            for i, u in enumerate(others)
        ]
        lhs = DomainMatrix(rows, (n, n), K)
        rhs = DomainMatrix([[w(u, state)] for u in others], (n, 1), K)
        solved = lhs.lu_solve(rhs)
        back = solved.to_Matrix()
        for j, v in enumerate(others):
            F = F + w(state, v) * K.from_sympy(back[j, 0])
    gf = RationalGenFn.from_expr(K.to_sympy(F))
    logger.info(f"first-return generating function at {state}: {gf}")
    return gf


@dataclass(frozen=True)
class AlgebraicLog:
    """log(lam), lam the unique root of minpoly (ascending integers) in [lo, hi]."""

    minpoly: Tuple[int, ...]
    interval: Tuple[Fraction, Fraction]
    value: float

    @property
    def nats(self) -> float:
        return math.log(self.value)


_EPS_LADDER = [Rational(1, 10 ** k) for k in (4, 8, 16, 24, 32)]


def _modulus_bounds(poly: Poly, eps) -> List[Tuple[Fraction, Fraction, Tuple]]:
    """(lower^2, upper^2, region) for every root region of poly at isolation width eps."""
    real, complex_ = poly.intervals(all=True, eps=eps)
    out = []
    for (a, b), _ in real:
        a, b = _fraction(a), _fraction(b)
        lower = Fraction(0) if a <= 0 <= b else min(abs(a), abs(b))
        upper = max(abs(a), abs(b))
        out.append((lower ** 2, upper ** 2, ("real", a, b)))
    for ((x1, y1), (x2, y2)), _ in complex_:
        x1, y1, x2, y2 = (_fraction(v) for v in (x1, y1, x2, y2))
        dx = Fraction(0) if x1 <= 0 <= x2 else min(abs(x1), abs(x2))
        dy = Fraction(0) if y1 <= 0 <= y2 else min(abs(y1), abs(y2))
        far_x, far_y = max(abs(x1), abs(x2)), max(abs(y1), abs(y2))
        out.append((dx ** 2 + dy ** 2, far_x ** 2 + far_y ** 2, ("complex", x1, y1, x2, y2)))
    return out


def _roots_outside(poly: Poly, radius: Fraction) -> bool:
    """Certify that every root of poly has modulus > radius."""
    if poly.degree() <= 0:
        return True
    for eps in _EPS_LADDER:
        undecided = False
        for lower, upper, _ in _modulus_bounds(poly, eps):
            if upper <= radius ** 2:
                return False
            if lower <= radius ** 2:
                undecided = True
        if not undecided:
            return True
    raise NoRootInDisk(f"could not separate the roots of {poly.as_expr()} from |z| = {float(radius)}")


def _no_smaller_root(poly: Poly, r_lo: Fraction, r_hi: Fraction) -> bool:
    """No root of poly other than r in [r_lo, r_hi] has modulus below r, up to the isolation width."""
    for eps in _EPS_LADDER:
        floor = max(r_lo - _fraction(eps), Fraction(0)) ** 2
        skipped = False
        undecided = False
        for lower, upper, region in _modulus_bounds(poly, eps):
            if not skipped and region[0] == "real" and region[1] <= r_hi and region[2] >= r_lo:
                skipped = True
                continue
            if upper < floor:
                return False
            if lower < floor:
                undecided = True
        if not undecided:
            return True
    return False


def gurevich_entropy(sys: MarkovSystem, state: Optional[str] = None) -> AlgebraicLog:
    """-log R from the smallest positive root R of 1 - F, with the convergence conditions certified."""
    state = state or sys.root
    gf = first_return_gf(sys, state)
    coeffs = gf.one_minus_numerator()
    N = Poly([Rational(c.numerator, c.denominator) for c in reversed(coeffs)], Z, domain=QQ)
    if N.degree() < 1:
        raise NoRootInDisk(f"1 - F = {N.as_expr()} has no roots")
    positive = N.intervals(inf=0)
    if not positive:
        raise NoRootInDisk("1 - F has no positive real root")
    (a, b), _ = positive[0]
    a, b = N.refine_root(a, b, eps=Rational(1, 10 ** 30))
    r_lo, r_hi = _fraction(a), _fraction(b)
    if r_lo <= 0:
        raise NoRootInDisk("smallest positive root could not be separated from 0")

    den = Poly([Rational(c.numerator, c.denominator) for c in reversed(gf.denominator)], Z, domain=QQ)
    if not _roots_outside(den, r_hi):
        raise NoRootInDisk(f"F has a pole inside |z| <= {float(r_hi)}")
    if not _no_smaller_root(N, r_lo, r_hi):
        raise NoRootInDisk("1 - F has a root of smaller modulus than its smallest positive root")

    _, factors = factor_list(N.as_expr(), Z)
    minimal = None
    for g, _ in factors:
        g = Poly(g, Z)
        if g.count_roots(a, b) > 0:
            minimal = g
            break
    if minimal is None:
        raise NoRootInDisk("isolated root is not a root of any factor")
    # lam = 1/r: reverse the coefficients of r's minimal polynomial
    lam_coeffs = [_fraction(c) for c in minimal.all_coeffs()]
    scale = math.lcm(*(c.denominator for c in lam_coeffs))
    ints = [int(c * scale) for c in lam_coeffs]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    while ints and ints[-1] == 0:
        ints.pop()
    if ints[-1] < 0:
        ints = [-x for x in ints]
    lo, hi = 1 / r_hi, 1 / r_lo
    value = float((lo + hi) / 2)
    result = AlgebraicLog(tuple(ints), (lo, hi), value)
    logger.info(f"Gurevich entropy at {state}: lambda ~ {value:.12g}, h = {result.nats:.12g}")
    return result


def same_growth(x: AlgebraicLog, y: AlgebraicLog) -> bool:
    """Both describe the same algebraic number."""
    return x.minpoly == y.minpoly and x.interval[0] <= y.interval[1] and y.interval[0] <= x.interval[1]


# ---------------------------------------------------------------------------
# finite truncations
# ---------------------------------------------------------------------------

def lumped_graph(sys: MarkovSystem, depth: int) -> Tuple[List[str], Dict[Tuple[int, int], int]]:
    """Quotient of the depth-truncated graph: all depth-k states of a family form one node.

    The partition is equitable, so the quotient has the same spectral radius and
    the same closed-path counts at core states.
    """
    require_structure(sys)
    labels = list(sys.uncountable)
    index = {name: i for i, name in enumerate(labels)}
    family_nodes: Dict[Tuple[int, int], int] = {}
    for f_index, family in enumerate(sys.families):
        for k in range(1, depth + 1):
            family_nodes[(f_index, k)] = len(labels)
            labels.append(f"{family.key}@{k}")
    weights: Dict[Tuple[int, int], int] = {}

    def add(i: int, j: int, w: int):
        weights[(i, j)] = weights.get((i, j), 0) + w

    for name in sys.uncountable:
        for target in sys.successors(name):
            add(index[name], index[target], 1)
    for f_index, family in enumerate(sys.families):
        for k in range(1, depth + 1):
            node = family_nodes[(f_index, k)]
            add(index[family.entry], node, family.multiplicity * family.branch ** k)
            below = index[family.target] if k == 1 else family_nodes[(f_index, k - 1)]
            add(node, below, 1)
    return labels, weights


def _spectral_radius(weights: Dict[Tuple[int, int], int], n: int, tol: float, max_iter: int) -> float:
    if n == 0:
        return 0.0
    keys = sorted(weights)
    rows = [i for i, _ in keys]
    cols = [j for _, j in keys]
    data = [float(weights[key]) for key in keys]
    A = csr_matrix((data, (rows, cols)), shape=(n, n), dtype=np.float64)
    # A + I is aperiodic with spectral radius rho(A) + 1
    B = A + identity(n, format="csr", dtype=np.float64)
    x = np.ones(n, dtype=np.float64)
    estimate = None
    for iteration in range(max_iter):
        y = B @ x
        norm = float(np.max(np.abs(y)))
        x = y / norm
        if estimate is not None and abs(norm - estimate) <= tol * norm:
            logger.debug(f"power iteration converged after {iteration} steps")
            estimate = norm
            break
        estimate = norm
    else:
        logger.warning(f"power iteration stopped at {max_iter} steps without reaching {tol}")
    return max(estimate - 1.0, 0.0)


def truncation_entropy(
    sys: MarkovSystem,
    depth: int,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> float:
    """log of the spectral radius of the graph keeping family states of depth <= depth."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    labels, weights = lumped_graph(sys, depth)
    rho = _spectral_radius(weights, len(labels), tol, max_iter)
    # integer matrices have spectral radius 0 or >= 1
    if rho < 1.0:
        return 0.0
    return math.log(rho)


def truncation_sweep(sys: MarkovSystem, depths: Sequence[int], workers: int = 1) -> List[Tuple[int, float]]:
    depths = list(depths)
    if workers <= 1:
        values = [truncation_entropy(sys, depth) for depth in depths]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda depth: truncation_entropy(sys, depth), depths))
    return list(zip(depths, values))


def path_count_series(sys: MarkovSystem, state: str, order: int) -> List[int]:
    """Number of closed paths of length n at state for n = 0..order, by exact matrix powers."""
    labels, weights = lumped_graph(sys, max(order, 1))
    n = len(labels)
    A = np.zeros((n, n), dtype=object)
    A[:, :] = 0
    for (i, j), w in weights.items():
        A[i, j] = w
    start = labels.index(state)
    row = np.zeros(n, dtype=object)
    row[:] = 0
    row[start] = 1
    counts = [1]
    for _ in range(order):
        row = row.dot(A)
        counts.append(int(row[start]))
    return counts


def sandwich(h_mu: float, h_top: float, d: int) -> bool:
    return 0 <= h_mu <= h_top + 1e-12 and h_top <= math.log(d) + 1e-12
