# services/julia_struct.py
"""
Certificates for connected Julia sets and the Markov partition of the sextic family.

Hypotheses of the connectedness criterion are checked from a user-supplied
certificate: (a) x0 is a repelling periodic point, (b) the full preimage of x0
lies on the tree, (c) every tree edge eventually lands in the interval I,
(d) each piece of a subdivision of I is stretched onto I.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from services.berk_points import BerkPoint, FiniteTree, Interval, convex_hull, same_point
from services.errors import MalformedCertificate, NotPeriodic, TemplateViolation
from services.ext_field import ExtElem, FieldSpec, reduce_unit, val
from services.map_action import (
    RationalMap,
    image_point,
    iterate_segment,
    orbit,
    reduction,
    verify_preimages,
)
from services.residue_dyn import (
    ResidueMap,
    SeparabilityClass,
    backward_counts,
    postcritical_avoids,
    separability_class,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Theorem A certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubdivisionPiece:
    interval: Interval
    b: int
    c: int


@dataclass(frozen=True)
class CoveringClaim:
    edge: Interval
    n: int


@dataclass
class TheoremACertificate:
    tree: FiniteTree
    interval: Interval
    x0: BerkPoint
    subdivision: List[SubdivisionPiece]
    preimage_claim: List[Tuple[BerkPoint, int]]
    covering_claim: List[CoveringClaim]
    period: int = 1


@dataclass
class TheoremAReport:
    a: bool
    b: bool
    c: bool
    d: bool
    notes: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.a and self.b and self.c and self.d

    def failed(self) -> List[str]:
        return [name for name in ("a", "b", "c", "d") if not getattr(self, name)]


def _same_interval(u: Interval, v: Interval) -> bool:
    return (same_point(u.x, v.x) and same_point(u.y, v.y)) or (
        same_point(u.x, v.y) and same_point(u.y, v.x)
    )


def check_certificate_shape(cert: TheoremACertificate) -> None:
    I = cert.interval
    if not I.contains(cert.x0):
        raise MalformedCertificate(f"x0 = {cert.x0} is not on I = {I}")
    if not (cert.tree.contains(I.x) and cert.tree.contains(I.y)):
        raise MalformedCertificate("I is not contained in the tree")
    if not cert.tree.is_connected():
        raise MalformedCertificate("tree is not connected")
    if cert.period < 1:
        raise MalformedCertificate("period must be positive")
    total = Fraction(0)
    for piece in cert.subdivision:
        if piece.b < 1:
            raise MalformedCertificate(f"b = {piece.b} must be positive")
        if not (I.contains(piece.interval.x) and I.contains(piece.interval.y)):
            raise MalformedCertificate(f"subdivision piece {piece.interval} leaves I")
        total += piece.interval.length
    if total != I.length:
        raise MalformedCertificate(f"subdivision lengths sum to {total}, I has length {I.length}")
    for claim in cert.covering_claim:
        if claim.n < 0:
            raise MalformedCertificate(f"covering claim with n = {claim.n}")


def _check_repelling(phi: RationalMap, cert: TheoremACertificate, notes: Dict[str, str]) -> bool:
    steps = orbit(phi, cert.x0, cert.period)
    last = steps[-1]
    if not same_point(last.point, cert.x0):
        notes["a"] = f"phi^{cert.period}(x0) = {last.point}, not x0"
        return False
    if last.cumulative_degree < 2:
        notes["a"] = f"x0 is periodic but not repelling (degree {last.cumulative_degree})"
        return False
    notes["a"] = f"x0 has period {cert.period} with multiplier degree {last.cumulative_degree}"
    return True


def _check_preimages(phi: RationalMap, cert: TheoremACertificate, notes: Dict[str, str]) -> bool:
    off_tree = [pt for pt, _ in cert.preimage_claim if not cert.tree.contains(pt)]
    if off_tree:
        notes["b"] = f"claimed preimage {off_tree[0]} is not on the tree"
        return False
    if not verify_preimages(phi, cert.x0, cert.preimage_claim):
        total = sum(degree for _, degree in cert.preimage_claim)
        notes["b"] = f"preimage claim does not certify phi^-1(x0) (claimed degree {total}, map degree {phi.degree})"
        return False
    notes["b"] = f"{len(cert.preimage_claim)} preimages on the tree, degrees sum to {phi.degree}"
    return True


def _check_covering(phi: RationalMap, cert: TheoremACertificate, notes: Dict[str, str]) -> bool:
    I = cert.interval
    for edge in cert.tree.edge_intervals():
        if not any(_same_interval(edge, claim.edge) for claim in cert.covering_claim):
            notes["c"] = f"tree edge {edge} has no covering claim"
            return False
    for claim in cert.covering_claim:
        if not any(_same_interval(edge, claim.edge) for edge in cert.tree.edge_intervals()):
            notes["c"] = f"covering claim {claim.edge} is not a tree edge"
            return False
        for piece in iterate_segment(phi, claim.edge, claim.n).pieces:
            if not (I.contains(piece.image.x) and I.contains(piece.image.y)):
                notes["c"] = f"phi^{claim.n}({claim.edge}) reaches {piece.image}, outside I"
                return False
    notes["c"] = f"{len(cert.covering_claim)} edges land in I"
    return True


def _check_stretching(phi: RationalMap, cert: TheoremACertificate, notes: Dict[str, str]) -> bool:
    for piece in cert.subdivision:
        if piece.c < 2:
            notes["d"] = f"declared expansion {piece.c} on {piece.interval} is below 2"
            return False
        image = iterate_segment(phi, piece.interval, piece.b)
        if not image.single:
            notes["d"] = f"phi^{piece.b} is not a single stretch on {piece.interval}"
            return False
        only = image.pieces[0]
        if not _same_interval(only.image, cert.interval):
            notes["d"] = f"phi^{piece.b}({piece.interval}) = {only.image}, not I"
            return False
        if only.expansion != piece.c:
            notes["d"] = f"phi^{piece.b} stretches {piece.interval} by {only.expansion}, declared {piece.c}"
            return False
    notes["d"] = f"{len(cert.subdivision)} pieces stretched onto I"
    return True


def subdivision_data(phi: RationalMap, cert: TheoremACertificate) -> List[Tuple[int, int, int]]:
    """(b_i, c_i, delta_i) per piece, delta_i the degree of phi^b_i along the piece."""
    out = []
    for piece in cert.subdivision:
        image = iterate_segment(phi, piece.interval, piece.b)
        if not image.single:
            raise MalformedCertificate(f"phi^{piece.b} is not a single stretch on {piece.interval}")
        # a segment is stretched by the directional degree
        out.append((piece.b, piece.c, image.pieces[0].expansion))
    return out


def verify_theorem_a(phi: RationalMap, cert: TheoremACertificate) -> TheoremAReport:
    check_certificate_shape(cert)
    notes: Dict[str, str] = {}
    report = TheoremAReport(
        a=_check_repelling(phi, cert, notes),
        b=_check_preimages(phi, cert, notes),
        c=_check_covering(phi, cert, notes),
        d=_check_stretching(phi, cert, notes),
        notes=notes,
    )
    if report.passed:
        logger.info("connectedness certificate verified")
    else:
        logger.warning(f"connectedness certificate rejected: hypotheses {report.failed()} fail")
    return report


def sextic_certificate(phi: RationalMap) -> TheoremACertificate:
    """The tree/interval certificate for a sextic-template map, with radii scaled by v(a)."""
    a, b = sextic_parameters(phi)
    field_spec = phi.field
    v = val(a)
    zero, one = field_spec.zero(), field_spec.one()

    def pt(center: ExtElem, q) -> BerkPoint:
        return BerkPoint(center, Fraction(q))

    gauss = pt(zero, 0)
    bottom = pt(zero, -v / 2)
    tree = convex_hull([bottom, pt(zero, v / 2), pt(one, v / 2), pt(b, v / 2)])
    I = Interval(gauss, bottom)
    cuts = [pt(zero, -v / 6), pt(zero, -v / 3)]
    subdivision = [
        SubdivisionPiece(Interval(gauss, cuts[0]), 2, 3),
        SubdivisionPiece(Interval(cuts[0], cuts[1]), 2, 3),
        SubdivisionPiece(Interval(cuts[1], bottom), 2, 3),
    ]
    preimages = [(gauss, 3), (cuts[1], 3)]
    covering = [
        CoveringClaim(edge, 0 if _same_interval(edge, I) else 1)
        for edge in tree.edge_intervals()
    ]
    return TheoremACertificate(tree, I, gauss, subdivision, preimages, covering)


# ---------------------------------------------------------------------------
# Infinite branching
# ---------------------------------------------------------------------------

def _step_class(red: ResidueMap) -> SeparabilityClass:
    if red.degree == 1:
        return SeparabilityClass(SeparabilityClass.PURELY_INSEPARABLE, 0)
    return separability_class(red)


def verify_infinite_branching(phi: RationalMap, y: BerkPoint, period: int) -> bool:
    """True when y is a repelling periodic point whose cycle reduction is not purely inseparable."""
    if y.is_type_one:
        raise ValueError(f"{y} is not a type II point")
    steps = orbit(phi, y, period)
    if not same_point(steps[-1].point, y):
        raise NotPeriodic(f"phi^{period}({y}) = {steps[-1].point}")
    if steps[-1].cumulative_degree < 2:
        logger.warning(f"{y} is periodic but not repelling")
        return False
    classes = [_step_class(step.reduction) for step in steps]
    pure = all(cls.is_purely_inseparable for cls in classes)
    if pure:
        r = sum(cls.r for cls in classes)
        logger.info(f"cycle of {y} reduces to a purely inseparable map (r = {r})")
        return False
    return True


# ---------------------------------------------------------------------------
# Markov systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkovState:
    name: str
    image: Tuple[str, ...]
    degree: int
    countable: bool = False


@dataclass(frozen=True)
class TailFamily:
    """m * branch^k states at depth k >= 1, entered from `entry`, reaching `target` after k steps."""

    entry: str
    target: str
    branch: int
    multiplicity: int = 1
    degree: int = 1

    @property
    def key(self) -> str:
        return f"{self.entry}->{self.target}"


@dataclass
class MarkovSystem:
    d: int
    states: List[MarkovState]
    families: List[TailFamily] = field(default_factory=list)
    root: Optional[str] = None

    def __post_init__(self):
        names = [state.name for state in self.states]
        if len(set(names)) != len(names):
            raise MalformedCertificate("duplicate state names")
        known = {state.name: state for state in self.states}
        for state in self.states:
            unknown = [target for target in state.image if target not in known]
            if unknown:
                raise MalformedCertificate(f"state {state.name!r} maps onto unknown states {unknown}")
        for family in self.families:
            for role, name in (("entry", family.entry), ("target", family.target)):
                if name not in known:
                    raise MalformedCertificate(f"tail family {family.key}: unknown {role} {name!r}")
                if known[name].countable:
                    raise MalformedCertificate(f"tail family {family.key}: {role} {name!r} is countable")
        if self.root is None and self.states:
            self.root = self.states[0].name
        if self.root is not None and self.root not in known:
            raise MalformedCertificate(f"unknown root {self.root!r}")

    def state(self, name: str) -> MarkovState:
        for state in self.states:
            if state.name == name:
                return state
        raise MalformedCertificate(f"unknown state {name!r}")

    @property
    def uncountable(self) -> List[str]:
        return [state.name for state in self.states if not state.countable]

    def successors(self, name: str) -> List[str]:
        """Uncountable core successors of a core state."""
        return [target for target in self.state(name).image if not self.state(target).countable]

    def families_from(self, name: str) -> List[TailFamily]:
        return [family for family in self.families if family.entry == name]

    def covers_everything(self, name: str) -> bool:
        """The image of the state is every uncountable state, family states included."""
        image = set(self.successors(name))
        return image == set(self.uncountable) and len(self.families_from(name)) == len(self.families)

    def reachable(self, start: str, reverse: bool = False) -> set:
        edges: Dict[str, List[str]] = {name: [] for name in self.uncountable}
        for name in self.uncountable:
            targets = self.successors(name) + [f.target for f in self.families_from(name)]
            for target in targets:
                if target not in edges:
                    continue
                if reverse:
                    edges[target].append(name)
                else:
                    edges[name].append(target)
        seen, queue = {start}, deque([start])
        while queue:
            for nxt in edges[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen


@dataclass
class MarkovCheck:
    images_are_states: bool
    degrees_in_range: bool
    countable_closed: bool
    families_finite: bool
    root_reaches_all: bool
    expanding_cycles: bool
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all((
            self.images_are_states,
            self.degrees_in_range,
            self.countable_closed,
            self.families_finite,
            self.root_reaches_all,
            self.expanding_cycles,
        ))


def _has_cycle(nodes: Iterable[str], edges: Dict[str, List[str]]) -> bool:
    nodes = list(nodes)
    state = {node: 0 for node in nodes}

    def visit(node: str) -> bool:
        state[node] = 1
        for nxt in edges.get(node, []):
            if nxt not in state:
                continue
            if state[nxt] == 1 or (state[nxt] == 0 and visit(nxt)):
                return True
        state[node] = 2
        return False

    return any(state[node] == 0 and visit(node) for node in nodes)


def check_markov_hypotheses(sys: MarkovSystem) -> MarkovCheck:
    """Structural hypotheses of the countable-state coding."""
    notes: List[str] = []
    names = {state.name for state in sys.states}
    images_ok = all(target in names for state in sys.states for target in state.image)
    images_ok = images_ok and all(
        f.entry in names and f.target in names for f in sys.families
    )
    if not images_ok:
        notes.append("an image or family refers to an unknown state")
    degrees_ok = all(1 <= state.degree <= sys.d for state in sys.states) and all(
        1 <= f.degree <= sys.d for f in sys.families
    )
    if not degrees_ok:
        notes.append(f"a local degree lies outside [1, {sys.d}]")
    countable_ok = images_ok and all(
        sys.state(target).countable for state in sys.states if state.countable for target in state.image
    )
    if not countable_ok:
        notes.append("a countable state maps onto an uncountable one")
    finite_ok = all(f.branch * f.degree < sys.d for f in sys.families) and all(
        images_ok and not sys.state(f.target).countable for f in sys.families
    )
    if not finite_ok:
        notes.append("a tail family has infinite mass or a countable target")
    reach_ok = images_ok and sys.root in names and sys.reachable(sys.root) >= set(sys.uncountable)
    if not reach_ok:
        notes.append(f"root {sys.root} does not reach every uncountable state")
    # family states have the family degree; a cycle of degree-1 states never expands
    flat: Dict[str, List[str]] = {}
    if images_ok:
        for name in sys.uncountable:
            flat[name] = sys.successors(name) + [
                f.target for f in sys.families_from(name) if f.degree == 1
            ]
    expanding_ok = images_ok and not _has_cycle(
        (name for name in sys.uncountable if sys.state(name).degree == 1), flat
    )
    if not expanding_ok:
        notes.append("a cycle of degree-1 states does not expand")
    check = MarkovCheck(images_ok, degrees_ok, countable_ok, finite_ok, reach_ok, expanding_ok, notes)
    if not check.passed:
        logger.warning(f"Markov system hypotheses fail: {'; '.join(notes)}")
    return check


STRUCTURAL_HYPOTHESES = ("images_are_states", "degrees_in_range", "countable_closed", "root_reaches_all")


def require_structure(sys: MarkovSystem, hypotheses: Sequence[str] = STRUCTURAL_HYPOTHESES) -> MarkovCheck:
    """check_markov_hypotheses, raising MalformedCertificate when one of `hypotheses` fails."""
    check = check_markov_hypotheses(sys)
    failed = [name for name in hypotheses if not getattr(check, name)]
    if failed:
        raise MalformedCertificate(f"Markov system fails {', '.join(failed)}: {'; '.join(check.notes)}")
    return check


def sextic_parameters(phi: RationalMap) -> Tuple[ExtElem, ExtElem]:
    """Recover (a, b) from a map of the form (a z^6 + 1)/(a z^6 + z(z - 1)(z - b))."""
    shape = TemplateViolation("map has the form (a z^6 + 1)/(a z^6 + z(z - 1)(z - b))")
    if phi.degree != 6 or len(phi.num) != 7 or len(phi.den) != 7:
        raise shape
    unit = phi.num[0]
    if not unit:
        raise shape
    num = [c / unit for c in phi.num]
    den = [c / unit for c in phi.den]
    a, b = num[6], den[1]
    field_spec = phi.field
    expected_num = [field_spec.one()] + [field_spec.zero()] * 5 + [a]
    expected_den = [field_spec.zero(), b, -(field_spec.one() + b), field_spec.one(),
                    field_spec.zero(), field_spec.zero(), a]
    if num != expected_num or den != expected_den:
        raise shape
    return a, b


U_INF1, U_INF2, U_PRIME0, U_PRIME1, U_BBAR = "U_inf1", "U_inf2", "U'_0", "U'_1", "U_bbar"
V, V0, V1, V_INF = "V", "V_0", "V_1", "V_inf"


def build_partition(phi: RationalMap) -> MarkovSystem:
    """Markov partition of a sextic map with p = 3, |3| <= |a| < 1 and |b| = |b - 1| = 1."""
    a, b = sextic_parameters(phi)
    if phi.field.p != 3:
        raise TemplateViolation("p = 3")
    va = val(a)
    if not 0 < va <= 1:
        raise TemplateViolation("|3| <= |a| < 1")
    if val(b) != 0 or val(b - 1) != 0:
        raise TemplateViolation("|b| = |b - 1| = 1")
    red = reduction(phi)
    if not isinstance(red, ResidueMap):
        raise TemplateViolation("nonconstant reduction")
    b_bar = reduce_unit(b)
    trace = postcritical_avoids(red, [1, b_bar])
    if not trace:
        raise TemplateViolation("1 and b-bar are not postcritical")
    beta = red.degree
    for target in (1, b_bar):
        counts = backward_counts(red, target, 3)
        if counts.counts[1:] != tuple(beta ** k for k in range(1, 4)) or not counts.simple:
            raise TemplateViolation(f"backward orbit of {target} is not a simple {beta}-ary tree")
    uncountable = (U_INF1, U_INF2, U_PRIME0, U_PRIME1, U_BBAR)
    states = [
        MarkovState(U_INF1, uncountable, 3),
        MarkovState(U_INF2, (U_PRIME0,), 3),
        MarkovState(U_PRIME0, (U_INF1, U_INF2), 1),
        MarkovState(U_PRIME1, (U_INF1, U_INF2), 1),
        MarkovState(U_BBAR, (U_INF1, U_INF2, V_INF), 1),
        MarkovState(V, (V,), 3, countable=True),
        MarkovState(V0, (V_INF,), 1, countable=True),
        MarkovState(V1, (V_INF,), 1, countable=True),
        MarkovState(V_INF, (V1,), 1, countable=True),
    ]
    families = [
        TailFamily(U_INF1, U_PRIME1, beta),
        TailFamily(U_INF1, U_BBAR, beta),
    ]
    system = MarkovSystem(phi.degree, states, families, root=U_INF1)
    logger.info(f"partition built: {len(states)} states, {len(families)} tail families with branch {beta}")
    return system


def side_branch_samples(field_spec: FieldSpec, count: int = 20) -> List[BerkPoint]:
    """Points zeta(alpha, q) with -1/2 < v(alpha) < 0, v(alpha) not -1/6 or -1/3, and v(alpha) < q <= 0."""
    e, p = field_spec.e, field_spec.p
    pi = field_spec.pi()
    units = [field_spec.const(u) for u in range(1, p)] + [
        field_spec.const(u) + pi for u in range(1, p)
    ]
    positions = []
    for k in range(1, e):
        v = Fraction(-k, e)
        if not Fraction(-1, 2) < v < 0 or v in (Fraction(-1, 6), Fraction(-1, 3)):
            continue
        for j in range(0, k):
            positions.append((k, Fraction(-j, e)))
    samples: List[BerkPoint] = []
    for unit in units:
        for k, q in positions:
            samples.append(BerkPoint(unit * field_spec.pi_power(-k), q))
            if len(samples) == count:
                return samples
    return samples


def side_branch_degrees(phi: RationalMap, samples: Sequence[BerkPoint]) -> List[Tuple[BerkPoint, int]]:
    out = []
    for point in samples:
        out.append((point, image_point(phi, point).local_degree))
    logger.info(f"side-branch degrees: {sorted(set(degree for _, degree in out))}")
    return out


# ---------------------------------------------------------------------------
# Dendrite export
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DendriteNode:
    id: int
    label: str
    depth: int
    kind: str


@dataclass
class Dendrite:
    nodes: List[DendriteNode]
    edges: List[Tuple[int, int]]

    def to_dot(self) -> str:
        lines = ["digraph dendrite {"]
        for node in self.nodes:
            shape = "ellipse" if node.kind == "core" else "box"
            lines.append(f'  n{node.id} [label="{node.label}", shape={shape}];')
        for a, b in self.edges:
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _symbol_successors(sys: MarkovSystem, symbol: Tuple, depth: int) -> List[Tuple]:
    """Successor symbols in the graph truncated to family depth <= depth.

    Core symbols are ("core", name); family symbols are ("family", index, k, j).
    """
    if symbol[0] == "core":
        name = symbol[1]
        out: List[Tuple] = [("core", target) for target in sys.successors(name)]
        for index, family in enumerate(sys.families):
            if family.entry != name:
                continue
            for k in range(1, depth + 1):
                for j in range(family.multiplicity * family.branch ** k):
                    out.append(("family", index, k, j))
        return out
    _, index, k, j = symbol
    family = sys.families[index]
    if k == 1:
        return [("core", family.target)]
    return [("family", index, k - 1, j // family.branch)]


def _symbol_label(sys: MarkovSystem, symbol: Tuple) -> str:
    if symbol[0] == "core":
        return symbol[1]
    _, index, k, j = symbol
    family = sys.families[index]
    return f"{family.target}[k={k}#{j}]"


def emit_dendrite(sys: MarkovSystem, depth: int) -> Dendrite:
    """Cylinder-set tree of paths from the root state, truncated at depth."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    root = ("core", sys.root)
    nodes = [DendriteNode(0, sys.root, 0, "core")]
    edges: List[Tuple[int, int]] = []
    frontier = [(0, root)]
    for level in range(1, depth + 1):
        nxt = []
        for parent, symbol in frontier:
            for child in _symbol_successors(sys, symbol, depth):
                node = DendriteNode(len(nodes), _symbol_label(sys, child), level, child[0])
                nodes.append(node)
                edges.append((parent, node.id))
                nxt.append((node.id, child))
        frontier = nxt
    logger.info(f"dendrite to depth {depth}: {len(nodes)} nodes")
    return Dendrite(nodes, edges)
