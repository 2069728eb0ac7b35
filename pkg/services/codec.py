# services/codec.py
"""Conversions between the pydantic wire documents in models.py and the exact domain objects."""
import logging
from fractions import Fraction
from typing import List, Sequence

from models import (
    CertificateModel,
    CoveringModel,
    DendriteModel,
    DendriteNodeModel,
    ElemText,
    EntropyResults,
    ExplicitMapModel,
    FamilyMassModel,
    FieldModel,
    GenFnModel,
    HMuModel,
    HTopModel,
    IntervalModel,
    MappedPointModel,
    MarkovCheckModel,
    MarkovStateModel,
    MarkovSystemModel,
    MassesModel,
    PointModel,
    PreimageModel,
    SegmentImageModel,
    SegmentPieceModel,
    SubdivisionModel,
    TailFamilyModel,
    TemplateMapModel,
    TheoremAReportModel,
)
from services.berk_points import BerkPoint, Interval, convex_hull
from services.entropy import AlgebraicLog, ExactLogCombo, MeasureSolution, RationalGenFn
from services.errors import MalformedCertificate
from services.ext_field import INFINITY, ExtElem, FieldSpec
from services.julia_struct import (
    CoveringClaim,
    Dendrite,
    MarkovCheck,
    MarkovState,
    MarkovSystem,
    SubdivisionPiece,
    TailFamily,
    TheoremACertificate,
    TheoremAReport,
)
from services.map_action import MappedPoint, RationalMap, SegmentImage

logger = logging.getLogger(__name__)


def rational_text(q) -> str:
    return str(Fraction(q))


def nats(x: float) -> float:
    """Floats leave the process with 12 significant digits."""
    return float(f"{x:.12g}")


# ---- field elements, points, maps ----

def field_from_model(model: FieldModel) -> FieldSpec:
    return FieldSpec(model.p, model.e)


def field_to_model(field: FieldSpec) -> FieldModel:
    return FieldModel(p=field.p, e=field.e)


def elem_from_text(field: FieldSpec, text: ElemText) -> ExtElem:
    if isinstance(text, str):
        return field.const(Fraction(text))
    return field.parse(text)


def point_from_model(field: FieldSpec, model: PointModel) -> BerkPoint:
    if model.infinity:
        return BerkPoint.point_at_infinity()
    center = elem_from_text(field, model.center)
    if model.logradius.strip().lower() in ("inf", "+inf", "infinity"):
        return BerkPoint.at(center, INFINITY)
    return BerkPoint.at(center, Fraction(model.logradius))


def point_to_model(x: BerkPoint) -> PointModel:
    if x.infinity:
        return PointModel(infinity=True)
    q = "inf" if x.logradius == INFINITY else rational_text(x.logradius)
    return PointModel(center=x.center.to_text(), logradius=q)


def map_from_model(field: FieldSpec, model) -> RationalMap:
    if isinstance(model, TemplateMapModel):
        return RationalMap.sextic(elem_from_text(field, model.a), elem_from_text(field, model.b))
    num = [elem_from_text(field, c) for c in model.num]
    den = [elem_from_text(field, c) for c in model.den]
    return RationalMap.create(num, den)


def map_to_model(phi: RationalMap) -> ExplicitMapModel:
    return ExplicitMapModel(num=[c.to_text() for c in phi.num], den=[c.to_text() for c in phi.den])


def _interval(field: FieldSpec, endpoints: Sequence[PointModel]) -> Interval:
    return Interval(point_from_model(field, endpoints[0]), point_from_model(field, endpoints[1]))


def _endpoints(interval: Interval) -> List[PointModel]:
    return [point_to_model(interval.x), point_to_model(interval.y)]


# ---- certificates ----

def certificate_from_model(field: FieldSpec, model: CertificateModel) -> TheoremACertificate:
    if not model.tree:
        raise MalformedCertificate("certificate tree has no points")
    tree = convex_hull([point_from_model(field, pt) for pt in model.tree])
    I = _interval(field, model.interval.endpoints)
    return TheoremACertificate(
        tree=tree,
        interval=I,
        x0=point_from_model(field, model.interval.x0),
        subdivision=[
            SubdivisionPiece(_interval(field, piece.endpoints), piece.b, piece.c)
            for piece in model.subdivision
        ],
        preimage_claim=[(point_from_model(field, pre.point), pre.degree) for pre in model.preimages],
        covering_claim=[CoveringClaim(_interval(field, claim.edge), claim.n) for claim in model.covering],
        period=model.period,
    )


def certificate_to_model(cert: TheoremACertificate) -> CertificateModel:
    return CertificateModel(
        tree=[point_to_model(v) for v in cert.tree.vertices],
        interval=IntervalModel(endpoints=_endpoints(cert.interval), x0=point_to_model(cert.x0)),
        subdivision=[
            SubdivisionModel(endpoints=_endpoints(piece.interval), b=piece.b, c=piece.c)
            for piece in cert.subdivision
        ],
        preimages=[PreimageModel(point=point_to_model(pt), degree=deg) for pt, deg in cert.preimage_claim],
        covering=[CoveringModel(edge=_endpoints(claim.edge), n=claim.n) for claim in cert.covering_claim],
        period=cert.period,
    )


def report_to_model(report: TheoremAReport) -> TheoremAReportModel:
    return TheoremAReportModel(
        a=report.a,
        b=report.b,
        c=report.c,
        d=report.d,
        passed=report.passed,
        failed=report.failed(),
        notes=report.notes,
    )


# ---- Markov systems ----

def system_from_model(model: MarkovSystemModel) -> MarkovSystem:
    states = [MarkovState(s.name, tuple(s.image), s.degree, s.countable) for s in model.states]
    families = [TailFamily(f.entry, f.target, f.branch, f.multiplicity, f.degree) for f in model.families]
    return MarkovSystem(model.d, states, families, root=model.root)


def system_to_model(sys: MarkovSystem) -> MarkovSystemModel:
    return MarkovSystemModel(
        d=sys.d,
        states=[
            MarkovStateModel(name=s.name, image=list(s.image), degree=s.degree, countable=s.countable)
            for s in sys.states
        ],
        families=[
            TailFamilyModel(
                entry=f.entry, target=f.target, branch=f.branch, multiplicity=f.multiplicity, degree=f.degree
            )
            for f in sys.families
        ],
        root=sys.root,
    )


def check_to_model(check: MarkovCheck) -> MarkovCheckModel:
    return MarkovCheckModel(
        passed=check.passed,
        images_are_states=check.images_are_states,
        degrees_in_range=check.degrees_in_range,
        countable_closed=check.countable_closed,
        families_finite=check.families_finite,
        root_reaches_all=check.root_reaches_all,
        expanding_cycles=check.expanding_cycles,
        notes=check.notes,
    )


# ---- results ----

def mapped_point_to_model(x: BerkPoint, mapped: MappedPoint, field: FieldSpec) -> MappedPointModel:
    return MappedPointModel(
        point=point_to_model(x),
        image=point_to_model(mapped.image),
        local_degree=mapped.local_degree,
        reduction=str(mapped.reduction) if mapped.reduction is not None else None,
        field=field_to_model(field),
    )


def segment_image_to_model(image: SegmentImage, field: FieldSpec) -> SegmentImageModel:
    return SegmentImageModel(
        pieces=[
            SegmentPieceModel(
                source=_endpoints(piece.source),
                image=_endpoints(piece.image),
                expansion=piece.expansion,
                orientation=piece.orientation,
            )
            for piece in image.pieces
        ],
        field=field_to_model(field),
    )


def masses_to_model(masses: MeasureSolution) -> MassesModel:
    return MassesModel(
        core={name: rational_text(q) for name, q in masses.core_masses.items()},
        families={
            key: FamilyMassModel(
                depth_factor=rational_text(f.depth_factor),
                scale=rational_text(f.scale),
                aggregate=rational_text(f.aggregate),
            )
            for key, f in masses.family_masses.items()
        },
        total_check=rational_text(masses.total_check),
    )


def h_mu_to_model(combo: ExactLogCombo) -> HMuModel:
    return HMuModel(exact=[(rational_text(q), n) for q, n in combo.terms], nats=nats(combo.nats))


def h_top_to_model(state: str, growth: AlgebraicLog) -> HTopModel:
    lo, hi = growth.interval
    return HTopModel(
        state=state,
        minpoly=list(growth.minpoly),
        interval=[rational_text(lo), rational_text(hi)],
        value=nats(growth.value),
        nats=nats(growth.nats),
    )


def genfn_to_model(state: str, gf: RationalGenFn) -> GenFnModel:
    return GenFnModel(
        state=state,
        numerator=[rational_text(c) for c in gf.numerator],
        denominator=[rational_text(c) for c in gf.denominator],
        one_minus_numerator=[rational_text(c) for c in gf.one_minus_numerator()],
        expr=str(gf),
    )


def dendrite_to_model(dendrite: Dendrite) -> DendriteModel:
    return DendriteModel(
        nodes=[
            DendriteNodeModel(id=node.id, label=node.label, depth=node.depth, kind=node.kind)
            for node in dendrite.nodes
        ],
        edges=[(a, b) for a, b in dendrite.edges],
    )


def entropy_results_text(results: EntropyResults) -> List[str]:
    lines = []
    if results.masses is not None:
        for name, q in results.masses.core.items():
            lines.append(f"mass {name} = {q}")
        for key, f in results.masses.families.items():
            lines.append(f"mass family {key} = {f.aggregate}")
        lines.append(f"total mass = {results.masses.total_check}")
    if results.h_mu is not None:
        combo = " + ".join(f"({q}) log {n}" for q, n in results.h_mu.exact)
        lines.append(f"h_mu = {combo} ~ {results.h_mu.nats}")
    if results.h_top is not None:
        lines.append(
            f"h_top = log lambda, lambda root of {results.h_top.minpoly} in "
            f"[{results.h_top.interval[0]}, {results.h_top.interval[1]}] ~ {results.h_top.nats}"
        )
    for row in results.truncation or []:
        lines.append(f"depth {row.depth}: {row.nats}")
    checks = results.checks.model_dump(exclude_none=True)
    if checks:
        lines.append(f"checks: {checks}")
    return lines

