import os, sys, json
import functools
import logging
from typing import Callable, List, Optional

import click
from dotenv import load_dotenv

from config import LOG_LEVEL, WORKERS, example_path
from models import (
    BranchingModel,
    CertificateModel,
    EntropyResults,
    IntervalNullModel,
    MarkovSystemModel,
    PartitionModel,
    PointModel,
    SessionConfig,
    TruncationModel,
)
from services import codec
from services.berk_points import BerkPoint, Interval, embed_point
from services.entropy import (
    first_return_gf,
    gurevich_entropy,
    measure_entropy,
    same_growth,
    sandwich,
    solve_masses,
    truncation_sweep,
    verify_interval_null,
)
from services.errors import BerkDynError, RamificationNeeded
from services.julia_struct import (
    TheoremACertificate,
    MarkovSystem,
    build_partition,
    check_markov_hypotheses,
    emit_dendrite,
    subdivision_data,
    verify_infinite_branching,
    verify_theorem_a,
)
from services.map_action import image_segment, image_point

# Load environment variables first
load_dotenv()

# Logs go to stderr so stdout carries only the document
logging.basicConfig(
    level=LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

FORMATS = ["json", "text", "dot"]
MAX_REFINEMENTS = 4


def _load_json(path: str):
    with click.open_file(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _json_arg(text: str):
    """A document given inline, as a path, or as "-" for stdin."""
    if text == "-" or os.path.exists(text):
        return _load_json(text)
    return json.loads(text)


class Session:
    """Config file plus the field, map, certificate and system derived from it, loaded on demand."""

    def __init__(self, config_path: Optional[str], fmt: Optional[str]):
        self.config_path = config_path or example_path("sextic_config.json")
        self.format = fmt
        self._config: Optional[SessionConfig] = None
        self._phi = None

    @property
    def config(self) -> SessionConfig:
        if self._config is None:
            self._config = SessionConfig.model_validate(_load_json(self.config_path))
        return self._config

    def resolve(self, path: str) -> str:
        if path == "-" or os.path.isabs(path) or self.config_path == "-":
            return path
        return os.path.join(os.path.dirname(os.path.abspath(self.config_path)), path)

    @property
    def field(self):
        return codec.field_from_model(self.config.field)

    @property
    def phi(self):
        if self._phi is None:
            self._phi = codec.map_from_model(self.field, self.config.map)
        return self._phi

    def certificate(self, path: Optional[str] = None) -> Optional[TheoremACertificate]:
        path = path or (self.resolve(self.config.certificate) if self.config.certificate else None)
        if path is None:
            return None
        model = CertificateModel.model_validate(_load_json(path))
        return codec.certificate_from_model(self.field, model)

    def system(self, path: Optional[str] = None) -> MarkovSystem:
        path = path or (self.resolve(self.config.system) if self.config.system else None)
        if path is None:
            return build_partition(self.phi)
        return codec.system_from_model(MarkovSystemModel.model_validate(_load_json(path)))

    def point(self, text: str) -> BerkPoint:
        return codec.point_from_model(self.field, PointModel.model_validate(_json_arg(text)))

    def fmt(self, override: Optional[str]) -> str:
        return override or self.format or self.config.format or "json"


def _emit(fmt: str, model, text: Optional[List[str]] = None, dot: Optional[str] = None):
    if fmt == "dot" and dot is not None:
        click.echo(dot, nl=False)
    elif fmt == "text" and text is not None:
        for line in text:
            click.echo(line)
    else:
        click.echo(json.dumps(model.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True))


def exits_on_error(fn: Callable) -> Callable:
    """Input and arithmetic errors become a one-line diagnostic and exit code 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, ArithmeticError, OSError) as exc:
            logger.error(f"{fn.__name__} failed: {exc}")
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(2)

    return wrapper


def format_option(fn: Callable) -> Callable:
    return click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Output format.")(fn)


def _refining(session: Session, points: List[BerkPoint], compute: Callable):
    """Run compute(phi, points), moving to a ramified field whenever a radius falls outside the value group."""
    phi = session.phi
    for _ in range(MAX_REFINEMENTS):
        try:
            return compute(phi, points)
        except RamificationNeeded as exc:
            field = phi.field.refine(exc.e_needed)
            logger.info(f"refining to ramification index {field.e}")
            phi = phi.embed(field.e)
            points = [embed_point(x, field.e) for x in points]
    return compute(phi, points)


@click.group()
@click.option("--config", "config_path", default=None, help="Session config JSON (default: bundled sextic config).")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Output format.")
@click.pass_context
def cli(ctx, config_path, fmt):
    """Exact Berkovich dynamics workbench."""
    ctx.obj = Session(config_path, fmt)


@cli.command("point-image")
@click.argument("point")
@format_option
@click.pass_obj
@exits_on_error
def point_image(session: Session, point: str, fmt: Optional[str]):
    """Image and local degree of POINT (inline JSON, a path, or -)."""
    x = session.point(point)
    x, mapped, field = _refining(
        session, [x], lambda phi, pts: (pts[0], image_point(phi, pts[0]), phi.field)
    )
    model = codec.mapped_point_to_model(x, mapped, field)
    _emit(session.fmt(fmt), model, text=[f"{x} -> {mapped.image} (degree {mapped.local_degree})"])


@cli.command("segment-image")
@click.argument("start")
@click.argument("end")
@format_option
@click.pass_obj
@exits_on_error
def segment_image(session: Session, start: str, end: str, fmt: Optional[str]):
    """Pieces of the image of the segment [START, END]."""
    points = [session.point(start), session.point(end)]
    image, field = _refining(
        session, points, lambda phi, pts: (image_segment(phi, Interval(pts[0], pts[1])), phi.field)
    )
    lines = [
        f"{piece.source} -> {piece.image} (x{piece.expansion}, orientation {piece.orientation:+d})"
        for piece in image.pieces
    ]
    _emit(session.fmt(fmt), codec.segment_image_to_model(image, field), text=lines)


@cli.command()
@click.option("--certificate", "cert_path", default=None, help="Certificate JSON (default: from config).")
@format_option
@click.pass_obj
@exits_on_error
def verify(session: Session, cert_path: Optional[str], fmt: Optional[str]):
    """Check the connectedness certificate; exit 1 if a hypothesis fails."""
    cert = session.certificate(cert_path)
    if cert is None:
        raise BerkDynError("no certificate given and none in the config")
    report = verify_theorem_a(session.phi, cert)
    model = codec.report_to_model(report)
    if report.a:
        try:
            model.infinite_branching = verify_infinite_branching(session.phi, cert.x0, cert.period)
        except BerkDynError as exc:
            logger.warning(f"branching check skipped: {exc}")
    lines = [f"({name}) {'pass' if getattr(report, name) else 'FAIL'}: {report.notes.get(name, '')}" for name in "abcd"]
    _emit(session.fmt(fmt), model, text=lines)
    sys.exit(0 if report.passed else 1)


@cli.command()
@click.argument("point")
@click.option("--period", default=1, show_default=True, type=int)
@format_option
@click.pass_obj
@exits_on_error
def branching(session: Session, point: str, period: int, fmt: Optional[str]):
    """Whether POINT is a repelling periodic point with infinite branching."""
    y = session.point(point)
    result = verify_infinite_branching(session.phi, y, period)
    model = BranchingModel(point=codec.point_to_model(y), period=period, infinite_branching=result)
    _emit(session.fmt(fmt), model, text=[f"{y}: infinite branching {'yes' if result else 'no'}"])


@cli.command()
@format_option
@click.pass_obj
@exits_on_error
def partition(session: Session, fmt: Optional[str]):
    """Markov partition of a sextic-template map."""
    system = build_partition(session.phi)
    check = check_markov_hypotheses(system)
    model = PartitionModel(system=codec.system_to_model(system), hypotheses=codec.check_to_model(check))
    lines = [f"{s.name} -> {', '.join(s.image)} (degree {s.degree})" for s in system.states]
    lines += [f"family {f.key}: {f.multiplicity} x {f.branch}^k states" for f in system.families]
    _emit(session.fmt(fmt), model, text=lines)


@cli.command()
@click.option("--system", "system_path", default=None, help="Markov system JSON (default: from config or built).")
@format_option
@click.pass_obj
@exits_on_error
def masses(session: Session, system_path: Optional[str], fmt: Optional[str]):
    """Exact invariant-measure masses of the Markov states."""
    solution = solve_masses(session.system(system_path))
    results = EntropyResults(masses=codec.masses_to_model(solution))
    results.checks.total_mass = codec.rational_text(solution.total_check)
    _emit(session.fmt(fmt), results.masses, text=codec.entropy_results_text(results))


@cli.command()
@click.option("--which", type=click.Choice(["measure", "topological", "both"]), default="both", show_default=True)
@click.option("--method", type=click.Choice(["gf", "truncate"]), default="gf", show_default=True)
@click.option("--depth", default=16, show_default=True, type=click.IntRange(min=0))
@click.option("--state", default=None, help="Core state for the first-return function (default: root).")
@click.option("--system", "system_path", default=None)
@format_option
@click.pass_obj
@exits_on_error
def entropy(session: Session, which: str, method: str, depth: int, state: Optional[str], system_path: Optional[str], fmt: Optional[str]):
    """Measure-theoretic and topological entropy."""
    system = session.system(system_path)
    results = EntropyResults()
    h_mu = h_top = None
    if which in ("measure", "both"):
        solution = solve_masses(system)
        combo = measure_entropy(system, solution)
        results.masses = codec.masses_to_model(solution)
        results.h_mu = codec.h_mu_to_model(combo)
        results.checks.total_mass = codec.rational_text(solution.total_check)
        h_mu = combo.nats
        if session.config.certificate:
            report = verify_interval_null(subdivision_data(session.phi, session.certificate()), session.phi.degree)
            results.checks.interval_null = IntervalNullModel(
                coefficient=codec.rational_text(report.coefficient), null=report.null, leaf_mass_one=report.leaf_mass_one
            )
    if which in ("topological", "both"):
        if method == "gf":
            state = state or system.root
            growth = gurevich_entropy(system, state)
            results.h_top = codec.h_top_to_model(state, growth)
            h_top = growth.nats
            others = [name for name in system.uncountable if name != state]
            if others:
                results.checks.state_independent = same_growth(growth, gurevich_entropy(system, others[-1]))
        else:
            sweep = truncation_sweep(system, range(depth + 1), WORKERS)
            results.truncation = [TruncationModel(depth=k, nats=codec.nats(h)) for k, h in sweep]
            h_top = sweep[-1][1]
    if h_mu is not None and h_top is not None:
        results.checks.sandwich = sandwich(h_mu, h_top, system.d)
    _emit(session.fmt(fmt), results, text=codec.entropy_results_text(results))


@cli.command()
@click.option("--depth", default=2, show_default=True, type=click.IntRange(min=0))
@click.option("--system", "system_path", default=None)
@format_option
@click.pass_obj
@exits_on_error
def dendrite(session: Session, depth: int, system_path: Optional[str], fmt: Optional[str]):
    """Cylinder-set tree of the Markov system, as JSON or DOT."""
    tree = emit_dendrite(session.system(system_path), depth)
    lines = [f"{'  ' * node.depth}{node.label}" for node in tree.nodes]
    _emit(session.fmt(fmt), codec.dendrite_to_model(tree), text=lines, dot=tree.to_dot())


@cli.command("shift-gf")
@click.option("--state", default=None)
@click.option("--system", "system_path", default=None)
@format_option
@click.pass_obj
@exits_on_error
def shift_gf(session: Session, state: Optional[str], system_path: Optional[str], fmt: Optional[str]):
    """First-return generating function of the countable Markov shift at a core state."""
    system = session.system(system_path)
    state = state or system.root
    gf = first_return_gf(system, state)
    _emit(session.fmt(fmt), codec.genfn_to_model(state, gf), text=[f"F_{state}(z) = {gf}"])


if __name__ == "__main__":
    cli()
