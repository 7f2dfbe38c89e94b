"""
Command-line front end: model ingestion, command dispatch and report emission.

Subcommands: compute, check, blowup-test, chi, elliptic, validate.
JSON goes to stdout (or --out); logs and human summaries go to stderr.
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from config import get_active_config_class
from elliptic import (
    check_delta_theta_relation,
    delta_identity_report,
    delta_numeric_limit,
    delta_series,
    elliptic_vs_mc_numeric,
    format_q_coefficient,
    is_decreasing,
)
from envelope import Chamber, OracleSettings, PartialOrder, Slope, full_axiom_report, slope_from_divisor
from examples_library import ExampleLibrary, ExampleNames, blowup_demo_chart, blowup_demo_setup
from excel_export import create_report_excel
from json_utils import dumps_canonical, parse_rational, poly_to_json
from kalgebra import KAlgebraError, NotPolynomialError, format_poly
from localization import (
    Divisor,
    ModelError,
    NonPolynomialClassError,
    ResolutionModel,
    boundary_count_through_center,
    chi_via_localization,
    line_bundle_weights,
    localized_class,
    projective_space_fixed_points,
    pushforward_invariance_check,
    resolution_independence_check,
    validate_model,
)
from model_io import ModelDocument, load_model, loads_model, serialize_model
from polytope import PolytopeError
from run_artifacts import RunArtifacts

logger = logging.getLogger(__name__)

DEFAULT_Q_LIST = "1e-2,1e-3,1e-4"


class ExitCode:
    """Process exit codes; a stable contract for CI."""
    PASS = 0
    AXIOM_FAILURE = 1
    INVALID_INPUT = 2
    NON_POLYNOMIAL = 3


class InputError(ValueError):
    """A command-line argument cannot be interpreted."""


# argument parsing helpers


def parse_divisor_arg(text: str) -> Divisor:
    """'A=1/3,B=2/5' -> Divisor."""
    multiplicities = {}
    for part in filter(None, (chunk.strip() for chunk in text.split(","))):
        name, sep, value = part.partition("=")
        if not sep:
            raise InputError(f"Divisor entry '{part}' must look like NAME=p/q")
        multiplicities[name.strip()] = parse_rational(value.strip())
    return Divisor(multiplicities)


def parse_chamber_arg(text: str) -> Chamber:
    try:
        return Chamber(tuple(int(value) for value in text.split(",")))
    except ValueError as exc:
        raise InputError(f"Chamber '{text}' must be comma-separated integers") from exc


def parse_order_arg(text: str) -> PartialOrder:
    """'p2<p1,p1<p0' -> PartialOrder."""
    pairs = []
    for part in filter(None, (chunk.strip() for chunk in text.split(","))):
        lower, sep, upper = part.partition("<")
        if not sep:
            raise InputError(f"Order entry '{part}' must look like A<B")
        pairs.append((lower.strip().rstrip("="), upper.strip().lstrip("=")))
    return PartialOrder(pairs)


def parse_s_range(text: str) -> List[int]:
    """'0..2' -> [0, 1, 2]; '1' -> [1]."""
    low, sep, high = text.partition("..")
    try:
        if sep:
            return list(range(int(low), int(high) + 1))
        return [int(text)]
    except ValueError as exc:
        raise InputError(f"Bad s range '{text}'") from exc


def parse_q_list(text: str) -> List[float]:
    try:
        return [float(value) for value in text.split(",") if value.strip()]
    except ValueError as exc:
        raise InputError(f"Bad q list '{text}'") from exc


def parse_assignments(items: Sequence[str]) -> dict:
    """['d=1/2', 'x=2'] -> {'d': '1/2', 'x': '2'}."""
    result = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"Expected KEY=VALUE, got '{item}'")
        result[key.strip()] = value.strip()
    return result


# model resolution


def _example_params(args) -> dict:
    params = {
        "cell": getattr(args, "cell", None),
        "corner": getattr(args, "corner", None),
        "r": getattr(args, "r", None),
    }
    if getattr(args, "lam", None) is not None:
        params["lam"] = parse_rational(args.lam)
    return params


def resolve_document(args) -> ModelDocument:
    """Model plus envelope data from --model or --example, with flag overrides."""
    if getattr(args, "model", None):
        document = load_model(args.model)
    elif getattr(args, "example", None):
        setup = ExampleLibrary().build(args.example, **_example_params(args))
        document = ModelDocument(setup.model, setup.chamber, setup.order)
    else:
        raise InputError("Either --model or --example is required")

    model = document.model
    if getattr(args, "divisor", None):
        model = replace(model, divisor=parse_divisor_arg(args.divisor))
    slope_text = getattr(args, "slope", None)
    if slope_text and slope_text != "generic":
        value = parse_rational(slope_text)
        model = replace(model, divisor=Divisor({c: value for c in model.component_ids}))
    validate_model(model)

    chamber = parse_chamber_arg(args.chamber) if getattr(args, "chamber", None) else document.chamber
    order = parse_order_arg(args.order) if getattr(args, "order", None) else document.order
    return ModelDocument(model, chamber, order, document.slope)


def _emit_json(payload, out_path: Optional[str]):
    text = dumps_canonical(payload)
    if out_path:
        target = Path(out_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        logger.info("Report written to %s", target)
    else:
        sys.stdout.write(text)


# commands


def cmd_compute(args) -> int:
    document = resolve_document(args)
    model = document.model
    points = [args.point] if args.point else model.point_ids
    classes = {point_id: localized_class(model, model.divisor, point_id) for point_id in points}
    if args.json:
        _emit_json(
            {point_id: {"terms": poly_to_json(value), "text": format_poly(value)} for point_id, value in classes.items()},
            args.out,
        )
    elif args.point:
        print(format_poly(classes[args.point]))
    else:
        for point_id, value in classes.items():
            print(f"{point_id}: {format_poly(value)}")
    return ExitCode.PASS


def _resolve_slope(args, document: ModelDocument) -> Optional[Slope]:
    if document.slope is not None:
        return document.slope
    if getattr(args, "slope", None):
        return slope_from_divisor(document.model, document.model.divisor)
    return None


def cmd_check(args) -> int:
    config_class = get_active_config_class()
    document = resolve_document(args)
    if document.chamber is None or document.order is None:
        raise InputError("check needs a chamber and an order (model file envelope block or --chamber/--order)")
    model = document.model
    jobs = args.jobs or config_class.JOBS
    oracle = None
    if args.oracle:
        oracle = OracleSettings(
            config_class.SIGMA_TRIALS, config_class.SIGMA_RESAMPLES, config_class.SIGMA_RANGE, config_class.RANDOM_SEED
        )
    report = full_axiom_report(
        model,
        document.chamber,
        document.order,
        model.divisor,
        _resolve_slope(args, document),
        jobs=jobs,
        oracle=oracle,
    )
    payload = report.to_dict()
    _emit_json(payload, args.out)
    for line in report.summary_lines():
        print(line, file=sys.stderr)

    if args.xlsx:
        Path(args.xlsx).write_bytes(create_report_excel(report))
    if args.save_run:
        artifacts = RunArtifacts.create_for_command(
            config_class.ensure_reports_dir(), "check", model.name or "model", report.inputs
        )
        artifacts.save_report(payload, create_report_excel(report))
        print(f"Run saved to {artifacts.base_dir}", file=sys.stderr)
    return ExitCode.PASS if report.passed else ExitCode.AXIOM_FAILURE


def _blowup_target(args) -> Tuple[ResolutionModel, str, List[int]]:
    if getattr(args, "model", None) or getattr(args, "example", None):
        if not args.chart:
            raise InputError("--chart is required with --model or --example")
        model = resolve_document(args).model
        chart = model.chart(args.chart)
        directions = [int(v) for v in args.directions.split(",")] if args.directions else list(range(chart.dimension))
        return model, args.chart, directions
    r = args.r or 3
    model = blowup_demo_setup(r).model
    return model, blowup_demo_chart(r), list(range(r))


def cmd_blowup_test(args) -> int:
    model, chart_id, directions = _blowup_target(args)
    D = model.divisor
    r = boundary_count_through_center(model, chart_id, directions)
    rows = []
    failed = False
    pulled = resolution_independence_check(model, D, chart_id, directions)
    failed = failed or not pulled
    for s in parse_s_range(args.s) if args.s else list(range(r)):
        invariant = pushforward_invariance_check(model, D, chart_id, directions, s)
        expected = s <= r - 1
        if expected and not invariant:
            failed = True
        rows.append({"s": s, "invariant": invariant, "expected": expected})
    if args.json:
        _emit_json({"model": model.name, "chart": chart_id, "r": r, "pullback": pulled, "rows": rows}, args.out)
    else:
        print(f"Blow-up of chart '{chart_id}' along {directions}: r={r}, pullback {'pass' if pulled else 'FAIL'}")
        for row in rows:
            verdict = "invariant" if row["invariant"] else "not invariant"
            note = "" if row["invariant"] == row["expected"] else " (unexpected)"
            print(f"  s={row['s']}: {verdict}{note}")
    return ExitCode.AXIOM_FAILURE if failed else ExitCode.PASS


def cmd_chi(args) -> int:
    if args.r < 1:
        raise InputError("--r must be at least 1")
    value = chi_via_localization(projective_space_fixed_points(args.r), line_bundle_weights(args.r, args.m), args.r)
    if args.json:
        _emit_json({"r": args.r, "m": args.m, "terms": poly_to_json(value), "text": format_poly(value)}, args.out)
    else:
        print(format_poly(value))
    return ExitCode.PASS


def cmd_elliptic(args) -> int:
    config_class = get_active_config_class()
    order = config_class.ELLIPTIC_ORDER if args.order is None else args.order
    if not 0 <= order <= config_class.MAX_ELLIPTIC_ORDER:
        raise InputError(f"--order must lie in 0..{config_class.MAX_ELLIPTIC_ORDER}")
    status = ExitCode.PASS

    if args.show:
        if not args.show.startswith("q"):
            raise InputError("--show expects qN, e.g. q1")
        n = int(args.show[1:] or 1)
        if n > order:
            raise InputError(f"q^{n} is beyond the truncation order {order}")
        print(format_q_coefficient(delta_series(order).coefficient(n)))

    if args.identities:
        if order < 1:
            raise InputError("Identity checks need --order >= 1")
        report = delta_identity_report(order)
        report["theta_relation"] = check_delta_theta_relation(order)
        for name, passed in report.items():
            print(f"{name}: {'pass' if passed else 'FAIL'}")
        if not all(report.values()):
            status = ExitCode.AXIOM_FAILURE

    q_list = parse_q_list(args.q or DEFAULT_Q_LIST)
    if args.limit:
        values = parse_assignments(args.limit)
        d = parse_rational(values.get("d", "1/2"))
        x0 = float(values.get("x", "2"))
        errors = delta_numeric_limit(d, x0, q_list, order=max(order, 1))
        print(f"Refined limit d={values.get('d', '1/2')} x0={x0}")
        for q, error in zip(q_list, errors):
            print(f"  q={q:.0e}  error={error:.3e}")
        decreasing = is_decreasing(errors)
        print(f"  decreasing: {'yes' if decreasing else 'NO'}")
        if not decreasing:
            status = ExitCode.AXIOM_FAILURE

    if args.compare_mc:
        lam = parse_rational(args.compare_mc)
        table = elliptic_vs_mc_numeric(lam, 2.0, q_list, order=max(order, 1))
        for point_id, errors in table.items():
            print(f"Point {point_id}: " + "  ".join(f"{error:.3e}" for error in errors))
            if not is_decreasing(errors):
                status = ExitCode.AXIOM_FAILURE
    return status


def cmd_validate(args) -> int:
    if args.model:
        text = Path(args.model).read_text(encoding="utf-8")
        document = loads_model(text)
        canonical = serialize_model(document)
        if args.canonical:
            sys.stdout.write(canonical)
        elif canonical != text:
            print(f"Model '{document.model.name}' is valid (not in canonical form)", file=sys.stderr)
        else:
            print(f"Model '{document.model.name}' is valid")
        return ExitCode.PASS
    document = resolve_document(args)
    if args.canonical:
        sys.stdout.write(serialize_model(document))
    else:
        print(f"Model '{document.model.name}' is valid")
    return ExitCode.PASS


# parser


def _add_model_arguments(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--example", choices=ExampleLibrary().names(), help="Built-in example model.")
    source.add_argument("--model", help="Path to a JSON model file.")
    parser.add_argument("--lambda", dest="lam", help=f"Divisor multiplicity for --example {ExampleNames.P1}.")
    parser.add_argument("--cell", help=f"Cell of --example {ExampleNames.P2_CELL} (p0, p1, p2).")
    parser.add_argument("--corner", help=f"Corner of --example {ExampleNames.P1XP1_CELL}.")
    parser.add_argument("--r", type=int, help=f"Number of factors of --example {ExampleNames.BLOWUP_DEMO}.")
    parser.add_argument("--divisor", help="Override the divisor, e.g. A=1/3,B=2/5.")
    parser.add_argument("--json", action="store_true", help="Emit JSON instead of text.")
    parser.add_argument("--out", help="Write JSON output to this path.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcenv", description="Localized twisted motivic Chern classes.")
    parser.add_argument("--log-level", help="Override MCENV_LOG_LEVEL.")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="Localized classes at fixed points.")
    _add_model_arguments(compute)
    compute.add_argument("--point", help="Only this ambient fixed point.")
    compute.add_argument("--slope", help="'generic' or p/q for every boundary component.")
    compute.set_defaults(handler=cmd_compute)

    check = sub.add_parser("check", help="Stable-envelope axiom report.")
    _add_model_arguments(check)
    check.add_argument("--slope", help="'generic' (derived from the divisor) or p/q for every component.")
    check.add_argument("--chamber", help="Cocharacter, e.g. 1,2.")
    check.add_argument("--order", help="Order pairs, e.g. p2<p1,p1<p0.")
    check.add_argument("--jobs", type=int, help="Worker threads for per-point checks.")
    check.add_argument("--oracle", action="store_true", help="Cross-check Newton inclusions with sigma limits.")
    check.add_argument("--xlsx", help="Also write the report as a spreadsheet.")
    check.add_argument("--save-run", action="store_true", help="Store the report under MCENV_REPORTS_DIR.")
    check.set_defaults(handler=cmd_check)

    blowup = sub.add_parser("blowup-test", help="Blow-up independence checks.")
    _add_model_arguments(blowup)
    blowup.add_argument("--s", help="Exceptional twists, e.g. 0..2; s > 0 needs a center inside the boundary.")
    blowup.add_argument("--chart", help="Chart to blow up (with --model or --example).")
    blowup.add_argument("--directions", help="Center directions, e.g. 0,1.")
    blowup.set_defaults(handler=cmd_blowup_test)

    chi = sub.add_parser("chi", help="Euler characteristic of O(m) on P^(r-1).")
    chi.add_argument("--r", type=int, required=True)
    chi.add_argument("--m", type=int, required=True)
    chi.add_argument("--json", action="store_true")
    chi.add_argument("--out")
    chi.set_defaults(handler=cmd_chi)

    ell = sub.add_parser("elliptic", help="Theta and delta series checks.")
    ell.add_argument("--order", type=int, help="Truncation order N.")
    ell.add_argument("--identities", action="store_true", help="Check the delta identities and theta relation.")
    ell.add_argument("--limit", nargs="+", metavar="KEY=VALUE", help="Refined limit, e.g. d=1/2 x=2.")
    ell.add_argument("--q", help=f"Comma-separated q values (default {DEFAULT_Q_LIST}).")
    ell.add_argument("--show", help="Print one q-coefficient of delta, e.g. q1.")
    ell.add_argument("--compare-mc", metavar="LAMBDA", help="Compare elliptic and twisted classes on P1.")
    ell.set_defaults(handler=cmd_elliptic)

    validate = sub.add_parser("validate", help="Validate a model.")
    _add_model_arguments(validate)
    validate.add_argument("--canonical", action="store_true", help="Print the canonical serialization.")
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config_class = get_active_config_class()
    config_class.configure_logging(args.log_level)
    try:
        config_class.init_app()
        return args.handler(args)
    except (NonPolynomialClassError, NotPolynomialError) as exc:
        logger.error("Non-polynomial fixed-point sum: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.NON_POLYNOMIAL
    except (ModelError, KAlgebraError, PolytopeError, ValueError, KeyError, OSError, RuntimeError) as exc:
        location = getattr(exc, "location", None)
        suffix = f" (at '{location}')" if location else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return ExitCode.INVALID_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
