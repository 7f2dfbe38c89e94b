"""
Offline evaluation of golden cases against the engine.
"""
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List

from elliptic import delta_series, format_q_coefficient
from envelope import full_axiom_report
from examples_library import ExampleLibrary, blowup_demo_chart, blowup_demo_setup
from json_utils import loads_exact, parse_rational, poly_from_json, poly_to_json
from kalgebra import KAlgebraError, LaurentPoly, format_poly
from localization import (
    Divisor,
    ModelError,
    chi_via_localization,
    line_bundle_weights,
    localized_class,
    projective_space_fixed_points,
    pushforward_invariance_check,
)
from polytope import PolytopeError

logger = logging.getLogger(__name__)

RATIONAL_PARAMS = {"lam", "multiplicity", "a", "b"}


def _normalize_space(value: Any) -> str:
    return " ".join(str(value or "").strip().split())


def _example_params(raw: Dict[str, Any]) -> Dict[str, Any]:
    params = {}
    for key, value in (raw or {}).items():
        params[key] = parse_rational(value) if key in RATIONAL_PARAMS else value
    return params


def _build_setup(case_input: Dict[str, Any]):
    return ExampleLibrary().build(case_input["example"], **_example_params(case_input.get("params", {})))


def _check(name: str, passed: bool, actual: Any, expected: Any) -> Dict[str, Any]:
    return {"name": name, "passed": bool(passed), "actual": actual, "expected": expected}


def _evaluate_localized_class(case_input, expected) -> List[Dict[str, Any]]:
    setup = _build_setup(case_input)
    model = setup.model
    divisor = model.divisor
    if "divisor" in case_input:
        divisor = Divisor({c: parse_rational(v) for c, v in case_input["divisor"].items()})
    value = localized_class(model, divisor, case_input["point"])
    checks = []
    if "terms" in expected:
        target = poly_from_json(model.torus_rank, expected["terms"])
        checks.append(_check("terms", value == target, poly_to_json(value), expected["terms"]))
    if "text" in expected:
        checks.append(_check("text", format_poly(value) == expected["text"], format_poly(value), expected["text"]))
    return checks


def _evaluate_chi(case_input, expected) -> List[Dict[str, Any]]:
    r, k = int(case_input["r"]), int(case_input["k"])
    value = chi_via_localization(projective_space_fixed_points(r), line_bundle_weights(r, k), r)
    target = LaurentPoly.constant(r, parse_rational(expected["constant"]))
    return [_check("chi", value == target, format_poly(value), expected["constant"])]


def _evaluate_envelope(case_input, expected) -> List[Dict[str, Any]]:
    setup = _build_setup(case_input)
    report = full_axiom_report(setup.model, setup.chamber, setup.order)
    return [_check("passed", report.passed == bool(expected["passed"]), report.passed, expected["passed"])]


def _evaluate_blowup(case_input, expected) -> List[Dict[str, Any]]:
    r = int(case_input["r"])
    model = blowup_demo_setup(r).model
    chart = blowup_demo_chart(r)
    checks = []
    for s_text, want in sorted(expected["verdicts"].items()):
        s = int(s_text)
        got = pushforward_invariance_check(model, model.divisor, chart, range(r), s)
        checks.append(_check(f"s={s}", got == bool(want), got, want))
    return checks


def _evaluate_delta_coefficient(case_input, expected) -> List[Dict[str, Any]]:
    n = int(case_input["n"])
    text = format_q_coefficient(delta_series(n).coefficient(n))
    return [_check("text", text == expected["text"], text, expected["text"])]


CASE_EVALUATORS: Dict[str, Callable[[Dict[str, Any], Dict[str, Any]], List[Dict[str, Any]]]] = {
    "localized_class": _evaluate_localized_class,
    "chi": _evaluate_chi,
    "envelope": _evaluate_envelope,
    "blowup": _evaluate_blowup,
    "delta_coefficient": _evaluate_delta_coefficient,
}


def evaluate_case(case: Dict[str, Any]) -> Dict[str, Any]:
    """Evaluate one golden case; engine errors become a failed 'error' check."""
    case_id = case["case_id"]
    kind = case.get("kind", "")
    evaluator = CASE_EVALUATORS.get(kind)
    if evaluator is None:
        checks = [_check("kind", False, kind, sorted(CASE_EVALUATORS))]
    else:
        try:
            checks = evaluator(case.get("input", {}), case.get("expected", {}))
        except (ModelError, KAlgebraError, PolytopeError, ValueError, KeyError) as exc:
            logger.warning("Case %s raised %s", case_id, exc)
            checks = [_check("error", False, f"{type(exc).__name__}: {exc}", None)]
    passed = bool(checks) and all(check["passed"] for check in checks)
    return {"case_id": case_id, "kind": kind, "passed": passed, "checks": checks}


def summarize_evaluations(evaluations: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Totals plus a passed/failed split per case kind."""
    by_kind: Dict[str, Dict[str, int]] = {}
    for evaluation in evaluations:
        bucket = by_kind.setdefault(evaluation["kind"] or "?", {"passed": 0, "failed": 0})
        bucket["passed" if evaluation["passed"] else "failed"] += 1
    passed = sum(bucket["passed"] for bucket in by_kind.values())
    return {
        "cases": len(evaluations),
        "passed": passed,
        "failed": len(evaluations) - passed,
        "by_kind": dict(sorted(by_kind.items())),
    }


def _as_dict(value: Any) -> Dict[str, Any]:
    return value if isinstance(value, dict) else {}


def load_cases_file(path: str) -> List[Dict[str, Any]]:
    """Load golden cases: {"cases": [...]}, a bare list, or a single case object.

    The file is parsed as exact JSON, so a float anywhere raises ExactJSONError.
    """
    raw = loads_exact(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict) and isinstance(raw.get("cases"), list):
        raw = raw["cases"]
    cases = raw if isinstance(raw, list) else [raw]
    return [
        {
            "case_id": _normalize_space(case.get("case_id")) or f"case-{index}",
            "kind": _normalize_space(case.get("kind")),
            "input": _as_dict(case.get("input")),
            "expected": _as_dict(case.get("expected")),
        }
        for index, case in enumerate(cases, start=1)
    ]
