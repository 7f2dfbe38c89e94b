"""
Golden-case acceptance run for the engine.

    python ops/run_acceptance.py [--cases FILE] [--kind chi --kind envelope] [--output PATH]
"""
import argparse
from pathlib import Path
import sys
from typing import Optional, Sequence

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from acceptance import CASE_EVALUATORS, evaluate_case, load_cases_file, summarize_evaluations
from config import get_active_config_class
from run_artifacts import RunArtifacts

DEFAULT_CASES = ROOT_DIR / "evals" / "golden_cases.json"


def _status_line(evaluation: dict) -> str:
    status = "PASS" if evaluation["passed"] else "FAIL"
    failing = [check for check in evaluation["checks"] if not check["passed"]]
    detail = "".join(f"\n    {check['name']}: got {check['actual']!r}, want {check['expected']!r}" for check in failing)
    return f"[{status}] {evaluation['case_id']} ({evaluation['kind']}){detail}"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Evaluate golden cases against the engine.")
    parser.add_argument("--cases", default=str(DEFAULT_CASES), help="Golden cases JSON file.")
    parser.add_argument("--kind", action="append", choices=sorted(CASE_EVALUATORS),
                        help="Only evaluate cases of this kind (repeatable).")
    parser.add_argument("--output", help="Write the JSON report to this path.")
    parser.add_argument("--save-run", action="store_true", help="Also store the report under MCENV_REPORTS_DIR.")
    parser.add_argument("--fail-on-failing-cases", action="store_true",
                        help="Exit with code 1 if at least one case fails.")
    args = parser.parse_args(argv)
    config_class = get_active_config_class()
    config_class.configure_logging()

    cases = load_cases_file(args.cases)
    if args.kind:
        cases = [case for case in cases if case["kind"] in args.kind]
    evaluations = [evaluate_case(case) for case in cases]
    summary = summarize_evaluations(evaluations)
    report = {"cases_file": args.cases, "summary": summary, "evaluations": evaluations}

    if args.output:
        RunArtifacts(Path(args.output).parent).write_json(Path(args.output).name, report)
    if args.save_run:
        run = RunArtifacts.create_for_command(
            config_class.ensure_reports_dir(), "acceptance", Path(args.cases).stem, {"kind": args.kind or []}
        )
        run.write_json("acceptance.json", report)

    print(f"Cases: {summary['cases']}, passed: {summary['passed']}, failed: {summary['failed']}")
    for kind, counts in summary["by_kind"].items():
        print(f"  {kind}: {counts['passed']} passed, {counts['failed']} failed")
    for evaluation in evaluations:
        print(_status_line(evaluation))

    if args.fail_on_failing_cases and summary["failed"]:
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
