import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

os.environ.setdefault("MCENV_ENV", "testing")

from openpyxl import load_workbook

from cli import ExitCode, main, parse_divisor_arg, parse_order_arg, parse_s_range
from config import TestingConfig
from kalgebra import LimitDoesNotExist, RankMismatchError
from polytope import DegenerateHullError, NonGenericSigmaError

MODELS_DIR = Path(__file__).resolve().parents[1] / "data" / "models"


def run_cli(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    with redirect_stdout(stdout), redirect_stderr(stderr):
        code = main(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class ArgumentParsingTests(unittest.TestCase):
    def test_divisor_and_order(self):
        divisor = parse_divisor_arg("A=1/3, B=-2/5")
        self.assertEqual(str(divisor.multiplicity("B")), "-2/5")
        order = parse_order_arg("p2<p1,p1<=p0")
        self.assertTrue(order.leq("p2", "p0"))
        with self.assertRaises(ValueError):
            parse_divisor_arg("A")
        with self.assertRaises(ValueError):
            parse_order_arg("p2>p1")

    def test_s_range(self):
        self.assertEqual(parse_s_range("0..2"), [0, 1, 2])
        self.assertEqual(parse_s_range("3"), [3])
        with self.assertRaises(ValueError):
            parse_s_range("a..b")


class ComputeCommandTests(unittest.TestCase):
    def test_projective_line_classes(self):
        code, out, _ = run_cli("compute", "--example", "p1", "--point", "0")
        self.assertEqual(code, ExitCode.PASS)
        self.assertEqual(out.strip(), "(1+y)·t^0")

        code, out, _ = run_cli("compute", "--example", "p1", "--lambda=-1/3", "--point", "0")
        self.assertEqual(code, ExitCode.PASS)
        self.assertEqual(out.strip(), "(1+y)·t^{-1}")

        _, out, _ = run_cli("compute", "--example", "p1")
        self.assertIn("inf: 1 + y·t^1", out)

    def test_json_output(self):
        code, out, _ = run_cli("compute", "--model", str(MODELS_DIR / "p1.json"), "--json")
        self.assertEqual(code, ExitCode.PASS)
        payload = json.loads(out)
        self.assertEqual(set(payload), {"0", "inf"})
        self.assertEqual(payload["0"]["text"], "(1+y)·t^0")

    def test_missing_source_is_invalid_input(self):
        code, _, err = run_cli("compute")
        self.assertEqual(code, ExitCode.INVALID_INPUT)
        self.assertIn("--model or --example", err)

    def test_bad_rational(self):
        code, _, _ = run_cli("compute", "--example", "p1", "--lambda", "1/0")
        self.assertEqual(code, ExitCode.INVALID_INPUT)


class CheckCommandTests(unittest.TestCase):
    def test_projective_line_passes(self):
        code, out, err = run_cli("check", "--example", "p1")
        self.assertEqual(code, ExitCode.PASS)
        self.assertTrue(json.loads(out)["passed"])
        self.assertIn("Result: PASS", err)

    def test_model_file_with_envelope_block(self):
        code, _, _ = run_cli("check", "--model", str(MODELS_DIR / "p1.json"), "--jobs", "2")
        self.assertEqual(code, ExitCode.PASS)

    def test_corrupted_model_is_invalid_input(self):
        code, _, err = run_cli("check", "--model", str(MODELS_DIR / "corrupted_chart.json"))
        self.assertEqual(code, ExitCode.INVALID_INPUT)
        self.assertIn("D9", err)

    def test_degenerate_chamber_is_invalid_input(self):
        code, _, _ = run_cli("check", "--example", "p2-cell", "--chamber", "1,1")
        self.assertEqual(code, ExitCode.INVALID_INPUT)

    def test_opposite_chamber_fails_axioms(self):
        code, out, _ = run_cli("check", "--example", "p2-cell", "--chamber", "-1,-2")
        self.assertEqual(code, ExitCode.AXIOM_FAILURE)
        self.assertFalse(json.loads(out)["passed"])

    def test_missing_order_relation_fails_support(self):
        code, out, _ = run_cli("check", "--example", "p1", "--lambda=1/3", "--order", "inf<0")
        self.assertEqual(code, ExitCode.AXIOM_FAILURE)
        self.assertEqual(json.loads(out)["issues"][0]["check"], "support")

    def test_slope_of_wrong_rank_is_invalid_input(self):
        payload = json.loads((MODELS_DIR / "p1.json").read_text(encoding="utf-8"))
        payload["envelope"]["slope"] = {"n": 2, "weights": {"0": ["1"], "inf": ["0", "0"]}}
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "p1_bad_slope.json"
            path.write_text(json.dumps(payload), encoding="utf-8")
            code, out, err = run_cli("check", "--model", str(path))
        self.assertEqual(code, ExitCode.INVALID_INPUT)
        self.assertEqual(out, "")
        self.assertIn("torus_rank", err)

    def test_slope_matching_the_divisor_passes(self):
        payload = json.loads((MODELS_DIR / "p1.json").read_text(encoding="utf-8"))
        payload["envelope"]["slope"] = {"n": 2, "weights": {"0": ["1"], "inf": ["0"]}}
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "p1_slope.json"
            path.write_text(json.dumps(payload), encoding="utf-8")
            code, _, _ = run_cli("check", "--model", str(path))
        self.assertEqual(code, ExitCode.PASS)

    def test_file_order_with_chart_outside_the_center_is_invalid_input(self):
        payload = json.loads((MODELS_DIR / "p1.json").read_text(encoding="utf-8"))
        payload["envelope"]["order"] = [["inf", "0"]]
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "p1_reversed.json"
            path.write_text(json.dumps(payload), encoding="utf-8")
            code, _, err = run_cli("check", "--model", str(path))
        self.assertEqual(code, ExitCode.INVALID_INPUT)
        self.assertIn("at 'c0'", err)

    def test_algebra_and_polytope_errors_are_invalid_input(self):
        failures = [
            RankMismatchError("Weights of rank 1 and 2"),
            LimitDoesNotExist("no limit"),
            NonGenericSigmaError("no generic sigma"),
            DegenerateHullError("flat hull"),
        ]
        for failure in failures:
            with self.subTest(error=type(failure).__name__):
                with mock.patch("cli.full_axiom_report", side_effect=failure):
                    code, _, err = run_cli("check", "--example", "p1")
                self.assertEqual(code, ExitCode.INVALID_INPUT)
                self.assertIn(str(failure), err)

    def test_oracle_and_spreadsheet(self):
        with tempfile.TemporaryDirectory() as tmp_dir:
            xlsx_path = Path(tmp_dir) / "report.xlsx"
            out_path = Path(tmp_dir) / "report.json"
            code, out, _ = run_cli(
                "check", "--example", "p2-cell", "--oracle", "--xlsx", str(xlsx_path), "--out", str(out_path)
            )
            self.assertEqual(code, ExitCode.PASS)
            self.assertEqual(out, "")
            payload = json.loads(out_path.read_text(encoding="utf-8"))
            workbook = load_workbook(xlsx_path)
        oracle = {point["point"]: point["newton_oracle"] for point in payload["points"]}
        self.assertEqual(oracle, {"p0": None, "p1": True, "p2": True})
        self.assertEqual(workbook.sheetnames, ["Verdicts", "Classes", "Inputs"])

    def test_save_run_writes_report_folder(self):
        with tempfile.TemporaryDirectory() as tmp_dir:
            class LocalConfig(TestingConfig):
                REPORTS_DIR = str(Path(tmp_dir) / "reports")

            with mock.patch("cli.get_active_config_class", return_value=LocalConfig):
                code, _, err = run_cli("check", "--example", "p1", "--save-run")
            runs = list(Path(LocalConfig.REPORTS_DIR).iterdir())
            self.assertEqual(code, ExitCode.PASS)
            self.assertEqual(len(runs), 1)
            self.assertTrue(runs[0].name.endswith("_check_p1"))
            self.assertEqual(sorted(p.name for p in runs[0].iterdir()), ["report.json", "report.xlsx", "run_meta.json"])
            self.assertIn("Run saved to", err)


class OtherCommandTests(unittest.TestCase):
    def test_chi(self):
        code, out, _ = run_cli("chi", "--r", "3", "--m", "0")
        self.assertEqual((code, out.strip()), (ExitCode.PASS, "1"))
        _, out, _ = run_cli("chi", "--r", "4", "--m", "-2")
        self.assertEqual(out.strip(), "0")
        code, _, _ = run_cli("chi", "--r", "0", "--m", "1")
        self.assertEqual(code, ExitCode.INVALID_INPUT)

    def test_blowup_window(self):
        code, out, _ = run_cli("blowup-test", "--r", "2", "--s", "0..2")
        self.assertEqual(code, ExitCode.PASS)
        self.assertIn("s=1: invariant", out)
        self.assertIn("s=2: not invariant", out)
        self.assertNotIn("unexpected", out)

    def test_blowup_off_the_boundary(self):
        code, out, _ = run_cli(
            "blowup-test", "--example", "blowup-demo", "--r", "2", "--chart", "00", "--directions", "0,1", "--s", "1..2"
        )
        self.assertNotEqual(code, ExitCode.INVALID_INPUT)
        self.assertIn("r=0", out)
        self.assertIn("s=1: not invariant", out)
        self.assertIn("s=2: not invariant", out)
        self.assertNotIn("unexpected", out)

    def test_blowup_needs_chart_with_example(self):
        code, _, _ = run_cli("blowup-test", "--example", "p1")
        self.assertEqual(code, ExitCode.INVALID_INPUT)

    def test_elliptic_show_and_identities(self):
        code, out, _ = run_cli("elliptic", "--order", "2", "--show", "q1")
        self.assertEqual(code, ExitCode.PASS)
        self.assertEqual(out.strip(), "x^{-1}y^{-1} - x y")

        code, out, _ = run_cli("elliptic", "--order", "6", "--identities")
        self.assertEqual(code, ExitCode.PASS)
        self.assertIn("periodicity: pass", out)
        self.assertIn("theta_relation: pass", out)

    def test_elliptic_order_out_of_range(self):
        code, _, _ = run_cli("elliptic", "--order", "99", "--show", "q1")
        self.assertEqual(code, ExitCode.INVALID_INPUT)
        code, _, _ = run_cli("elliptic", "--order", "2", "--show", "q3")
        self.assertEqual(code, ExitCode.INVALID_INPUT)

    def test_validate_prints_canonical_form(self):
        path = MODELS_DIR / "p1.json"
        code, out, _ = run_cli("validate", "--model", str(path), "--canonical")
        self.assertEqual(code, ExitCode.PASS)
        self.assertEqual(out, path.read_text(encoding="utf-8"))

    def test_unknown_command_exits_through_argparse(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                main(["frobnicate"])


if __name__ == "__main__":
    unittest.main()
