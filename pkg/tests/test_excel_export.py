import unittest
from io import BytesIO
from unittest import mock

from openpyxl import load_workbook

from envelope import Chamber, full_axiom_report
from examples_library import p1_setup, p2_cell_setup
from excel_export import VERDICT_COLUMNS, create_report_excel, verdict_text, witness_text
from kalgebra import LaurentPoly, weight


def _load(report):
    return load_workbook(BytesIO(create_report_excel(report)))


class ExcelExportTests(unittest.TestCase):
    def test_passing_report_layout(self):
        setup = p2_cell_setup("p0")
        workbook = _load(full_axiom_report(setup.model, setup.chamber, setup.order))
        self.assertEqual(workbook.sheetnames, ["Verdicts", "Classes", "Inputs"])

        verdicts = workbook["Verdicts"]
        headers = [cell.value for cell in verdicts[1]]
        self.assertEqual(headers[:2], ["Point", "Role"])
        self.assertEqual(headers[-1], "Witness")
        self.assertEqual(len(headers), len(VERDICT_COLUMNS) + 3)
        self.assertEqual([verdicts.cell(row=row, column=1).value for row in (2, 3, 4)], ["p0", "p1", "p2"])
        self.assertEqual(verdicts.cell(row=6, column=1).value, "Result")
        self.assertEqual(verdicts.cell(row=6, column=2).value, "PASS")

        inputs = {row[0].value: row[1].value for row in workbook["Inputs"].iter_rows(min_row=2)}
        self.assertEqual(inputs["Chamber"], "1, 2")
        self.assertEqual(inputs["Divisor"], "L0=1/3")
        self.assertEqual(inputs["Slope"], "from divisor")

    def test_failing_report_carries_division_witness(self):
        setup = p2_cell_setup("p0")
        report = full_axiom_report(setup.model, Chamber((-1, -2)), setup.order)
        workbook = _load(report)
        verdicts = workbook["Verdicts"]
        rows = {verdicts.cell(row=row, column=1).value: row for row in range(2, 5)}
        witness = verdicts.cell(row=rows["p1"], column=len(VERDICT_COLUMNS) + 3).value
        self.assertTrue(witness.startswith("division stuck at t^("))
        self.assertEqual(verdicts.cell(row=6, column=2).value, "FAIL")

    def test_newton_witness_text(self):
        setup = p1_setup()
        far = (LaurentPoly.one(1) + LaurentPoly.y(1)) * LaurentPoly.monomial(weight(5))
        with mock.patch("envelope.localized_class", return_value=far):
            report = full_axiom_report(setup.model, setup.chamber, setup.order)
        below = next(p for p in report.points if p["point"] == "0")
        self.assertEqual(witness_text(below), "point (9/2) outside hull; x >= 9/4")

    def test_verdict_text(self):
        self.assertEqual([verdict_text(v) for v in (True, False, None)], ["pass", "FAIL", ""])


if __name__ == "__main__":
    unittest.main()
