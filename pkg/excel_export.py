"""
Excel export module for envelope axiom reports.
Generates a workbook with per-point verdicts, the localized classes and the inputs.
"""
import logging
from io import BytesIO
from openpyxl import Workbook
from openpyxl.styles import Font, Alignment, Border, Side, PatternFill
from openpyxl.utils import get_column_letter

from envelope import EnvelopeReport

logger = logging.getLogger(__name__)

VERDICT_COLUMNS = [
    ("normalization", "Normalization"),
    ("normalization_rho", "Normalization (rho)"),
    ("newton", "Newton"),
    ("newton_strict", "Newton (strict)"),
    ("newton_oracle", "Newton (sigma limits)"),
    ("divisibility", "Divisibility"),
    ("support", "Support"),
]

HEADER_FILL = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
PASS_FILL = PatternFill(start_color="E2EFDA", end_color="E2EFDA", fill_type="solid")
FAIL_FILL = PatternFill(start_color="F8CBAD", end_color="F8CBAD", fill_type="solid")
BORDER = Border(
    left=Side(style='thin'),
    right=Side(style='thin'),
    top=Side(style='thin'),
    bottom=Side(style='thin')
)


def verdict_text(value) -> str:
    if value is None:
        return ""
    return "pass" if value else "FAIL"


def witness_text(point: dict) -> str:
    """One-line description of the first failure witness at a point."""
    newton = point.get("newton_witness")
    if newton:
        separator = newton.get("separator") or {}
        violating = ", ".join(newton.get("violating_point") or [])
        return f"point ({violating}) outside hull; {separator.get('text', '')}".strip("; ")
    division = point.get("divisibility_witness")
    if division:
        term = division["leading_term"]
        return f"division stuck at t^({', '.join(term['exponent'])}) y^{term['ydeg']} h^{term['hdeg']}"
    return ""


def _write_header(ws, headers: list):
    for col, header in enumerate(headers, 1):
        cell = ws.cell(row=1, column=col, value=header)
        cell.font = Font(bold=True, size=12, color="FFFFFF")
        cell.fill = HEADER_FILL
        cell.alignment = Alignment(horizontal='center', vertical='center', wrap_text=True)
        cell.border = BORDER


def _autosize(ws):
    for col in range(1, ws.max_column + 1):
        letter = get_column_letter(col)
        longest = max(len(str(ws.cell(row=row, column=col).value or "")) for row in range(1, ws.max_row + 1))
        ws.column_dimensions[letter].width = min(max(10, longest + 2), 80)


def create_report_excel(report: EnvelopeReport) -> bytes:
    """Render an EnvelopeReport as xlsx bytes.

    Args:
        report: Result of full_axiom_report

    Returns:
        Contents of the workbook
    """
    logger.info("Creating report Excel export...")
    wb = Workbook()

    ws = wb.active
    ws.title = "Verdicts"
    _write_header(ws, ["Point", "Role"] + [title for _, title in VERDICT_COLUMNS] + ["Witness"])
    for row, point in enumerate(report.points, start=2):
        ws.cell(row=row, column=1, value=point["point"]).border = BORDER
        ws.cell(row=row, column=2, value=point["role"]).border = BORDER
        for offset, (key, _) in enumerate(VERDICT_COLUMNS):
            value = point.get(key)
            cell = ws.cell(row=row, column=3 + offset, value=verdict_text(value))
            cell.border = BORDER
            cell.alignment = Alignment(horizontal='center')
            if value is not None:
                cell.fill = PASS_FILL if value else FAIL_FILL
        cell = ws.cell(row=row, column=3 + len(VERDICT_COLUMNS), value=witness_text(point))
        cell.border = BORDER
        cell.alignment = Alignment(wrap_text=True)
    total_row = len(report.points) + 3
    ws.cell(row=total_row, column=1, value="Result").font = Font(bold=True)
    cell = ws.cell(row=total_row, column=2, value="PASS" if report.passed else "FAIL")
    cell.font = Font(bold=True)
    cell.fill = PASS_FILL if report.passed else FAIL_FILL
    _autosize(ws)

    ws_classes = wb.create_sheet("Classes")
    _write_header(ws_classes, ["Point", "Class", "Divisor weight"])
    for row, point in enumerate(report.points, start=2):
        ws_classes.cell(row=row, column=1, value=point["point"])
        ws_classes.cell(row=row, column=2, value=point["class_text"])
        ws_classes.cell(row=row, column=3, value="(" + ", ".join(point["divisor_weight"]) + ")")
    _autosize(ws_classes)

    ws_inputs = wb.create_sheet("Inputs")
    _write_header(ws_inputs, ["Input", "Value"])
    inputs = report.inputs
    slope = inputs.get("slope")
    rows = [
        ("Model", inputs.get("model") or ""),
        ("Center", inputs.get("center") or ""),
        ("Chamber", ", ".join(str(v) for v in inputs.get("chamber", []))),
        ("Divisor", ", ".join(f"{c}={v}" for c, v in (inputs.get("divisor") or {}).items())),
        ("Slope", f"n={slope['n']}" if slope else "from divisor"),
        ("Order", "; ".join(f"{a} <= {b}" for a, b in inputs.get("order", []))),
    ]
    for row, (name, value) in enumerate(rows, start=2):
        ws_inputs.cell(row=row, column=1, value=name).font = Font(bold=True)
        ws_inputs.cell(row=row, column=2, value=value)
    _autosize(ws_inputs)

    output = BytesIO()
    wb.save(output)
    return output.getvalue()
