"""
Exact-rational JSON helpers.

Rationals travel as "p/q" strings (integers as "p"); floating-point numbers
are rejected on input so no persistent artifact ever carries one.
"""
import json
import logging
import re
from fractions import Fraction
from typing import Any, Dict, List, Sequence

from kalgebra import LaurentPoly, Weight, format_rational

logger = logging.getLogger(__name__)

_RATIONAL_RE = re.compile(r"^\s*[+-]?\d+(?:\s*/\s*\d+)?\s*$")


class ExactJSONError(ValueError):
    """A JSON document contains a value that is not an exact rational."""


def _normalize_json_text(text: str) -> str:
    """Drop a BOM and straighten typographic quotes from hand-edited files."""
    return (
        text.lstrip("\ufeff")
        .replace("\u201c", '"')
        .replace("\u201d", '"')
    )


def _reject_float(token: str):
    raise ExactJSONError(f"Floating-point number {token} in an exact document; write it as \"p/q\"")


def loads_exact(text: str) -> Any:
    """Parse JSON, refusing floats, NaN and infinities."""
    return json.loads(
        _normalize_json_text(text),
        parse_float=_reject_float,
        parse_constant=_reject_float,
    )


def dumps_canonical(payload: Any) -> str:
    """Two-space indented JSON with a trailing newline."""
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ExactJSONError(f"Boolean {value!r} where a rational was expected")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL_RE.match(value):
        numerator, _, denominator = value.replace(" ", "").partition("/")
        if denominator and int(denominator) == 0:
            raise ExactJSONError(f"Zero denominator in {value!r}")
        return Fraction(int(numerator), int(denominator or 1))
    raise ExactJSONError(f"Expected a \"p/q\" rational, got {value!r}")


def rational_to_json(value: Fraction) -> str:
    return format_rational(value)


def parse_weight(values: Any) -> Weight:
    if not isinstance(values, list):
        raise ExactJSONError(f"Expected a list of rationals, got {values!r}")
    return tuple(parse_rational(value) for value in values)


def weight_to_json(w: Sequence[Fraction]) -> List[str]:
    return [format_rational(value) for value in w]


def poly_to_json(p: LaurentPoly) -> List[Dict[str, Any]]:
    """Sorted term list: exponent, ydeg, hdeg, coeff."""
    return [
        {
            "exponent": weight_to_json(mono.exponent),
            "ydeg": mono.ydeg,
            "hdeg": mono.hdeg,
            "coeff": format_rational(coeff),
        }
        for mono, coeff in p.terms()
    ]


def poly_from_json(rank: int, terms: Any) -> LaurentPoly:
    if not isinstance(terms, list):
        raise ExactJSONError(f"Expected a term list, got {terms!r}")
    rows = []
    for term in terms:
        if not isinstance(term, dict):
            raise ExactJSONError(f"Expected a term object, got {term!r}")
        rows.append((
            parse_weight(term.get("exponent", [])),
            int(term.get("ydeg", 0)),
            int(term.get("hdeg", 0)),
            parse_rational(term.get("coeff", "1")),
        ))
    return LaurentPoly.from_terms(rank, rows)
