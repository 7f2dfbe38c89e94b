"""
Truncated q-series for the theta function and the two-variable delta
function, their formal identities, and numeric checks of the refined limits
that connect elliptic classes with twisted motivic Chern classes.

Coefficients live on a rank-2 torus: exponent (a, b) stands for x^a y^b.
The q^0 coefficient of delta has denominators and is kept as a RationalFn;
every identity is checked in multiplied-out form so no series is divided.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from kalgebra import (
    LaurentPoly,
    NotPolynomialError,
    RationalFn,
    Weight,
    format_rational,
    rf_to_polynomial,
    to_fraction,
    weight,
)
from localization import Divisor, ResolutionModel, euler_class, localized_class

logger = logging.getLogger(__name__)

RANK = 2
X = (Fraction(1), Fraction(0))
Y = (Fraction(0), Fraction(1))
XY = (Fraction(1), Fraction(1))

Coefficient = Union[LaurentPoly, RationalFn]


def _zero() -> LaurentPoly:
    return LaurentPoly.zero(RANK)


def _is_zero(value: Coefficient) -> bool:
    return value.is_zero


@dataclass
class QSeries:
    """Power series in q truncated after q^order."""

    order: int
    coeffs: Dict[int, Coefficient] = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("Truncation order must be non-negative")
        self.coeffs = {
            n: value for n, value in self.coeffs.items()
            if 0 <= n <= self.order and not _is_zero(value)
        }

    def coefficient(self, n: int) -> Coefficient:
        return self.coeffs.get(n, _zero())

    def truncate(self, order: int) -> "QSeries":
        return QSeries(min(order, self.order), dict(self.coeffs))

    def map_coefficients(self, fn: Callable[[Coefficient], Coefficient]) -> "QSeries":
        return QSeries(self.order, {n: fn(value) for n, value in self.coeffs.items()})

    def with_coefficient(self, n: int, value: Coefficient) -> "QSeries":
        coeffs = dict(self.coeffs)
        coeffs[n] = value
        return QSeries(self.order, coeffs)

    def __add__(self, other: "QSeries") -> "QSeries":
        order = min(self.order, other.order)
        return QSeries(order, {
            n: self.coefficient(n) + other.coefficient(n) for n in range(order + 1)
        })

    def __neg__(self) -> "QSeries":
        return self.map_coefficients(lambda value: -value)

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.map_coefficients(lambda value: value * other)
        order = min(self.order, other.order)
        acc: Dict[int, Coefficient] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                if i + j > order:
                    continue
                term = a * b
                acc[i + j] = acc[i + j] + term if i + j in acc else term
        return QSeries(order, acc)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        order = min(self.order, other.order)
        return all(self.coefficient(n) == other.coefficient(n) for n in range(order + 1))

    __hash__ = None

    def evaluate(self, t_values: Sequence[float], q: float) -> float:
        return sum(value.evaluate(t_values) * q ** n for n, value in self.coeffs.items())


def _monomial(exponent: Sequence, coeff=1) -> LaurentPoly:
    return LaurentPoly.monomial(weight(exponent), coeff)


def _substitute(value: Coefficient, fn: Callable[[Weight], Weight]) -> Coefficient:
    """Apply an exponent map x^a y^b -> x^a' y^b' termwise."""
    if isinstance(value, RationalFn):
        return RationalFn(_substitute(value.num, fn), _substitute(value.den, fn))
    return LaurentPoly.from_terms(
        value.rank,
        ((fn(mono.exponent), mono.ydeg, mono.hdeg, coeff) for mono, coeff in value.items()),
    )


def swap_xy(value: Coefficient) -> Coefficient:
    return _substitute(value, lambda e: (e[1], e[0]))


def invert_xy(value: Coefficient) -> Coefficient:
    return _substitute(value, lambda e: (-e[0], -e[1]))


def _product_series(N: int, argument: Sequence) -> QSeries:
    """prod_{n=1..N} (1 - q^n t^v)(1 - q^n t^-v), truncated at q^N."""
    v = weight(argument)
    result = QSeries(N, {0: LaurentPoly.one(RANK)})
    for n in range(1, N + 1):
        factor = QSeries(N, {0: LaurentPoly.one(RANK), n: -_monomial(v)})
        inverse = QSeries(N, {0: LaurentPoly.one(RANK), n: -_monomial(tuple(-c for c in v))})
        result = result * factor * inverse
    return result


def theta_series(N: int, argument: Sequence = X) -> QSeries:
    """theta(t^v) = (t^{v/2} - t^{-v/2}) * prod_{n=1..N} (1 - q^n t^v)(1 - q^n / t^v).

    The default argument is x.
    """
    if N < 0:
        raise ValueError("Truncation order must be non-negative")
    v = weight(argument)
    half = tuple(c / 2 for c in v)
    prefactor = _monomial(half) - _monomial(tuple(-c for c in half))
    return _product_series(N, v) * prefactor


def theta_prime_at_one(N: int) -> QSeries:
    """d/dx theta(x) at x = 1, coefficientwise; a series with constant coefficients."""
    theta = theta_series(N)
    coeffs = {}
    for n, value in theta.coeffs.items():
        derivative = sum((coeff * mono.exponent[0] for mono, coeff in value.items()), Fraction(0))
        coeffs[n] = LaurentPoly.constant(RANK, derivative)
    return QSeries(N, coeffs)


def _delta_leading() -> RationalFn:
    num = LaurentPoly.one(RANK) - _monomial((-1, -1))
    den = (LaurentPoly.one(RANK) - _monomial((-1, 0))) * (LaurentPoly.one(RANK) - _monomial((0, -1)))
    return RationalFn(num, den)


def delta_coefficient(n: int) -> LaurentPoly:
    """q^n coefficient of delta for n >= 1: sum over k | n of x^-k y^-n/k - x^k y^n/k."""
    if n < 1:
        raise ValueError("Polynomial delta coefficients start at q^1")
    result = _zero()
    for k in range(1, n + 1):
        if n % k:
            continue
        result = result + _monomial((-k, -(n // k))) - _monomial((k, n // k))
    return result


def delta_series(N: int) -> QSeries:
    if N < 0:
        raise ValueError("Truncation order must be non-negative")
    coeffs: Dict[int, Coefficient] = {0: _delta_leading()}
    for n in range(1, N + 1):
        coeffs[n] = delta_coefficient(n)
    return QSeries(N, coeffs)


def _clearing_factor() -> LaurentPoly:
    return (LaurentPoly.one(RANK) - _monomial((-1, 0))) * (LaurentPoly.one(RANK) - _monomial((0, -1)))


def cleared_delta_series(series: QSeries) -> QSeries:
    """delta * (1 - x^-1)(1 - y^-1), with every coefficient a Laurent polynomial.

    Raises NotPolynomialError when a coefficient does not clear.
    """
    factor = _clearing_factor()

    def clear(value: Coefficient) -> LaurentPoly:
        if isinstance(value, RationalFn):
            return rf_to_polynomial(value * factor)
        return value * factor

    return series.map_coefficients(clear)


def _y_slices(poly: LaurentPoly) -> Dict[Fraction, LaurentPoly]:
    """Split a polynomial by y-degree; each slice keeps only its x part."""
    slices: Dict[Fraction, List] = {}
    for mono, coeff in poly.items():
        b = mono.exponent[1]
        slices.setdefault(b, []).append(((mono.exponent[0], Fraction(0)), mono.ydeg, mono.hdeg, coeff))
    return {b: LaurentPoly.from_terms(RANK, rows) for b, rows in slices.items()}


def _periodicity_holds(cleared: QSeries) -> bool:
    """Check D(x, y/q)(1 - 1/y) = x D(x, y)(1 - q/y) cell by cell.

    Cell (d, m) is the coefficient of q^d y^m. Only cells both truncated sides
    determine are compared: 0 <= d <= N and m <= N - 1 - d.
    """
    N = cleared.order
    table = {n: _y_slices(cleared.coefficient(n)) for n in range(N + 1)}
    x = _monomial(X)

    def cell(n: int, m: int) -> LaurentPoly:
        if n < 0 or n > N:
            return _zero()
        return table[n].get(Fraction(m), _zero())

    for d in range(N + 1):
        for m in range(-N - 1, N - d):
            lhs = cell(d + m, m) - cell(d + m + 1, m + 1)
            rhs = x * (cell(d, m) - cell(d - 1, m + 1))
            if lhs != rhs:
                logger.debug("Periodicity fails at q^%s y^%s", d, m)
                return False
    return True


def delta_identity_report(N: int, series: Optional[QSeries] = None) -> Dict[str, bool]:
    """Verdicts for symmetry, antisymmetry and quasi-periodicity of delta to order N."""
    if N < 1:
        raise ValueError("Identity checks need N >= 1")
    series = delta_series(N) if series is None else series.truncate(N)
    report = {
        "symmetry": series.map_coefficients(swap_xy) == series,
        "antisymmetry": series.map_coefficients(invert_xy) == -series,
    }
    try:
        report["periodicity"] = _periodicity_holds(cleared_delta_series(series))
    except NotPolynomialError:
        report["periodicity"] = False
    logger.debug("Delta identities to order %s: %s", N, report)
    return report


def check_delta_identities(N: int, series: Optional[QSeries] = None) -> bool:
    return all(delta_identity_report(N, series).values())


def check_delta_theta_relation(N: int) -> bool:
    """delta(x,y) theta(x) theta(y) = theta'(1) theta(xy) to order N.

    theta(x) = x^1/2 (1 - x^-1) P(x), so the left side equals
    D(x,y) x^1/2 y^1/2 P(x) P(y) with D the cleared delta series.
    """
    if N < 1:
        raise ValueError("The theta relation check needs N >= 1")
    cleared = cleared_delta_series(delta_series(N))
    half = _monomial((Fraction(1, 2), Fraction(1, 2)))
    lhs = cleared * _product_series(N, X) * _product_series(N, Y) * half
    rhs = theta_prime_at_one(N) * theta_series(N, XY)
    return lhs == rhs


def evaluate_series(series: QSeries, x: float, y: float, q: float) -> float:
    return series.evaluate((x, y), q)


def delta_numeric_direct(x: float, y: float, q: float, order: int) -> float:
    """theta'(1) theta(xy) / (theta(x) theta(y)) from truncated products in floats."""

    def product(z: float) -> float:
        value = 1.0
        for n in range(1, order + 1):
            value *= (1 - q ** n * z) * (1 - q ** n / z)
        return value

    prime = 1.0
    for n in range(1, order + 1):
        prime *= (1 - q ** n) ** 2
    prefactor = (x * y - 1) / ((x - 1) * (y - 1))
    return prime * prefactor * product(x * y) / (product(x) * product(y))


def _check_q_list(q_list: Sequence[float]):
    if not q_list:
        raise ValueError("Empty q list")
    if any(not 0 < q < 1 for q in q_list):
        raise ValueError("q values must lie in (0, 1)")
    if any(b >= a for a, b in zip(q_list, q_list[1:])):
        raise ValueError("q values must be strictly decreasing")


def _delta_at_power(series: QSeries, x0: float, c: Fraction, q: float) -> float:
    """delta(x0, q^-c), reduced to 0 <= c' < 1 by delta(x, y/q) = x delta(x, y)."""
    k = math.floor(c)
    return x0 ** k * evaluate_series(series, x0, q ** (-float(c - k)), q)


def delta_numeric_limit(d, x0: float, q_list: Sequence[float], order: int = 12) -> List[float]:
    """|delta(x0, q^-d) - x0^floor(d) / (1 - 1/x0)| along q_list."""
    d = to_fraction(d)
    if d.denominator == 1:
        raise ValueError("The refined limit is taken at non-integral d")
    if abs(x0) == 1:
        raise ValueError("x0 must satisfy |x0| != 1")
    _check_q_list(q_list)
    series = delta_series(order)
    target = x0 ** math.floor(d) / (1 - 1 / x0)
    errors = [abs(_delta_at_power(series, x0, d, q) - target) for q in q_list]
    logger.debug("Delta limit d=%s x0=%s errors=%s", format_rational(d), x0, errors)
    return errors


def is_decreasing(errors: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(errors, errors[1:]))


def _character(w: Weight, t_values: Sequence[float]) -> float:
    value = 1.0
    for base, exp in zip(t_values, w):
        if exp:
            value *= base ** float(exp)
    return value


def elliptic_restriction_numeric(
    model: ResolutionModel,
    divisor: Divisor,
    point_id: str,
    t_values: Sequence[float],
    h: float,
    q: float,
    series: QSeries,
) -> float:
    """eu(T_e M) * sum over charts of prod_k delta(t^w_k, h_k) (1 + y) at y = -1/h.

    Boundary directions with multiplicity c use h_k = q^-c; the others use h.
    """
    y0 = -1 / h
    point = model.point(point_id)
    total = 0.0
    for chart in model.charts_over(point_id):
        term = 1.0
        for index, w in enumerate(chart.tangent_weights):
            x_value = _character(w, t_values)
            component = chart.boundary_of.get(index)
            if component is None:
                factor = evaluate_series(series, x_value, h, q)
            else:
                c = divisor.multiplicity(component)
                if c.denominator == 1:
                    raise ValueError(f"Boundary multiplicity of {component} must be non-integral")
                factor = _delta_at_power(series, x_value, c, q)
            term *= factor * (1 + y0)
        total += term
    eu = euler_class(point.tangent_weights, model.torus_rank)
    return eu.evaluate(t_values) * total


def elliptic_vs_mc_numeric(
    lam,
    x0: float,
    q_list: Sequence[float],
    h: float = 3.0,
    order: int = 12,
    model: Optional[ResolutionModel] = None,
) -> Dict[str, List[float]]:
    """Per fixed point, |elliptic restriction - localized twisted class| along q_list.

    The comparison uses y = -1/h. By default the model is the projective line
    with divisor lam * {0}.
    """
    lam = to_fraction(lam)
    if lam.denominator == 1:
        raise ValueError("The comparison needs a non-integral multiplicity")
    if abs(h) == 1:
        raise ValueError("h must satisfy |h| != 1")
    _check_q_list(q_list)
    if model is None:
        from examples_library import p1_model
        model = p1_model(lam)
    divisor = model.divisor
    series = delta_series(order)
    t_values: Tuple[float, ...] = (x0,) * model.torus_rank
    y0 = -1 / h
    result: Dict[str, List[float]] = {}
    for point_id in model.point_ids:
        target = localized_class(model, divisor, point_id).evaluate(t_values, y=y0)
        result[point_id] = [
            abs(elliptic_restriction_numeric(model, divisor, point_id, t_values, h, q, series) - target)
            for q in q_list
        ]
    return result


def _format_xy(exponent: Weight) -> str:
    text = ""
    for name, exp in zip("xy", exponent):
        if not exp:
            continue
        factor = name if exp == 1 else f"{name}^{{{format_rational(exp)}}}"
        if text and not text.endswith("}"):
            text += " "
        text += factor
    return text


def format_q_coefficient(value: Coefficient) -> str:
    """Render a coefficient in x and y, e.g. "x^{-1}y^{-1} - x y"."""
    if isinstance(value, RationalFn):
        return f"({format_q_coefficient(value.num)}) / ({format_q_coefficient(value.den)})"
    if value.is_zero:
        return "0"
    terms = sorted(
        value.items(),
        key=lambda item: (sum(item[0].exponent), abs(item[0].exponent[0]), item[0].exponent),
    )
    text = ""
    for mono, coeff in terms:
        body = _format_xy(mono.exponent)
        magnitude = abs(coeff)
        if not body:
            body = format_rational(magnitude)
        elif magnitude != 1:
            body = f"{format_rational(magnitude)} {body}"
        if not text:
            text = ("-" if coeff < 0 else "") + body
        else:
            text += (" - " if coeff < 0 else " + ") + body
    return text
