"""
Stable-envelope axiom checks for localized twisted motivic Chern classes.

Given a model, a chamber, a partial order on fixed points (input data) and a
divisor or slope, the checks are: normalization at the center, Newton
polytope inclusion and divisibility below the center, and vanishing at
points not below the center.
"""
import logging
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from json_utils import poly_to_json, weight_to_json
from kalgebra import (
    LaurentPoly,
    Weight,
    format_poly,
    format_rational,
    lp_divides,
    weight,
    weight_dot,
    weight_neg,
    weight_scale,
    weight_sub,
    weight_sum,
)
from localization import (
    AmbientFixedPoint,
    Divisor,
    ModelError,
    ModelValidationError,
    ResolutionModel,
    divisor_weight,
    euler_class,
    lambda_y_dual,
    localized_class,
    validate_model,
)
from polytope import contains, contains_strictly, contains_via_sigma_limits, newton, translate

logger = logging.getLogger(__name__)


class ChamberError(ModelValidationError):
    """The chosen cocharacter pairs to zero with a tangent weight."""


class OrderError(ModelValidationError):
    """The supplied relation is not a partial order."""


class SlopeMismatchError(ModelError):
    """Slope weights and divisor weights disagree at a fixed point."""


@dataclass(frozen=True)
class Chamber:
    sigma: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(value) for value in self.sigma))

    def pairing(self, w: Weight) -> Fraction:
        return weight_dot(self.sigma, w)

    def validate(self, model: ResolutionModel) -> None:
        if len(self.sigma) != model.torus_rank:
            raise ChamberError(f"Chamber of length {len(self.sigma)} on a rank {model.torus_rank} model")
        for point in model.ambient_points:
            for w in point.tangent_weights:
                if self.pairing(w) == 0:
                    raise ChamberError(
                        f"Chamber {list(self.sigma)} is orthogonal to a tangent weight at '{point.id}'",
                        location=point.id,
                    )


class PartialOrder:
    """Reflexive-transitive closure of the given (lower, upper) pairs."""

    def __init__(self, pairs: Iterable[Sequence[str]] = ()):
        self.pairs: Tuple[Tuple[str, str], ...] = tuple(sorted({(str(a), str(b)) for a, b in pairs}))
        closure = set(self.pairs)
        changed = True
        while changed:
            changed = False
            for a, b in list(closure):
                for c, d in list(closure):
                    if b == c and (a, d) not in closure:
                        closure.add((a, d))
                        changed = True
        for a, b in closure:
            if a != b and (b, a) in closure:
                raise OrderError(f"Order relation has a cycle through '{a}' and '{b}'", location=a)
        self._closure = frozenset(closure)

    def leq(self, a: str, b: str) -> bool:
        return a == b or (a, b) in self._closure

    def strictly_below(self, top: str, elements: Iterable[str]) -> List[str]:
        return [e for e in elements if e != top and self.leq(e, top)]

    def to_list(self) -> List[List[str]]:
        return [[a, b] for a, b in self.pairs]


@dataclass(frozen=True)
class Slope:
    """Fractional line bundle L^(1/n) through its fixed-point weights w_e(L)."""

    n: int
    weights: Dict[str, Weight] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n) <= 0:
            raise ValueError("Slope denominator n must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "weights", {str(k): weight(v) for k, v in dict(self.weights).items()})

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "weights": {k: weight_to_json(v) for k, v in sorted(self.weights.items())}}


def slope_from_divisor(model: ResolutionModel, D: Divisor) -> Slope:
    """Slope whose divisor weights reproduce D: n clears denominators, w_e(L) = n w_e(D)."""
    n = lcm(1, *(value.denominator for value in D.multiplicities.values()))
    return Slope(n, {e: weight_scale(divisor_weight(model, e, D), n) for e in model.point_ids})


def slope_divisor_weights(slope: Slope, center: str) -> Dict[str, Weight]:
    """w_e(D) = (w_e(L) - w_center(L)) / n."""
    if center not in slope.weights:
        raise SlopeMismatchError(f"Slope has no weight at the center '{center}'")
    base = slope.weights[center]
    return {
        e: weight_scale(weight_sub(w, base), Fraction(1, slope.n))
        for e, w in slope.weights.items()
    }


def split_tangent(point: AmbientFixedPoint, chamber: Chamber) -> Tuple[List[Weight], List[Weight]]:
    """Partition tangent weights into positive and negative parts."""
    positive, negative = [], []
    for w in point.tangent_weights:
        value = chamber.pairing(w)
        if value == 0:
            raise ChamberError(f"Chamber is not generic at '{point.id}'", location=point.id)
        (positive if value > 0 else negative).append(w)
    return positive, negative


def _divisor_meets(model: ResolutionModel, D: Divisor, point_id: str) -> bool:
    return any(
        D.multiplicity(component)
        for chart in model.charts_over(point_id)
        for component in chart.boundary_of.values()
    )


def normalization_check(model: ResolutionModel, D: Divisor, chamber: Chamber) -> bool:
    """Class at the center equals eu(T^-) * lambda_y(T^+ dual)."""
    center = model.center
    if _divisor_meets(model, D, center):
        logger.warning("Divisor %s meets the center '%s'", D.describe(), center)
        return False
    positive, negative = split_tangent(model.point(center), chamber)
    rank = model.torus_rank
    expected = euler_class(negative, rank) * lambda_y_dual(positive, rank)
    return localized_class(model, D, center) == expected


def stable_normalization_target(point: AmbientFixedPoint, chamber: Chamber, rank: int) -> LaurentPoly:
    """(-1)^dim T+ eu(T- + h (T+)^*) / det T+, a Laurent polynomial in t and h."""
    positive, negative = split_tangent(point, chamber)
    result = euler_class(negative, rank)
    one = LaurentPoly.one(rank)
    for w in positive:
        result = result * (one - LaurentPoly.monomial(w, hdeg=-1))
    result = result.shift(weight_neg(weight_sum(positive, rank)))
    return -result if len(positive) % 2 else result


def rho_rescale(a: LaurentPoly, dplus: int) -> LaurentPoly:
    """Substitute y -> -h and multiply by h^-dplus."""
    return LaurentPoly.from_terms(
        a.rank,
        (
            (mono.exponent, 0, mono.hdeg + mono.ydeg - dplus, -coeff if mono.ydeg % 2 else coeff)
            for mono, coeff in a.items()
        ),
    )


@dataclass
class NewtonVerdict:
    passed: bool
    strict: bool
    shift: Weight
    witness: Optional[Dict[str, Any]] = None

    def __bool__(self) -> bool:
        return self.passed


def newton_inclusion_check(
    model: ResolutionModel, D: Divisor, slope: Optional[Slope], point_id: str, center: str
) -> NewtonVerdict:
    """Ne(class|e) - w_e(D) inside Ne(eu(T_e M)), with the slope cross-check."""
    if point_id == center:
        raise ValueError("Newton inclusion is checked below the center only")
    shift = divisor_weight(model, point_id, D)
    if slope is not None:
        expected = slope_divisor_weights(slope, center).get(point_id)
        if expected is None or expected != shift:
            raise SlopeMismatchError(
                f"Slope weight {expected} and divisor weight {shift} disagree at '{point_id}'"
            )
    value = localized_class(model, D, point_id)
    if value.is_zero:
        return NewtonVerdict(True, True, shift)
    hull = newton(euler_class(model.point(point_id).tangent_weights, model.torus_rank))
    shifted = translate(newton(value), weight_neg(shift))
    result = contains(hull, shifted)
    if not result:
        logger.info("Newton inclusion fails at '%s'", point_id)
        return NewtonVerdict(False, False, shift, result.to_dict())
    return NewtonVerdict(True, contains_strictly(hull, shifted), shift)


@dataclass(frozen=True)
class OracleSettings:
    """Parameters of the sigma-limit cross-check of the Newton inclusion."""

    trials: int = 20
    resamples: int = 100
    sigma_range: int = 97
    seed: int = 20240601

    def rng_for(self, point_id: str) -> random.Random:
        return random.Random(f"{self.seed}:{point_id}")


def newton_oracle_check(model: ResolutionModel, D: Divisor, point_id: str, settings: OracleSettings) -> bool:
    """Newton inclusion decided by one-parameter limits instead of linear programming."""
    value = localized_class(model, D, point_id)
    if value.is_zero:
        return True
    shifted = value.shift(weight_neg(divisor_weight(model, point_id, D)))
    eu = euler_class(model.point(point_id).tangent_weights, model.torus_rank)
    return contains_via_sigma_limits(
        shifted, eu, settings.trials, settings.rng_for(point_id), settings.resamples, settings.sigma_range
    )


def support_failures(model: ResolutionModel, D: Divisor, order: PartialOrder, center: str) -> List[str]:
    return [
        e for e in model.point_ids
        if not order.leq(e, center) and not localized_class(model, D, e).is_zero
    ]


def support_check(model: ResolutionModel, D: Divisor, order: PartialOrder, center: str) -> bool:
    """The class vanishes at every point not below the center."""
    return not support_failures(model, D, order, center)


def divisibility_check(model: ResolutionModel, D: Divisor, chamber: Chamber, point_id: str) -> bool:
    """lambda_y of the positive cotangent part divides the class."""
    return _divisibility(model, D, chamber, point_id).ok


def _divisibility(model: ResolutionModel, D: Divisor, chamber: Chamber, point_id: str):
    positive, _ = split_tangent(model.point(point_id), chamber)
    divisor = lambda_y_dual(positive, model.torus_rank)
    return lp_divides(divisor, localized_class(model, D, point_id))


def _division_witness(result) -> Optional[Dict[str, Any]]:
    if result.ok:
        return None
    mono, coeff = result.witness
    return {
        "leading_term": {
            "exponent": weight_to_json(mono.exponent),
            "ydeg": mono.ydeg,
            "hdeg": mono.hdeg,
            "coeff": format_rational(coeff),
        },
        "remainder": poly_to_json(result.remainder),
    }


class EnvelopeReport:
    """Per-point verdicts plus a global pass flag."""

    def __init__(self, inputs: Dict[str, Any]):
        self.passed = True
        self.inputs = inputs
        self.points: List[Dict[str, Any]] = []
        self.issues: List[Dict[str, Any]] = []

    def add_point(self, verdict: Dict[str, Any]):
        self.points.append(verdict)
        for check in ("normalization", "normalization_rho", "newton", "newton_oracle", "divisibility", "support"):
            if verdict.get(check) is False:
                self.add_issue(verdict["point"], check, f"{check} failed at '{verdict['point']}'")

    def add_issue(self, point: str, check: str, message: str):
        self.passed = False
        self.issues.append({"point": point, "check": check, "message": message})

    @property
    def support(self) -> bool:
        return all(p["support"] is not False for p in self.points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "inputs": self.inputs,
            "support": self.support,
            "points": self.points,
            "issues": self.issues,
        }

    def summary_lines(self) -> List[str]:
        lines = [f"Model: {self.inputs.get('model') or '<unnamed>'}, center: {self.inputs.get('center')}"]
        for verdict in self.points:
            checks = [
                f"{name}={'pass' if verdict[name] else 'FAIL'}"
                for name in (
                    "normalization", "normalization_rho", "newton", "newton_strict", "newton_oracle", "divisibility", "support",
                )
                if verdict.get(name) is not None
            ]
            lines.append(f"  [{verdict['role']}] {verdict['point']}: {verdict['class_text']}  {' '.join(checks)}")
        lines.append(f"Result: {'PASS' if self.passed else 'FAIL'}")
        return lines


def _point_verdict(
    model: ResolutionModel,
    D: Divisor,
    slope: Optional[Slope],
    chamber: Chamber,
    order: PartialOrder,
    point_id: str,
    oracle: Optional[OracleSettings] = None,
) -> Dict[str, Any]:
    center = model.center
    rank = model.torus_rank
    value = localized_class(model, D, point_id)
    if point_id == center:
        role = "center"
    elif order.leq(point_id, center):
        role = "below"
    else:
        role = "outside"
    verdict: Dict[str, Any] = {
        "point": point_id,
        "role": role,
        "class": poly_to_json(value),
        "class_text": format_poly(value),
        "divisor_weight": weight_to_json(divisor_weight(model, point_id, D)),
        "normalization": None,
        "normalization_rho": None,
        "newton": None,
        "newton_strict": None,
        "newton_witness": None,
        "newton_oracle": None,
        "divisibility": None,
        "divisibility_witness": None,
        "support": None,
    }
    if role == "center":
        point = model.point(point_id)
        positive, _ = split_tangent(point, chamber)
        verdict["normalization"] = normalization_check(model, D, chamber)
        verdict["normalization_rho"] = (
            rho_rescale(value, len(positive)) == stable_normalization_target(point, chamber, rank)
        )
    elif role == "below":
        newton_verdict = newton_inclusion_check(model, D, slope, point_id, center)
        verdict["newton"] = newton_verdict.passed
        verdict["newton_strict"] = newton_verdict.strict
        verdict["newton_witness"] = newton_verdict.witness
        if oracle is not None:
            verdict["newton_oracle"] = newton_oracle_check(model, D, point_id, oracle)
        division = _divisibility(model, D, chamber, point_id)
        verdict["divisibility"] = division.ok
        verdict["divisibility_witness"] = _division_witness(division)
    else:
        verdict["support"] = value.is_zero
    return verdict


def full_axiom_report(
    model: ResolutionModel,
    chamber: Chamber,
    order: PartialOrder,
    divisor: Optional[Divisor] = None,
    slope: Optional[Slope] = None,
    jobs: int = 1,
    oracle: Optional[OracleSettings] = None,
) -> EnvelopeReport:
    """Run every axiom check; per-point work may run on a thread pool.

    The divisor defaults to the model's own. A slope, when given, must
    reproduce the divisor weights at every point.
    """
    D = model.divisor if divisor is None else divisor
    validate_model(model, D)
    chamber.validate(model)
    if slope is not None:
        for point_id, expected in slope_divisor_weights(slope, model.center).items():
            actual = divisor_weight(model, point_id, D)
            if expected != actual:
                raise SlopeMismatchError(f"Slope and divisor disagree at '{point_id}'")

    report = EnvelopeReport({
        "model": model.name,
        "center": model.center,
        "chamber": list(chamber.sigma),
        "divisor": {c: format_rational(v) for c, v in sorted(D.multiplicities.items())},
        "slope": slope.to_dict() if slope else None,
        "order": order.to_list(),
    })

    point_ids = model.point_ids
    verdicts: Dict[str, Dict[str, Any]] = {}
    if jobs > 1 and len(point_ids) > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, len(point_ids))) as executor:
            futures = {
                executor.submit(_point_verdict, model, D, slope, chamber, order, point_id, oracle): point_id
                for point_id in point_ids
            }
            for future in as_completed(futures):
                verdicts[futures[future]] = future.result()
    else:
        for point_id in point_ids:
            verdicts[point_id] = _point_verdict(model, D, slope, chamber, order, point_id, oracle)

    for point_id in point_ids:
        report.add_point(verdicts[point_id])
    logger.info("Axiom report for '%s': %s", model.name, "pass" if report.passed else "fail")
    return report
