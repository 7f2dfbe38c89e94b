"""
Fixed-point chart models and localized twisted motivic Chern classes.

A ResolutionModel describes the torus-fixed points of an ambient space M, the
fixed points (charts) of a resolution Y -> X lying over them, the components
of the simple normal crossing boundary and a rational divisor supported on
that boundary. Everything here works with restrictions to fixed points only.
"""
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from kalgebra import (
    LaurentPoly,
    NotPolynomialError,
    RationalFn,
    Weight,
    ceil_fraction,
    format_rational,
    is_zero_weight,
    rf_to_polynomial,
    to_fraction,
    unit_weight,
    weight,
    weight_add,
    weight_scale,
    weight_sub,
    zero_weight,
)

if TYPE_CHECKING:
    from envelope import PartialOrder

logger = logging.getLogger(__name__)


class ModelError(Exception):
    """Base error for resolution models."""


class ModelValidationError(ModelError):
    """A model violates a structural invariant; `location` names the culprit."""

    def __init__(self, message: str, location: Optional[str] = None):
        super().__init__(message)
        self.location = location


class ModelFormatError(ModelError):
    """A model document does not have the expected shape."""


class NonPolynomialClassError(ModelError):
    """The fixed-point sum at a point does not simplify to a Laurent polynomial."""

    def __init__(self, message: str, point: str, fraction: RationalFn, error: NotPolynomialError):
        super().__init__(message)
        self.point = point
        self.fraction = fraction
        self.division = error.division


@dataclass(frozen=True)
class BoundaryComponent:
    id: str


@dataclass(frozen=True)
class Chart:
    """Local model of Y at an isolated fixed point.

    boundary_of maps a direction index to the boundary component whose local
    equation is that coordinate.
    """

    id: str
    tangent_weights: Tuple[Weight, ...]
    image_point: str
    boundary_of: Dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tangent_weights", tuple(weight(w) for w in self.tangent_weights))
        object.__setattr__(self, "boundary_of", {int(k): str(v) for k, v in dict(self.boundary_of).items()})

    @property
    def dimension(self) -> int:
        return len(self.tangent_weights)

    @property
    def boundary_directions(self) -> List[int]:
        return sorted(self.boundary_of)

    def direction_of(self, component_id: str) -> Optional[int]:
        for direction, component in self.boundary_of.items():
            if component == component_id:
                return direction
        return None


@dataclass(frozen=True)
class Divisor:
    """Rational multiplicities per boundary component; zeros are dropped."""

    multiplicities: Dict[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for component, value in dict(self.multiplicities).items():
            value = to_fraction(value)
            if value:
                clean[str(component)] = value
        object.__setattr__(self, "multiplicities", clean)

    def multiplicity(self, component_id: str) -> Fraction:
        return self.multiplicities.get(component_id, Fraction(0))

    @property
    def support(self) -> frozenset:
        return frozenset(self.multiplicities)

    @property
    def is_integral(self) -> bool:
        return all(value.denominator == 1 for value in self.multiplicities.values())

    def ceil(self) -> "Divisor":
        return Divisor({c: Fraction(ceil_fraction(value)) for c, value in self.multiplicities.items()})

    def scale(self, factor) -> "Divisor":
        factor = to_fraction(factor)
        return Divisor({c: value * factor for c, value in self.multiplicities.items()})

    def __add__(self, other: "Divisor") -> "Divisor":
        merged = dict(self.multiplicities)
        for component, value in other.multiplicities.items():
            merged[component] = merged.get(component, Fraction(0)) + value
        return Divisor(merged)

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + other.scale(-1)

    def with_multiplicity(self, component_id: str, value) -> "Divisor":
        merged = dict(self.multiplicities)
        merged[component_id] = to_fraction(value)
        return Divisor(merged)

    def describe(self) -> str:
        if not self.multiplicities:
            return "0"
        return " + ".join(f"{format_rational(v)}*{c}" for c, v in sorted(self.multiplicities.items()))


@dataclass(frozen=True)
class AmbientFixedPoint:
    id: str
    tangent_weights: Tuple[Weight, ...]

    def __post_init__(self):
        object.__setattr__(self, "tangent_weights", tuple(weight(w) for w in self.tangent_weights))


@dataclass(frozen=True)
class ResolutionModel:
    torus_rank: int
    ambient_points: Tuple[AmbientFixedPoint, ...]
    charts: Tuple[Chart, ...]
    components: Tuple[BoundaryComponent, ...]
    center: str
    divisor: Divisor = field(default_factory=Divisor)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ambient_points", tuple(self.ambient_points))
        object.__setattr__(self, "charts", tuple(self.charts))
        object.__setattr__(
            self,
            "components",
            tuple(c if isinstance(c, BoundaryComponent) else BoundaryComponent(str(c)) for c in self.components),
        )

    def point(self, point_id: str) -> AmbientFixedPoint:
        for point in self.ambient_points:
            if point.id == point_id:
                return point
        raise ModelValidationError(f"Unknown ambient point '{point_id}'", location=point_id)

    def chart(self, chart_id: str) -> Chart:
        for chart in self.charts:
            if chart.id == chart_id:
                return chart
        raise ModelValidationError(f"Unknown chart '{chart_id}'", location=chart_id)

    def charts_over(self, point_id: str) -> List[Chart]:
        return [chart for chart in self.charts if chart.image_point == point_id]

    @property
    def point_ids(self) -> List[str]:
        return [point.id for point in self.ambient_points]

    @property
    def component_ids(self) -> List[str]:
        return [component.id for component in self.components]


# characteristic classes at a fixed point


def _rank_of(weights: Sequence[Weight], rank: Optional[int]) -> int:
    if rank is not None:
        return rank
    if weights:
        return len(weights[0])
    return 0


def euler_class(weights: Sequence, rank: Optional[int] = None) -> LaurentPoly:
    """K-theoretic Euler class: product of (1 - t^-w)."""
    weights = [weight(w) for w in weights]
    rank = _rank_of(weights, rank)
    result = LaurentPoly.one(rank)
    for w in weights:
        if is_zero_weight(w):
            raise ModelValidationError("Euler class of a zero weight")
        result = result * (LaurentPoly.one(rank) - LaurentPoly.monomial(tuple(-x for x in w)))
    return result


def lambda_y_dual(weights: Sequence, rank: Optional[int] = None) -> LaurentPoly:
    """lambda_y of the dual: product of (1 + y t^-w)."""
    weights = [weight(w) for w in weights]
    rank = _rank_of(weights, rank)
    result = LaurentPoly.one(rank)
    for w in weights:
        result = result * (LaurentPoly.one(rank) + LaurentPoly.monomial(tuple(-x for x in w), ydeg=1))
    return result


def mc_open_chart(chart: Chart, rank: Optional[int] = None) -> LaurentPoly:
    """mC of the complement of the boundary, restricted to the chart's point.

    Boundary directions give (1+y) t^-w, free directions 1 + y t^-w.
    """
    rank = _rank_of(chart.tangent_weights, rank)
    one = LaurentPoly.one(rank)
    y = LaurentPoly.y(rank)
    result = one
    for direction, w in enumerate(chart.tangent_weights):
        inverse = LaurentPoly.monomial(tuple(-x for x in w))
        if direction in chart.boundary_of:
            result = result * (one + y) * inverse
        else:
            result = result * (one + y * inverse)
    return result


def _weighted_sum(chart: Chart, D: Divisor, rank: int, rounding) -> Weight:
    total = zero_weight(rank)
    for direction, component in chart.boundary_of.items():
        c = D.multiplicity(component)
        if c:
            total = weight_add(total, weight_scale(chart.tangent_weights[direction], rounding(c)))
    return total


def ceil_twist(chart: Chart, D: Divisor, rank: Optional[int] = None) -> LaurentPoly:
    """Restriction of O(ceil(D)) to the chart: t^(sum ceil(c_j) w_k(j))."""
    rank = _rank_of(chart.tangent_weights, rank)
    return LaurentPoly.monomial(_weighted_sum(chart, D, rank, ceil_fraction))


def chart_divisor_weight(chart: Chart, D: Divisor, rank: Optional[int] = None) -> Weight:
    rank = _rank_of(chart.tangent_weights, rank)
    return _weighted_sum(chart, D, rank, lambda c: c)


def divisor_weight(model: ResolutionModel, target: Union[str, Chart, AmbientFixedPoint], D: Divisor) -> Weight:
    """Weight of D at a chart, or the common value over an ambient point.

    Strings name ambient points. Disagreement between charts over the same
    point is a model error.
    """
    rank = model.torus_rank
    if isinstance(target, Chart):
        return chart_divisor_weight(target, D, rank)
    point_id = target.id if isinstance(target, AmbientFixedPoint) else target
    model.point(point_id)
    values = {chart.id: chart_divisor_weight(chart, D, rank) for chart in model.charts_over(point_id)}
    if not values:
        return zero_weight(rank)
    distinct = set(values.values())
    if len(distinct) > 1:
        raise ModelValidationError(
            f"Divisor weights disagree over point '{point_id}': "
            + ", ".join(f"{cid}={[format_rational(x) for x in w]}" for cid, w in sorted(values.items())),
            location=point_id,
        )
    return distinct.pop()


def localized_class(model: ResolutionModel, D: Divisor, point_id: str) -> LaurentPoly:
    """Restriction of the pushed-forward twisted class to an ambient fixed point.

    eu(T_e M) * sum over charts q above e of ceil_twist * mc_open / eu(T_q Y),
    simplified to a Laurent polynomial.
    """
    rank = model.torus_rank
    point = model.point(point_id)
    charts = model.charts_over(point_id)
    if not charts:
        return LaurentPoly.zero(rank)

    total = RationalFn(LaurentPoly.zero(rank))
    for chart in charts:
        numerator = ceil_twist(chart, D, rank) * mc_open_chart(chart, rank)
        total = total + RationalFn(numerator, euler_class(chart.tangent_weights, rank))
    fraction = total * euler_class(point.tangent_weights, rank)
    try:
        return rf_to_polynomial(fraction)
    except NotPolynomialError as exc:
        logger.warning("Fixed-point sum at '%s' is not a Laurent polynomial", point_id)
        raise NonPolynomialClassError(
            f"Localized class at '{point_id}' is not a Laurent polynomial", point_id, fraction, exc
        ) from exc


def localized_classes(model: ResolutionModel, D: Divisor) -> Dict[str, LaurentPoly]:
    return {point_id: localized_class(model, D, point_id) for point_id in model.point_ids}


# validation


def validate_model(
    model: ResolutionModel, divisor: Optional[Divisor] = None, order: Optional["PartialOrder"] = None
) -> ResolutionModel:
    """Check structural invariants and divisor-weight consistency.

    With an order, every chart must sit over a fixed point below the center.

    Returns the model unchanged; raises ModelValidationError pinpointing the
    first offending point, chart or component.
    """
    rank = model.torus_rank
    if not isinstance(rank, int) or rank < 1:
        raise ModelValidationError(f"Torus rank must be a positive integer, got {rank!r}")

    def _unique(ids: Iterable[str], kind: str):
        seen = set()
        for item in ids:
            if item in seen:
                raise ModelValidationError(f"Duplicate {kind} id '{item}'", location=item)
            seen.add(item)

    _unique(model.point_ids, "ambient point")
    _unique((chart.id for chart in model.charts), "chart")
    _unique(model.component_ids, "boundary component")
    components = set(model.component_ids)

    if model.center not in set(model.point_ids):
        raise ModelValidationError(f"Center '{model.center}' is not an ambient point", location=model.center)

    for point in model.ambient_points:
        for w in point.tangent_weights:
            if len(w) != rank:
                raise ModelValidationError(f"Point '{point.id}' has a weight of rank {len(w)}", location=point.id)
            if is_zero_weight(w):
                raise ModelValidationError(f"Point '{point.id}' has a zero tangent weight", location=point.id)

    ambient = {point.id: point for point in model.ambient_points}
    for chart in model.charts:
        if chart.image_point not in ambient:
            raise ModelValidationError(
                f"Chart '{chart.id}' maps to unknown point '{chart.image_point}'", location=chart.id
            )
        if chart.dimension > len(ambient[chart.image_point].tangent_weights):
            raise ModelValidationError(
                f"Chart '{chart.id}' has dimension above its ambient point", location=chart.id
            )
        for w in chart.tangent_weights:
            if len(w) != rank:
                raise ModelValidationError(f"Chart '{chart.id}' has a weight of rank {len(w)}", location=chart.id)
            if is_zero_weight(w):
                raise ModelValidationError(f"Chart '{chart.id}' has a zero tangent weight", location=chart.id)
        seen_components = set()
        for direction, component in chart.boundary_of.items():
            if not 0 <= direction < chart.dimension:
                raise ModelValidationError(
                    f"Chart '{chart.id}' marks missing direction {direction}", location=chart.id
                )
            if component not in components:
                raise ModelValidationError(
                    f"Chart '{chart.id}' references undeclared component '{component}'", location=chart.id
                )
            if component in seen_components:
                raise ModelValidationError(
                    f"Component '{component}' appears twice in chart '{chart.id}'", location=chart.id
                )
            seen_components.add(component)

    if order is not None:
        for chart in model.charts:
            if not order.leq(chart.image_point, model.center):
                raise ModelValidationError(
                    f"Chart '{chart.id}' sits over '{chart.image_point}', which is not below the center '{model.center}'",
                    location=chart.id,
                )

    for D in (model.divisor, divisor):
        if D is None:
            continue
        unknown = sorted(D.support - components)
        if unknown:
            raise ModelValidationError(f"Divisor references undeclared components {unknown}", location=unknown[0])
        for point_id in model.point_ids:
            divisor_weight(model, point_id, D)

    logger.debug("Model '%s' validated: %s points, %s charts", model.name, len(model.ambient_points), len(model.charts))
    return model


# blow-ups


def exceptional_component_id(model: ResolutionModel, chart_id: str) -> str:
    base = f"E_{chart_id}"
    candidate = base
    taken = set(model.component_ids)
    suffix = 1
    while candidate in taken:
        suffix += 1
        candidate = f"{base}_{suffix}"
    return candidate


def _center_directions(chart: Chart, center: Iterable[int]) -> List[int]:
    directions = sorted(set(int(k) for k in center))
    if len(directions) < 2:
        raise ValueError("A blow-up center needs at least two directions")
    for k in directions:
        if not 0 <= k < chart.dimension:
            raise ValueError(f"Direction {k} is not a direction of chart '{chart.id}'")
    return directions


def exceptional_multiplicity(chart: Chart, D: Divisor, center: Iterable[int]) -> Fraction:
    """Multiplicity of E in the pullback: sum of c_k over boundary directions in the center."""
    total = Fraction(0)
    for k in center:
        component = chart.boundary_of.get(k)
        if component is not None:
            total += D.multiplicity(component)
    return total


def pullback_divisor(model: ResolutionModel, D: Divisor, chart_id: str, center: Iterable[int]) -> Divisor:
    chart = model.chart(chart_id)
    directions = _center_directions(chart, center)
    if not any(k in chart.boundary_of for k in directions):
        return D
    exceptional = exceptional_component_id(model, chart_id)
    return D.with_multiplicity(exceptional, exceptional_multiplicity(chart, D, directions))


def blowup_model(model: ResolutionModel, chart_id: str, center: Iterable[int]) -> ResolutionModel:
    """Blow up the coordinate subspace {x_k = 0, k in center} of one chart.

    Chart j of the blow-up keeps w_j in direction j (the exceptional divisor),
    has w_i - w_j in the other center directions and w_i elsewhere. The
    exceptional divisor is a boundary component iff the center lies in the
    boundary.
    """
    chart = model.chart(chart_id)
    directions = _center_directions(chart, center)
    in_boundary = any(k in chart.boundary_of for k in directions)
    exceptional = exceptional_component_id(model, chart_id)

    new_charts: List[Chart] = []
    for j in directions:
        w_j = chart.tangent_weights[j]
        weights = []
        for i, w_i in enumerate(chart.tangent_weights):
            if i in directions and i != j:
                weights.append(weight_sub(w_i, w_j))
            else:
                weights.append(w_i)
        boundary = {k: c for k, c in chart.boundary_of.items() if k != j}
        if in_boundary:
            boundary[j] = exceptional
        new_charts.append(Chart(f"{chart_id}.{j}", tuple(weights), chart.image_point, boundary))

    charts: List[Chart] = []
    for existing in model.charts:
        if existing.id == chart_id:
            charts.extend(new_charts)
        else:
            charts.append(existing)
    components = model.components + ((BoundaryComponent(exceptional),) if in_boundary else ())
    blown = replace(
        model,
        charts=tuple(charts),
        components=components,
        divisor=pullback_divisor(model, model.divisor, chart_id, directions),
        name=f"{model.name}+blowup({chart_id})" if model.name else f"blowup({chart_id})",
    )
    logger.debug("Blew up chart '%s' along %s into %s charts", chart_id, directions, len(new_charts))
    return blown


def _mismatched_points(
    base: ResolutionModel, base_divisor: Divisor, other: ResolutionModel, other_divisor: Divisor
) -> List[str]:
    mismatched = []
    for point_id in base.point_ids:
        if localized_class(base, base_divisor, point_id) != localized_class(other, other_divisor, point_id):
            mismatched.append(point_id)
    return mismatched


def boundary_count_through_center(model: ResolutionModel, chart_id: str, center: Iterable[int]) -> int:
    chart = model.chart(chart_id)
    return sum(1 for k in _center_directions(chart, center) if k in chart.boundary_of)


def pushforward_invariance_check(
    model: ResolutionModel, D: Divisor, chart_id: str, center: Iterable[int], s: int
) -> bool:
    """Compare the blow-up with divisor b*ceil(D) - sE against the original model.

    Invariance is expected for 0 <= s <= r - 1, r the number of boundary
    components through the center. A center off the boundary (r = 0) has no
    exceptional boundary component to twist by, so any s > 0 is reported as
    not invariant.
    """
    if s < 0:
        raise ValueError("The exceptional twist s must be non-negative")
    chart = model.chart(chart_id)
    directions = _center_directions(chart, center)
    r = sum(1 for k in directions if k in chart.boundary_of)
    if r == 0 and s > 0:
        logger.info("Center of '%s' misses the boundary; no exceptional component for s=%s", chart_id, s)
        return False

    blown = blowup_model(model, chart_id, directions)
    rounded = D.ceil()
    twisted = rounded
    if r:
        exceptional = exceptional_component_id(model, chart_id)
        twisted = rounded.with_multiplicity(
            exceptional, exceptional_multiplicity(chart, rounded, directions) - s
        )
    mismatched = _mismatched_points(model, D, blown, twisted)
    if mismatched:
        logger.info("Blow-up of '%s' with s=%s changes the class at %s", chart_id, s, mismatched)
    return not mismatched


def resolution_independence_check(model: ResolutionModel, D: Divisor, chart_id: str, center: Iterable[int]) -> bool:
    """The class computed on the blow-up with the pulled-back divisor agrees with the original."""
    blown = blowup_model(model, chart_id, center)
    pulled = pullback_divisor(model, D, chart_id, center)
    return not _mismatched_points(model, D, blown, pulled)


# Euler characteristics by localization


def chi_via_localization(
    fixed_points: Sequence[Sequence[Weight]], bundle_weights: Sequence[Weight], rank: Optional[int] = None
) -> LaurentPoly:
    """Sum over fixed points of t^(bundle weight) / eu(tangent weights)."""
    if len(fixed_points) != len(bundle_weights):
        raise ValueError("One bundle weight per fixed point is required")
    if rank is None:
        rank = len(weight(bundle_weights[0])) if bundle_weights else 0
    total = RationalFn(LaurentPoly.zero(rank))
    for tangent, bundle in zip(fixed_points, bundle_weights):
        total = total + RationalFn(LaurentPoly.monomial(weight(bundle)), euler_class(tangent, rank))
    return rf_to_polynomial(total)


def projective_space_fixed_points(r: int) -> List[List[Weight]]:
    """Tangent weights of P^(r-1) at its r fixed points: e_j - e_i for j != i."""
    if r < 1:
        raise ValueError("Projective space needs r >= 1")
    return [
        [weight_sub(unit_weight(r, j), unit_weight(r, i)) for j in range(r) if j != i]
        for i in range(r)
    ]


def line_bundle_weights(r: int, k: int) -> List[Weight]:
    """Weights of O(k) on P^(r-1): -k e_i at the i-th fixed point."""
    return [weight_scale(unit_weight(r, i), -k) for i in range(r)]


# products and chart surgery


def product_model(model: ResolutionModel, factor_weights: Sequence) -> ResolutionModel:
    """Product with a smooth factor having one fixed point with the given weights."""
    factor = tuple(weight(w) for w in factor_weights)
    for w in factor:
        if len(w) != model.torus_rank:
            raise ModelValidationError(f"Factor weight of rank {len(w)} on a rank {model.torus_rank} model")
    if not factor:
        return model
    points = tuple(
        AmbientFixedPoint(point.id, point.tangent_weights + factor) for point in model.ambient_points
    )
    charts = tuple(
        Chart(chart.id, chart.tangent_weights + factor, chart.image_point, chart.boundary_of)
        for chart in model.charts
    )
    return replace(model, ambient_points=points, charts=charts, name=f"{model.name}*factor" if model.name else "")


def delete_directions(chart: Chart, directions: Iterable[int]) -> Chart:
    """Chart of the stratum where the given coordinates vanish."""
    drop = set(directions)
    keep = [i for i in range(chart.dimension) if i not in drop]
    reindex = {old: new for new, old in enumerate(keep)}
    return Chart(
        chart.id,
        tuple(chart.tangent_weights[i] for i in keep),
        chart.image_point,
        {reindex[k]: c for k, c in chart.boundary_of.items() if k in reindex},
    )
