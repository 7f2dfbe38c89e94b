"""
Built-in resolution models.

Each example comes with the data the envelope checks need: a chamber and
the order on fixed points. Models:

    p1            projective line, divisor lam * {0}, center infinity
    p2-cell       one cell closure of the projective plane (cells p0, p1, p2)
    p1xp1-cell    one cell closure of P1 x P1 (corners 00, 0inf, inf0, infinf)
    blowup-demo   the big cell of (P1)^r, for blow-up tests at the all-infinity chart
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from envelope import Chamber, PartialOrder
from kalgebra import to_fraction, unit_weight, weight, weight_neg, weight_sub
from localization import (
    AmbientFixedPoint,
    BoundaryComponent,
    Chart,
    Divisor,
    ResolutionModel,
    validate_model,
)

logger = logging.getLogger(__name__)


class ExampleNames:
    """Names accepted by --example."""
    P1 = "p1"
    P2_CELL = "p2-cell"
    P1XP1_CELL = "p1xp1-cell"
    BLOWUP_DEMO = "blowup-demo"


@dataclass(frozen=True)
class EnvelopeSetup:
    model: ResolutionModel
    chamber: Chamber
    order: PartialOrder


def p1_model(lam=Fraction(1, 2)) -> ResolutionModel:
    lam = to_fraction(lam)
    return ResolutionModel(
        torus_rank=1,
        ambient_points=(
            AmbientFixedPoint("0", (weight(1),)),
            AmbientFixedPoint("inf", (weight(-1),)),
        ),
        charts=(
            Chart("c0", (weight(1),), "0", {0: "D0"}),
            Chart("cinf", (weight(-1),), "inf", {}),
        ),
        components=(BoundaryComponent("D0"),),
        center="inf",
        divisor=Divisor({"D0": lam}),
        name="p1",
    )


def p1_setup(lam=Fraction(1, 2)) -> EnvelopeSetup:
    return EnvelopeSetup(p1_model(lam), Chamber((-1,)), PartialOrder([("0", "inf")]))


# projective plane with homogeneous weights a0 = 0, a1 = e1, a2 = e2

_P2_CHARACTERS = [weight(0, 0), weight(1, 0), weight(0, 1)]


def _p2_tangent(i: int) -> tuple:
    return tuple(weight_sub(_P2_CHARACTERS[j], _P2_CHARACTERS[i]) for j in range(3) if j != i)


def _p2_points() -> tuple:
    return tuple(AmbientFixedPoint(f"p{i}", _p2_tangent(i)) for i in range(3))


def p2_cell_setup(cell: str = "p0", multiplicity=Fraction(1, 3)) -> EnvelopeSetup:
    """Closure of the attracting cell of one fixed point of P2 under sigma = (1, 2).

    p0: the whole plane with boundary the line L0 through p1 and p2.
    p1: the line p1p2 with boundary the point p2.
    p2: the point p2.
    """
    c = to_fraction(multiplicity)
    points = _p2_points()
    if cell == "p0":
        charts = (
            Chart("p0", _p2_tangent(0), "p0", {}),
            Chart("p1", _p2_tangent(1), "p1", {0: "L0"}),
            Chart("p2", _p2_tangent(2), "p2", {0: "L0"}),
        )
        components = (BoundaryComponent("L0"),)
        divisor = Divisor({"L0": c})
    elif cell == "p1":
        charts = (
            Chart("p1", (weight(-1, 1),), "p1", {}),
            Chart("p2", (weight(1, -1),), "p2", {0: "P2"}),
        )
        components = (BoundaryComponent("P2"),)
        divisor = Divisor({"P2": c})
    elif cell == "p2":
        charts = (Chart("p2", (), "p2", {}),)
        components = ()
        divisor = Divisor()
    else:
        raise ValueError(f"Unknown P2 cell '{cell}', expected p0, p1 or p2")
    model = ResolutionModel(2, points, charts, components, cell, divisor, name=f"p2-cell-{cell}")
    order = PartialOrder([("p2", "p1"), ("p1", "p0")])
    return EnvelopeSetup(model, Chamber((1, 2)), order)


# P1 x P1; A = {x = inf}, B = {y = inf}

_CORNERS = {
    "00": (weight(1, 0), weight(0, 1)),
    "0inf": (weight(1, 0), weight(0, -1)),
    "inf0": (weight(-1, 0), weight(0, 1)),
    "infinf": (weight(-1, 0), weight(0, -1)),
}


def p1xp1_cell_setup(corner: str = "00", a=Fraction(1, 3), b=Fraction(2, 5)) -> EnvelopeSetup:
    a, b = to_fraction(a), to_fraction(b)
    points = tuple(AmbientFixedPoint(name, weights) for name, weights in _CORNERS.items())
    if corner == "00":
        charts = (
            Chart("00", _CORNERS["00"], "00", {}),
            Chart("0inf", _CORNERS["0inf"], "0inf", {1: "B"}),
            Chart("inf0", _CORNERS["inf0"], "inf0", {0: "A"}),
            Chart("infinf", _CORNERS["infinf"], "infinf", {0: "A", 1: "B"}),
        )
        components = (BoundaryComponent("A"), BoundaryComponent("B"))
        divisor = Divisor({"A": a, "B": b})
    elif corner == "0inf":
        charts = (
            Chart("0inf", (weight(1, 0),), "0inf", {}),
            Chart("infinf", (weight(-1, 0),), "infinf", {0: "A"}),
        )
        components = (BoundaryComponent("A"),)
        divisor = Divisor({"A": a})
    elif corner == "inf0":
        charts = (
            Chart("inf0", (weight(0, 1),), "inf0", {}),
            Chart("infinf", (weight(0, -1),), "infinf", {0: "B"}),
        )
        components = (BoundaryComponent("B"),)
        divisor = Divisor({"B": b})
    elif corner == "infinf":
        charts = (Chart("infinf", (), "infinf", {}),)
        components = ()
        divisor = Divisor()
    else:
        raise ValueError(f"Unknown P1xP1 corner '{corner}'")
    model = ResolutionModel(2, points, charts, components, corner, divisor, name=f"p1xp1-cell-{corner}")
    order = PartialOrder([
        ("infinf", "0inf"), ("infinf", "inf0"), ("0inf", "00"), ("inf0", "00"),
    ])
    return EnvelopeSetup(model, Chamber((1, 2)), order)


def _corner_id(pattern) -> str:
    return "".join("i" if at_infinity else "0" for at_infinity in pattern)


def blowup_demo_setup(r: int = 3, multiplicities: Optional[List] = None) -> EnvelopeSetup:
    """Big cell of (P1)^r with boundary D_i = {x_i = inf}; the center is all zeros.

    The chart at the all-infinity corner has every coordinate in the boundary,
    so blowing up its origin meets r boundary components.
    """
    if r < 2:
        raise ValueError("blowup-demo needs r >= 2")
    values = [to_fraction(c) for c in (multiplicities or [Fraction(1, 2)] * r)]
    if len(values) != r:
        raise ValueError(f"Expected {r} multiplicities, got {len(values)}")
    points, charts = [], []
    for pattern in itertools.product((False, True), repeat=r):
        name = _corner_id(pattern)
        weights = tuple(
            weight_neg(unit_weight(r, i)) if at_infinity else unit_weight(r, i)
            for i, at_infinity in enumerate(pattern)
        )
        points.append(AmbientFixedPoint(name, weights))
        charts.append(Chart(name, weights, name, {i: f"D{i + 1}" for i, at_infinity in enumerate(pattern) if at_infinity}))
    components = tuple(BoundaryComponent(f"D{i + 1}") for i in range(r))
    divisor = Divisor({f"D{i + 1}": values[i] for i in range(r)})
    center = _corner_id([False] * r)
    model = ResolutionModel(r, tuple(points), tuple(charts), components, center, divisor, name=f"blowup-demo-{r}")
    pairs = []
    for lower in points:
        for upper in points:
            low_inf = {i for i, c in enumerate(lower.id) if c == "i"}
            up_inf = {i for i, c in enumerate(upper.id) if c == "i"}
            if lower.id != upper.id and up_inf <= low_inf:
                pairs.append((lower.id, upper.id))
    return EnvelopeSetup(model, Chamber(tuple(range(1, r + 1))), PartialOrder(pairs))


def blowup_demo_chart(r: int) -> str:
    """Chart whose origin is blown up by blowup-test."""
    return "i" * r


class ExampleLibrary:
    """Registry of built-in examples keyed by name."""

    def __init__(self):
        self._builders: Dict[str, Callable[..., EnvelopeSetup]] = {
            ExampleNames.P1: lambda lam=Fraction(1, 2), **_: p1_setup(lam),
            ExampleNames.P2_CELL: lambda cell="p0", multiplicity=Fraction(1, 3), **_: p2_cell_setup(cell, multiplicity),
            ExampleNames.P1XP1_CELL: lambda corner="00", a=Fraction(1, 3), b=Fraction(2, 5), **_: p1xp1_cell_setup(corner, a, b),
            ExampleNames.BLOWUP_DEMO: lambda r=3, **_: blowup_demo_setup(r),
        }

    def names(self) -> List[str]:
        return sorted(self._builders)

    def build(self, name: str, **params) -> EnvelopeSetup:
        """Build and validate one example; unknown keyword parameters are ignored."""
        if name not in self._builders:
            raise KeyError(f"Unknown example '{name}'. Available: {', '.join(self.names())}")
        params = {key: value for key, value in params.items() if value is not None}
        setup = self._builders[name](**params)
        validate_model(setup.model, order=setup.order)
        logger.debug("Built example '%s' with %s", name, params)
        return setup
