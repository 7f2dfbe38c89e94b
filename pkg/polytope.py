"""
Newton polytopes of localized classes and exact containment tests.

Containment is decided by an exact-rational simplex on the barycentric LP
(Bland's rule, two phases). When a point is outside the hull the phase-one
duals give a Farkas certificate, which is turned into a separating
hyperplane a.x >= c.
"""
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, List, Optional, Sequence, Tuple

from kalgebra import (
    LaurentPoly,
    LimitDoesNotExist,
    RankMismatchError,
    RationalFn,
    Weight,
    format_rational,
    lp_restrict_sigma,
    rf_limit_at_zero,
    weight,
    weight_add,
    weight_dot,
)

logger = logging.getLogger(__name__)


class PolytopeError(Exception):
    """Base error for polytope operations."""


class EmptyPolytopeError(PolytopeError):
    """Newton polytope of the zero class requested."""


class DegenerateHullError(PolytopeError):
    """The hull needed for a strict containment test is empty."""


class NonGenericSigmaError(PolytopeError):
    """No generic one-parameter subgroup was found within the resample budget."""


@dataclass(frozen=True)
class NewtonPolytope:
    """Convex hull of a finite set of rational exponent vectors."""

    support: FrozenSet[Weight]
    rank: int

    def points(self) -> List[Weight]:
        return sorted(self.support)

    def __len__(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class Separator:
    """Hyperplane normal.x = offset; the hull lies in normal.x < offset."""

    normal: Weight
    offset: Fraction

    def describe(self) -> str:
        if len(self.normal) == 1:
            coeff = self.normal[0]
            sign = ">=" if coeff > 0 else "<="
            return f"x {sign} {format_rational(self.offset / coeff)}"
        lhs = " + ".join(
            f"{format_rational(value)}*x{index + 1}"
            for index, value in enumerate(self.normal)
            if value
        )
        return f"{lhs} >= {format_rational(self.offset)}"

    def to_dict(self) -> dict:
        return {
            "normal": [format_rational(value) for value in self.normal],
            "offset": format_rational(self.offset),
            "text": self.describe(),
        }


@dataclass(frozen=True)
class ContainmentResult:
    contained: bool
    violating_point: Optional[Weight] = None
    separator: Optional[Separator] = None

    def __bool__(self) -> bool:
        return self.contained

    def to_dict(self) -> dict:
        return {
            "contained": self.contained,
            "violating_point": None if self.violating_point is None
            else [format_rational(value) for value in self.violating_point],
            "separator": self.separator.to_dict() if self.separator else None,
        }


def newton(a: LaurentPoly) -> NewtonPolytope:
    if a.is_zero:
        raise EmptyPolytopeError("The zero class has no Newton polytope")
    return NewtonPolytope(a.support(), a.rank)


def translate(P: NewtonPolytope, w: Sequence) -> NewtonPolytope:
    w = weight(w)
    if len(w) != P.rank:
        raise RankMismatchError(f"Translation of rank {len(w)} on polytope of rank {P.rank}")
    return NewtonPolytope(frozenset(weight_add(point, w) for point in P.support), P.rank)


class _Tableau:
    """Dense simplex tableau over Fractions, minimizing cost . x."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.width = len(rows[0]) if rows else 0
        self.reduced: List[Fraction] = []
        self.blocked: set = set()

    def set_cost(self, cost: List[Fraction], blocked: Sequence[int] = ()):
        self.blocked = set(blocked)
        self.reduced = list(cost)
        for i, var in enumerate(self.basis):
            c_b = cost[var]
            if c_b:
                row = self.rows[i]
                for j in range(self.width):
                    self.reduced[j] -= c_b * row[j]

    def pivot(self, i: int, j: int):
        row = self.rows[i]
        piv = row[j]
        self.rows[i] = row = [value / piv for value in row]
        self.rhs[i] /= piv
        for k in range(len(self.rows)):
            if k == i:
                continue
            factor = self.rows[k][j]
            if factor:
                self.rows[k] = [a - factor * b for a, b in zip(self.rows[k], row)]
                self.rhs[k] -= factor * self.rhs[i]
        factor = self.reduced[j]
        if factor:
            self.reduced = [a - factor * b for a, b in zip(self.reduced, row)]
        self.basis[i] = j

    def solve(self) -> str:
        """Bland's rule: smallest eligible entering index, ties broken by basis index."""
        while True:
            entering = next(
                (j for j in range(self.width) if self.reduced[j] < 0 and j not in self.blocked),
                None,
            )
            if entering is None:
                return "optimal"
            candidates = [
                (self.rhs[i] / self.rows[i][entering], self.basis[i], i)
                for i in range(len(self.rows))
                if self.rows[i][entering] > 0
            ]
            if not candidates:
                return "unbounded"
            _, _, leaving = min(candidates)
            self.pivot(leaving, entering)

    def drive_out(self, artificial: set):
        """Pivot zero-level artificials out of the basis, dropping redundant rows."""
        i = 0
        while i < len(self.rows):
            if self.basis[i] in artificial:
                j = next(
                    (j for j in range(self.width) if j not in artificial and self.rows[i][j] != 0),
                    None,
                )
                if j is None:
                    del self.rows[i]
                    del self.rhs[i]
                    del self.basis[i]
                    continue
                self.pivot(i, j)
            i += 1

    def value_of(self, var: int) -> Fraction:
        for i, basic in enumerate(self.basis):
            if basic == var:
                return self.rhs[i]
        return Fraction(0)


@dataclass
class _LpOutcome:
    feasible: bool
    margin: Fraction = Fraction(0)
    farkas: Optional[Tuple[Weight, Fraction]] = None


def _barycentric_lp(p: Weight, pts: Sequence[Weight], with_margin: bool) -> _LpOutcome:
    """Solve p = sum(lambda_i v_i), sum(lambda_i) = 1, lambda >= 0.

    With with_margin, lambda_i = eps + mu_i and eps is maximized afterwards.
    """
    rank = len(p)
    k = len(pts)
    columns: List[List[Fraction]] = [list(v) + [Fraction(1)] for v in pts]
    if with_margin:
        columns.append([sum((v[r] for v in pts), Fraction(0)) for r in range(rank)] + [Fraction(k)])
    n_struct = len(columns)
    m = rank + 1
    b = list(p) + [Fraction(1)]
    signs = [1 if value >= 0 else -1 for value in b]

    rows: List[List[Fraction]] = []
    for i in range(m):
        row = [signs[i] * columns[j][i] for j in range(n_struct)]
        row += [Fraction(1) if a == i else Fraction(0) for a in range(m)]
        rows.append(row)
    rhs = [signs[i] * b[i] for i in range(m)]
    artificial = list(range(n_struct, n_struct + m))
    tableau = _Tableau(rows, rhs, list(artificial))
    tableau.set_cost([Fraction(0)] * n_struct + [Fraction(1)] * m)
    tableau.solve()

    infeasibility = sum((tableau.value_of(var) for var in artificial), Fraction(0))
    if infeasibility > 0:
        duals = [signs[i] * (1 - tableau.reduced[artificial[i]]) for i in range(m)]
        return _LpOutcome(False, farkas=(tuple(duals[:rank]), duals[rank]))

    if not with_margin:
        return _LpOutcome(True)

    tableau.drive_out(set(artificial))
    eps = n_struct - 1
    cost = [Fraction(0)] * tableau.width
    cost[eps] = Fraction(-1)
    tableau.set_cost(cost, blocked=artificial)
    status = tableau.solve()
    if status != "optimal":
        raise PolytopeError("Margin LP unbounded; the simplex constraint should bound it")
    return _LpOutcome(True, margin=tableau.value_of(eps))


def _separator(farkas: Tuple[Weight, Fraction], p: Weight, pts: Sequence[Weight]) -> Separator:
    normal, _ = farkas
    lead = next(value for value in normal if value != 0)
    normal = tuple(value / abs(lead) for value in normal)
    top = max(weight_dot(normal, v) for v in pts)
    return Separator(normal, (top + weight_dot(normal, p)) / 2)


def _check_ranks(p: Weight, pts: Sequence[Weight]):
    for v in pts:
        if len(v) != len(p):
            raise RankMismatchError(f"Point of rank {len(v)} against point of rank {len(p)}")


def point_in_hull(p: Sequence, pts) -> bool:
    """Exact test: is p a convex combination of pts?"""
    p = weight(p)
    pts = sorted(weight(v) for v in pts)
    _check_ranks(p, pts)
    if not pts:
        return False
    return _barycentric_lp(p, pts, with_margin=False).feasible


def contains(P: NewtonPolytope, Q: NewtonPolytope) -> ContainmentResult:
    """Does conv(P) contain every point of Q? On failure returns a separator."""
    if P.rank != Q.rank:
        raise RankMismatchError(f"Polytopes of rank {P.rank} and {Q.rank}")
    pts = P.points()
    for q in Q.points():
        if not pts:
            return ContainmentResult(False, q, None)
        outcome = _barycentric_lp(q, pts, with_margin=False)
        if not outcome.feasible:
            separator = _separator(outcome.farkas, q, pts)
            logger.debug("Point %s outside hull, separator %s", q, separator.describe())
            return ContainmentResult(False, q, separator)
    return ContainmentResult(True)


def contains_strictly(P: NewtonPolytope, Q: NewtonPolytope) -> bool:
    """Does the relative interior of conv(P) contain every point of Q?"""
    if P.rank != Q.rank:
        raise RankMismatchError(f"Polytopes of rank {P.rank} and {Q.rank}")
    if not P.support:
        raise DegenerateHullError("Strict containment in an empty hull")
    pts = P.points()
    if len(pts) == 1:
        logger.debug("Strict containment in a single point reduces to equality")
    for q in Q.points():
        outcome = _barycentric_lp(q, pts, with_margin=True)
        if not outcome.feasible or outcome.margin <= 0:
            return False
    return True


def _is_generic(sigma: Sequence[int], points: Sequence[Weight]) -> bool:
    values = {weight_dot(sigma, point) for point in points}
    return len(values) == len(points)


def sample_generic_sigma(
    points: Sequence[Weight],
    rank: int,
    rng: random.Random,
    resamples: int = 100,
    sigma_range: int = 97,
) -> Tuple[int, ...]:
    """Random integer cocharacter separating all given points."""
    points = list(set(points))
    for _ in range(resamples):
        sigma = tuple(rng.randint(-sigma_range, sigma_range) for _ in range(rank))
        if any(sigma) and _is_generic(sigma, points):
            return sigma
    raise NonGenericSigmaError(f"No generic cocharacter after {resamples} samples")


def contains_via_sigma_limits(
    a: LaurentPoly,
    b: LaurentPoly,
    trials: int = 20,
    rng: Optional[random.Random] = None,
    resamples: int = 100,
    sigma_range: int = 97,
) -> bool:
    """Probabilistic cross-check of Ne(a) inside Ne(b) through one-parameter limits."""
    if b.is_zero:
        raise EmptyPolytopeError("Limit oracle needs a nonzero denominator class")
    if a.rank != b.rank:
        raise RankMismatchError(f"Classes of rank {a.rank} and {b.rank}")
    rng = rng or random.Random()
    points = list(a.support() | b.support())
    for _ in range(trials):
        sigma = sample_generic_sigma(points, a.rank, rng, resamples, sigma_range)
        ratio = RationalFn(lp_restrict_sigma(a, sigma), lp_restrict_sigma(b, sigma))
        try:
            rf_limit_at_zero(ratio)
        except LimitDoesNotExist:
            logger.debug("Limit diverges along sigma=%s", sigma)
            return False
    return True
