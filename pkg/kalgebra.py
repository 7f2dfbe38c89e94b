"""
Exact arithmetic for localized K-theory classes.

Classes restricted to a torus fixed point are Laurent polynomials in the torus
characters t^w (w a rational weight vector), the variable y of the lambda_y
class and the extra character h. Quotients of such polynomials appear in the
fixed-point (Lefschetz-Riemann-Roch) sums and are kept as RationalFn values
without gcd reduction.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import floor, lcm
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

Weight = Tuple[Fraction, ...]
Number = Union[int, Fraction]


class KAlgebraError(Exception):
    """Base error for exact class arithmetic."""


class RankMismatchError(KAlgebraError):
    """Operands live on tori of different rank."""


class NotPolynomialError(KAlgebraError):
    """A quotient that was expected to be a Laurent polynomial is not one."""

    def __init__(self, message: str, division: "DivisionResult"):
        super().__init__(message)
        self.division = division


class LimitDoesNotExist(KAlgebraError):
    """The limit at s -> 0 diverges or is not a polynomial in y and h."""


def to_fraction(value: Union[int, str, Fraction]) -> Fraction:
    """Convert an exact scalar ("p/q" strings included) to a Fraction."""
    if isinstance(value, bool):
        raise TypeError("Booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"Expected an exact rational, got {type(value).__name__}")


def weight(*coords) -> Weight:
    """Build a Weight from ints, Fractions or "p/q" strings.

    Accepts either separate coordinates or a single sequence.
    """
    if len(coords) == 1 and isinstance(coords[0], (list, tuple)):
        coords = tuple(coords[0])
    return tuple(to_fraction(value) for value in coords)


def zero_weight(rank: int) -> Weight:
    return (Fraction(0),) * rank


def unit_weight(rank: int, index: int) -> Weight:
    return tuple(Fraction(1 if i == index else 0) for i in range(rank))


def weight_add(a: Weight, b: Weight) -> Weight:
    if len(a) != len(b):
        raise RankMismatchError(f"Weights of rank {len(a)} and {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def weight_sub(a: Weight, b: Weight) -> Weight:
    if len(a) != len(b):
        raise RankMismatchError(f"Weights of rank {len(a)} and {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


def weight_scale(a: Weight, factor: Number) -> Weight:
    factor = to_fraction(factor)
    return tuple(x * factor for x in a)


def weight_neg(a: Weight) -> Weight:
    return tuple(-x for x in a)


def weight_dot(sigma: Sequence[Number], w: Weight) -> Fraction:
    if len(sigma) != len(w):
        raise RankMismatchError(f"Cocharacter of rank {len(sigma)} against weight of rank {len(w)}")
    return sum((Fraction(s) * x for s, x in zip(sigma, w)), Fraction(0))


def is_zero_weight(w: Weight) -> bool:
    return all(x == 0 for x in w)


def weight_sum(weights: Iterable[Weight], rank: int) -> Weight:
    total = zero_weight(rank)
    for w in weights:
        total = weight_add(total, w)
    return total


class Monomial(NamedTuple):
    """t^exponent * y^ydeg * h^hdeg."""

    exponent: Weight
    ydeg: int = 0
    hdeg: int = 0

    def times(self, other: "Monomial") -> "Monomial":
        return Monomial(
            tuple(a + b for a, b in zip(self.exponent, other.exponent)),
            self.ydeg + other.ydeg,
            self.hdeg + other.hdeg,
        )


def _monomial_sort_key(mono: Monomial):
    return (mono.exponent, mono.ydeg, mono.hdeg)


class LaurentPoly:
    """Immutable Laurent polynomial with exact rational coefficients.

    Terms map a Monomial to a nonzero Fraction. Two polynomials are equal iff
    their ranks and term maps are equal.
    """

    __slots__ = ("rank", "_terms")

    def __init__(self, rank: int, terms: Optional[Dict] = None):
        if rank < 0:
            raise ValueError("Torus rank must be non-negative")
        clean: Dict[Monomial, Fraction] = {}
        for key, coeff in (terms or {}).items():
            mono = key if isinstance(key, Monomial) else Monomial(*key)
            exponent = weight(mono.exponent)
            if len(exponent) != rank:
                raise RankMismatchError(f"Exponent {exponent} does not have rank {rank}")
            coeff = to_fraction(coeff)
            if coeff:
                clean[Monomial(exponent, int(mono.ydeg), int(mono.hdeg))] = coeff
        self.rank = rank
        self._terms = clean

    @classmethod
    def _trusted(cls, rank: int, terms: Dict[Monomial, Fraction]) -> "LaurentPoly":
        poly = cls.__new__(cls)
        poly.rank = rank
        poly._terms = {mono: coeff for mono, coeff in terms.items() if coeff}
        return poly

    # constructors

    @classmethod
    def zero(cls, rank: int) -> "LaurentPoly":
        return cls._trusted(rank, {})

    @classmethod
    def constant(cls, rank: int, value: Number) -> "LaurentPoly":
        return cls._trusted(rank, {Monomial(zero_weight(rank)): to_fraction(value)})

    @classmethod
    def one(cls, rank: int) -> "LaurentPoly":
        return cls.constant(rank, 1)

    @classmethod
    def monomial(cls, exponent: Sequence, coeff: Number = 1, ydeg: int = 0, hdeg: int = 0) -> "LaurentPoly":
        exponent = weight(exponent)
        return cls._trusted(len(exponent), {Monomial(exponent, ydeg, hdeg): to_fraction(coeff)})

    @classmethod
    def y(cls, rank: int) -> "LaurentPoly":
        return cls._trusted(rank, {Monomial(zero_weight(rank), 1, 0): Fraction(1)})

    @classmethod
    def h(cls, rank: int) -> "LaurentPoly":
        return cls._trusted(rank, {Monomial(zero_weight(rank), 0, 1): Fraction(1)})

    @classmethod
    def from_terms(cls, rank: int, terms: Iterable[Tuple[Sequence, int, int, Number]]) -> "LaurentPoly":
        """Build from (exponent, ydeg, hdeg, coeff) tuples, summing repeats."""
        acc: Dict[Monomial, Fraction] = {}
        for exponent, ydeg, hdeg, coeff in terms:
            exponent = weight(exponent)
            if len(exponent) != rank:
                raise RankMismatchError(f"Exponent {exponent} does not have rank {rank}")
            mono = Monomial(exponent, int(ydeg), int(hdeg))
            acc[mono] = acc.get(mono, Fraction(0)) + to_fraction(coeff)
        return cls._trusted(rank, acc)

    # inspection

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms in a deterministic order (exponent, ydeg, hdeg)."""
        return sorted(self._terms.items(), key=lambda item: _monomial_sort_key(item[0]))

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coefficient(self, exponent: Sequence, ydeg: int = 0, hdeg: int = 0) -> Fraction:
        return self._terms.get(Monomial(weight(exponent), ydeg, hdeg), Fraction(0))

    def support(self) -> frozenset:
        """Distinct torus exponents, y and h projected out."""
        return frozenset(mono.exponent for mono in self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def exponent_denominators(self) -> Iterator[int]:
        for mono in self._terms:
            for value in mono.exponent:
                yield value.denominator

    # arithmetic

    def _coerce(self, other) -> Optional["LaurentPoly"]:
        if isinstance(other, LaurentPoly):
            if other.rank != self.rank:
                raise RankMismatchError(f"Rank {self.rank} against rank {other.rank}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return LaurentPoly.constant(self.rank, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = dict(self._terms)
        for mono, coeff in other._terms.items():
            acc[mono] = acc.get(mono, Fraction(0)) + coeff
        return LaurentPoly._trusted(self.rank, acc)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._trusted(self.rank, {mono: -coeff for mono, coeff in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            factor = to_fraction(other)
            return LaurentPoly._trusted(self.rank, {mono: coeff * factor for mono, coeff in self._terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc: Dict[Monomial, Fraction] = {}
        for mono_a, coeff_a in self._terms.items():
            for mono_b, coeff_b in other._terms.items():
                mono = mono_a.times(mono_b)
                acc[mono] = acc.get(mono, Fraction(0)) + coeff_a * coeff_b
        return LaurentPoly._trusted(self.rank, acc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "LaurentPoly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Only non-negative integer powers are supported")
        result = LaurentPoly.one(self.rank)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def shift(self, w: Sequence) -> "LaurentPoly":
        """Multiply by t^w."""
        w = weight(w)
        if len(w) != self.rank:
            raise RankMismatchError(f"Shift of rank {len(w)} on rank {self.rank}")
        return LaurentPoly._trusted(
            self.rank,
            {Monomial(weight_add(mono.exponent, w), mono.ydeg, mono.hdeg): coeff for mono, coeff in self._terms.items()},
        )

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self.rank == other.rank and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._terms == LaurentPoly.constant(self.rank, other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.rank, frozenset(self._terms.items())))

    def evaluate(self, t_values: Sequence[complex], y: complex = 1.0, h: complex = 1.0) -> complex:
        """Floating-point evaluation; only for numeric cross-checks."""
        if len(t_values) != self.rank:
            raise RankMismatchError(f"{len(t_values)} torus values for rank {self.rank}")
        total = 0.0
        for mono, coeff in self._terms.items():
            value = float(coeff)
            for base, exp in zip(t_values, mono.exponent):
                if exp:
                    value *= base ** float(exp)
            if mono.ydeg:
                value *= y ** mono.ydeg
            if mono.hdeg:
                value *= h ** mono.hdeg
            total += value
        return total

    def __repr__(self) -> str:
        return f"LaurentPoly({format_poly(self)})"

    def __str__(self) -> str:
        return format_poly(self)


class RationalFn:
    """Quotient num/den of Laurent polynomials; equality by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: Optional[LaurentPoly] = None):
        if den is None:
            den = LaurentPoly.one(num.rank)
        if num.rank != den.rank:
            raise RankMismatchError(f"Numerator rank {num.rank}, denominator rank {den.rank}")
        if den.is_zero:
            raise ZeroDivisionError("RationalFn with zero denominator")
        self.num = num
        self.den = den

    @property
    def rank(self) -> int:
        return self.num.rank

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def _coerce(self, other) -> Optional["RationalFn"]:
        if isinstance(other, RationalFn):
            if other.rank != self.rank:
                raise RankMismatchError(f"Rank {self.rank} against rank {other.rank}")
            return other
        if isinstance(other, LaurentPoly):
            if other.rank != self.rank:
                raise RankMismatchError(f"Rank {self.rank} against rank {other.rank}")
            return RationalFn(other)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return RationalFn(LaurentPoly.constant(self.rank, other))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFn":
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.num.is_zero:
            raise ZeroDivisionError("Division by the zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def evaluate(self, t_values: Sequence[complex], y: complex = 1.0, h: complex = 1.0) -> complex:
        return self.num.evaluate(t_values, y, h) / self.den.evaluate(t_values, y, h)

    def __repr__(self) -> str:
        return f"RationalFn(({format_poly(self.num)}) / ({format_poly(self.den)}))"


def lp_add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a + b


def lp_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a * b


def rf_add(a: RationalFn, b: RationalFn) -> RationalFn:
    return a + b


def rf_mul(a: RationalFn, b: RationalFn) -> RationalFn:
    return a * b


def lp_restrict_sigma(a: LaurentPoly, sigma: Sequence[int]) -> LaurentPoly:
    """Restrict to the one-parameter subgroup s -> s^sigma.

    Each exponent w becomes the rank-1 exponent sigma . w; colliding images are
    summed.
    """
    if len(sigma) != a.rank:
        raise RankMismatchError(f"Cocharacter of length {len(sigma)} on rank {a.rank}")
    acc: Dict[Monomial, Fraction] = {}
    for mono, coeff in a.items():
        image = Monomial((weight_dot(sigma, mono.exponent),), mono.ydeg, mono.hdeg)
        acc[image] = acc.get(image, Fraction(0)) + coeff
    return LaurentPoly._trusted(1, acc)


@dataclass(frozen=True)
class DivisionResult:
    """Outcome of exact division; on failure carries the undividable remainder."""

    quotient: Optional[LaurentPoly]
    remainder: Optional[LaurentPoly] = None
    witness: Optional[Tuple[Monomial, Fraction]] = None

    @property
    def ok(self) -> bool:
        return self.quotient is not None

    def __bool__(self) -> bool:
        return self.ok


def _grlex_key(vec: Tuple[int, ...]):
    return (sum(vec), vec)


def lp_divides(g: LaurentPoly, f: LaurentPoly) -> DivisionResult:
    """Exact division of f by g.

    Exponents are scaled to a common integer lattice and the division runs in
    graded-lex order on (lattice exponent, ydeg, hdeg). Every quotient monomial
    of an exact division lies in the box [min(f) - min(g), max(f) - max(g)]
    coordinatewise, so leaving the box is a certificate of non-divisibility.
    """
    if g.is_zero:
        raise ZeroDivisionError("lp_divides by the zero polynomial")
    if g.rank != f.rank:
        raise RankMismatchError(f"Divisor rank {g.rank}, dividend rank {f.rank}")
    rank = f.rank
    if f.is_zero:
        return DivisionResult(LaurentPoly.zero(rank))

    scale = lcm(1, *f.exponent_denominators(), *g.exponent_denominators())

    def to_vec(mono: Monomial) -> Tuple[int, ...]:
        return tuple(int(value * scale) for value in mono.exponent) + (mono.ydeg, mono.hdeg)

    def to_mono(vec: Tuple[int, ...]) -> Monomial:
        return Monomial(tuple(Fraction(value, scale) for value in vec[:rank]), vec[rank], vec[rank + 1])

    dividend = {to_vec(mono): coeff for mono, coeff in f.items()}
    divisor = {to_vec(mono): coeff for mono, coeff in g.items()}
    dims = rank + 2
    low = [min(v[i] for v in dividend) - min(v[i] for v in divisor) for i in range(dims)]
    high = [max(v[i] for v in dividend) - max(v[i] for v in divisor) for i in range(dims)]

    g_lead = max(divisor, key=_grlex_key)
    g_coeff = divisor[g_lead]
    remainder = dict(dividend)
    quotient: Dict[Tuple[int, ...], Fraction] = {}

    while remainder:
        r_lead = max(remainder, key=_grlex_key)
        step = tuple(a - b for a, b in zip(r_lead, g_lead))
        if any(step[i] < low[i] or step[i] > high[i] for i in range(dims)):
            rem_poly = LaurentPoly._trusted(rank, {to_mono(v): c for v, c in remainder.items()})
            witness = (to_mono(r_lead), remainder[r_lead])
            logger.debug("Division failed at leading term %s", witness)
            return DivisionResult(None, rem_poly, witness)
        coeff = remainder[r_lead] / g_coeff
        quotient[step] = coeff
        for vec, g_c in divisor.items():
            key = tuple(a + b for a, b in zip(step, vec))
            value = remainder.get(key, Fraction(0)) - coeff * g_c
            if value:
                remainder[key] = value
            else:
                remainder.pop(key, None)

    return DivisionResult(LaurentPoly._trusted(rank, {to_mono(v): c for v, c in quotient.items()}))


def rf_to_polynomial(a: RationalFn) -> LaurentPoly:
    """Return q with q*den == num, or raise NotPolynomialError."""
    result = lp_divides(a.den, a.num)
    if not result.ok:
        raise NotPolynomialError(f"Not a Laurent polynomial: {a!r}", result)
    return result.quotient


def _lowest_order_part(p: LaurentPoly) -> Tuple[Fraction, LaurentPoly]:
    low = min(mono.exponent[0] for mono, _ in p.items())
    part = {
        Monomial((), mono.ydeg, mono.hdeg): coeff
        for mono, coeff in p.items()
        if mono.exponent[0] == low
    }
    return low, LaurentPoly._trusted(0, part)


def rf_limit_at_zero(a: RationalFn) -> LaurentPoly:
    """Limit of a rank-1 rational function as s -> 0.

    Returns a rank-0 polynomial in y and h. Raises LimitDoesNotExist when the
    numerator has lower s-order than the denominator, or when the lowest-order
    coefficients do not divide exactly.
    """
    if a.rank != 1:
        raise RankMismatchError(f"Limit at zero needs rank 1, got {a.rank}")
    if a.num.is_zero:
        return LaurentPoly.zero(0)
    m_num, c_num = _lowest_order_part(a.num)
    m_den, c_den = _lowest_order_part(a.den)
    if m_num > m_den:
        return LaurentPoly.zero(0)
    if m_num < m_den:
        raise LimitDoesNotExist(f"Numerator order {m_num} below denominator order {m_den}")
    result = lp_divides(c_den, c_num)
    if not result.ok:
        raise LimitDoesNotExist("Leading coefficients do not divide exactly")
    return result.quotient


def specialize_to_one(a: LaurentPoly) -> LaurentPoly:
    """Non-equivariant specialization t -> 1; y and h are kept."""
    acc: Dict[Monomial, Fraction] = {}
    for mono, coeff in a.items():
        key = Monomial((), mono.ydeg, mono.hdeg)
        acc[key] = acc.get(key, Fraction(0)) + coeff
    return LaurentPoly._trusted(0, acc)


def ceil_fraction(value: Fraction) -> int:
    return -floor(-value)


# formatting


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _format_power(base: str, exp) -> str:
    text = format_rational(exp)
    if text.startswith("-") or "/" in text:
        return f"{base}^{{{text}}}"
    return f"{base}^{text}"


def format_exponent(exponent: Weight) -> str:
    if len(exponent) == 1:
        return _format_power("t", exponent[0])
    return "t^(" + ",".join(format_rational(value) for value in exponent) + ")"


def _format_yh(coeff: Fraction, ydeg: int, hdeg: int) -> str:
    factors = []
    if ydeg:
        factors.append("y" if ydeg == 1 else _format_power("y", ydeg))
    if hdeg:
        factors.append("h" if hdeg == 1 else _format_power("h", hdeg))
    if not factors:
        return format_rational(coeff)
    body = "·".join(factors)
    if coeff == 1:
        return body
    if coeff == -1:
        return "-" + body
    return f"{format_rational(coeff)}·{body}"


def _join(parts: List[str], spaced: bool) -> str:
    plus, minus = (" + ", " - ") if spaced else ("+", "-")
    text = parts[0]
    for part in parts[1:]:
        text += minus + part[1:] if part.startswith("-") else plus + part
    return text


def format_poly(p: LaurentPoly) -> str:
    """Human-readable form grouping y/h coefficients per torus exponent.

    Examples: "(1+y)·t^0", "1 + y·t^1", "(1+y)·t^{-1}".
    """
    if p.is_zero:
        return "0"
    groups: Dict[Weight, List[Tuple[int, int, Fraction]]] = {}
    for mono, coeff in p.terms():
        groups.setdefault(mono.exponent, []).append((mono.ydeg, mono.hdeg, coeff))
    parts = []
    for exponent in sorted(groups):
        coeffs = sorted(groups[exponent])
        inner = [_format_yh(coeff, ydeg, hdeg) for ydeg, hdeg, coeff in coeffs]
        if p.rank == 0:
            parts.extend(inner)
            continue
        torus = format_exponent(exponent)
        if len(inner) > 1:
            parts.append(f"({_join(inner, spaced=False)})·{torus}")
            continue
        ydeg, hdeg, coeff = coeffs[0]
        if all(value == 0 for value in exponent):
            parts.append(inner[0])
        elif ydeg == 0 and hdeg == 0 and coeff in (1, -1):
            parts.append(("-" if coeff == -1 else "") + torus)
        else:
            parts.append(f"{inner[0]}·{torus}")
    return _join(parts, spaced=True)
