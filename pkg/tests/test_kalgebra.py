import random
import unittest
from fractions import Fraction

from kalgebra import (
    LaurentPoly,
    LimitDoesNotExist,
    NotPolynomialError,
    RankMismatchError,
    RationalFn,
    ceil_fraction,
    format_poly,
    lp_add,
    lp_divides,
    lp_mul,
    lp_restrict_sigma,
    rf_add,
    rf_limit_at_zero,
    rf_mul,
    rf_to_polynomial,
    specialize_to_one,
    to_fraction,
    weight,
)


def _t(*exponent, coeff=1, ydeg=0, hdeg=0) -> LaurentPoly:
    return LaurentPoly.monomial(weight(*exponent), coeff, ydeg, hdeg)


def random_poly(rng: random.Random, rank: int, terms: int = 4, halves: bool = False) -> LaurentPoly:
    rows = []
    for _ in range(terms):
        denominator = rng.choice([1, 2]) if halves else 1
        exponent = [Fraction(rng.randint(-3, 3), denominator) for _ in range(rank)]
        rows.append((exponent, rng.randint(0, 2), rng.randint(-1, 1), Fraction(rng.randint(-5, 5), rng.randint(1, 3))))
    return LaurentPoly.from_terms(rank, rows)


def random_nonzero_poly(rng: random.Random, rank: int, **kwargs) -> LaurentPoly:
    while True:
        poly = random_poly(rng, rank, **kwargs)
        if not poly.is_zero:
            return poly


class ScalarTests(unittest.TestCase):
    def test_to_fraction_accepts_strings_and_rejects_floats(self):
        self.assertEqual(to_fraction("3/4"), Fraction(3, 4))
        self.assertEqual(to_fraction(-2), Fraction(-2))
        with self.assertRaises(TypeError):
            to_fraction(0.5)
        with self.assertRaises(TypeError):
            to_fraction(True)

    def test_ceil_fraction(self):
        self.assertEqual(ceil_fraction(Fraction(1, 2)), 1)
        self.assertEqual(ceil_fraction(Fraction(-1, 3)), 0)
        self.assertEqual(ceil_fraction(Fraction(2)), 2)


class LaurentPolyTests(unittest.TestCase):
    def test_zero_coefficients_are_dropped(self):
        poly = _t(1) - _t(1)
        self.assertTrue(poly.is_zero)
        self.assertEqual(len(poly), 0)

    def test_product_of_binomials(self):
        one = LaurentPoly.one(1)
        product = (one - _t(-1)) * (one + _t(-1, ydeg=1))
        self.assertEqual(product.coefficient([-1]), -1)
        self.assertEqual(product.coefficient([-1], ydeg=1), 1)
        self.assertEqual(product.coefficient([-2], ydeg=1), -1)
        self.assertEqual(lp_mul(one - _t(-1), one + _t(-1, ydeg=1)), product)
        self.assertEqual(lp_add(product, -product), LaurentPoly.zero(1))

    def test_rank_mismatch_raises(self):
        with self.assertRaises(RankMismatchError):
            _t(1) + _t(1, 0)

    def test_fractional_exponents_are_exact(self):
        half = _t(Fraction(1, 2))
        self.assertEqual(half * half, _t(1))

    def test_power_and_shift(self):
        one = LaurentPoly.one(1)
        self.assertEqual((one + _t(1)) ** 2, one + _t(1, coeff=2) + _t(2))
        self.assertEqual(_t(1).shift([-1]), one)

    def test_equality_with_integers(self):
        self.assertEqual(LaurentPoly.constant(2, 3), 3)
        self.assertNotEqual(_t(1), 1)

    def test_format_poly_groups_by_torus_exponent(self):
        one = LaurentPoly.one(1)
        y = LaurentPoly.y(1)
        self.assertEqual(format_poly(one + y), "(1+y)·t^0")
        self.assertEqual(format_poly(one + y * _t(1)), "1 + y·t^1")
        self.assertEqual(format_poly((one + y) * _t(-1)), "(1+y)·t^{-1}")
        self.assertEqual(format_poly(LaurentPoly.zero(1)), "0")

    def test_specialize_to_one_sums_coefficients(self):
        poly = _t(1) + _t(-1) + LaurentPoly.one(1) + _t(2, ydeg=1)
        self.assertEqual(specialize_to_one(poly), LaurentPoly.constant(0, 3) + LaurentPoly.y(0))


class RingAxiomTests(unittest.TestCase):
    def test_ring_axioms_on_random_triples(self):
        rng = random.Random(3)
        for _ in range(100):
            rank = rng.randint(1, 3)
            a, b, c = (random_poly(rng, rank, halves=True) for _ in range(3))
            self.assertEqual((a * b) * c, a * (b * c))
            self.assertEqual((a + b) + c, a + (b + c))
            self.assertEqual(a * b, b * a)
            self.assertEqual(a + b, b + a)
            self.assertEqual(a * (b + c), a * b + a * c)
            self.assertEqual((a - a), LaurentPoly.zero(rank))
            self.assertEqual(a * LaurentPoly.one(rank), a)


class RationalFnTests(unittest.TestCase):
    def test_equality_by_cross_multiplication(self):
        one = LaurentPoly.one(1)
        a = RationalFn(one - _t(2), one - _t(1))
        self.assertEqual(a, RationalFn(one + _t(1)))
        self.assertEqual(a, one + _t(1))

    def test_rational_functions_are_unhashable(self):
        with self.assertRaises(TypeError):
            hash(RationalFn(LaurentPoly.one(1)))

    def test_sum_of_fixed_point_contributions_is_polynomial(self):
        one = LaurentPoly.one(1)
        total = RationalFn(one, one - _t(-1)) + RationalFn(one, one - _t(1))
        self.assertEqual(rf_to_polynomial(total), one)
        self.assertEqual(rf_add(RationalFn(one, one - _t(-1)), RationalFn(one, one - _t(1))), total)
        self.assertEqual(rf_mul(total, RationalFn(one - _t(1), one)), one - _t(1))

    def test_non_polynomial_quotient_carries_division_witness(self):
        one = LaurentPoly.one(1)
        with self.assertRaises(NotPolynomialError) as ctx:
            rf_to_polynomial(RationalFn(one, one - _t(1)))
        self.assertFalse(ctx.exception.division.ok)
        self.assertIsNotNone(ctx.exception.division.witness)

    def test_zero_denominator_rejected(self):
        with self.assertRaises(ZeroDivisionError):
            RationalFn(LaurentPoly.one(1), LaurentPoly.zero(1))


class DivisionTests(unittest.TestCase):
    def test_exact_division(self):
        one = LaurentPoly.one(2)
        g = one + _t(-1, 0, ydeg=1)
        q = one - _t(0, 1)
        result = lp_divides(g, g * q)
        self.assertTrue(result.ok)
        self.assertEqual(result.quotient, q)

    def test_failed_division_reports_remainder(self):
        one = LaurentPoly.one(1)
        result = lp_divides(one + LaurentPoly.y(1), one + _t(1))
        self.assertFalse(result.ok)
        self.assertFalse(result.remainder.is_zero)

    def test_division_round_trip_random(self):
        rng = random.Random(7)
        for _ in range(200):
            rank = rng.randint(1, 3)
            g = random_nonzero_poly(rng, rank, terms=3, halves=True)
            q = random_poly(rng, rank, terms=3, halves=True)
            result = lp_divides(g, g * q)
            self.assertTrue(result.ok, f"{g!r} should divide {g * q!r}")
            self.assertEqual(result.quotient, q)

    def test_quotient_recovered_from_rational_function(self):
        rng = random.Random(19)
        for _ in range(200):
            rank = rng.randint(1, 3)
            p = random_poly(rng, rank, halves=True)
            d = random_nonzero_poly(rng, rank, terms=3, halves=True)
            self.assertEqual(rf_to_polynomial(RationalFn(p * d, d)), p)


class RestrictionTests(unittest.TestCase):
    def test_restriction_merges_colliding_exponents(self):
        poly = _t(1, 0) + _t(0, 1)
        self.assertEqual(lp_restrict_sigma(poly, (1, 1)), _t(1, coeff=2))

    def test_restriction_is_a_ring_homomorphism(self):
        rng = random.Random(11)
        for _ in range(200):
            rank = rng.randint(1, 3)
            a = random_poly(rng, rank, halves=True)
            b = random_poly(rng, rank, halves=True)
            sigma = tuple(rng.randint(-9, 9) for _ in range(rank))
            self.assertEqual(lp_restrict_sigma(a + b, sigma), lp_restrict_sigma(a, sigma) + lp_restrict_sigma(b, sigma))
            self.assertEqual(lp_restrict_sigma(a * b, sigma), lp_restrict_sigma(a, sigma) * lp_restrict_sigma(b, sigma))


class LimitTests(unittest.TestCase):
    def test_limit_of_equal_order_quotient(self):
        one = LaurentPoly.one(1)
        ratio = RationalFn(one + LaurentPoly.y(1) + _t(1), one + _t(2))
        self.assertEqual(rf_limit_at_zero(ratio), LaurentPoly.one(0) + LaurentPoly.y(0))

    def test_limit_vanishes_when_numerator_has_higher_order(self):
        ratio = RationalFn(_t(1), LaurentPoly.one(1))
        self.assertTrue(rf_limit_at_zero(ratio).is_zero)

    def test_limit_diverges(self):
        with self.assertRaises(LimitDoesNotExist):
            rf_limit_at_zero(RationalFn(LaurentPoly.one(1), _t(1)))

    def test_limit_matches_numeric_evaluation(self):
        rng = random.Random(29)
        for _ in range(100):
            order = rng.randint(-2, 2)
            num = LaurentPoly.from_terms(1, [
                ([order + rng.randint(0, 3)], rng.randint(0, 2), 0, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
                for _ in range(4)
            ])
            den = _t(order) + LaurentPoly.from_terms(1, [
                ([order + rng.randint(1, 3)], rng.randint(0, 2), 0, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
                for _ in range(3)
            ])
            ratio = RationalFn(num, den)
            limit = rf_limit_at_zero(ratio)
            y0 = rng.choice([-1, 1]) * Fraction(rng.randint(1, 9), 10)
            expected = limit.evaluate([], y=float(y0))
            for s in (1e-3, 1e-4):
                with self.subTest(ratio=ratio, s=s):
                    self.assertLess(abs(ratio.evaluate([s], y=float(y0)) - expected), 1000 * s)

    def test_limit_requires_polynomial_leading_quotient(self):
        one = LaurentPoly.one(1)
        with self.assertRaises(LimitDoesNotExist):
            rf_limit_at_zero(RationalFn(one, one + LaurentPoly.y(1)))


if __name__ == "__main__":
    unittest.main()
