import itertools
import random
import unittest
from dataclasses import replace
from fractions import Fraction
from math import comb

from envelope import PartialOrder
from examples_library import blowup_demo_chart, blowup_demo_setup, p1_model, p1xp1_cell_setup
from kalgebra import (
    LaurentPoly,
    ceil_fraction,
    format_poly,
    specialize_to_one,
    weight,
    weight_neg,
    weight_scale,
    weight_sum,
)
from localization import (
    AmbientFixedPoint,
    Chart,
    Divisor,
    ModelValidationError,
    blowup_model,
    boundary_count_through_center,
    ceil_twist,
    chi_via_localization,
    delete_directions,
    divisor_weight,
    euler_class,
    lambda_y_dual,
    line_bundle_weights,
    localized_class,
    localized_classes,
    mc_open_chart,
    product_model,
    projective_space_fixed_points,
    pullback_divisor,
    pushforward_invariance_check,
    resolution_independence_check,
    validate_model,
)


def _t(*exponent) -> LaurentPoly:
    return LaurentPoly.monomial(weight(*exponent))


LARGE_PRIMES = (10007, 100003, 1000003)


def random_multiplicities(rng: random.Random, r: int) -> list:
    return [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(r)]


def random_effective(rng: random.Random, model) -> Divisor:
    return Divisor({c: Fraction(rng.randint(0, 3), rng.randint(1, 3)) for c in model.component_ids})


def random_boundary_center(rng: random.Random, model, max_size: int):
    """A chart with boundary and a coordinate center through at least one boundary direction."""
    chart = rng.choice([chart for chart in model.charts if chart.boundary_of])
    first = rng.choice(sorted(chart.boundary_of))
    others = [k for k in range(chart.dimension) if k != first]
    extra = rng.randint(1, min(len(others), max_size - 1))
    return chart.id, sorted([first] + rng.sample(others, extra))


def random_model(rng: random.Random):
    """blowup-demo with random multiplicities, blown up once about half the time.

    Returns the model, the model it was built from and the map taking base
    divisors to divisors on the model.
    """
    r = rng.choice((2, 3, 4))
    base = blowup_demo_setup(r, random_multiplicities(rng, r)).model
    if r == 4 or rng.random() < 0.5:
        return base, base, lambda D: D
    chart_id, center = random_boundary_center(rng, base, max_size=2)
    blown = blowup_model(base, chart_id, center)
    return blown, base, lambda D: pullback_divisor(base, D, chart_id, center)


class ProjectiveLineTests(unittest.TestCase):
    def setUp(self):
        self.one = LaurentPoly.one(1)
        self.y = LaurentPoly.y(1)

    def test_class_at_zero_follows_the_ceiling(self):
        expected = {
            Fraction(1, 2): (self.one + self.y),
            Fraction(0): (self.one + self.y) * _t(-1),
            Fraction(-1, 3): (self.one + self.y) * _t(-1),
            Fraction(2): (self.one + self.y) * _t(1),
        }
        for lam, target in expected.items():
            with self.subTest(lam=lam):
                model = p1_model(lam)
                self.assertEqual(localized_class(model, model.divisor, "0"), target)

    def test_class_at_infinity(self):
        model = p1_model(Fraction(1, 2))
        value = localized_class(model, model.divisor, "inf")
        self.assertEqual(format_poly(value), "1 + y·t^1")

    def test_localized_classes_cover_every_point(self):
        model = p1_model(Fraction(1, 2))
        self.assertEqual(sorted(localized_classes(model, model.divisor)), ["0", "inf"])

    def test_divisor_weight(self):
        model = p1_model(Fraction(-1, 3))
        self.assertEqual(divisor_weight(model, "0", model.divisor), weight(Fraction(-1, 3)))
        self.assertEqual(divisor_weight(model, "inf", model.divisor), weight(0))

    def test_chart_factors(self):
        chart = p1_model().chart("c0")
        self.assertEqual(mc_open_chart(chart), (self.one + self.y) * _t(-1))
        self.assertEqual(euler_class([weight(1)]), self.one - _t(-1))
        self.assertEqual(lambda_y_dual([weight(1)]), self.one + self.y * _t(-1))
        self.assertEqual(ceil_twist(chart, Divisor({"D0": Fraction(-1, 3)})), _t(0))
        self.assertEqual(ceil_twist(chart, Divisor({"D0": Fraction(7, 3)})), _t(3))


class ValidationTests(unittest.TestCase):
    def test_builtin_models_validate(self):
        model = p1xp1_cell_setup("00").model
        self.assertIs(validate_model(model), model)

    def test_undeclared_component(self):
        model = p1_model()
        broken = replace(model, charts=(Chart("c0", (weight(1),), "0", {0: "D9"}), model.chart("cinf")))
        with self.assertRaises(ModelValidationError) as ctx:
            validate_model(broken)
        self.assertEqual(ctx.exception.location, "c0")

    def test_duplicate_chart_ids(self):
        model = p1_model()
        with self.assertRaises(ModelValidationError):
            validate_model(replace(model, charts=model.charts + (model.chart("c0"),)))

    def test_zero_tangent_weight(self):
        model = p1_model()
        broken = replace(model, ambient_points=(AmbientFixedPoint("0", (weight(0),)), model.point("inf")))
        with self.assertRaises(ModelValidationError):
            validate_model(broken)

    def test_center_must_be_a_point(self):
        with self.assertRaises(ModelValidationError):
            validate_model(replace(p1_model(), center="nowhere"))

    def test_divisor_weights_must_agree_over_a_point(self):
        model = p1_model()
        extra = Chart("c0b", (weight(1),), "0", {})
        with self.assertRaises(ModelValidationError) as ctx:
            validate_model(replace(model, charts=model.charts + (extra,)))
        self.assertEqual(ctx.exception.location, "0")

    def test_charts_must_sit_below_the_center(self):
        model = p1_model()
        self.assertIs(validate_model(model, order=PartialOrder([("0", "inf")])), model)
        with self.assertRaises(ModelValidationError) as ctx:
            validate_model(model, order=PartialOrder([("inf", "0")]))
        self.assertEqual(ctx.exception.location, "c0")
        with self.assertRaises(ModelValidationError):
            validate_model(model, order=PartialOrder())


class TwistTests(unittest.TestCase):
    def test_class_depends_only_on_the_ceiling(self):
        rng = random.Random(5)
        setup = p1xp1_cell_setup("00")
        model = setup.model
        for _ in range(50):
            ceilings = [rng.randint(-2, 2) for _ in range(2)]
            first = Divisor({c: n - Fraction(rng.randint(0, 5), 6) for c, n in zip("AB", ceilings)})
            second = Divisor({c: n - Fraction(rng.randint(0, 5), 7) for c, n in zip("AB", ceilings)})
            for point_id in model.point_ids:
                self.assertEqual(localized_class(model, first, point_id), localized_class(model, second, point_id))

    def test_small_effective_deformation_keeps_the_class(self):
        rng = random.Random(23)
        for _ in range(50):
            model, base, lift = random_model(rng)
            D = model.divisor
            D2 = lift(random_effective(rng, base))
            perturbed = D - D2.scale(Fraction(1, rng.choice(LARGE_PRIMES)))
            for component in model.component_ids:
                self.assertEqual(
                    ceil_fraction(perturbed.multiplicity(component)), ceil_fraction(D.multiplicity(component))
                )
            for point_id in model.point_ids:
                with self.subTest(model=model.name, point=point_id):
                    self.assertEqual(localized_class(model, perturbed, point_id), localized_class(model, D, point_id))

    def test_integral_divisor_shifts_by_its_weight(self):
        rng = random.Random(9)
        for _ in range(50):
            model, base, lift = random_model(rng)
            integral = lift(Divisor({c: rng.randint(-3, 3) for c in base.component_ids}))
            fractional = lift(Divisor({c: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for c in base.component_ids}))
            self.assertTrue(integral.is_integral)
            for point_id in model.point_ids:
                with self.subTest(model=model.name, point=point_id):
                    shifted = localized_class(model, fractional, point_id).shift(divisor_weight(model, point_id, integral))
                    self.assertEqual(localized_class(model, integral + fractional, point_id), shifted)

    def test_product_with_smooth_factor(self):
        model = p1_model(Fraction(1, 2))
        factor = [weight(3)]
        product = product_model(model, factor)
        for point_id in model.point_ids:
            expected = localized_class(model, model.divisor, point_id) * lambda_y_dual(factor)
            self.assertEqual(localized_class(product, product.divisor, point_id), expected)


class StratumRestrictionTests(unittest.TestCase):
    def _models(self):
        return [p1xp1_cell_setup("00").model, blowup_demo_setup(3).model]

    def test_open_part_factors_through_every_boundary_stratum(self):
        for model in self._models():
            rank = model.torus_rank
            factor = LaurentPoly.one(rank) + LaurentPoly.y(rank)
            for chart in model.charts:
                for size in range(len(chart.boundary_of) + 1):
                    for subset in itertools.combinations(sorted(chart.boundary_of), size):
                        with self.subTest(model=model.name, chart=chart.id, subset=subset):
                            stratum = delete_directions(chart, subset)
                            self.assertEqual(stratum.dimension, chart.dimension - size)
                            kept = {c for k, c in chart.boundary_of.items() if k not in subset}
                            self.assertEqual(set(stratum.boundary_of.values()), kept)
                            normal = weight_sum((chart.tangent_weights[k] for k in subset), rank)
                            expected = (factor ** size) * mc_open_chart(stratum, rank).shift(weight_neg(normal))
                            self.assertEqual(mc_open_chart(chart, rank), expected)

    def test_twist_splits_along_the_deleted_directions(self):
        for model in self._models():
            rank = model.torus_rank
            D = model.divisor
            for chart in model.charts:
                for size in range(len(chart.boundary_of) + 1):
                    for subset in itertools.combinations(sorted(chart.boundary_of), size):
                        with self.subTest(model=model.name, chart=chart.id, subset=subset):
                            stratum = delete_directions(chart, subset)
                            deleted = weight_sum(
                                (
                                    weight_scale(chart.tangent_weights[k], ceil_fraction(D.multiplicity(chart.boundary_of[k])))
                                    for k in subset
                                ),
                                rank,
                            )
                            self.assertEqual(ceil_twist(chart, D, rank), ceil_twist(stratum, D, rank).shift(deleted))


class BlowupTests(unittest.TestCase):
    def test_blowup_charts(self):
        model = blowup_demo_setup(2).model
        blown = blowup_model(model, "ii", [0, 1])
        new_charts = [chart for chart in blown.charts if chart.image_point == "ii"]
        self.assertEqual(len(new_charts), 2)
        first = blown.chart("ii.0")
        self.assertEqual(first.tangent_weights, (weight(-1, 0), weight(1, -1)))
        self.assertEqual(first.boundary_of, {0: "E_ii", 1: "D2"})
        self.assertIn("E_ii", blown.component_ids)
        self.assertEqual(blown.divisor.multiplicity("E_ii"), Fraction(1))

    def test_pullback_multiplicity(self):
        model = blowup_demo_setup(3, [Fraction(1, 2), Fraction(1, 3), Fraction(-1, 4)]).model
        pulled = pullback_divisor(model, model.divisor, "iii", [0, 1, 2])
        self.assertEqual(pulled.multiplicity("E_iii"), Fraction(7, 12))
        self.assertEqual(boundary_count_through_center(model, "iii", [0, 2]), 2)

    def test_exceptional_twist_window(self):
        for r in (2, 3):
            model = blowup_demo_setup(r).model
            chart = blowup_demo_chart(r)
            for s in range(r):
                with self.subTest(r=r, s=s):
                    self.assertTrue(pushforward_invariance_check(model, model.divisor, chart, range(r), s))
            with self.subTest(r=r, s=r):
                self.assertFalse(pushforward_invariance_check(model, model.divisor, chart, range(r), r))

    def test_partial_center(self):
        model = blowup_demo_setup(3).model
        self.assertTrue(pushforward_invariance_check(model, model.divisor, "iii", [0, 1], 1))
        self.assertFalse(pushforward_invariance_check(model, model.divisor, "iii", [0, 1], 2))

    def test_resolution_independence(self):
        rng = random.Random(13)
        for r in (2, 3):
            for _ in range(4):
                multiplicities = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(r)]
                model = blowup_demo_setup(r, multiplicities).model
                self.assertTrue(resolution_independence_check(model, model.divisor, blowup_demo_chart(r), range(r)))

    def test_center_needs_two_directions(self):
        model = blowup_demo_setup(2).model
        with self.assertRaises(ValueError):
            blowup_model(model, "ii", [0])

    def test_center_off_the_boundary(self):
        model = blowup_demo_setup(2).model
        self.assertEqual(boundary_count_through_center(model, "00", [0, 1]), 0)
        for s in (1, 2):
            self.assertFalse(pushforward_invariance_check(model, model.divisor, "00", [0, 1], s))
        with self.assertRaises(ValueError):
            pushforward_invariance_check(model, model.divisor, "ii", [0, 1], -1)

    def test_functoriality_over_random_centers(self):
        rng = random.Random(17)
        for _ in range(16):
            r = rng.choice((2, 3, 4))
            model = blowup_demo_setup(r, random_multiplicities(rng, r)).model
            chart_id, center = random_boundary_center(rng, model, max_size=3 if r < 4 else 2)
            boundary_count = boundary_count_through_center(model, chart_id, center)
            with self.subTest(r=r, chart=chart_id, center=center):
                self.assertTrue(resolution_independence_check(model, model.divisor, chart_id, center))
                for s in range(boundary_count):
                    self.assertTrue(pushforward_invariance_check(model, model.divisor, chart_id, center, s))


class EulerCharacteristicTests(unittest.TestCase):
    def test_vanishing_range(self):
        for r in range(2, 6):
            points = projective_space_fixed_points(r)
            for k in range(-(r - 1), 0):
                with self.subTest(r=r, k=k):
                    self.assertTrue(chi_via_localization(points, line_bundle_weights(r, k), r).is_zero)

    def test_trivial_bundle(self):
        for r in range(1, 6):
            value = chi_via_localization(projective_space_fixed_points(r), line_bundle_weights(r, 0), r)
            self.assertEqual(value, LaurentPoly.one(r))

    def test_nonnegative_degree_counts_sections(self):
        for r in (2, 3):
            for k in (1, 2, 3):
                value = chi_via_localization(projective_space_fixed_points(r), line_bundle_weights(r, k), r)
                self.assertEqual(specialize_to_one(value), LaurentPoly.constant(0, comb(r - 1 + k, r - 1)))


if __name__ == "__main__":
    unittest.main()
