"""
Tests for environment descriptions.
"""

import unittest

import numpy as np

from honeycomb_walk.environment import (
    EnvironmentSpec,
    Orientation,
    Regime,
    materialize,
    orientation,
    orientations,
    perturbation_probability,
    perturbed_levels,
    validate,
)
from honeycomb_walk.exception import (
    ConfigException,
    InvalidParamException,
    InvalidPeriodException,
    NonZeroSumException,
    RangeException,
    ValidationException,
)


def periodic(f, q=None):
    return EnvironmentSpec(Regime.PERIODIC, period=len(f) if q is None else q, f_table=tuple(f))


class PeriodicTest(unittest.TestCase):
    """Test the periodic regime."""

    def test_table_lookup(self):
        """Row y reads f(y mod Q), negative levels included."""
        spec = periodic([1, 1, -1, -1])
        ys = np.arange(-4, 8)
        expected = [1, 1, -1, -1] * 3
        self.assertEqual(expected, orientations(spec, ys).tolist())
        self.assertIs(Orientation.LEFT, orientation(spec, -1))

    def test_invalid_period(self):
        """Odd or trivial periods are rejected first."""
        with self.assertRaises(InvalidPeriodException):
            validate(periodic([1, -1, 1], 3))
        with self.assertRaises(InvalidPeriodException):
            validate(periodic([1], 1))

    def test_non_zero_sum(self):
        """The table must balance over one period."""
        with self.assertRaises(NonZeroSumException) as ctx:
            validate(periodic([1, 1]))
        self.assertIn("NonZeroSum", str(ctx.exception))

    def test_bad_entries(self):
        """Entries other than +1/-1 and length mismatches are parameter errors."""
        with self.assertRaises(InvalidParamException):
            validate(periodic([2, -2]))
        with self.assertRaises(InvalidParamException):
            validate(periodic([1, -1], 4))

    def test_validation_errors_share_parent(self):
        """All three validation failures derive from ValidationException."""
        for spec in (periodic([1, -1, 1], 3), periodic([1, 1]), periodic([0, 0])):
            with self.assertRaises(ValidationException):
                validate(spec)


class RademacherTest(unittest.TestCase):
    """Test the Rademacher regime."""

    def test_order_independent(self):
        """A level gives the same sign whatever else is queried with it."""
        spec = EnvironmentSpec(Regime.RADEMACHER, seed=42)
        batch = orientations(spec, np.array([7, -3, 1000, 0]))
        single = [int(orientations(spec, y)) for y in (7, -3, 1000, 0)]
        self.assertEqual(single, batch.tolist())
        reversed_batch = orientations(spec, np.array([0, 1000, -3, 7]))
        self.assertEqual(batch.tolist(), reversed_batch[::-1].tolist())

    def test_seeds_differ(self):
        """Different seeds give different environments."""
        ys = np.arange(-500, 500)
        a = orientations(EnvironmentSpec(Regime.RADEMACHER, seed=1), ys)
        b = orientations(EnvironmentSpec(Regime.RADEMACHER, seed=2), ys)
        self.assertFalse(np.array_equal(a, b))

    def test_balanced(self):
        """Signs are +1 about half the time."""
        values = orientations(EnvironmentSpec(Regime.RADEMACHER, seed=7), np.arange(-50_000, 50_000))
        self.assertTrue(set(np.unique(values).tolist()) <= {-1, 1})
        self.assertLess(abs(values.mean()), 0.0126)  # 4 sigma

    def test_seed_range(self):
        """Seeds must fit in 64 unsigned bits."""
        with self.assertRaises(InvalidParamException):
            validate(EnvironmentSpec(Regime.RADEMACHER, seed=-1))


class PerturbedTest(unittest.TestCase):
    """Test the perturbed regime."""

    def test_probability(self):
        """p(y) = min(1, c/|y|^beta) and min(1, c) at 0."""
        self.assertEqual(1.0, perturbation_probability(1.0, 2.0, 0))
        self.assertEqual(0.3, perturbation_probability(0.3, 2.0, 0))
        self.assertAlmostEqual(0.125, perturbation_probability(0.5, 1.0, 4))
        self.assertEqual(1.0, perturbation_probability(5.0, 1.0, 2))
        p = perturbation_probability(1.0, 2.0, np.array([1, 2, 10]))
        np.testing.assert_allclose([1.0, 0.25, 0.01], p)

    def test_invalid_parameters(self):
        """c < 0 and beta <= 0 are rejected."""
        with self.assertRaises(InvalidParamException):
            perturbation_probability(-0.1, 1.0, 3)
        with self.assertRaises(InvalidParamException):
            validate(EnvironmentSpec(Regime.PERTURBED, period=2, f_table=(1, -1), c=1.0, beta=0.0))

    def test_no_perturbation_is_periodic(self):
        """With c = 0 every row keeps its periodic value."""
        spec = EnvironmentSpec(Regime.PERTURBED, seed=3, period=2, f_table=(1, -1), c=0.0, beta=2.0)
        ys = np.arange(-200, 200)
        np.testing.assert_array_equal(orientations(periodic([1, -1]), ys), orientations(spec, ys))
        self.assertEqual(0, perturbed_levels(spec, -200, 200).size)

    def test_perturbed_levels(self):
        """With c = 1 the origin is always perturbed; far levels rarely are when beta = 2."""
        spec = EnvironmentSpec(Regime.PERTURBED, seed=11, period=2, f_table=(1, -1), c=1.0, beta=2.0)
        levels = perturbed_levels(spec, -1000, 1000)
        self.assertIn(0, levels.tolist())
        self.assertIn(1, levels.tolist())
        self.assertIn(-1, levels.tolist())
        # expected count beyond |y| > 1 is about 2 (pi^2/6 - 1) < 1.3
        self.assertLess(levels.size, 15)
        with self.assertRaises(RangeException):
            perturbed_levels(spec, 5, 4)

    def test_perturbed_rows_use_random_signs(self):
        """Perturbed rows follow the Rademacher stream of the same seed."""
        spec = EnvironmentSpec(Regime.PERTURBED, seed=11, period=2, f_table=(1, -1), c=1.0, beta=2.0)
        rademacher = EnvironmentSpec(Regime.RADEMACHER, seed=11)
        levels = perturbed_levels(spec, -50, 50)
        np.testing.assert_array_equal(orientations(rademacher, levels), orientations(spec, levels))


class SpecTest(unittest.TestCase):
    """Test serialisation and materialisation."""

    def test_dict_format(self):
        """JSON keys follow the environment file format."""
        spec = EnvironmentSpec(Regime.PERTURBED, seed=7, period=2, f_table=(1, -1), c=1.0, beta=2.0)
        self.assertEqual({"regime": "perturbed", "seed": 7, "Q": 2, "f": [1, -1], "c": 1.0, "beta": 2.0},
                         spec.to_dict())
        self.assertEqual(spec, EnvironmentSpec.from_dict(spec.to_dict()))
        self.assertEqual({"regime": "periodic", "Q": 2, "f": [1, -1]}, periodic([1, -1]).to_dict())

    def test_from_dict_errors(self):
        """Malformed fields name their path."""
        with self.assertRaises(ConfigException) as ctx:
            EnvironmentSpec.from_dict({"regime": "periodic", "Q": 2, "f": [1, "x"]})
        self.assertEqual("f[1]", ctx.exception.field)
        with self.assertRaises(ConfigException) as ctx:
            EnvironmentSpec.from_dict({"Q": 2})
        self.assertEqual("regime", ctx.exception.field)
        with self.assertRaises(ConfigException):
            EnvironmentSpec.from_dict({"regime": "spiral"})

    def test_digest_stable(self):
        """Equal specs have equal digests."""
        a = EnvironmentSpec(Regime.RADEMACHER, seed=5)
        b = EnvironmentSpec.from_dict({"regime": "rademacher", "seed": 5})
        self.assertEqual(a.digest(), b.digest())
        self.assertNotEqual(a.digest(), EnvironmentSpec(Regime.RADEMACHER, seed=6).digest())

    def test_materialize(self):
        """Materialised tables list every row and end with their digest."""
        table = materialize(periodic([1, -1]), -2, 2)
        text = table.to_csv()
        lines = text.splitlines()
        self.assertEqual("y,orientation", lines[0])
        self.assertEqual(["-2,+1", "-1,-1", "0,+1", "1,-1", "2,+1"], lines[1:6])
        self.assertEqual(f"# digest: {table.digest}", lines[6])
        self.assertEqual(table.digest, materialize(periodic([1, -1]), -2, 2).digest)
        self.assertEqual((0, Orientation.RIGHT), table.rows[2])
        with self.assertRaises(RangeException):
            materialize(periodic([1, -1]), 3, 2)


if __name__ == '__main__':
    unittest.main()
