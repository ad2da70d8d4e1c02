"""
Tests for the exact dynamic-programming oracles.
"""

import unittest

import numpy as np

from honeycomb_walk.config import OracleConfig
from honeycomb_walk.embedded import PathStats
from honeycomb_walk.environment import EnvironmentSpec, Regime
from honeycomb_walk.exception import (
    InvalidArgumentException,
    InvalidPeriodException,
    NonZeroSumException,
    ResourceLimitException,
    TailTolTooLooseException,
)
from honeycomb_walk.oracle import (
    bridge_confinement_exact,
    expected_low_visits_exact,
    full_walk_distribution,
    joint_pn_exact,
    joint_pn_series,
    joint_pn_unrolled,
    path_x_distribution,
    skeleton_distribution_exact,
    wbar_distribution_exact,
    wbar_states,
    wbar_stationary,
)
from honeycomb_walk.skeleton import return_prob_series

ALTERNATING = EnvironmentSpec(Regime.PERIODIC, period=2, f_table=(1, -1))
RADEMACHER = EnvironmentSpec(Regime.RADEMACHER, seed=31)


def periodic(*table):
    return EnvironmentSpec(Regime.PERIODIC, period=len(table), f_table=table)


class FullWalkTest(unittest.TestCase):
    """Test the time-propagated full walk."""

    def test_first_steps(self):
        """The walk is at the origin at t = 0, away at t = 1, back with probability 1/4 at t = 2."""
        probs = full_walk_distribution(ALTERNATING, 6)
        self.assertEqual(7, len(probs))
        self.assertEqual(1.0, probs[0])
        self.assertEqual(0.0, probs[1])
        self.assertAlmostEqual(0.25, probs[2], places=15)

    def test_odd_times(self):
        """x + y changes parity at every step."""
        probs = full_walk_distribution(RADEMACHER, 21)
        for t in range(1, 22, 2):
            self.assertEqual(0.0, probs[t])

    def test_limits(self):
        """The time grid respects max_cells and needs t_max >= 1."""
        with self.assertRaises(ResourceLimitException) as ctx:
            full_walk_distribution(ALTERNATING, 10, OracleConfig(max_cells=100))
        self.assertEqual(441, ctx.exception.requested)
        with self.assertRaises(InvalidArgumentException):
            full_walk_distribution(ALTERNATING, 0)


class JointSeriesTest(unittest.TestCase):
    """Test P(X_2n = 0, Y_2n = 0)."""

    def test_first_value(self):
        """Two vertical steps return with 4/9 times the chance the two horizontal jumps cancel."""
        cases = (((1, -1), 4 / 15), ((1, 1, -1, -1), 4 / 15), ((1, -1, -1, 1), 0.25))
        for table, expected in cases:
            with self.subTest(table=table):
                self.assertAlmostEqual(expected, joint_pn_exact(periodic(*table), 1).probability, places=10)

    def test_skeleton_marginal(self):
        """The y = 0 mass of the joint DP is the skeleton return series."""
        series = joint_pn_series(RADEMACHER, 40)
        np.testing.assert_allclose(series.y0_mass[1:], return_prob_series(40)[1:], atol=1e-10)
        self.assertTrue(np.all(series.p <= series.y0_mass + 1e-15))
        self.assertTrue(np.all(series.deficit < 1e-9))

    def test_matches_unrolled(self):
        """The macro-step DP agrees with the time-unrolled DP."""
        for spec in (ALTERNATING, RADEMACHER):
            series = joint_pn_series(spec, 3)
            for n in (1, 2, 3):
                with self.subTest(regime=spec.regime, n=n):
                    unrolled = joint_pn_unrolled(spec, n)
                    self.assertLess(unrolled.remaining_mass, 1e-9)
                    self.assertAlmostEqual(series.p[n], unrolled.probability, places=9)

    def test_window_growth(self):
        """A long horizon forces the x window to widen without losing mass."""
        series = joint_pn_series(ALTERNATING, 150, config=OracleConfig(guard=4))
        self.assertGreater(series.x_halfwidth, 16)
        self.assertLess(series.deficit[150], 1e-8)
        self.assertAlmostEqual(1.0, series.final.total_mass, delta=1e-8)

    def test_tail_tol(self):
        """Tolerances outside (0, 1e-4] are refused."""
        with self.assertRaises(TailTolTooLooseException):
            joint_pn_series(ALTERNATING, 5, tail_tol=1e-3)
        with self.assertRaises(TailTolTooLooseException):
            joint_pn_series(ALTERNATING, 5, tail_tol=0.0)

    def test_tail_tol_from_config(self):
        """Without an explicit tail_tol the oracle config supplies it."""
        with self.assertRaises(TailTolTooLooseException):
            joint_pn_series(ALTERNATING, 5, config=OracleConfig(tail_tol=1e-3))
        with self.assertRaises(TailTolTooLooseException):
            joint_pn_exact(ALTERNATING, 5, config=OracleConfig(tail_tol=1e-3))
        series = joint_pn_series(ALTERNATING, 5, config=OracleConfig(tail_tol=1e-6))
        self.assertAlmostEqual(4 / 15, series.p[1], places=5)
        explicit = joint_pn_series(ALTERNATING, 5, tail_tol=1e-12, config=OracleConfig(tail_tol=1e-3))
        self.assertAlmostEqual(4 / 15, explicit.p[1], places=10)

    def test_resource_limit(self):
        """Both DPs refuse grids above max_cells."""
        with self.assertRaises(ResourceLimitException):
            joint_pn_series(ALTERNATING, 50, config=OracleConfig(max_cells=1000))
        with self.assertRaises(ResourceLimitException):
            joint_pn_unrolled(ALTERNATING, 4, config=OracleConfig(max_cells=1000))


class SmallLawsTest(unittest.TestCase):
    """Test the skeleton, conditional-X and bridge oracles."""

    def test_skeleton_distribution(self):
        """After one step the skeleton is at (1, +1) or (-1, -1)."""
        grid = skeleton_distribution_exact(1)
        self.assertEqual(("nu", "y"), grid.axes)
        self.assertAlmostEqual(1 / 3, grid.mass[0, 2])
        self.assertAlmostEqual(2 / 3, grid.mass[1, 0])
        self.assertEqual("nu,y,mass", grid.to_csv().splitlines()[0])
        self.assertIn("-1,-1,", grid.to_csv())

    def test_path_x_distribution(self):
        """The convolved law has unit mass, the conditional mean and even support."""
        grid = path_x_distribution(PathStats(n_o_plus=2, n_e_minus=3), k_max=40)
        self.assertAlmostEqual(1.0, grid.total_mass, places=12)
        x = np.arange(grid.mass.size) - grid.origin_offset[0]
        self.assertAlmostEqual(2 * 5 / 3 - 3 * 2 / 3, float(np.dot(x, grid.mass)), places=10)
        self.assertEqual(0.0, float(grid.mass[x % 2 == 1].sum()))

    def test_bridge_confinement(self):
        """Four-step bridges leave {-1, 0, 1} only through 0 -> +-1 -> +-2, mass 6/81 out of 42/81."""
        self.assertAlmostEqual(6 / 7, bridge_confinement_exact(2, 2), places=14)
        self.assertAlmostEqual(1.0, bridge_confinement_exact(1, 2), places=14)
        self.assertEqual(0.0, bridge_confinement_exact(3, 1))
        self.assertAlmostEqual(1.0, bridge_confinement_exact(5, 11), places=14)

    def test_low_visits(self):
        """Expected visits below a level grow with the level."""
        self.assertAlmostEqual(6.0, expected_low_visits_exact(3, 10), places=12)
        self.assertAlmostEqual(1.0, expected_low_visits_exact(1, 0), places=12)
        shallow = expected_low_visits_exact(20, 1)
        self.assertLess(shallow, expected_low_visits_exact(20, 3))
        with self.assertRaises(InvalidArgumentException):
            expected_low_visits_exact(0, 1)


class WbarTest(unittest.TestCase):
    """Test the pair chain reduced mod Q."""

    def test_stationary(self):
        """The stationary law has one entry per state and unit mass."""
        states = wbar_states(4)
        self.assertEqual(16, len(states))
        self.assertAlmostEqual(1.0, wbar_stationary(states, 4).sum(), places=15)

    def test_convergence(self):
        """Averaged over two steps the law reaches stationarity by n = 10^4."""
        for table in ((1, -1), (1, 1, -1, -1)):
            with self.subTest(table=table):
                law = wbar_distribution_exact(len(table), table, 10 ** 4)
                self.assertAlmostEqual(1.0, law.total_mass, places=12)
                self.assertLessEqual(law.tv_averaged, 1e-8)
                for mean in law.stationary_means():
                    self.assertAlmostEqual(0.0, mean, places=14)

    def test_early_law_is_far(self):
        """One step in, the law is still far from stationary."""
        law = wbar_distribution_exact(4, (1, 1, -1, -1), 1)
        self.assertGreater(law.tv_averaged, 0.3)

    def test_invalid(self):
        """Odd periods, nonzero sums and n = 0 are refused."""
        with self.assertRaises(InvalidPeriodException):
            wbar_distribution_exact(3, (1, -1, 1), 5)
        with self.assertRaises(NonZeroSumException):
            wbar_distribution_exact(2, (1, 1), 5)
        with self.assertRaises(InvalidArgumentException):
            wbar_distribution_exact(2, (1, -1), 0)


if __name__ == '__main__':
    unittest.main()
