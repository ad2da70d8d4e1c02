"""
Tests for the embedded horizontal walk.
"""

import math
import unittest

import numpy as np

from honeycomb_walk.config import OracleConfig
from honeycomb_walk.embedded import (
    M_E,
    M_O,
    S2_E,
    S2_O,
    GeomKind,
    PathStats,
    Support,
    chernoff_bound,
    charfn,
    conditional_charfn,
    gaussian_approx,
    in_support,
    log_mgf,
    mgf,
    modulus_integral_bound,
    modulus_r,
    path_stats,
    path_stats_batch,
    pmf,
    return_prob_inversion,
    sample,
    sample_x_given_stats,
    simulate_embedded,
    simulate_embedded_batch,
)
from honeycomb_walk.environment import EnvironmentSpec, Regime
from honeycomb_walk.exception import (
    DegenerateVarianceException,
    DomainException,
    InvalidArgumentException,
    QuadratureNotConvergedException,
)
from honeycomb_walk.oracle import path_x_distribution
from honeycomb_walk.skeleton import SkeletonPath, simulate_skeleton, simulate_skeleton_batch
from honeycomb_walk.streams import task_generator

ALTERNATING = EnvironmentSpec(Regime.PERIODIC, period=2, f_table=(1, -1))
RADEMACHER = EnvironmentSpec(Regime.RADEMACHER, seed=7)


class JumpLawTest(unittest.TestCase):
    """Test the odd and even geometric laws."""

    def test_pmf_sums_to_one(self):
        """Both jump laws carry total mass one."""
        for kind in GeomKind:
            with self.subTest(kind=kind):
                self.assertAlmostEqual(1.0, sum(pmf(kind, k) for k in range(60)), places=15)
        self.assertEqual(0.0, pmf(GeomKind.ODD, -1))

    def test_moments(self):
        """Summed moments agree with the closed forms."""
        for kind, mean, var in ((GeomKind.ODD, M_O, S2_O), (GeomKind.EVEN, M_E, S2_E)):
            start = 1 if kind is GeomKind.ODD else 0
            values = [2 * k + start for k in range(80)]
            probs = [pmf(kind, k) for k in range(80)]
            m1 = sum(v * p for v, p in zip(values, probs))
            m2 = sum(v * v * p for v, p in zip(values, probs))
            self.assertAlmostEqual(mean, m1, places=12)
            self.assertAlmostEqual(var, m2 - m1 * m1, places=12)

    def test_reversal_probability(self):
        """A horizontal run of even length (the direction flips) has probability 2/3."""
        even_runs = sum(0.5 ** (r + 1) for r in range(0, 100, 2))
        self.assertAlmostEqual(2 / 3, even_runs, places=14)

    def test_support(self):
        """Odd jumps are positive odd, even jumps are nonnegative even."""
        self.assertTrue(in_support(GeomKind.ODD, 3))
        self.assertFalse(in_support(GeomKind.ODD, 0))
        self.assertTrue(in_support(GeomKind.EVEN, 0))
        self.assertFalse(in_support(GeomKind.EVEN, -2))

    def test_samples(self):
        """Samples have the right parity and mean."""
        rng = task_generator(11, 0)
        odd = sample(GeomKind.ODD, rng, 20000)
        even = sample(GeomKind.EVEN, rng, 20000)
        self.assertTrue(np.all(odd % 2 == 1))
        self.assertTrue(np.all(even % 2 == 0))
        self.assertAlmostEqual(M_O, odd.mean(), delta=0.05)
        self.assertAlmostEqual(M_E, even.mean(), delta=0.05)
        self.assertIsInstance(sample(GeomKind.EVEN, rng), int)


class TransformTest(unittest.TestCase):
    """Test characteristic and moment generating functions."""

    def test_modulus(self):
        """Both characteristic functions have modulus 3 / sqrt(17 - 8 cos 2 theta)."""
        theta = np.linspace(-math.pi, math.pi, 101)
        expected = 3.0 / np.sqrt(17.0 - 8.0 * np.cos(2.0 * theta))
        for kind in GeomKind:
            np.testing.assert_allclose(np.abs(charfn(kind, theta)), expected, rtol=1e-13)
        np.testing.assert_allclose(modulus_r(theta), expected, rtol=1e-15)

    def test_charfn_against_sum(self):
        """The closed-form characteristic function matches the series."""
        theta = 0.7
        for kind in GeomKind:
            start = 1 if kind is GeomKind.ODD else 0
            direct = sum(pmf(kind, k) * complex(math.cos(theta * (2 * k + start)), math.sin(theta * (2 * k + start)))
                         for k in range(60))
            self.assertAlmostEqual(0.0, abs(charfn(kind, theta) - direct), places=13)
        self.assertAlmostEqual(1.0, abs(charfn(GeomKind.ODD, 0.0)), places=15)

    def test_mgf(self):
        """The closed-form MGF matches the series and the even law is shifted by one."""
        t = 0.3
        direct = sum(pmf(GeomKind.ODD, k) * math.exp(t * (2 * k + 1)) for k in range(200))
        self.assertAlmostEqual(direct, mgf(GeomKind.ODD, t), places=12)
        self.assertAlmostEqual(log_mgf(GeomKind.ODD, t) - t, log_mgf(GeomKind.EVEN, t), places=14)

    def test_mgf_domain(self):
        """The MGF is infinite from ln 2 on."""
        with self.assertRaises(DomainException):
            mgf(GeomKind.ODD, math.log(2.0))
        with self.assertRaises(DomainException):
            log_mgf(GeomKind.EVEN, 1.0)


class PathStatsTest(unittest.TestCase):
    """Test jump counting along skeleton paths."""

    def test_counts(self):
        """A kept step on a right row and a reversal on a left row."""
        path = SkeletonPath.from_states([(0, 1), (1, 1), (0, -1)])
        stats = path_stats(path, ALTERNATING)
        self.assertEqual(PathStats(n_o_plus=1, n_e_minus=1), stats)
        self.assertEqual(1, stats.delta_o)
        self.assertEqual(-1, stats.delta_e)
        self.assertAlmostEqual(M_O - M_E, stats.drift)
        self.assertEqual(2, stats.n_jumps)
        self.assertEqual({"N_o_plus", "N_o_minus", "N_e_plus", "N_e_minus", "Delta_o", "Delta_e",
                          "Sigma_o", "Sigma_e"}, set(stats.to_dict()))

    def test_short_path(self):
        """A single state has no transition to count."""
        with self.assertRaises(InvalidArgumentException):
            path_stats(SkeletonPath.from_states([(0, 1)]), ALTERNATING)

    def test_batch_matches_single(self):
        """Vectorised counts equal the per-path counts."""
        y, nu = simulate_skeleton_batch(40, 8, task_generator(3, 0))
        counts = path_stats_batch(y, nu, RADEMACHER)
        for i in range(8):
            stats = path_stats(SkeletonPath(y[i], nu[i]), RADEMACHER)
            self.assertEqual((stats.n_o_plus, stats.n_o_minus, stats.n_e_plus, stats.n_e_minus),
                             tuple(int(c[i]) for c in counts))


class InversionTest(unittest.TestCase):
    """Test the conditional return probability."""

    def test_two_even_jumps(self):
        """X = A - B with A, B even geometric returns with probability 3/5."""
        stats = PathStats(n_e_plus=1, n_e_minus=1)
        for support in Support:
            with self.subTest(support=support):
                result = return_prob_inversion(stats, support)
                self.assertAlmostEqual(0.6, result.probability, places=11)
        grid = path_x_distribution(stats)
        self.assertAlmostEqual(0.6, grid.mass[grid.origin_offset[0]], places=12)

    def test_matches_convolution(self):
        """Inversion agrees with the exact convolution of the jump laws."""
        stats = PathStats(n_o_plus=3, n_o_minus=1, n_e_plus=2, n_e_minus=4)
        grid = path_x_distribution(stats, k_max=40)
        inversion = return_prob_inversion(stats, Support.EVEN_INTEGERS)
        self.assertAlmostEqual(grid.mass[grid.origin_offset[0]], inversion.probability, places=10)

    def test_odd_parity(self):
        """An odd number of odd jumps never returns."""
        stats = PathStats(n_o_plus=2, n_o_minus=1)
        self.assertAlmostEqual(0.0, return_prob_inversion(stats).probability, places=12)
        with self.assertRaises(InvalidArgumentException):
            return_prob_inversion(stats, Support.EVEN_INTEGERS)

    def test_not_converged(self):
        """A zero tolerance cannot be met before max_quad."""
        with self.assertRaises(QuadratureNotConvergedException):
            return_prob_inversion(PathStats(n_o_plus=5, n_o_minus=5), tol=0.0, max_quad=256)

    def test_config_tolerances(self):
        """quad_tol and max_quad are read from the oracle config."""
        stats = PathStats(n_o_plus=200, n_o_minus=200)
        loose = return_prob_inversion(stats, config=OracleConfig(quad_tol=0.5))
        self.assertEqual(128, loose.n_quad)
        self.assertGreater(return_prob_inversion(stats).n_quad, 128)
        with self.assertRaises(QuadratureNotConvergedException):
            return_prob_inversion(PathStats(n_e_plus=1, n_e_minus=1), config=OracleConfig(max_quad=64))

    def test_small_grid(self):
        """Fewer than 64 starting nodes are refused."""
        with self.assertRaises(InvalidArgumentException):
            return_prob_inversion(PathStats(n_e_plus=1), n_quad=16)

    def test_charfn_at_zero(self):
        """The conditional characteristic function is 1 at theta = 0."""
        self.assertAlmostEqual(1.0, abs(conditional_charfn(PathStats(7, 3, 2, 5), 0.0)), places=14)

    def test_modulus_bound(self):
        """The modulus integral bounds the return probability and shrinks with more jumps."""
        stats = PathStats(n_o_plus=10, n_o_minus=10, n_e_plus=6, n_e_minus=4)
        p = return_prob_inversion(stats).probability
        self.assertGreaterEqual(modulus_integral_bound(stats) + 1e-12, p)
        self.assertGreater(modulus_integral_bound(10), modulus_integral_bound(40))


class ApproximationTest(unittest.TestCase):
    """Test the Gaussian approximation and the exponential bound."""

    def test_gaussian(self):
        """With 700 balanced jumps the Gaussian value is within 1% of the exact one."""
        stats = PathStats(n_o_plus=200, n_o_minus=200, n_e_plus=150, n_e_minus=150)
        approx = gaussian_approx(stats)
        self.assertEqual(0.0, approx.a_n)
        exact = return_prob_inversion(stats, Support.EVEN_INTEGERS).probability
        self.assertAlmostEqual(1.0, approx.p_approx / exact, delta=0.01)

    def test_degenerate(self):
        """A path without jumps has no Gaussian approximation."""
        with self.assertRaises(DegenerateVarianceException):
            gaussian_approx(PathStats())

    def test_chernoff(self):
        """The Markov bound dominates the exact return probability."""
        stats = PathStats(n_o_plus=30, n_o_minus=10, n_e_plus=5, n_e_minus=15)
        bound = chernoff_bound(stats, n=30, delta3=0.2)
        self.assertLess(bound.t, 0.0)
        exact = return_prob_inversion(stats).probability
        self.assertGreaterEqual(bound.raw, exact)
        self.assertGreater(bound.optimized, 0.0)

    def test_chernoff_grid(self):
        """The raw bound never falls below the inversion value over 200 random configurations."""
        rng = task_generator(21, 0)
        violations = []
        for _ in range(200):
            stats = PathStats(*(int(c) for c in rng.integers(0, 25, size=4)))
            n = int(rng.integers(5, 500))
            delta3 = float(rng.uniform(0.05, 0.45))
            bound = chernoff_bound(stats, n, delta3)
            p = return_prob_inversion(stats).probability
            if bound.raw + 1e-12 < p:
                violations.append((stats, n, delta3, bound.raw, p))
        self.assertEqual([], violations)

    def test_chernoff_delta(self):
        """delta3 must lie strictly inside (0, 1/2)."""
        with self.assertRaises(InvalidArgumentException):
            chernoff_bound(PathStats(n_o_plus=1), n=10, delta3=0.5)


class SimulationTest(unittest.TestCase):
    """Test the embedded walk simulation."""

    def test_parity(self):
        """X_k has the parity of the number of kept directions so far."""
        path = simulate_skeleton(300, seed=5)
        x = simulate_embedded(path, RADEMACHER, seed=6)
        self.assertEqual(0, x[0])
        kept = np.concatenate([[0], np.cumsum(path.nu[:-1] == path.nu[1:])])
        np.testing.assert_array_equal(x % 2, kept % 2)

    def test_batch_directions(self):
        """Each jump goes the way its row points."""
        rng = task_generator(8, 0)
        y, nu = simulate_skeleton_batch(50, 20, rng)
        x = simulate_embedded_batch(y, nu, ALTERNATING, rng)
        jumps = np.diff(x, axis=1)
        eps = np.where(np.mod(y[:, :-1], 2) == 0, 1, -1)
        self.assertTrue(np.all(jumps * eps >= 0))

    def test_sample_mean(self):
        """Sampled X has the conditional mean and variance."""
        stats = PathStats(n_o_plus=4, n_o_minus=1, n_e_plus=2, n_e_minus=3)
        draws = sample_x_given_stats(stats, 40000, task_generator(9, 0))
        self.assertAlmostEqual(stats.drift, draws.mean(), delta=0.1)
        self.assertAlmostEqual(stats.variance, draws.var(), delta=0.05 * stats.variance)


if __name__ == '__main__':
    unittest.main()
