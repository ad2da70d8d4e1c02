"""
Tests for configuration objects.
"""

import json
import os
import tempfile
import unittest

from honeycomb_walk.config import EventConfig, ExperimentConfig, OracleConfig, SimulationConfig
from honeycomb_walk.exception import ConfigException


def periodic_config(**overrides):
    data = {"environment": {"regime": "periodic", "Q": 2, "f": [1, -1]}, "n_grid": [10, 20, 40]}
    data.update(overrides)
    return data


class EventConfigTest(unittest.TestCase):
    """Test event parameters."""

    def test_defaults_admissible(self):
        """Defaults satisfy 2*delta3 + delta1 < 1/2."""
        cfg = EventConfig()
        self.assertLess(2 * cfg.delta3 + cfg.delta1, 0.5)
        self.assertEqual(4.0, cfg.C)

    def test_inadmissible(self):
        """2*delta3 + delta1 >= 1/2 is rejected."""
        with self.assertRaises(ConfigException) as ctx:
            EventConfig(delta1=0.3, delta3=0.15)
        self.assertEqual("events.delta3", ctx.exception.field)

    def test_positive(self):
        """Every parameter must be positive."""
        with self.assertRaises(ConfigException) as ctx:
            EventConfig(delta2=0.0)
        self.assertEqual("events.delta2", ctx.exception.field)

    def test_from_dict(self):
        """Numbers only."""
        self.assertEqual(EventConfig(delta1=0.05), EventConfig.from_dict({"delta1": 0.05}))
        with self.assertRaises(ConfigException) as ctx:
            EventConfig.from_dict({"delta1": "small"})
        self.assertEqual("events.delta1", ctx.exception.field)


class ExperimentConfigTest(unittest.TestCase):
    """Test experiment configuration files."""

    def test_from_dict(self):
        """A minimal periodic config loads with defaults."""
        config = ExperimentConfig.from_dict(periodic_config())
        self.assertEqual("recurrence", config.kind)
        self.assertEqual("ExactDP", config.method)
        self.assertEqual(2, config.environment_spec().period)

    def test_field_paths(self):
        """Errors name the offending field."""
        cases = [
            (periodic_config(n_grid=[10, 5]), "n_grid"),
            (periodic_config(n_grid=[10, -5]), "n_grid[1]"),
            (periodic_config(method="Guess"), "method"),
            (periodic_config(events={"delta1": -1}), "events.delta1"),
            (periodic_config(environment={"regime": "periodic", "Q": 2, "f": [1, "x"]}), "environment.f[1]"),
            (periodic_config(environment={"regime": "periodic", "Q": 3, "f": [1, -1, 1]}), "environment"),
            (periodic_config(colour="red"), "colour"),
            ({"n_grid": [1]}, "environment"),
        ]
        for data, field in cases:
            with self.subTest(field=field):
                with self.assertRaises(ConfigException) as ctx:
                    ExperimentConfig.from_dict(data)
                self.assertEqual(field, ctx.exception.field)

    def test_s_probability_needs_table(self):
        """The functional experiment needs a periodic table."""
        with self.assertRaises(ConfigException):
            ExperimentConfig.from_dict({"environment": {"regime": "rademacher", "seed": 1},
                                        "n_grid": [10], "kind": "s_probability"})

    def test_digest(self):
        """The digest depends on content only."""
        a = ExperimentConfig.from_dict(periodic_config())
        b = ExperimentConfig.from_dict(periodic_config())
        c = ExperimentConfig.from_dict(periodic_config(master_seed=1))
        self.assertEqual(a.digest(), b.digest())
        self.assertNotEqual(a.digest(), c.digest())

    def test_from_file(self):
        """Files load and bad JSON becomes a ConfigException."""
        with tempfile.TemporaryDirectory() as tmp:
            good = os.path.join(tmp, "good.json")
            with open(good, "w", encoding="utf-8") as f:
                json.dump(periodic_config(seeds=[1, 2]), f)
            self.assertEqual([1, 2], ExperimentConfig.from_file(good).seeds)
            bad = os.path.join(tmp, "bad.json")
            with open(bad, "w", encoding="utf-8") as f:
                f.write("{not json")
            with self.assertRaises(ConfigException):
                ExperimentConfig.from_file(bad)


class LimitsTest(unittest.TestCase):
    """Test oracle and simulation settings."""

    def test_oracle_limits(self):
        """Invalid limits are rejected."""
        with self.assertRaises(ConfigException):
            OracleConfig(max_cells=0)
        with self.assertRaises(ConfigException):
            OracleConfig(max_quad=8)
        self.assertEqual(50_000_000, OracleConfig().to_dict()["max_cells"])

    def test_simulation_limits(self):
        """Chunk and batch sizes must be positive."""
        with self.assertRaises(ConfigException):
            SimulationConfig(chunk_size=0)
        with self.assertRaises(ConfigException):
            SimulationConfig(batch_size=0)


if __name__ == '__main__':
    unittest.main()
