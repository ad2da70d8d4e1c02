"""
Horizontal-orientation environments.
"""

from .spec import (
    EnvironmentSpec,
    MaterializedEnvironment,
    Orientation,
    Regime,
    materialize,
    orientation,
    orientations,
    perturbation_probability,
    perturbed_levels,
    validate,
)

__all__ = [
    'EnvironmentSpec',
    'MaterializedEnvironment',
    'Orientation',
    'Regime',
    'materialize',
    'orientation',
    'orientations',
    'perturbation_probability',
    'perturbed_levels',
    'validate',
]
