"""
Exceptions module for honeycomb-walk.

This module contains all the exceptions that can be raised by the honeycomb_walk package.
"""

from .exception import (
    ConfigException,
    DegenerateVarianceException,
    DomainException,
    HoneycombException,
    InvalidArgumentException,
    InvalidParamException,
    InvalidPeriodException,
    InvariantViolationException,
    LTooSmallException,
    NonZeroSumException,
    OverflowException,
    QuadratureNotConvergedException,
    RangeException,
    ResourceLimitException,
    TailTolTooLooseException,
    TruncationTooCoarseException,
    ValidationException,
    ZeroAcceptanceException,
)

__all__ = [
    'HoneycombException',
    'ValidationException',
    'InvalidPeriodException',
    'NonZeroSumException',
    'InvalidParamException',
    'InvalidArgumentException',
    'RangeException',
    'DomainException',
    'DegenerateVarianceException',
    'OverflowException',
    'TruncationTooCoarseException',
    'QuadratureNotConvergedException',
    'TailTolTooLooseException',
    'LTooSmallException',
    'ZeroAcceptanceException',
    'InvariantViolationException',
    'ResourceLimitException',
    'ConfigException',
]
