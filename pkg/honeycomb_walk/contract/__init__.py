"""
Interfaces for honeycomb-walk.
"""

from .orientation import BaseOrientation

__all__ = [
    'BaseOrientation',
]
