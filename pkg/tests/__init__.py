"""
Tests for honeycomb-walk package.
"""
