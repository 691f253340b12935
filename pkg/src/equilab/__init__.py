"""Numerical experiments on equidistribution of dilating and translated sets."""

__version__ = "0.1.0"
