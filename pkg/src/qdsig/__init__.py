"""Heterodyne quantum digital signatures: security bounds, theory models and Monte Carlo checks."""

__version__ = "0.1.0"
