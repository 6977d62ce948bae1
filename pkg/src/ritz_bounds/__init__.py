"""Ritz Bounds - certified relative error bounds for Rayleigh-Ritz approximations."""

__version__ = "0.1.0"
