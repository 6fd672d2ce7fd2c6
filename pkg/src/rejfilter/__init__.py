"""Rejection filtering: constant-memory approximate Bayesian updates."""

__version__ = "0.1.0"
