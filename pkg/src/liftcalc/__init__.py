"""Lifting calculus on Lie algebroids, their duals, and pair (Poisson) groupoids."""

__version__ = "0.1.0"
