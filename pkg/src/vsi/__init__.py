"""Exact symbolic curvature engine for vanishing-scalar-invariant metrics."""

__version__ = "0.1.0"
