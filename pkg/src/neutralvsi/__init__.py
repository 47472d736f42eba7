"""Verification toolkit for four-dimensional neutral signature VSI and CSI metrics."""

__version__ = "0.1.0"
