"""Positive definite kernels, their dilations, and wavelet filters."""

__version__ = "0.1.0"
