"""Iterative text-conditioned scene drawing."""

__version__ = "0.1.0"
