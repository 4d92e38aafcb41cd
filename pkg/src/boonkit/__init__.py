"""Boundary-enforcing corrections for kernel neural operators, with the data and training around them."""

__version__ = "0.1.0"
