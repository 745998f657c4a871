"""Odd-dimensional unitary groups over finite commutative rings."""

__version__ = "0.1.0"
