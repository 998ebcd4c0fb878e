"""Exact search for lattice realizations of triangulated surfaces."""

__version__ = "0.1.0"
