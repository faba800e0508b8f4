"""Numerical toolkit for the two-phase overdetermined torsion problem."""

__version__ = "0.1.0"
