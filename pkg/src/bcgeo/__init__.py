"""Numerical verification toolkit for generalized complex geometry
structures: Courant and vertex algebroid operations, Beltrami-Courant
differentials and their symmetry calculus, and the induced gravity
background equations."""

__version__ = "0.1.0"
