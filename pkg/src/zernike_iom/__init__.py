"""Zernike-polynomial operational-matrix solvers for linear PDEs on the unit disk."""

__version__ = "0.1.0"
