"""Numerical and exact checks for twistor forms on Kähler manifolds."""
__version__ = "0.1.0"
