"""Rotor-router walks: the 1-D recurrent model, exit words, trajectory
bounds, d-dimensional aggregation, abelian stabilization and profiles."""
from ._accel import backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
