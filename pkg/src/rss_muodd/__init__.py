"""Provably safe following distances, braking bounds from road physics, and μODD selection."""

from .kinematics import DminResult, ScenarioParams, d_min
from .units import G

__version__ = "0.1.0"

__all__ = ["DminResult", "ScenarioParams", "d_min", "G", "__version__"]
