"""Compliant-mechanism flapping-wing simulator.

Pseudo-rigid crank-slider thorax kinematics, quasi-steady blade-element
aerodynamics, wing-abdomen coupling, and motion-capture flight analysis.
"""

__version__ = "0.1.0"

from . import abdomen, aero, configfile, errors, flapdyn, linkage, mocap, params
from .params import Environment, Preset, SimConfig, preset

__all__ = [
    "__version__",
    "abdomen",
    "aero",
    "configfile",
    "errors",
    "flapdyn",
    "linkage",
    "mocap",
    "params",
    "Environment",
    "Preset",
    "SimConfig",
    "preset",
]
