"""Minimal right inverse of Lévy processes on simulated paths.

Modules: :mod:`levy_model` (catalog models and exponents), :mod:`path_sim`
(reproducible path simulation), :mod:`resolvent` (resolvent densities and
hitting transforms), :mod:`fluctuation` (ladder characteristics),
:mod:`right_inverse` (Evans and thinned-ladder constructions),
:mod:`exponent` (the exponent of the right inverse and simulation checks)
and :mod:`cli`.
"""

from .exponent import CheckReport, SubordinatorChar, analytic_rho, K_characteristics
from .fluctuation import closed_form_ladder, estimate_ladder_char, extract_ladder
from .levy_model import LevyModel, closed_form_rho, model_from_spec
from .path_sim import SimConfig, simulate_path
from .resolvent import hitting_transform, resolvent_density
from .right_inverse import empirical_rho, evans_construct, thinned_ladder_construct

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "SubordinatorChar",
    "analytic_rho",
    "K_characteristics",
    "closed_form_ladder",
    "estimate_ladder_char",
    "extract_ladder",
    "LevyModel",
    "closed_form_rho",
    "model_from_spec",
    "SimConfig",
    "simulate_path",
    "hitting_transform",
    "resolvent_density",
    "empirical_rho",
    "evans_construct",
    "thinned_ladder_construct",
]
