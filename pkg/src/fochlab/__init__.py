"""fochlab: a spectral laboratory for the fifth-order Camassa-Holm equation

    u_t + u u_x + F(u) = 0,   m = (1 - alpha^2 d_xx)(1 - beta^2 d_xx) u,

on a periodic box, with Littlewood-Paley/Besov diagnostics, characteristics,
conservation checks and norm-inflation experiments.
"""

from .spectral import Grid1D, RealField, derivative, apply_symbol, multiply_dealiased, norm_lp, eval_at
from .littlewood_paley import BesovIndex, build_partition, block, low_pass, besov_norm, weighted_sup_norm
from .model import FochParams, FTerms, ResolutionWarning, f_terms, rhs, p_of_d, u_to_m, m_to_u
from .dynamics import StepController, Trajectory, integrate, transport_solve, picard_solve
from .lagrangian import flow_map, kernel_convolve, lagrangian_F, conservation_identity
from .diagnostics import DiagnosticSeries, BlowupMonitor, ConservedMonitor
from .experiments import Ill1Config, Ill2Config, run_inflation, run_conservation_study

__version__ = "0.1.0"

__all__ = [
    "Grid1D", "RealField", "derivative", "apply_symbol", "multiply_dealiased", "norm_lp", "eval_at",
    "BesovIndex", "build_partition", "block", "low_pass", "besov_norm", "weighted_sup_norm",
    "FochParams", "FTerms", "ResolutionWarning", "f_terms", "rhs", "p_of_d", "u_to_m", "m_to_u",
    "StepController", "Trajectory", "integrate", "transport_solve", "picard_solve",
    "flow_map", "kernel_convolve", "lagrangian_F", "conservation_identity",
    "DiagnosticSeries", "BlowupMonitor", "ConservedMonitor",
    "Ill1Config", "Ill2Config", "run_inflation", "run_conservation_study",
]
