"""Curvature-weighted total variation image reconstruction."""

from .curvature import CurvatureSpec, curvature_map, weight_map
from .imagecore import add_noise, divergence, gradient_forward, laplacian_symbol
from .metrics import psnr, rel_err_l1, ssim
from .solver import IterationTrace, SolveResult, SolverConfig, admm_solve, solve, solve_color

__version__ = "0.1.0"
