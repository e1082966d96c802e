"""Pseudospectral simulator and harmonic-analysis diagnostics for the compressible Oldroyd-B system."""

from .spectral import GridSpec, SpectralField, SpectralState, forward_transform, inverse_transform, make_grid
from .littlewood_paley import HybridNormSpec, besov_norm, build_ladder, dyadic_block, hybrid_norm
from .paraproduct import bony_split, composite_series, piecewise_estimates_report, product_estimate_ratio
from .weight import RadiusTracker, apply_weight, weighted_state
from .model import ModelParams, VacuumError, full_rhs, linear_rhs
from .linear import damping_sweep, mode_matrix, spectrum
from .diagnostics import apriori_ledger, cancellation_residual, hybrid_energy_snapshot, shell_energy
from .config import ConfigError, RunConfig, build_config, load_config
from .integrate import RunResult, run, step_rk4
from .checkpoint import read_checkpoint, write_checkpoint

__version__ = "0.1.0"
