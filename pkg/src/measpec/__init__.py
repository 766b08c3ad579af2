"""Multifractal spectrum of the multiple ergodic average ``(1/n) sum phi(x_k, x_2k)``.

Typical use::

    from measpec import potential_from_factors, spectrum_curve
    model = potential_from_factors([-1, 1], [-1, 1])
    curve = spectrum_curve(model, 201)
"""
from .errors import (
    ConstantPotentialError,
    InfeasibleMomentsError,
    InvalidModelError,
    LimitNonconvergence,
    SolverFailure,
    SpectrumError,
    UnsupportedModelError,
)
from .invariant import InvariantSpectrumPoint, invariant_spectrum, max_entropy_dual
from .model import PotentialMatrix, load_model, potential_from_factors, potential_from_matrix
from .pressure import EndpointSlopes, PressurePoint, endpoint_slopes, extremal_cycle, pressure, pressure_derivative
from .sampler import (
    MarkovKernel,
    cylinder_log_prob,
    dyadic_chains,
    kernel_from_solution,
    lln_experiment,
    multiple_birkhoff_average,
    sample_prefix,
)
from .spectrum import PointClass, SpectrumPoint, legendre_point, spectrum_curve
from .transfer import TransferSolution, solve_transfer

__version__ = "0.1.0"
