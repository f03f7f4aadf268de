"""Driven cavity coupled to a bosonic bath and a nonlinearly coupled TLS bath.

Steady states, linearized response and noise spectra, stochastic time-domain
integration, and finite-j checks of the Holstein-Primakoff mappings.
"""

from __future__ import annotations

from .errors import TlsQleError
from .linear_response import effective_linewidth, susceptibilities
from .model import HpBranch, ModelParams, fig2_params, fig3_params, validate_params
from .spectrum import quadrature_spectrum, spectrum_extrema
from .steady_state import assess_stability, default_root, drift_matrix, solve_steady_state

__all__ = [
    "HpBranch",
    "ModelParams",
    "TlsQleError",
    "assess_stability",
    "default_root",
    "drift_matrix",
    "effective_linewidth",
    "fig2_params",
    "fig3_params",
    "quadrature_spectrum",
    "solve_steady_state",
    "spectrum_extrema",
    "susceptibilities",
    "validate_params",
]

__version__ = "0.1.0"
