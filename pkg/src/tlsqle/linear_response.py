"""Frequency-domain response of the linearized fluctuations.

Fourier transforming the fluctuation equation and its conjugate gives, for
each frequency ``omega`` (pump frame),

    A*a(w)  + B*a^dag(-w) = sqrt(kappa)*a_in(w)     + TLS noise
    B^*a(w) + C*a^dag(-w) = sqrt(kappa)*a_in^dag(-w) + TLS noise

with ``A = -i(w + delta) + G``, ``C = -i(w - delta) + G``,
``G = kappa/2 + 2 s kappa_n |alpha|^2`` and ``B = s kappa_n alpha^2``.
For the HP+ branch (``s = -1``) the TLS noise enters conjugated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularResponse
from .model import HpBranch, ModelParams

SINGULAR_TOL = 1e-14

# Ordering of the four noise inputs at frequency w used by the transfer matrix.
NOISE_INPUTS = ("a_in(w)", "a_in_dag(-w)", "tls(w)", "tls_dag(-w)")


@dataclass(frozen=True)
class AbcCoefficients:
    a_coef: complex
    b_coef: complex
    c_coef: complex
    omega: float


@dataclass(frozen=True)
class Susceptibilities:
    chi_d: complex
    chi_x: complex
    chi_d_tls: complex
    chi_x_tls: complex
    omega: float


def _abc_arrays(params: ModelParams, alpha: complex, omega):
    s = params.sign
    x = abs(alpha) ** 2
    gamma = 0.5 * params.kappa + 2.0 * s * params.kappa_n * x
    w = np.asarray(omega, dtype=float)
    a = -1j * (w + params.delta) + gamma
    c = -1j * (w - params.delta) + gamma
    b = s * params.kappa_n * alpha * alpha
    return a, complex(b), c


def abc_coefficients(params: ModelParams, alpha: complex, omega: float) -> AbcCoefficients:
    a, b, c = _abc_arrays(params, alpha, omega)
    return AbcCoefficients(complex(a), b, complex(c), float(omega))


def susceptibility_arrays(params: ModelParams, alpha: complex, omega):
    """Vectorized ``(chi_d, chi_x, chi_d_tls, chi_x_tls)`` over an array of frequencies.

    Raises
    ------
    SingularResponse
        If ``|A*C - |B|^2| < 1e-14`` at any requested frequency.
    """
    a, b, c = _abc_arrays(params, alpha, omega)
    det = a * c - abs(b) ** 2
    if np.any(np.abs(det) < SINGULAR_TOL):
        bad = np.atleast_1d(np.asarray(omega, dtype=float))[np.atleast_1d(np.abs(det) < SINGULAR_TOL)]
        raise SingularResponse(f"response determinant vanishes at omega={bad[0]!r}")
    sk = math.sqrt(params.kappa)
    skn = math.sqrt(params.kappa_n)
    chi_d = sk * c / det
    chi_x = -sk * b / det
    chi_d_tls = 2.0 * skn * np.conj(alpha) * c / det
    chi_x_tls = -2.0 * skn * alpha * b / det
    return chi_d, chi_x, chi_d_tls, chi_x_tls


def susceptibilities(params: ModelParams, alpha: complex, omega: float) -> Susceptibilities:
    """The four response functions of ``a(w)`` to the bath inputs.

    ``chi_d``/``chi_x`` multiply ``a_in(w)``/``a_in^dag(-w)``. For HP-
    ``chi_d_tls``/``chi_x_tls`` multiply ``tls(w)``/``tls^dag(-w)``; for HP+ the
    TLS noise is conjugated, so they multiply ``tls^dag(-w)``/``tls(w)``.
    """
    chi = susceptibility_arrays(params, alpha, omega)
    return Susceptibilities(*(complex(v) for v in chi), omega=float(omega))


def response_system(params: ModelParams, alpha: complex, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """The raw 2x2 system ``M @ (a(w), a^dag(-w)) = G @ noise`` before any inversion.

    ``G`` is 2x4 with columns ordered as :data:`NOISE_INPUTS`.
    """
    a, b, c = _abc_arrays(params, alpha, omega)
    m = np.array([[complex(a), b], [np.conj(b), complex(c)]], dtype=complex)
    sk = math.sqrt(params.kappa)
    t = 2.0 * math.sqrt(params.kappa_n)
    g = np.zeros((2, 4), dtype=complex)
    g[0, 0] = sk
    g[1, 1] = sk
    if params.branch is HpBranch.MINUS:
        g[0, 2] = t * np.conj(alpha)
        g[1, 3] = t * alpha
    else:
        g[0, 3] = t * np.conj(alpha)
        g[1, 2] = t * alpha
    return m, g


def transfer_matrix(params: ModelParams, alpha: complex, omega: float) -> np.ndarray:
    """Numerically solve the 2x2 system: rows map the noise inputs to ``a(w)`` and ``a^dag(-w)``."""
    m, g = response_system(params, alpha, omega)
    a, b, c = m[0, 0], m[0, 1], m[1, 1]
    if abs(a * c - abs(b) ** 2) < SINGULAR_TOL:
        raise SingularResponse(f"response determinant vanishes at omega={omega!r}")
    return np.linalg.solve(m, g)


def susceptibilities_by_solve(params: ModelParams, alpha: complex, omega: float) -> Susceptibilities:
    """Susceptibilities read off the numerically inverted system (no closed form)."""
    t = transfer_matrix(params, alpha, omega)[0]
    if params.branch is HpBranch.MINUS:
        d_tls, x_tls = t[2], t[3]
    else:
        d_tls, x_tls = t[3], t[2]
    return Susceptibilities(complex(t[0]), complex(t[1]), complex(d_tls), complex(x_tls), float(omega))


def response_poles(params: ModelParams, alpha: complex) -> np.ndarray:
    """Complex frequencies where ``A*C - |B|^2`` vanishes.

    As a polynomial in omega the determinant is ``-w^2 - 2iG w + G^2 + delta^2 - |B|^2``.
    """
    _, b, _ = _abc_arrays(params, alpha, 0.0)
    gamma = 0.5 * params.kappa + 2.0 * params.sign * params.kappa_n * abs(alpha) ** 2
    coeffs = [-1.0, -2j * gamma, gamma * gamma + params.delta ** 2 - abs(b) ** 2]
    return np.roots(coeffs)


def effective_linewidth(params: ModelParams, alpha: complex) -> float:
    """Total fluctuation damping, ``kappa + 4*s*kappa_n*|alpha|^2``.

    May be negative for HP+ beyond the instability; callers check stability.
    """
    return params.kappa + 4.0 * params.sign * params.kappa_n * abs(alpha) ** 2
