"""Steady state of the pumped cavity and stability of its linearization.

In the frame rotating at the pump frequency the mean field obeys

    0 = i*delta*alpha - (kappa/2 + s*kappa_n*|alpha|**2)*alpha + sqrt(kappa)*alpha_in

with ``s = +1`` for the HP- branch and ``s = -1`` for HP+. Taking the squared
modulus gives a real cubic in the occupancy ``x = |alpha|**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RootRefinementFailed
from .model import ModelParams

_EPS = np.finfo(float).eps
RESIDUAL_TOL = 1e-10
DEDUP_RTOL = 1e-9
_MAX_NEWTON = 100


@dataclass(frozen=True)
class SteadyStateSolution:
    alpha: complex
    occupancy_x: float
    stable: bool
    drift_eigenvalues: tuple[complex, complex]
    residual: float


@dataclass(frozen=True)
class DriftMatrix:
    """2x2 generator of the fluctuation pair (a, a^dagger)."""

    entries: np.ndarray

    @property
    def gamma(self) -> float:
        """Real damping rate shared by both diagonal entries."""
        return float(-self.entries[0, 0].real)

    @property
    def parametric(self) -> complex:
        """The a^dagger coefficient in the equation for a."""
        return complex(self.entries[0, 1])


def cubic_coefficients(params: ModelParams) -> tuple[float, float, float, float]:
    """Coefficients ``(c3, c2, c1, c0)`` of the occupancy cubic.

    ``x*((kappa/2 + s*kappa_n*x)**2 + delta**2) = kappa*|alpha_in|**2``
    expanded in powers of ``x``.
    """
    k, kn, d = params.kappa, params.kappa_n, params.delta
    s = params.sign
    return (
        kn * kn,
        s * k * kn,
        0.25 * k * k + d * d,
        -k * abs(complex(params.alpha_in)) ** 2,
    )


def _poly(c: tuple[float, float, float, float], x: float) -> float:
    return ((c[0] * x + c[1]) * x + c[2]) * x + c[3]


def _dpoly(c: tuple[float, float, float, float], x: float) -> float:
    return (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2]


def _real_roots_closed_form(c: tuple[float, float, float, float]) -> list[float]:
    c3, c2, c1, c0 = c
    if c3 == 0.0:
        if c2 == 0.0:
            return [-c0 / c1] if c1 != 0.0 else []
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        # numerically stable quadratic roots
        qq = -0.5 * (c1 + math.copysign(sq, c1))
        roots = [qq / c2]
        if qq != 0.0:
            roots.append(c0 / qq)
        return roots

    a, b, cc = c2 / c3, c1 / c3, c0 / c3
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + cc
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    if disc > 0 and p < 0:
        # three distinct real roots
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        phi = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        ts = [r * math.cos(phi - 2.0 * math.pi * kk / 3.0) for kk in range(3)]
    else:
        h = q * q / 4.0 + p ** 3 / 27.0
        sq = math.sqrt(max(h, 0.0))
        u = np.cbrt(-q / 2.0 + sq)
        v = np.cbrt(-q / 2.0 - sq)
        ts = [float(u + v)]
        # deflate by the real root; a double root shows up as a quadratic
        # discriminant that is zero up to rounding of either sign
        t1 = ts[0]
        b1, b0 = t1, p + t1 * t1
        disc_q = b1 * b1 - 4.0 * b0
        if disc_q >= -64.0 * _EPS * max(b1 * b1, abs(b0), abs(p)):
            sq_q = math.sqrt(max(disc_q, 0.0))
            ts += [0.5 * (-b1 + sq_q), 0.5 * (-b1 - sq_q)]
    return [t - shift for t in ts]


def _polish_x(c: tuple[float, float, float, float], x: float) -> float:
    for _ in range(_MAX_NEWTON):
        f = _poly(c, x)
        df = _dpoly(c, x)
        if f == 0.0 or df == 0.0:
            break
        step = f / df
        x_new = x - step
        if not math.isfinite(x_new):
            break
        # relative test: roots of size 1e-30 matter when kappa_n is tiny
        if abs(step) <= 4 * _EPS * abs(x_new):
            return x_new
        x = x_new
    return x


def _scaled_cubic(params: ModelParams) -> tuple[float, float, float, float]:
    """The occupancy cubic in ``y = kappa_n * x``, which is monic.

    ``y*((kappa/2 + s*y)**2 + delta**2) = kappa*kappa_n*|alpha_in|**2`` keeps
    every coefficient of order one even when kappa_n is tiny.
    """
    k, kn, d, s = params.kappa, params.kappa_n, params.delta, params.sign
    return (1.0, s * k, 0.25 * k * k + d * d, -k * kn * abs(complex(params.alpha_in)) ** 2)


def occupancy_roots(params: ModelParams) -> list[float]:
    """Non-negative real roots of the occupancy cubic, ascending and deduplicated."""
    c = cubic_coefficients(params)
    kn = params.kappa_n
    if kn > 0.0:
        cy = _scaled_cubic(params)
        # y = kappa_n * x is O(1) in the natural scale, so a root below this is the x = 0 root
        zero_tol = 1e-12 * max(abs(v) for v in cy)
        candidates = []
        for y in _real_roots_closed_form(cy):
            y = _polish_x(cy, y)
            if cy[3] == 0.0 and abs(y) <= zero_tol:
                y = 0.0
            candidates.append(y)
        ys = sorted(y for y in candidates if math.isfinite(y) and y >= 0.0)
        uniq: list[float] = []
        for y in ys:
            if uniq and abs(y - uniq[-1]) <= DEDUP_RTOL * max(abs(y), abs(uniq[-1]), zero_tol):
                continue
            uniq.append(y)
        roots = []
        for y in uniq:
            x = y / kn
            if not math.isfinite(x):
                continue
            roots.append(_polish_x(c, x) if x > 0.0 else 0.0)
        return sorted(roots)
    out = []
    for x in _real_roots_closed_form(c):
        if math.isfinite(x) and x >= 0.0:
            out.append(_polish_x(c, x))
    return sorted(out)


def steady_state_residual(params: ModelParams, alpha: complex) -> float:
    """|i*delta*alpha - damping*alpha + sqrt(kappa)*alpha_in| with the branch damping."""
    damping = 0.5 * params.kappa + params.sign * params.kappa_n * abs(alpha) ** 2
    f = 1j * params.delta * alpha - damping * alpha + math.sqrt(params.kappa) * complex(params.alpha_in)
    return abs(f)


def _residual_tol(params: ModelParams, alpha: complex) -> float:
    # 1e-10 absolute unless the terms themselves are so large that roundoff dominates
    x = abs(alpha) ** 2
    size = (math.sqrt(params.kappa) * abs(complex(params.alpha_in))
            + (abs(params.delta) + 0.5 * params.kappa + params.kappa_n * x) * abs(alpha))
    return max(RESIDUAL_TOL, 64 * _EPS * size)


def _polish_alpha(params: ModelParams, alpha: complex) -> complex:
    """Newton iteration on the (non-holomorphic) complex residual, in real coordinates."""
    k, kn, d, s = params.kappa, params.kappa_n, params.delta, params.sign
    drive = math.sqrt(k) * complex(params.alpha_in)
    tol = _residual_tol(params, alpha)
    for _ in range(_MAX_NEWTON):
        x = abs(alpha) ** 2
        f = 1j * d * alpha - (0.5 * k + s * kn * x) * alpha + drive
        if abs(f) <= tol:
            return alpha
        u, v = alpha.real, alpha.imag
        df_du = 1j * d - 0.5 * k - s * kn * (2.0 * u * alpha + x)
        df_dv = -d - 0.5j * k - s * kn * (2.0 * v * alpha + 1j * x)
        jac = np.array([[df_du.real, df_dv.real], [df_du.imag, df_dv.imag]])
        try:
            du, dv = np.linalg.solve(jac, [-f.real, -f.imag])
        except np.linalg.LinAlgError:
            break
        alpha = complex(u + du, v + dv)
        tol = _residual_tol(params, alpha)
    raise RootRefinementFailed(
        f"steady-state polishing did not reach residual <= {tol:.3g} in {_MAX_NEWTON} iterations"
    )


def drift_matrix(params: ModelParams, alpha: complex) -> DriftMatrix:
    """Drift of the linearized fluctuations around ``alpha``."""
    s, kn = params.sign, params.kappa_n
    x = abs(alpha) ** 2
    gamma = 0.5 * params.kappa + 2.0 * s * kn * x
    b = s * kn * alpha * alpha
    m = np.array(
        [
            [1j * params.delta - gamma, -b],
            [-np.conj(b), -1j * params.delta - gamma],
        ],
        dtype=complex,
    )
    return DriftMatrix(m)


def assess_stability(m: DriftMatrix) -> tuple[bool, tuple[complex, complex]]:
    """Closed-form eigenvalues of the 2x2 drift; stable iff both real parts < 0."""
    e = m.entries
    half_tr = 0.5 * (e[0, 0] + e[1, 1])
    det = e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]
    root = np.sqrt(complex(half_tr * half_tr - det))
    lam1 = complex(half_tr + root)
    lam2 = complex(half_tr - root)
    lo, hi = sorted((lam1, lam2), key=lambda z: (z.real, z.imag))
    stable = max(lo.real, hi.real) < 0.0
    return stable, (hi, lo)


def solve_steady_state(params: ModelParams) -> list[SteadyStateSolution]:
    """All steady states, ascending in occupancy, with residual and stability."""
    k, kn, d, s = params.kappa, params.kappa_n, params.delta, params.sign
    drive = math.sqrt(k) * complex(params.alpha_in)
    out = []
    for x in occupancy_roots(params):
        denom = complex(0.5 * k + s * kn * x, -d)
        if abs(denom) <= 1e-12:
            # damping vanishes on resonance: the amplitude phase is undetermined
            alpha = complex(math.sqrt(x), 0.0)
            residual = steady_state_residual(params, alpha)
            eig = assess_stability(drift_matrix(params, alpha))[1]
            out.append(SteadyStateSolution(alpha, x, False, eig, residual))
            continue
        alpha = _polish_alpha(params, drive / denom)
        residual = steady_state_residual(params, alpha)
        stable, eig = assess_stability(drift_matrix(params, alpha))
        out.append(SteadyStateSolution(alpha, abs(alpha) ** 2, stable, eig, residual))
    out.sort(key=lambda sol: sol.occupancy_x)
    return out


def default_root(solutions: list[SteadyStateSolution]) -> SteadyStateSolution:
    """The stable root with the smallest occupancy, else the smallest root.

    This is the branch reached by switching the drive on adiabatically from zero.
    """
    for sol in solutions:
        if sol.stable:
            return sol
    return solutions[0]


def linear_amplitude(params: ModelParams) -> complex:
    """Steady amplitude of the same cavity without the TLS bath."""
    return math.sqrt(params.kappa) * complex(params.alpha_in) / complex(0.5 * params.kappa, -params.delta)

