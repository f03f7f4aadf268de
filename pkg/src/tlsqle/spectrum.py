"""Symmetrized quadrature noise spectrum of the intracavity field.

For the quadrature ``X_theta = (a^dag e^{i theta} + a e^{-i theta})/sqrt(2)`` the
symmetrized spectrum is

    S(w, theta) = [K(w) + |P(w)| cos(2 theta - phi)] (n_th + 1/2)
                + [K_tls(w) + |P_tls(w)| cos(2 theta - phi_tls)] (n_th_tls + 1/2)

with ``K = (|chi_d(w)|^2 + |chi_d(-w)|^2 + |chi_x(w)|^2 + |chi_x(-w)|^2)/2``,
``P = chi_d(w) chi_x(-w) + chi_d(-w) chi_x(w)`` and ``phi = arg P`` (same for
the TLS susceptibilities). ``S`` is even in ``w`` and pi-periodic in ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NoPeak, SingularResponse, UnresolvedPeak
from .linear_response import susceptibility_arrays, transfer_matrix
from .model import ModelParams


class SpectrumSample(NamedTuple):
    omega: float
    theta: float
    value: float
    error: str | None = None


@dataclass(frozen=True)
class SpectrumExtrema:
    theta_min: float
    theta_max: float
    s_min: float
    s_max: float
    phi: float
    phi_tls: float
    flat: bool = False


class _Terms(NamedTuple):
    k_bos: np.ndarray
    p_bos: np.ndarray
    k_tls: np.ndarray
    p_tls: np.ndarray


def _terms(params: ModelParams, alpha: complex, omega) -> _Terms:
    w = np.asarray(omega, dtype=float)
    d_p, x_p, dt_p, xt_p = susceptibility_arrays(params, alpha, w)
    d_m, x_m, dt_m, xt_m = susceptibility_arrays(params, alpha, -w)

    def k(a, b, c, d):
        return 0.5 * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2)

    return _Terms(
        k(d_p, d_m, x_p, x_m),
        d_p * x_m + d_m * x_p,
        k(dt_p, dt_m, xt_p, xt_m),
        dt_p * xt_m + dt_m * xt_p,
    )


def _combine(params: ModelParams, t: _Terms, theta):
    th = np.asarray(theta, dtype=float)
    nb = params.n_th + 0.5
    nt = params.n_th_tls + 0.5
    bos = t.k_bos + np.abs(t.p_bos) * np.cos(2.0 * th - np.angle(t.p_bos))
    tls = t.k_tls + np.abs(t.p_tls) * np.cos(2.0 * th - np.angle(t.p_tls))
    return bos * nb + tls * nt


def spectrum_values(params: ModelParams, alpha: complex, omega, theta) -> np.ndarray:
    """Closed-form spectrum, broadcasting ``omega`` against ``theta``."""
    w, th = np.broadcast_arrays(np.asarray(omega, dtype=float), np.asarray(theta, dtype=float))
    return _combine(params, _terms(params, alpha, w), th)


def quadrature_spectrum(params: ModelParams, alpha: complex, omega: float, theta: float) -> float:
    return float(spectrum_values(params, alpha, omega, theta))


def spectrum_oracle(params: ModelParams, alpha: complex, omega: float, theta: float) -> float:
    """Independent evaluation by solving the 2x2 system and contracting bath correlators.

    ``X(w) = sum_k v_k u_k`` over the four noise inputs ``u_k``; the result is
    ``(<X X^dag> + <X^dag X>)/2`` using ``<a_in a_in^dag> = n+1`` and
    ``<a_in^dag a_in> = n`` for each bath.
    """
    t = transfer_matrix(params, alpha, omega)
    v = (np.exp(-1j * theta) * t[0] + np.exp(1j * theta) * t[1]) / math.sqrt(2.0)
    n, nt = params.n_th, params.n_th_tls
    # u = (a_in(w), a_in^dag(-w), tls(w), tls^dag(-w))
    anti = np.diag([n + 1.0, n, nt + 1.0, nt])  # <u_k u_l^dag>
    normal = np.diag([n, n + 1.0, nt, nt + 1.0])  # <u_l^dag u_k>
    xx_dag = v @ anti @ v.conj()
    x_dag_x = v.conj() @ normal @ v
    return float(0.5 * (xx_dag + x_dag_x).real)


def spectrum_extrema(params: ModelParams, alpha: complex, omega: float) -> SpectrumExtrema:
    """Extremal quadratures at one frequency.

    Both bath contributions vary as ``cos(2 theta - phase)``, so their sum is a
    single sinusoid in ``2 theta`` and the extrema follow from one phasor.
    """
    t = _terms(params, alpha, omega)
    nb = params.n_th + 0.5
    nt = params.n_th_tls + 0.5
    k = float(t.k_bos * nb + t.k_tls * nt)
    z = complex(t.p_bos * nb + t.p_tls * nt)
    p_b, p_t = complex(t.p_bos), complex(t.p_tls)
    phi = math.atan2(p_b.imag, p_b.real) if p_b != 0 else 0.0
    phi_tls = math.atan2(p_t.imag, p_t.real) if p_t != 0 else 0.0
    amp = abs(z)
    if amp <= 1e-15 * k:
        return SpectrumExtrema(0.0, 0.0, k, k, phi, phi_tls, flat=True)
    theta_max = (0.5 * math.atan2(z.imag, z.real)) % math.pi
    theta_min = (theta_max + 0.5 * math.pi) % math.pi
    return SpectrumExtrema(theta_min, theta_max, k - amp, k + amp, phi, phi_tls)


def scan_extrema(params: ModelParams, alpha: complex, omega: float,
                 n_grid: int = 720, tol: float = 1e-10) -> tuple[float, float, float, float]:
    """Brute-force ``(theta_min, theta_max, s_min, s_max)`` by grid scan plus golden-section refinement."""
    grid = np.linspace(0.0, math.pi, n_grid, endpoint=False)
    values = spectrum_values(params, alpha, omega, grid)
    step = grid[1] - grid[0]

    def refine(i0: int, sign: float) -> tuple[float, float]:
        centre = grid[i0]
        try:
            res = minimize_scalar(
                lambda th: sign * quadrature_spectrum(params, alpha, omega, th),
                bracket=(centre - step, centre, centre + step),
                method="golden",
                tol=tol,
            )
        except ValueError:
            # flat in theta: no valid bracket
            return float(centre), float(values[i0])
        return float(res.x) % math.pi, sign * float(res.fun)

    i_min, i_max = int(np.argmin(values)), int(np.argmax(values))
    th_min, s_min = refine(i_min, 1.0)
    th_max, s_max = refine(i_max, -1.0)
    return th_min, th_max, s_min, s_max


def spectrum_grid(params: ModelParams, alpha: complex,
                  omega_grid: Sequence[float], theta_grid: Sequence[float]) -> list[SpectrumSample]:
    """Row-major table (omega outer, theta inner) of spectrum samples.

    Frequencies where the response is singular produce samples with
    ``value = nan`` and the error message set; nothing is dropped.
    """
    w = np.asarray(omega_grid, dtype=float)
    th = np.asarray(theta_grid, dtype=float)
    if w.size == 0 or th.size == 0:
        raise ValueError("omega and theta grids must be non-empty")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(th))):
        raise ValueError("grids must be finite")
    out: list[SpectrumSample] = []
    try:
        table = spectrum_values(params, alpha, w[:, None], th[None, :])
        errors: list[str | None] = [None] * w.size
    except SingularResponse:
        table = np.full((w.size, th.size), np.nan)
        errors = []
        for i, wi in enumerate(w):
            try:
                table[i] = spectrum_values(params, alpha, wi, th)
                errors.append(None)
            except SingularResponse as exc:
                errors.append(str(exc))
    for i, wi in enumerate(w):
        row = table[i]
        for j, tj in enumerate(th):
            out.append(SpectrumSample(float(wi), float(tj), float(row[j]), errors[i]))
    return out


def fitted_linewidth(trace: Sequence[SpectrumSample]) -> float:
    """Full width at half maximum above the far-detuned baseline.

    The baseline is the median of the outer 10% of the trace (5% per side);
    half-maximum crossings are linearly interpolated.
    """
    pts = sorted((s for s in trace if s.error is None and math.isfinite(s.value)), key=lambda s: s.omega)
    if len(pts) < 10:
        raise UnresolvedPeak(f"trace has only {len(pts)} usable points")
    w = np.array([s.omega for s in pts])
    v = np.array([s.value for s in pts])
    n_edge = max(1, int(round(0.05 * len(v))))
    baseline = float(np.median(np.concatenate([v[:n_edge], v[-n_edge:]])))
    i_pk = int(np.argmax(v))
    peak = float(v[i_pk])
    if peak <= 2.0 * baseline:
        raise NoPeak(f"peak {peak:.6g} does not exceed twice the baseline {baseline:.6g}")
    half = baseline + 0.5 * (peak - baseline)
    if int(np.count_nonzero(v > half)) < 10:
        raise UnresolvedPeak("fewer than 10 points above half maximum")

    i = i_pk
    while i > 0 and v[i - 1] > half:
        i -= 1
    if i == 0:
        raise UnresolvedPeak("half-maximum crossing lies outside the trace (low side)")
    left = w[i - 1] + (half - v[i - 1]) * (w[i] - w[i - 1]) / (v[i] - v[i - 1])
    j = i_pk
    while j < len(v) - 1 and v[j + 1] > half:
        j += 1
    if j == len(v) - 1:
        raise UnresolvedPeak("half-maximum crossing lies outside the trace (high side)")
    right = w[j] + (v[j] - half) * (w[j + 1] - w[j]) / (v[j] - v[j + 1])
    return float(right - left)
