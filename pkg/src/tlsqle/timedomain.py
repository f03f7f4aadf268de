"""Stochastic time-domain integration of the cavity fluctuations.

Two integrators live here:

* :func:`integrate_linearized` solves the linear SDE for the fluctuation
  ``a(t)`` around a stable steady state. Its additive noise uses the
  symmetrized convention (``E|dW|^2 = (n + 1/2) dt`` per bath), so its Welch
  spectrum is a statistical estimate of the closed-form symmetrized spectrum.
* :func:`integrate_nonlinear_semiclassical` treats the full field as a
  c-number with multiplicative TLS noise (Stratonovich, midpoint rule). Operator
  ordering is discarded; it is a semiclassical approximation.

Each trajectory draws its noise from its own generator spawned from the
ensemble seed, so trajectory ``k`` is identical whatever ``n_traj`` is.
"""

from __future__ import annotations

import enum
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import Divergence, StepTooLarge, TooFewSamples, UnstableSteadyState
from .linear_response import effective_linewidth
from .model import HpBranch, ModelParams
from .spectrum import SpectrumSample
from .steady_state import assess_stability, default_root, drift_matrix, solve_steady_state

DIVERGENCE_BOUND = 1e6
_BLOCK = 2048


class Scheme(enum.Enum):
    EULER_MARUYAMA = "euler_maruyama"
    STRATONOVICH_MIDPOINT = "stratonovich_midpoint"

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        if isinstance(value, Scheme):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float
    t_total: float
    n_traj: int = 1
    seed: int = 0
    scheme: Scheme = Scheme.STRATONOVICH_MIDPOINT
    # store every k-th step; the integration step stays dt
    sample_every: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not (math.isfinite(self.t_total) and self.t_total > 0):
            raise ValueError(f"t_total must be > 0, got {self.t_total!r}")
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise ValueError(f"n_traj must be a positive integer, got {self.n_traj!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError(f"sample_every must be a positive integer, got {self.sample_every!r}")
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_total / self.dt))

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_total": self.t_total,
            "n_traj": self.n_traj,
            "seed": self.seed,
            "scheme": self.scheme.value,
            "sample_every": self.sample_every,
        }


@dataclass
class TrajectoryEnsemble:
    times: np.ndarray
    samples: np.ndarray  # (n_traj, n_times), complex
    seed_used: int
    burn_in: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_traj(self) -> int:
        return self.samples.shape[0]

    @property
    def sample_dt(self) -> float:
        if self.times.size < 2:
            return float("nan")
        return float(self.times[1] - self.times[0])


def max_step(params: ModelParams, alpha: complex) -> float:
    """Largest admissible dt: one hundredth of the fastest linear time scale."""
    k_eff = effective_linewidth(params, alpha)
    return 0.01 / max(abs(k_eff), abs(params.delta), params.kappa)


def _check_step(params: ModelParams, alpha: complex, cfg: IntegrationConfig) -> None:
    limit = max_step(params, alpha)
    if cfg.dt > limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={cfg.dt!r} exceeds the resolution bound {limit:.6g}")


class _NoiseSource:
    """Per-trajectory Gaussian streams delivered in blocks of steps."""

    def __init__(self, seed: int, n_traj: int, n_normals: int):
        children = np.random.SeedSequence(seed).spawn(n_traj)
        self._gens = [np.random.Generator(np.random.PCG64(c)) for c in children]
        self._n = n_normals

    def block(self, n_steps: int, rows: np.ndarray | None = None) -> np.ndarray:
        gens = self._gens if rows is None else [self._gens[i] for i in rows]
        out = np.empty((len(gens), n_steps, self._n))
        for i, g in enumerate(gens):
            out[i] = g.standard_normal((n_steps, self._n))
        return out


def _complex_increments(z: np.ndarray, n_occ: float, dt: float, col: int) -> np.ndarray:
    scale = math.sqrt((n_occ + 0.5) * dt / 2.0)
    return scale * (z[..., col] + 1j * z[..., col + 1])


def integrate_linearized(
    params: ModelParams,
    alpha: complex,
    cfg: IntegrationConfig,
    *,
    noise: bool = True,
    a0: complex | np.ndarray = 0j,
    burn_in: float | None = None,
) -> TrajectoryEnsemble:
    """Integrate the linear fluctuation SDE around the steady state ``alpha``.

    ``burn_in`` (default ``10/kappa_eff``) is integrated and discarded before
    the first stored sample; stored times start at 0. ``noise=False`` switches
    both baths off for deterministic checks.

    Raises
    ------
    UnstableSteadyState
        The linearization around ``alpha`` is unstable.
    StepTooLarge
        ``cfg.dt`` violates :func:`max_step`.
    """
    m = drift_matrix(params, alpha)
    stable, _ = assess_stability(m)
    if not stable:
        raise UnstableSteadyState("linearization around the given steady state is unstable")
    _check_step(params, alpha, cfg)
    k_eff = effective_linewidth(params, alpha)
    if burn_in is None:
        burn_in = 10.0 / k_eff
    h = cfg.dt
    n_burn = int(math.ceil(burn_in / h)) if burn_in > 0 else 0
    n_rec = cfg.n_steps
    every = cfg.sample_every
    n_keep = n_rec // every + 1

    m00, m01 = complex(m.entries[0, 0]), complex(m.entries[0, 1])
    # Both baths enter additively, so their sum is one circular Gaussian increment
    # of variance (kappa (n_th + 1/2) + 4 kappa_n |alpha|^2 (n_th_tls + 1/2)) dt.
    # Conjugating the TLS input (HP+) leaves this law unchanged.
    noise_var = params.kappa * (params.n_th + 0.5) + 4.0 * params.kappa_n * abs(alpha) ** 2 * (params.n_th_tls + 0.5)
    noise_scale = math.sqrt(noise_var * h / 2.0)

    if cfg.scheme is Scheme.EULER_MARUYAMA:
        p_a, p_c = 1.0 + h * m00, h * m01
        q_a, q_c = 1.0 + 0j, 0j
    else:
        # implicit midpoint: u - h/2 (m00 u + m01 u*) = a + h/2 (m00 a + m01 a*) + eta
        p_a, p_c = 1.0 + 0.5 * h * m00, 0.5 * h * m01
        al, be = 1.0 - 0.5 * h * m00, -0.5 * h * m01
        den = abs(al) ** 2 - abs(be) ** 2
        q_a, q_c = np.conj(al) / den, -be / den

    # One step is the real-linear map (a, a*) -> R (a, a*) + Q (eta, eta*), R = Q P.
    pm = np.array([[p_a, p_c], [np.conj(p_c), np.conj(p_a)]])
    qm = np.array([[q_a, q_c], [np.conj(q_c), np.conj(q_a)]])
    lam, vec = np.linalg.eig(qm @ pm)
    modal = np.linalg.cond(vec) < 1e8

    a = np.full(cfg.n_traj, 0j) + np.asarray(a0, dtype=complex)
    out = np.empty((cfg.n_traj, n_keep), dtype=complex)
    source = _NoiseSource(cfg.seed, cfg.n_traj, 2) if noise else None
    total = n_burn + n_rec
    if n_burn == 0:
        out[:, 0] = a
    if modal:
        # each eigenmode is a scalar AR(1) process, filtered along time in one call
        vinv = np.linalg.inv(vec)
        w_in = vinv @ qm
        y = [vinv[i, 0] * a + vinv[i, 1] * np.conj(a) for i in range(2)]

    step = 0
    while step < total:
        nb = min(_BLOCK, total - step)
        if source is not None:
            z = source.block(nb)
            eta = noise_scale * (z[..., 0] + 1j * z[..., 1])
        else:
            eta = np.zeros((cfg.n_traj, nb), dtype=complex)
        # stored index k = (global step) - n_burn, kept when k % every == 0
        ks = np.arange(step + 1, step + nb + 1) - n_burn
        keep = (ks >= 0) & (ks % every == 0)
        if modal:
            kept = np.zeros((cfg.n_traj, int(keep.sum())), dtype=complex)
            for i in range(2):
                drive = w_in[i, 0] * eta + w_in[i, 1] * np.conj(eta)
                yi, _ = signal.lfilter([1.0], [1.0, -lam[i]], drive, axis=-1, zi=(lam[i] * y[i])[:, None])
                y[i] = yi[:, -1]
                kept += vec[0, i] * yi[:, keep]
        else:
            traj = np.empty((cfg.n_traj, nb), dtype=complex)
            eta_t = np.ascontiguousarray(eta.T)
            for j in range(nb):
                r = p_a * a + p_c * np.conj(a) + eta_t[j]
                a = q_a * r + q_c * np.conj(r)
                traj[:, j] = a
            kept = traj[:, keep]
        if keep.any():
            out[:, ks[keep] // every] = kept
        step += nb
    times = np.arange(n_keep) * (every * h)
    return TrajectoryEnsemble(
        times=times,
        samples=out,
        seed_used=cfg.seed,
        burn_in=n_burn * h,
        meta={"kind": "linearized", "dt": h, "scheme": cfg.scheme.value, "branch": params.branch.value},
    )


def quadrature(samples: np.ndarray, theta: float) -> np.ndarray:
    """``X_theta = (a^dag e^{i theta} + a e^{-i theta})/sqrt(2)`` as a real array."""
    return math.sqrt(2.0) * np.real(samples * np.exp(-1j * theta))


def welch_arrays(
    ensemble: TrajectoryEnsemble, theta: float, segment_length: int, overlap_fraction: float = 0.5
) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequencies (ascending) and ensemble-averaged two-sided Welch PSD of ``X_theta``.

    Hann window, density scaling: a white process of two-sided density ``S0``
    (``<X(t)X(t')> = S0 delta(t-t')``) yields ``S0``.
    """
    n = ensemble.samples.shape[1]
    if segment_length < 2 or segment_length > n:
        raise TooFewSamples(f"segment_length={segment_length} but only {n} samples per trajectory")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must lie in [0, 1)")
    fs = 1.0 / ensemble.sample_dt
    x = quadrature(ensemble.samples, theta)
    f, p = signal.welch(
        x,
        fs=fs,
        window="hann",
        nperseg=segment_length,
        noverlap=int(overlap_fraction * segment_length),
        detrend=False,
        return_onesided=False,
        scaling="density",
        axis=-1,
    )
    p = p.mean(axis=0)
    order = np.argsort(f)
    return 2.0 * math.pi * f[order], p[order]


def welch_psd(
    ensemble: TrajectoryEnsemble, theta: float, segment_length: int, overlap_fraction: float = 0.5
) -> list[SpectrumSample]:
    w, p = welch_arrays(ensemble, theta, segment_length, overlap_fraction)
    return [SpectrumSample(float(wi), float(theta), float(pi)) for wi, pi in zip(w, p)]


def _nonlinear_core(
    params: ModelParams,
    drives: np.ndarray,
    c0: np.ndarray,
    cfg: IntegrationConfig,
    noise: bool,
    record: bool = True,
    check_every: int = 32,
):
    """Vectorized midpoint integration; each row may carry its own drive.

    Returns ``(samples or None, final state, divergence time per row)``.
    Rows that run away are set to NaN; the bound is checked every
    ``check_every`` steps, which fixes the resolution of the divergence time.
    """
    h = cfg.dt
    k, kn, d, s = params.kappa, params.kappa_n, params.delta, params.sign
    n_rows = drives.shape[0]
    c = np.array(c0, dtype=complex)
    every = cfg.sample_every
    n_steps = cfg.n_steps
    out = np.empty((n_rows, n_steps // every + 1), dtype=complex) if record else None
    if record:
        out[:, 0] = c
    t_div = np.full(n_rows, np.inf)
    g_bos = math.sqrt(k)
    g_tls = 2.0 * math.sqrt(kn)
    conj_tls = params.branch is HpBranch.PLUS
    source = _NoiseSource(cfg.seed, n_rows, 4) if noise else None
    lin = 1j * d - 0.5 * k
    skn = s * kn
    # fixed-point sweeps of the implicit midpoint rule; the map contracts by ~h*|delta|
    sweeps = 3 if noise else 2

    def drift(z):
        return (lin - skn * (z.real * z.real + z.imag * z.imag)) * z + drives

    step = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n_steps:
            nb = min(_BLOCK, n_steps - step)
            if source is not None:
                zn = source.block(nb)
                dw_b = np.ascontiguousarray((g_bos * _complex_increments(zn, params.n_th, h, 0)).T)
                dw_t = g_tls * _complex_increments(zn, params.n_th_tls, h, 2)
                dw_t = np.ascontiguousarray((np.conj(dw_t) if conj_tls else dw_t).T)
            for j in range(nb):
                if source is not None:
                    add, mult = dw_b[j], dw_t[j]
                    base = c + add
                    new = base + h * drift(c) + mult * np.conj(c)
                    for _ in range(sweeps):
                        mid = 0.5 * (c + new)
                        new = base + h * drift(mid) + mult * np.conj(mid)
                else:
                    new = c + h * drift(c)
                    for _ in range(sweeps):
                        new = c + h * drift(0.5 * (c + new))
                c = new
                step += 1
                if step % check_every == 0 or step == n_steps:
                    bad = ~(np.abs(c) <= DIVERGENCE_BOUND) & np.isinf(t_div)
                    if bad.any():
                        t_div[bad] = step * h
                        c[bad] = np.nan
                if record and step % every == 0:
                    out[:, step // every] = c
            if np.isfinite(t_div).all():
                if record:
                    out[:, step // every + 1:] = np.nan
                break
    return out, c, t_div


def integrate_nonlinear_semiclassical(
    params: ModelParams,
    cfg: IntegrationConfig,
    *,
    noise: bool = True,
    c0: complex | np.ndarray = 0j,
) -> TrajectoryEnsemble:
    """Integrate the full c-number Langevin equation for the cavity field.

    ``dc = [i delta c - (kappa/2 + s kappa_n |c|^2) c + sqrt(kappa) alpha_in] dt
    + sqrt(kappa) dW + 2 sqrt(kappa_n) c^* o dW_tls`` with ``dW_tls``
    conjugated for HP+; the multiplicative term is read in the Stratonovich
    sense and stepped with the implicit midpoint rule (fixed-point iterations).

    Raises
    ------
    Divergence
        Some trajectory exceeded ``|c| = 1e6`` (runaway beyond the HP+
        parametric instability).
    """
    if cfg.scheme is not Scheme.STRATONOVICH_MIDPOINT:
        raise ValueError("the nonlinear integrator requires the Stratonovich midpoint scheme")
    roots = solve_steady_state(params)
    _check_step(params, default_root(roots).alpha, cfg)
    drives = np.full(cfg.n_traj, math.sqrt(params.kappa) * complex(params.alpha_in))
    start = np.full(cfg.n_traj, 0j) + np.asarray(c0, dtype=complex)
    out, _, t_div = _nonlinear_core(params, drives, start, cfg, noise)
    if np.isfinite(t_div).any():
        raise Divergence(f"|c| exceeded {DIVERGENCE_BOUND:g} at t={t_div.min():.6g}", float(t_div.min()))
    times = np.arange(out.shape[1]) * (cfg.sample_every * cfg.dt)
    return TrajectoryEnsemble(
        times=times,
        samples=out,
        seed_used=cfg.seed,
        meta={"kind": "nonlinear_semiclassical", "dt": cfg.dt, "branch": params.branch.value},
    )


@dataclass(frozen=True)
class DivergencePoint:
    alpha_in: float
    linear_stable: bool
    diverged: bool
    divergence_time: float


def divergence_scan(
    params: ModelParams,
    alpha_in_values,
    cfg: IntegrationConfig,
    *,
    perturbation: float = 0.01,
) -> list[DivergencePoint]:
    """Noise-free semiclassical runs over a drive sweep, started near each steady state.

    Every drive value is integrated (in one vectorized batch) from its
    smallest-occupancy steady state scaled by ``1 + perturbation``; a run that
    crosses ``|c| = 1e6`` within ``cfg.t_total`` counts as diverged. The linear
    stability verdict of the same root is reported alongside.
    """
    if cfg.scheme is not Scheme.STRATONOVICH_MIDPOINT:
        raise ValueError("the nonlinear integrator requires the Stratonovich midpoint scheme")
    values = np.asarray(alpha_in_values, dtype=float)
    starts, stable = [], []
    limit = math.inf
    for v in values:
        p = params.with_(alpha_in=complex(v))
        root = solve_steady_state(p)[0]
        starts.append(root.alpha * (1.0 + perturbation))
        stable.append(root.stable)
        limit = min(limit, max_step(p, root.alpha))
    if cfg.dt > limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={cfg.dt!r} exceeds the resolution bound {limit:.6g}")
    drives = math.sqrt(params.kappa) * values.astype(complex)
    _, _, t_div = _nonlinear_core(params, drives, np.array(starts), cfg, noise=False, record=False)
    return [
        DivergencePoint(float(v), bool(st), bool(np.isfinite(t)), float(t))
        for v, st, t in zip(values, stable, t_div)
    ]


_MAGIC = b"TLSQ"
_HEADER = struct.Struct("<4sIQQd")
DUMP_VERSION = 1


def write_trajectories(path: str | os.PathLike, ensemble: TrajectoryEnsemble) -> None:
    """Binary dump: header then little-endian float64 (re, im) pairs, one row per time step."""
    path = Path(path)
    data = np.ascontiguousarray(ensemble.samples.T).astype("<c16")
    header = _HEADER.pack(_MAGIC, DUMP_VERSION, ensemble.n_traj, data.shape[0], ensemble.sample_dt)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(data.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_trajectories(path: str | os.PathLike) -> TrajectoryEnsemble:
    raw = Path(path).read_bytes()
    magic, version, n_traj, n_steps, dt = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != DUMP_VERSION:
        raise ValueError(f"{path}: not a trajectory dump (version {version})")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size, count=n_traj * n_steps)
    samples = data.reshape(n_steps, n_traj).T.astype(complex)
    return TrajectoryEnsemble(times=np.arange(n_steps) * dt, samples=samples, seed_used=-1)
