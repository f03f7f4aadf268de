"""Quick invariant checks across all modules, packaged as a user-facing self-test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import hp_validation as hp
from .linear_response import effective_linewidth, susceptibilities, susceptibilities_by_solve
from .model import HpBranch, ModelParams, fig2_params, validate_params
from .spectrum import quadrature_spectrum, spectrum_oracle
from .steady_state import RESIDUAL_TOL, default_root, solve_steady_state


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_stable(rng: np.random.Generator, branch: HpBranch) -> tuple[ModelParams, complex]:
    while True:
        p = ModelParams(
            kappa_n=float(10 ** rng.uniform(-5, -3)),
            delta=float(rng.uniform(-30, 30)),
            alpha_in=complex(rng.uniform(0, 600), rng.uniform(-100, 100)),
            n_th=float(rng.uniform(0, 2)),
            n_th_tls=float(rng.uniform(0, 2)),
            branch=branch,
        )
        sol = default_root(solve_steady_state(p))
        if sol.stable:
            return p, sol.alpha


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _check_residuals(rng):
    worst = 0.0
    for branch in HpBranch:
        for a in np.linspace(0, 700, 50):
            for sol in solve_steady_state(fig2_params(branch, a)):
                worst = max(worst, sol.residual)
    return worst <= RESIDUAL_TOL, f"max residual {worst:.3g}"


def _check_normalization(rng):
    p = ModelParams(kappa=2.0, kappa_n=3e-4, delta=40.0, alpha_in=math.sqrt(2) * 700)
    once = validate_params(p)
    ok = validate_params(once) == once and abs(once.delta - 20.0) < 1e-12
    return ok, "validate_params idempotent and rescales to kappa = 1"


def _check_susceptibilities(rng):
    worst = 0.0
    for _ in range(100):
        p, alpha = _random_stable(rng, HpBranch(rng.choice(["minus", "plus"])))
        w = float(rng.uniform(-40, 40))
        a, b = susceptibilities(p, alpha, w), susceptibilities_by_solve(p, alpha, w)
        for f in ("chi_d", "chi_x", "chi_d_tls", "chi_x_tls"):
            worst = max(worst, _rel(getattr(a, f), getattr(b, f)))
    return worst <= 1e-12, f"max relative deviation {worst:.3g}"


def _check_spectrum(rng):
    worst, periodic, minimum = 0.0, 0.0, math.inf
    for _ in range(100):
        p, alpha = _random_stable(rng, HpBranch(rng.choice(["minus", "plus"])))
        w, th = float(rng.uniform(-40, 40)), float(rng.uniform(0, math.pi))
        s = quadrature_spectrum(p, alpha, w, th)
        worst = max(worst, _rel(s, spectrum_oracle(p, alpha, w, th)))
        periodic = max(periodic, _rel(s, quadrature_spectrum(p, alpha, w, th + math.pi)))
        minimum = min(minimum, s)
    ok = worst <= 1e-12 and periodic <= 1e-12 and minimum >= 0.0
    return ok, f"oracle {worst:.3g}, periodicity {periodic:.3g}, min S {minimum:.3g}"


def _check_linewidth_sum(rng):
    worst = 0.0
    for a in np.linspace(0, 700, 20):
        m = default_root(solve_steady_state(fig2_params(HpBranch.MINUS, a))).alpha
        plus = fig2_params(HpBranch.PLUS, a)
        worst = max(worst, abs(effective_linewidth(fig2_params(HpBranch.MINUS, a), m)
                               + effective_linewidth(plus, m) - 2.0))
    return worst <= 1e-12, f"max |k_eff(-) + k_eff(+) - 2 kappa| {worst:.3g}"


def _check_hp(rng):
    edge = max(hp.hp_map_error(j, b, 0) for j in (1, 8, 64) for b in HpBranch)
    e = [hp.hp_map_error(j, HpBranch.MINUS, 4) for j in (64, 128)]
    ratio = e[1] / e[0]
    comm = max(hp.commutator_residuals(hp.spin_matrices(64)))
    ok = edge == 0.0 and 0.4 <= ratio <= 0.6 and comm <= 1e-13
    return ok, f"edge error {edge:g}, doubling ratio {ratio:.4f}, commutator {comm:.3g}"


CHECKS: list[tuple[str, Callable]] = [
    ("steady_state_residual", _check_residuals),
    ("normalization", _check_normalization),
    ("susceptibility_oracle", _check_susceptibilities),
    ("spectrum_oracle_periodicity_positivity", _check_spectrum),
    ("effective_linewidth_sum", _check_linewidth_sum),
    ("hp_mapping", _check_hp),
]


def run_checks(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
