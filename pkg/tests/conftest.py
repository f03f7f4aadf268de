from __future__ import annotations

import numpy as np
import pytest

from tlsqle.model import HpBranch, ModelParams
from tlsqle.steady_state import default_root, solve_steady_state

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_stable(rng: np.random.Generator, branch: HpBranch | None = None):
    """A random parameter set (kappa = 1) with a linearly stable default root."""
    while True:
        b = branch or (HpBranch.MINUS if rng.random() < 0.5 else HpBranch.PLUS)
        p = ModelParams(
            kappa_n=float(10 ** rng.uniform(-5, -3)),
            delta=float(rng.uniform(-30, 30)),
            alpha_in=complex(rng.uniform(0, 600), rng.uniform(-100, 100)),
            n_th=float(rng.uniform(0, 2)),
            n_th_tls=float(rng.uniform(0, 2)),
            branch=b,
        )
        sol = default_root(solve_steady_state(p))
        if sol.stable:
            return p, sol.alpha


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
