from __future__ import annotations

import math

import numpy as np
import pytest

from tlsqle.errors import InvalidJ, SubspaceTooLarge, TooLarge
from tlsqle.hp_validation import (TruncatedBoson, commutator_residuals, convergence_csv, convergence_report,
                                  hp_image, hp_map_error, hp_map_error_formula, hp_operators, spin_matrices)
from tlsqle.model import HpBranch

# 50-digit oracle of the closed-form error at n_max = 4
ERROR_N4 = {64: 0.035215869792413553188, 128: 0.017538058837433680446, 256: 0.0087517673491070279664}


def test_spin_half():
    rep = spin_matrices(0.5)
    assert rep.dim == 2
    assert np.array_equal(rep.jz, np.diag([0.5, -0.5]))
    assert np.array_equal(rep.jplus, np.array([[0, 1], [0, 0]]))
    assert np.array_equal(rep.jminus, np.array([[0, 0], [1, 0]]))
    assert max(commutator_residuals(rep)) <= 1e-15


def test_spin_one():
    rep = spin_matrices(1)
    r2 = math.sqrt(2)
    assert np.allclose(rep.jz, np.diag([1, 0, -1]), atol=0)
    assert np.allclose(rep.jplus, np.array([[0, r2, 0], [0, 0, r2], [0, 0, 0]]), rtol=1e-16, atol=0)
    assert max(commutator_residuals(rep)) <= 1e-15


@pytest.mark.parametrize("j", [50, 31.5, 256])
def test_large_spin_commutators(j):
    rep = spin_matrices(j)
    assert rep.dim == int(2 * j) + 1
    assert np.array_equal(rep.jminus, rep.jplus.conj().T)
    assert max(commutator_residuals(rep)) <= 1e-13


def test_invalid_and_too_large():
    for bad in (0, -1, 0.3, "x", None):
        with pytest.raises(InvalidJ):
            spin_matrices(bad)
    with pytest.raises(TooLarge):
        spin_matrices(2048.5)
    assert spin_matrices(2048).dim == 4097


@pytest.mark.parametrize("branch", list(HpBranch))
@pytest.mark.parametrize("j", [0.5, 3, 64, 200])
def test_edge_state_exact(branch, j):
    assert hp_map_error(j, branch, 0) == 0.0


@pytest.mark.parametrize("j", [4, 16, 64, 128])
@pytest.mark.parametrize("n_max", [1, 2, 4, 7])
def test_error_matches_formula_and_branches_agree(j, n_max):
    e_minus = hp_map_error(j, HpBranch.MINUS, n_max)
    e_plus = hp_map_error(j, HpBranch.PLUS, n_max)
    assert e_minus == pytest.approx(hp_map_error_formula(j, n_max), rel=1e-12, abs=1e-15)
    assert e_minus == pytest.approx(e_plus, rel=1e-14, abs=1e-16)


@pytest.mark.parametrize("j", sorted(ERROR_N4))
def test_error_against_oracle(j):
    for branch in HpBranch:
        assert hp_map_error(j, branch, 4) == pytest.approx(ERROR_N4[j], rel=1e-12)


@pytest.mark.parametrize("n_max", [1, 2, 4])
def test_error_halves_when_j_doubles(n_max):
    for j in (8 * n_max, 64, 128):
        ratio = hp_map_error(2 * j, HpBranch.MINUS, n_max) / hp_map_error(j, HpBranch.MINUS, n_max)
        assert 0.4 <= ratio <= 0.6


def test_subspace_too_large():
    with pytest.raises(SubspaceTooLarge):
        hp_map_error(2, HpBranch.MINUS, 5)
    assert hp_map_error(2, HpBranch.MINUS, 4) > 0
    with pytest.raises(ValueError):
        hp_map_error(2, HpBranch.MINUS, -1)


@pytest.mark.parametrize("branch", list(HpBranch))
def test_adjoint_consistency(branch):
    n_max = 6
    jp, jm = hp_image(40, branch, n_max)
    sub = slice(0, n_max + 1)
    assert np.max(np.abs(jp[sub, sub] - jm.conj().T[sub, sub])) <= 1e-13


@pytest.mark.parametrize("branch", list(HpBranch))
def test_exact_hp_operators_obey_su2(branch):
    rep = hp_operators(32, branch)
    assert rep.dim == 65
    assert max(commutator_residuals(rep)) <= 1e-12
    # the exact map reproduces the spin spectrum
    assert np.allclose(np.sort(np.diag(rep.jz).real), np.arange(-32, 33))


def test_truncated_hp_residual():
    j, n_max = 8, 4
    rep = hp_operators(j, HpBranch.MINUS, exact=False, n_max=n_max)
    inner = commutator_residuals(rep, subspace=range(n_max))
    # with the square root dropped, [J+, J-] - 2Jz leaves -2n on the diagonal (and J+ scale sqrt(2j))
    expected = 2 * (n_max - 1) / math.sqrt(2 * j * n_max)
    assert max(inner) == pytest.approx(expected, rel=1e-12)
    assert max(inner) == pytest.approx(0.75, rel=1e-12)
    assert max(commutator_residuals(rep)) > max(inner)
    exact = hp_operators(j, HpBranch.MINUS, exact=True, n_max=n_max)
    assert max(commutator_residuals(exact, subspace=range(n_max))) <= 1e-14


def test_truncated_boson():
    b = TruncatedBoson(5)
    comm = b.d @ b.d_dagger - b.d_dagger @ b.d
    assert np.allclose(comm[:5, :5], np.eye(5), atol=1e-14)
    assert comm[5, 5] == pytest.approx(-5.0)
    assert np.allclose(b.d_dagger @ b.d, b.number, atol=1e-14)
    with pytest.raises(ValueError):
        TruncatedBoson(0)


def test_convergence_report_and_csv():
    # n_max = 4 exceeds 2j = 3 and is skipped for j = 1.5
    rows = convergence_report([1.5, 64], [0, 1, 4], [HpBranch.MINUS, "plus"])
    assert len(rows) == 2 * 2 + 2 * 3
    assert [r.n_max for r in rows[:2]] == [0, 1]
    text = convergence_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "j,branch,n_max,error"
    assert len(lines) == len(rows) + 1
    assert all(r.error >= 0 for r in rows)
