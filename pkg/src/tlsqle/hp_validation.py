"""Finite-j checks of the Holstein-Primakoff (HP) boson representation of a spin.

A spin ``j`` is represented on ``2j + 1`` states in descending-m order, so row
``i`` holds ``m = j - i``. The two mappings used for the TLS bath are

* HP-: boson number ``n`` counts excitations above the ground state,
  ``|n> <-> |j, -j + n>`` and ``J+ ~ sqrt(2j) d^dag``;
* HP+: ``n`` counts de-excitations below the inverted state,
  ``|n> <-> |j, j - n>`` and ``J- ~ sqrt(2j) d^dag``.

Both are exact once the square-root factor ``sqrt(1 - n/(2j))`` is kept; the
functions below measure what is lost when it is replaced by 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidJ, SubspaceTooLarge, TooLarge
from .model import HpBranch

MAX_DIM = 4097


@dataclass(frozen=True)
class SpinRep:
    j: float
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.jz.shape[0]


@dataclass(frozen=True)
class TruncatedBoson:
    """Boson mode cut off above ``n_max`` quanta."""

    n_max: int

    def __post_init__(self) -> None:
        if isinstance(self.n_max, bool) or int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max!r}")

    @property
    def d(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.n_max + 1, dtype=float)), k=1).astype(complex)

    @property
    def d_dagger(self) -> np.ndarray:
        return self.d.conj().T

    @property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.n_max + 1, dtype=float)).astype(complex)


def _two_j(j) -> int:
    try:
        two_j = Fraction(j) * 2
    except (TypeError, ValueError):
        raise InvalidJ(f"j must be a positive half-integer, got {j!r}") from None
    if two_j.denominator != 1 or two_j <= 0:
        raise InvalidJ(f"j must be a positive half-integer, got {j!r}")
    return int(two_j)


def _ladder(two_j: int) -> np.ndarray:
    """``<j, m+1| J+ |j, m>`` for m = -j .. j-1, i.e. sqrt((2j - k)(k + 1)) with k = j + m."""
    k = np.arange(two_j, dtype=float)
    return np.sqrt((two_j - k) * (k + 1.0))


def spin_matrices(j) -> SpinRep:
    """Dense ``Jz, J+, J-`` for spin ``j`` in the descending-m basis.

    Raises
    ------
    InvalidJ
        ``2j`` is not a positive integer.
    TooLarge
        ``2j + 1`` exceeds the dense-matrix budget of 4097.
    """
    two_j = _two_j(j)
    dim = two_j + 1
    if dim > MAX_DIM:
        raise TooLarge(f"dimension {dim} exceeds {MAX_DIM}")
    m = 0.5 * two_j - np.arange(dim, dtype=float)
    jz = np.diag(m).astype(complex)
    # row i-1 (m+1) <- column i (m); in descending order m increases towards row 0
    jplus = np.diag(_ladder(two_j)[::-1], k=1).astype(complex)
    return SpinRep(0.5 * two_j, jz, jplus, jplus.conj().T.copy())


_DENSE_FALLBACK = 5_000_000


def _matmul_ext(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b`` accumulated in extended precision over the nonzero entries only.

    Ladder operators have one nonzero per row, so this costs O(dim) and keeps
    the check's own rounding well below the float64 rounding of the entries.
    Products with too many terms fall back to a plain float64 matmul.
    """
    ia, ja = np.nonzero(a)
    ib, kb = np.nonzero(b)  # row-major, so ib is sorted
    starts = np.searchsorted(ib, ja, side="left")
    counts = np.searchsorted(ib, ja, side="right") - starts
    total = int(counts.sum())
    if total > _DENSE_FALLBACK:
        return (a @ b).astype(np.clongdouble)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    pos = np.arange(total) - offsets + np.repeat(starts, counts)
    rows = np.repeat(ia, counts)
    cols = kb[pos]
    terms = (np.repeat(a[ia, ja], counts).astype(np.clongdouble)
             * b[ib[pos], cols].astype(np.clongdouble))
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.clongdouble)
    np.add.at(out, (rows, cols), terms)
    return out


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _matmul_ext(a, b) - _matmul_ext(b, a)


def commutator_residuals(rep: SpinRep, subspace: Sequence[int] | None = None) -> tuple[float, float, float]:
    """Max-norms of ``[Jz,J+]-J+``, ``[Jz,J-]+J-`` and ``[J+,J-]-2Jz``, each over ``max|J+|``.

    ``subspace`` restricts rows and columns of the residuals to the given
    basis indices, e.g. to ignore the cut-off edge of a truncated boson.
    """
    ext = np.clongdouble
    res = (
        _comm(rep.jz, rep.jplus) - rep.jplus.astype(ext),
        _comm(rep.jz, rep.jminus) + rep.jminus.astype(ext),
        _comm(rep.jplus, rep.jminus) - 2 * rep.jz.astype(ext),
    )
    if subspace is not None:
        idx = np.asarray(subspace, dtype=int)
        res = tuple(r[np.ix_(idx, idx)] for r in res)
    norm = float(np.max(np.abs(rep.jplus)))
    if norm == 0.0:
        norm = 1.0
    return tuple(float(np.max(np.abs(r))) / norm if r.size else 0.0 for r in res)  # type: ignore[return-value]


def hp_operators(j, branch: HpBranch | str = HpBranch.MINUS, exact: bool = True,
                 n_max: int | None = None) -> SpinRep:
    """Spin operators built from a boson mode in the number basis ``n = 0 .. n_max``.

    With ``exact`` the square-root factor is kept, otherwise it is set to 1
    (the large-j form). ``n_max`` defaults to ``2j``, the full spin space.
    """
    two_j = _two_j(j)
    branch = HpBranch.parse(branch)
    n_max = two_j if n_max is None else int(n_max)
    if n_max > two_j:
        raise SubspaceTooLarge(f"n_max={n_max} exceeds 2j={two_j}")
    if n_max + 1 > MAX_DIM:
        raise TooLarge(f"dimension {n_max + 1} exceeds {MAX_DIM}")
    boson = TruncatedBoson(max(n_max, 1))
    n = np.arange(boson.n_max + 1, dtype=float)
    if exact:
        root = np.sqrt(np.clip(two_j - n, 0.0, None))
    else:
        root = np.full_like(n, math.sqrt(two_j))
    raise_n = boson.d_dagger @ np.diag(root).astype(complex)  # d^dag sqrt(2j - n)
    lower_n = raise_n.conj().T
    jz_val = n - 0.5 * two_j
    if branch is HpBranch.MINUS:
        jz, jplus, jminus = np.diag(jz_val), raise_n, lower_n
    else:
        jz, jplus, jminus = np.diag(-jz_val), lower_n, raise_n
    sl = slice(0, n_max + 1)
    return SpinRep(0.5 * two_j, jz.astype(complex)[sl, sl], jplus[sl, sl], jminus[sl, sl])


def hp_image(j, branch: HpBranch | str, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``J+/sqrt(2j)`` and ``J-/sqrt(2j)`` pulled back to the boson space.

    The boson space keeps ``n = 0 .. n_max + 1`` so that one step up from the
    top of the tested subspace stays representable; boson states with no spin
    partner (``n > 2j``) map to zero.
    """
    two_j = _two_j(j)
    branch = HpBranch.parse(branch)
    rep = spin_matrices(Fraction(two_j, 2))
    dim_b = n_max + 2
    embed = np.zeros((rep.dim, dim_b), dtype=complex)
    for n in range(min(dim_b, two_j + 1)):
        row = two_j - n if branch is HpBranch.MINUS else n
        embed[row, n] = 1.0
    root = math.sqrt(two_j)

    def pull_back(op: np.ndarray) -> np.ndarray:
        m = embed.conj().T @ op @ embed
        # real division per component keeps the edge element sqrt(2j)/sqrt(2j) exactly 1;
        # complex division would round it
        return m.real / root + 1j * (m.imag / root)

    return pull_back(rep.jplus), pull_back(rep.jminus)


def hp_map_error(j, branch: HpBranch | str, n_max: int) -> float:
    """Largest matrix element of the HP approximation error on states with ``n <= n_max``.

    Compares ``J+/sqrt(2j)`` and ``J-/sqrt(2j)`` with ``d^dag`` and ``d``
    (HP-) or ``d`` and ``d^dag`` (HP+), column by column on the low-excitation
    subspace, and returns the larger of the two.

    Raises
    ------
    SubspaceTooLarge
        ``n_max > 2j``.
    """
    two_j = _two_j(j)
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 0:
        raise ValueError(f"n_max must be a non-negative integer, got {n_max!r}")
    n_max = int(n_max)
    if n_max > two_j:
        raise SubspaceTooLarge(f"n_max={n_max} exceeds 2j={two_j}")
    if two_j + 1 > MAX_DIM:
        raise TooLarge(f"dimension {two_j + 1} exceeds {MAX_DIM}")
    branch = HpBranch.parse(branch)
    jp, jm = hp_image(j, branch, n_max)
    boson = TruncatedBoson(n_max + 1)
    creation, annihilation = (jp, jm) if branch is HpBranch.MINUS else (jm, jp)
    cols = slice(0, n_max + 1)
    err_up = np.abs(creation - boson.d_dagger)[:, cols]
    err_down = np.abs(annihilation - boson.d)[:, cols]
    return float(max(err_up.max(), err_down.max()))


def hp_map_error_formula(j, n_max: int) -> float:
    """Closed form ``max_{n <= n_max} sqrt(n+1) |1 - sqrt(1 - n/(2j))|``."""
    two_j = _two_j(j)
    n = np.arange(n_max + 1, dtype=float)
    return float(np.max(np.sqrt(n + 1.0) * np.abs(1.0 - np.sqrt(1.0 - n / two_j))))


@dataclass(frozen=True)
class ConvergenceRow:
    j: float
    branch: HpBranch
    n_max: int
    error: float


def convergence_report(js: Iterable, n_maxes: Iterable[int],
                       branches: Iterable[HpBranch | str] = (HpBranch.MINUS, HpBranch.PLUS)) -> list[ConvergenceRow]:
    """Errors for every ``(j, branch, n_max)``; combinations with ``n_max > 2j`` are skipped."""
    rows = []
    branch_list = [HpBranch.parse(b) for b in branches]
    n_list = list(n_maxes)
    for j in js:
        two_j = _two_j(j)
        for branch in branch_list:
            for n_max in n_list:
                if n_max > two_j:
                    continue
                rows.append(ConvergenceRow(0.5 * two_j, branch, int(n_max), hp_map_error(j, branch, n_max)))
    return rows


def convergence_csv(rows: Iterable[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "branch", "n_max", "error"])
    for r in rows:
        w.writerow([format(r.j, ".17g"), r.branch.value, r.n_max, format(r.error, ".17g")])
    return buf.getvalue()
