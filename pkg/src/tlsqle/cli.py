"""Command-line front end: ``tlsqle <command> --config run.json``.

A config is a strict JSON object::

    {
      "command": "steady",                  # optional when given on the command line
      "params": {"kappa": 1, "kappa_n": 1.5e-4, "delta": 20,
                 "alpha_in": {"re": 700, "im": 0}, "branch": "minus"},
      "branches": ["minus", "plus"],        # optional, defaults to params.branch
      "sweep": {"name": "alpha_in", "start": 0, "stop": 700, "count": 200},
      "grids": {"omega": {"start": -30, "stop": 30, "count": 400},
                "theta": [0.0, 0.785]},     # ranges or explicit lists
      "integration": {"dt": 5e-4, "t_total": 280, "n_traj": 250, "seed": 1,
                      "sample_every": 40},
      "welch": {"segment_length": 3200, "overlap": 0.5},
      "hp": {"j": [64, 128, 256], "n_max": [0, 1, 2, 4]},
      "output_path": "steady.csv",
      "output_format": "csv"
    }

Exit status is 0 on success, 1 on a domain error (invalid physics, unstable
working point, failed self-check) and 2 on a usage error (bad arguments or
malformed config).
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from . import hp_validation as hp
from .errors import (NoPeak, ParameterError, ParseError, TlsQleError, UnresolvedPeak, UnstableSteadyState,
                     ValidationError)
from .linear_response import effective_linewidth
from .model import HpBranch, ModelParams, validate_params
from .selfcheck import run_checks
from .spectrum import SpectrumSample, fitted_linewidth, spectrum_extrema, spectrum_values
from .steady_state import default_root, linear_amplitude, solve_steady_state
from .timedomain import IntegrationConfig, integrate_linearized, welch_arrays


class Command(enum.Enum):
    STEADY = "steady"
    SPECTRUM = "spectrum"
    SWEEP = "sweep"
    TIMEDOMAIN = "timedomain"
    HPCHECK = "hpcheck"
    VALIDATE = "validate"


class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


SWEEP_AXES = ("alpha_in", "omega", "theta")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def to_dict(self) -> dict:
        return {"name": self.name, "start": self.start, "stop": self.stop, "count": self.count}


@dataclass(frozen=True)
class RunSpec:
    """A fully validated run. ``params`` is normalized; ``raw_params`` is what the config said."""

    params: ModelParams
    command: Command
    raw_params: ModelParams = field(default_factory=ModelParams)
    # empty: params.branch (hpcheck: both branches)
    branches: tuple[HpBranch, ...] = ()
    sweep_axis: SweepAxis | None = None
    omega_grid: tuple[float, ...] | None = None
    theta_grid: tuple[float, ...] | None = None
    integration: IntegrationConfig | None = None
    segment_length: int | None = None
    overlap: float = 0.5
    hp_j: tuple[float, ...] = (64.0, 128.0, 256.0)
    hp_n_max: tuple[int, ...] = (0, 1, 2, 4)
    output_path: str = ""
    output_format: OutputFormat = OutputFormat.CSV

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "command": self.command.value,
            "params": self.raw_params.to_dict(),
        }
        if self.branches:
            out["branches"] = [b.value for b in self.branches]
        if self.sweep_axis is not None:
            out["sweep"] = self.sweep_axis.to_dict()
        grids = {}
        if self.omega_grid is not None:
            grids["omega"] = list(self.omega_grid)
        if self.theta_grid is not None:
            grids["theta"] = list(self.theta_grid)
        if grids:
            out["grids"] = grids
        if self.integration is not None:
            out["integration"] = self.integration.to_dict()
        if self.segment_length is not None:
            out["welch"] = {"segment_length": self.segment_length, "overlap": self.overlap}
        out["hp"] = {"j": list(self.hp_j), "n_max": list(self.hp_n_max)}
        out["output_path"] = self.output_path
        out["output_format"] = self.output_format.value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# config parsing

_TOP_KEYS = {"command", "params", "branches", "sweep", "grids", "integration", "welch", "hp",
             "output_path", "output_format"}


def _reject_unknown(obj: Mapping, allowed: Iterable[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} in {where}")


def _obj(value: Any, where: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ParseError(f"{where} must be a JSON object")
    return value


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{where} must be finite")
    return float(value)


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ParseError(f"{where} must be an integer, got {value!r}")
    return value


def _enum(cls, value: Any, where: str):
    try:
        return cls(str(value).strip().lower())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ParseError(f"{where} must be one of {choices}; got {value!r}") from None


def _range(value: Any, where: str) -> tuple[float, ...]:
    """A grid given as an explicit list or as ``{"start", "stop", "count"}``."""
    if isinstance(value, list):
        if not value:
            raise ParseError(f"{where} must not be empty")
        return tuple(_num(v, f"{where}[{i}]") for i, v in enumerate(value))
    obj = _obj(value, where)
    _reject_unknown(obj, ("start", "stop", "count"), where)
    for key in ("start", "stop", "count"):
        if key not in obj:
            raise ParseError(f"{where} is missing {key!r}")
    count = _int(obj["count"], f"{where}.count")
    if count < 1:
        raise ParseError(f"{where}.count must be >= 1")
    pts = np.linspace(_num(obj["start"], f"{where}.start"), _num(obj["stop"], f"{where}.stop"), count)
    return tuple(float(v) for v in pts)


def _sweep(value: Any) -> SweepAxis:
    obj = _obj(value, "sweep")
    _reject_unknown(obj, ("name", "start", "stop", "count"), "sweep")
    for key in ("name", "start", "stop", "count"):
        if key not in obj:
            raise ParseError(f"sweep is missing {key!r}")
    name = str(obj["name"])
    if name not in SWEEP_AXES:
        raise ParseError(f"sweep.name must be one of {', '.join(SWEEP_AXES)}; got {name!r}")
    axis = SweepAxis(name, _num(obj["start"], "sweep.start"), _num(obj["stop"], "sweep.stop"),
                     _int(obj["count"], "sweep.count"))
    if axis.count < 2:
        raise ParseError(f"sweep.count must be >= 2, got {axis.count}")
    if axis.start == axis.stop:
        raise ParseError("sweep.start and sweep.stop must differ")
    return axis


def _integration(value: Any) -> IntegrationConfig:
    obj = _obj(value, "integration")
    _reject_unknown(obj, ("dt", "t_total", "n_traj", "seed", "scheme", "sample_every"), "integration")
    for key in ("dt", "t_total"):
        if key not in obj:
            raise ParseError(f"integration is missing {key!r}")
    kwargs: dict[str, Any] = {"dt": _num(obj["dt"], "integration.dt"),
                              "t_total": _num(obj["t_total"], "integration.t_total")}
    for key in ("n_traj", "seed", "sample_every"):
        if key in obj:
            kwargs[key] = _int(obj[key], f"integration.{key}")
    if "scheme" in obj:
        kwargs["scheme"] = str(obj["scheme"])
    try:
        return IntegrationConfig(**kwargs)
    except ValueError as exc:
        raise ParseError(f"integration: {exc}") from None


def parse_config(source: str, command: Command | str | None = None) -> RunSpec:
    """Parse and validate a JSON run description.

    ``command`` (from the command line) fills in or must agree with the
    config's ``"command"`` key.

    Raises
    ------
    ParseError
        Malformed JSON, wrong types, unknown keys (named in the message) or a
        degenerate sweep.
    ValidationError
        The physical parameters are rejected; ``cause`` holds the original error.
    """
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    data = _obj(data, "config")
    _reject_unknown(data, _TOP_KEYS, "config")

    cmd_cfg = _enum(Command, data["command"], "command") if "command" in data else None
    cmd_cli = _enum(Command, command.value if isinstance(command, Command) else command, "command") \
        if command is not None else None
    if cmd_cfg and cmd_cli and cmd_cfg is not cmd_cli:
        raise ParseError(f"command line says {cmd_cli.value!r} but config says {cmd_cfg.value!r}")
    cmd = cmd_cli or cmd_cfg
    if cmd is None:
        raise ParseError("no command given")

    raw = ModelParams.from_dict(_obj(data.get("params", {}), "params"))
    try:
        params = validate_params(raw)
    except ParameterError as exc:
        raise ValidationError(f"invalid parameters: {exc}", exc) from exc

    if "branches" in data:
        if not isinstance(data["branches"], list) or not data["branches"]:
            raise ParseError("branches must be a non-empty list")
        branches = tuple(HpBranch.parse(b) for b in data["branches"])
    else:
        branches = ()

    sweep = _sweep(data["sweep"]) if "sweep" in data else None
    omega_grid = theta_grid = None
    if "grids" in data:
        grids = _obj(data["grids"], "grids")
        _reject_unknown(grids, ("omega", "theta"), "grids")
        if "omega" in grids:
            omega_grid = _range(grids["omega"], "grids.omega")
        if "theta" in grids:
            theta_grid = _range(grids["theta"], "grids.theta")
    integration = _integration(data["integration"]) if "integration" in data else None
    segment_length, overlap = None, 0.5
    if "welch" in data:
        welch = _obj(data["welch"], "welch")
        _reject_unknown(welch, ("segment_length", "overlap"), "welch")
        if "segment_length" in welch:
            segment_length = _int(welch["segment_length"], "welch.segment_length")
        if "overlap" in welch:
            overlap = _num(welch["overlap"], "welch.overlap")
            if not 0.0 <= overlap < 1.0:
                raise ParseError("welch.overlap must lie in [0, 1)")
    hp_j, hp_n = RunSpec.hp_j, RunSpec.hp_n_max
    if "hp" in data:
        hp_obj = _obj(data["hp"], "hp")
        _reject_unknown(hp_obj, ("j", "n_max"), "hp")
        if "j" in hp_obj:
            hp_j = _range(hp_obj["j"], "hp.j")
        if "n_max" in hp_obj:
            if not isinstance(hp_obj["n_max"], list) or not hp_obj["n_max"]:
                raise ParseError("hp.n_max must be a non-empty list of integers")
            hp_n = tuple(_int(v, f"hp.n_max[{i}]") for i, v in enumerate(hp_obj["n_max"]))

    fmt = _enum(OutputFormat, data.get("output_format", "csv"), "output_format")
    out_path = data.get("output_path", "")
    if not isinstance(out_path, str):
        raise ParseError("output_path must be a string")

    if sweep is not None and cmd in (Command.STEADY,) and sweep.name != "alpha_in":
        raise ParseError("the steady command only sweeps alpha_in")
    if cmd is Command.SWEEP and sweep is None:
        raise ParseError("the sweep command needs a 'sweep' object")
    if cmd is Command.TIMEDOMAIN and integration is None:
        raise ParseError("the timedomain command needs an 'integration' object")

    return RunSpec(
        params=params,
        command=cmd,
        raw_params=raw,
        branches=branches,
        sweep_axis=sweep,
        omega_grid=omega_grid,
        theta_grid=theta_grid,
        integration=integration,
        segment_length=segment_length,
        overlap=overlap,
        hp_j=tuple(float(j) for j in hp_j),
        hp_n_max=tuple(int(n) for n in hp_n),
        output_path=out_path,
        output_format=fmt,
    )


# ---------------------------------------------------------------------------
# output


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def _json_value(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return json.dumps(str(value))


def render(table: Table, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    lines = []
    for row in table.rows:
        body = ", ".join(f"{json.dumps(c)}: {_json_value(v)}" for c, v in zip(table.columns, row))
        lines.append("  {" + body + "}")
    return "[\n" + ",\n".join(lines) + "\n]\n" if lines else "[]\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def companion_path(path: str, tag: str) -> str:
    """``out.csv`` -> ``out.<tag>.csv``."""
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{tag}{p.suffix}"))


# ---------------------------------------------------------------------------
# workers (module level so they pickle)


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Ordered map; with ``jobs > 1`` items run in a process pool."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _steady_rows(task: tuple[ModelParams, complex]) -> list[list[Any]]:
    params, drive = task
    p = params.with_(alpha_in=drive)
    rows = []
    for i, sol in enumerate(solve_steady_state(p)):
        al = sol.alpha
        rows.append([p.branch.value, abs(drive), i, al.real, al.imag, abs(al), math.atan2(al.imag, al.real),
                     sol.occupancy_x, sol.stable, sol.residual])
    return rows


def _sweep_alpha_row(task: tuple[ModelParams, float]) -> list[Any]:
    params, a = task
    p = params.with_(alpha_in=complex(a))
    sol = default_root(solve_steady_state(p))
    lin = linear_amplitude(p)
    al = sol.alpha
    return [p.branch.value, a, abs(al), math.atan2(al.imag, al.real), abs(lin),
            math.atan2(lin.imag, lin.real), sol.occupancy_x, sol.stable,
            effective_linewidth(p, al) * p.kappa_unit]


def _hp_row(task: tuple[float, HpBranch, int]) -> list[Any]:
    j, branch, n = task
    return [j, branch.value, n, hp.hp_map_error(j, branch, n)]


# ---------------------------------------------------------------------------
# commands


def _branch_params(spec: RunSpec) -> list[ModelParams]:
    """One parameter set per requested branch; without a list, the branch in params."""
    return [spec.params.with_(branch=b) for b in spec.branches or (spec.params.branch,)]


def _working_point(p: ModelParams):
    return default_root(solve_steady_state(p))


def _run_steady(spec: RunSpec, jobs: int) -> dict[str, Table]:
    """One row per root; the drive phase is taken from params, the alpha_in column is its modulus."""
    drive = complex(spec.params.alpha_in)
    phase = drive / abs(drive) if drive != 0 else 1.0
    mags = spec.sweep_axis.values() if spec.sweep_axis else [abs(drive)]
    tasks = [(p, complex(phase * float(m))) for p in _branch_params(spec) for m in mags]
    table = Table(["branch", "alpha_in", "root", "re_alpha", "im_alpha", "abs_alpha", "arg_alpha",
                   "x", "stable", "residual"])
    for rows in _map(_steady_rows, tasks, jobs):
        table.rows.extend(rows)
    return {"": table}


def _default_omega(p: ModelParams) -> tuple[float, ...]:
    return tuple(float(w) for w in np.linspace(-p.delta - 10.0, -p.delta + 10.0, 401))


def _default_theta() -> tuple[float, ...]:
    return tuple(float(t) for t in np.linspace(0.0, math.pi, 64, endpoint=False))


def _spectrum_tables(spec: RunSpec, p: ModelParams, omega, theta) -> tuple[list, list]:
    sol = _working_point(p)
    if not sol.stable:
        raise UnstableSteadyState(f"no stable steady state for branch {p.branch.value}")
    w = np.asarray(omega, dtype=float)
    th = np.asarray(theta, dtype=float)
    grid = spectrum_values(p, sol.alpha, w[:, None], th[None, :])
    rows = [[p.branch.value, float(wi), float(tj), float(grid[i, j])]
            for i, wi in enumerate(w) for j, tj in enumerate(th)]
    # extrema at the spectral peak of the theta-averaged spectrum
    i_pk = int(np.argmax(grid.mean(axis=1)))
    ext = spectrum_extrema(p, sol.alpha, float(w[i_pk]))
    contrast = (ext.s_max - ext.s_min) / (ext.s_max + ext.s_min)
    trace = [SpectrumSample(float(wi), ext.theta_max, float(v))
             for wi, v in zip(w, spectrum_values(p, sol.alpha, w, ext.theta_max))]
    try:
        fwhm: float | None = fitted_linewidth(trace)
        note = ""
    except (NoPeak, UnresolvedPeak) as exc:
        fwhm, note = None, str(exc)
    summary = [p.branch.value, float(w[i_pk]), ext.theta_min, ext.theta_max, ext.s_min, ext.s_max,
               contrast, fwhm if fwhm is not None else float("nan"),
               effective_linewidth(p, sol.alpha), note]
    return rows, summary


_SUMMARY_COLUMNS = ["branch", "omega_peak", "theta_min", "theta_max", "s_min", "s_max", "contrast",
                    "fwhm", "kappa_eff", "note"]


def _run_spectrum(spec: RunSpec, jobs: int) -> dict[str, Table]:
    main = Table(["branch", "omega", "theta", "S"])
    summary = Table(list(_SUMMARY_COLUMNS))
    for p in _branch_params(spec):
        omega = spec.omega_grid or _default_omega(p)
        theta = spec.theta_grid or _default_theta()
        rows, summ = _spectrum_tables(spec, p, omega, theta)
        main.rows.extend(rows)
        summary.rows.append(summ)
    return {"": main, "extrema": summary}


def _run_sweep(spec: RunSpec, jobs: int) -> dict[str, Table]:
    axis = spec.sweep_axis
    assert axis is not None
    if axis.name == "alpha_in":
        table = Table(["branch", "alpha_in", "abs_alpha", "arg_alpha", "abs_alpha_linear",
                       "arg_alpha_linear", "x", "stable", "kappa_eff"])
        tasks = [(p, float(a)) for p in _branch_params(spec) for a in axis.values()]
        table.rows = _map(_sweep_alpha_row, tasks, jobs)
        return {"": table}
    main = Table(["branch", "omega", "theta", "S"])
    for p in _branch_params(spec):
        sol = _working_point(p)
        if axis.name == "omega":
            omega, theta = axis.values(), np.asarray(spec.theta_grid or (0.0,))
        else:
            omega, theta = np.asarray(spec.omega_grid or (-p.delta,)), axis.values()
        grid = spectrum_values(p, sol.alpha, omega[:, None], theta[None, :])
        main.rows.extend([p.branch.value, float(wi), float(tj), float(grid[i, j])]
                         for i, wi in enumerate(omega) for j, tj in enumerate(theta))
    return {"": main}


def _run_timedomain(spec: RunSpec, jobs: int) -> dict[str, Table]:
    cfg = spec.integration
    assert cfg is not None
    welch = Table(["branch", "omega", "theta", "S_welch"])
    overlay = Table(["branch", "omega", "theta", "S_analytic"])
    theta = spec.theta_grid or (0.0,)
    for p in _branch_params(spec):
        sol = _working_point(p)
        ens = integrate_linearized(p, sol.alpha, cfg)
        seg = spec.segment_length or max(2, ens.samples.shape[1] // 8)
        for th in theta:
            w, psd = welch_arrays(ens, th, seg, spec.overlap)
            welch.rows.extend([p.branch.value, float(wi), float(th), float(v)] for wi, v in zip(w, psd))
            exact = spectrum_values(p, sol.alpha, w, th)
            overlay.rows.extend([p.branch.value, float(wi), float(th), float(v)] for wi, v in zip(w, exact))
    return {"": welch, "analytic": overlay}


def _run_hpcheck(spec: RunSpec, jobs: int) -> dict[str, Table]:
    tasks = [(j, b, n) for j in spec.hp_j for b in spec.branches or tuple(HpBranch)
             for n in spec.hp_n_max if n <= 2 * j]
    table = Table(["j", "branch", "n_max", "error"])
    table.rows = _map(_hp_row, tasks, jobs)
    return {"": table}


def _run_validate(spec: RunSpec, jobs: int) -> dict[str, Table]:
    seed = spec.integration.seed if spec.integration else 0
    table = Table(["check", "passed", "detail"])
    for r in run_checks(seed):
        table.rows.append([r.name, r.passed, r.detail])
    return {"": table}


_RUNNERS = {
    Command.STEADY: _run_steady,
    Command.SPECTRUM: _run_spectrum,
    Command.SWEEP: _run_sweep,
    Command.TIMEDOMAIN: _run_timedomain,
    Command.HPCHECK: _run_hpcheck,
    Command.VALIDATE: _run_validate,
}


def run(spec: RunSpec, jobs: int = 1) -> tuple[int, dict[str, Table]]:
    """Execute ``spec`` and write its output files.

    Returns the exit status and the written tables keyed by path. Everything
    is rendered before the first write, so a failing run writes nothing.
    """
    tables = _RUNNERS[spec.command](spec, jobs)
    path = spec.output_path or f"{spec.command.value}.{spec.output_format.value}"
    targets = {(companion_path(path, tag) if tag else path): table for tag, table in tables.items()}
    rendered = {target: render(table, spec.output_format) for target, table in targets.items()}
    for target, text in rendered.items():
        atomic_write(target, text)
    status = 0
    if spec.command is Command.VALIDATE:
        status = 0 if all(row[1] for row in tables[""].rows) else 1
    return status, targets


# ---------------------------------------------------------------------------
# entry point


def _jobs(cli_value: int | None) -> int:
    env = os.environ.get("TLSQLE_JOBS")
    if env is not None and env.strip():
        try:
            value = int(env)
        except ValueError:
            raise ParseError(f"TLSQLE_JOBS must be an integer, got {env!r}") from None
    else:
        value = cli_value if cli_value is not None else 1
    if value < 1:
        raise ParseError(f"jobs must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tlsqle", description="Driven cavity with a bosonic and a TLS bath.")
    ap.add_argument("command", choices=[c.value for c in Command])
    ap.add_argument("--config", help="JSON run description (omit for validate)")
    ap.add_argument("--out", help="output path (overrides output_path)")
    ap.add_argument("--format", choices=[f.value for f in OutputFormat], help="output format")
    ap.add_argument("--seed", type=int, help="RNG seed (overrides integration.seed)")
    ap.add_argument("--jobs", type=int, help="worker processes; TLSQLE_JOBS overrides")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            source = Path(args.config).read_text(encoding="utf-8")
        elif args.command == Command.VALIDATE.value:
            source = "{}"
        else:
            raise ParseError("--config is required")
        spec = parse_config(source, args.command)
        changes: dict[str, Any] = {}
        if args.out:
            changes["output_path"] = args.out
        if args.format:
            changes["output_format"] = OutputFormat(args.format)
        if args.seed is not None:
            if args.seed < 0:
                raise ParseError("--seed must be non-negative")
            base = spec.integration or IntegrationConfig(dt=1e-3, t_total=1.0)
            changes["integration"] = replace(base, seed=args.seed)
        if changes:
            spec = replace(spec, **changes)
        jobs = _jobs(args.jobs)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        status, written = run(spec, jobs)
    except TlsQleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for target in written:
        print(target)
    if spec.command is Command.VALIDATE:
        rows = next(iter(written.values())).rows
        for name, ok, detail in rows:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        print(f"{sum(1 for r in rows if r[1])}/{len(rows)} checks passed")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
