"""Physical parameters of the driven cavity with a bosonic and a TLS bath.

All rates are measured in units of the linear damping ``kappa``. After
:func:`validate_params` the stored ``kappa`` is exactly 1 and the original
value is kept in ``kappa_unit`` so that outputs can be rescaled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Any, Mapping

from .errors import NegativeRate, NonFinite, NonPositiveKappa, ParseError


class HpBranch(enum.Enum):
    """Which Holstein-Primakoff expansion describes the TLS bath.

    ``MINUS`` expands around the TLS ground state (nonlinear damping adds to
    ``kappa``), ``PLUS`` around the fully inverted state (it subtracts).
    """

    MINUS = "minus"
    PLUS = "plus"

    @property
    def sign(self) -> int:
        """+1 for MINUS, -1 for PLUS: the sign in front of every kappa_n term."""
        return 1 if self is HpBranch.MINUS else -1

    @classmethod
    def parse(cls, value: "str | HpBranch") -> "HpBranch":
        if isinstance(value, HpBranch):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ParseError(f"unknown branch {value!r}; expected 'minus' or 'plus'") from None


@dataclass(frozen=True)
class ModelParams:
    kappa: float = 1.0
    kappa_n: float = 0.0
    delta: float = 0.0
    alpha_in: complex = 0j
    n_th: float = 0.0
    n_th_tls: float = 0.0
    branch: HpBranch = HpBranch.MINUS
    # original kappa in physical units; 1.0 for parameters given in units of kappa
    kappa_unit: float = 1.0

    @property
    def sign(self) -> int:
        return self.branch.sign

    def with_(self, **changes: Any) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        alpha = complex(self.alpha_in)
        return {
            "kappa": self.kappa,
            "kappa_n": self.kappa_n,
            "delta": self.delta,
            "alpha_in": {"re": alpha.real, "im": alpha.imag},
            "n_th": self.n_th,
            "n_th_tls": self.n_th_tls,
            "branch": self.branch.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelParams":
        """Build parameters from the JSON object form, rejecting unknown keys."""
        if not isinstance(data, Mapping):
            raise ParseError("params must be a JSON object")
        allowed = {"kappa", "kappa_n", "delta", "alpha_in", "n_th", "n_th_tls", "branch"}
        for key in data:
            if key not in allowed:
                raise ParseError(f"unknown key {key!r} in params")
        kwargs: dict[str, Any] = {}
        for key in ("kappa", "kappa_n", "delta", "n_th", "n_th_tls"):
            if key in data:
                kwargs[key] = _as_float(data[key], key)
        if "alpha_in" in data:
            kwargs["alpha_in"] = _as_complex(data["alpha_in"])
        if "branch" in data:
            kwargs["branch"] = HpBranch.parse(data["branch"])
        return cls(**kwargs)


def _as_float(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{key!r} must be a number, got {value!r}")
    return float(value)


def _as_complex(value: Any) -> complex:
    if isinstance(value, Mapping):
        for key in value:
            if key not in ("re", "im"):
                raise ParseError(f"unknown key {key!r} in alpha_in")
        re = _as_float(value.get("re", 0.0), "alpha_in.re")
        im = _as_float(value.get("im", 0.0), "alpha_in.im")
        return complex(re, im)
    return complex(_as_float(value, "alpha_in"))


def validate_params(raw: ModelParams) -> ModelParams:
    """Check ``raw`` and return a copy rescaled to ``kappa == 1``.

    Frequencies and rates are divided by kappa, the drive amplitude (units of
    kappa**0.5) by sqrt(kappa). Occupancies are dimensionless and untouched.

    Raises
    ------
    NonFinite
        Any field is NaN or infinite.
    NonPositiveKappa
        ``kappa <= 0``.
    NegativeRate
        Negative ``kappa_n`` or negative occupancy.
    """
    alpha = complex(raw.alpha_in)
    fields = {
        "kappa": raw.kappa,
        "kappa_n": raw.kappa_n,
        "delta": raw.delta,
        "alpha_in.re": alpha.real,
        "alpha_in.im": alpha.imag,
        "n_th": raw.n_th,
        "n_th_tls": raw.n_th_tls,
        "kappa_unit": raw.kappa_unit,
    }
    for name, value in fields.items():
        if not math.isfinite(value):
            raise NonFinite(f"{name} is not finite ({value!r})")
    if raw.kappa <= 0:
        raise NonPositiveKappa(f"kappa must be > 0, got {raw.kappa!r}")
    if raw.kappa_unit <= 0:
        raise NonPositiveKappa(f"kappa_unit must be > 0, got {raw.kappa_unit!r}")
    if raw.kappa_n < 0:
        raise NegativeRate(f"kappa_n must be >= 0, got {raw.kappa_n!r}")
    if raw.n_th < 0 or raw.n_th_tls < 0:
        raise NegativeRate(f"occupancies must be >= 0, got n_th={raw.n_th!r}, n_th_tls={raw.n_th_tls!r}")

    k = float(raw.kappa)
    if k == 1.0:
        return replace(raw, kappa=1.0, alpha_in=alpha, branch=HpBranch.parse(raw.branch))
    return ModelParams(
        kappa=1.0,
        kappa_n=raw.kappa_n / k,
        delta=raw.delta / k,
        alpha_in=alpha / math.sqrt(k),
        n_th=float(raw.n_th),
        n_th_tls=float(raw.n_th_tls),
        branch=HpBranch.parse(raw.branch),
        kappa_unit=raw.kappa_unit * k,
    )


def fig2_params(branch: HpBranch | str = HpBranch.MINUS, alpha_in: complex = 700.0) -> ModelParams:
    """Reference working point: kappa_n = 1.5e-4, delta = 20 (units of kappa)."""
    return ModelParams(kappa=1.0, kappa_n=1.5e-4, delta=20.0, alpha_in=complex(alpha_in),
                       branch=HpBranch.parse(branch))


def fig3_params(branch: HpBranch | str = HpBranch.MINUS) -> ModelParams:
    """Reference working point for the noise spectra: drive 700, both baths at occupancy 1."""
    return fig2_params(branch, 700.0).with_(n_th=1.0, n_th_tls=1.0)
