from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlsqle.errors import NegativeRate, NonFinite, NonPositiveKappa, ParseError
from tlsqle.linear_response import susceptibilities
from tlsqle.model import HpBranch, ModelParams, fig3_params, validate_params
from tlsqle.spectrum import quadrature_spectrum
from tlsqle.steady_state import solve_steady_state


def test_rescale_example():
    p = validate_params(ModelParams(kappa=2.0, delta=40.0, kappa_n=3e-4, alpha_in=math.sqrt(2) * 700))
    assert p.kappa == 1.0
    assert p.delta == 20.0
    assert p.kappa_n == pytest.approx(1.5e-4, rel=1e-15)
    assert abs(p.alpha_in - 700) <= 1e-12 * 700
    assert p.kappa_unit == 2.0


def test_fig3_accepted_unchanged():
    raw = fig3_params(HpBranch.MINUS)
    assert validate_params(raw) == raw


@pytest.mark.parametrize("bad, exc", [
    (ModelParams(kappa=0.0), NonPositiveKappa),
    (ModelParams(kappa=-1.0), NonPositiveKappa),
    (ModelParams(kappa_n=-1e-4), NegativeRate),
    (ModelParams(n_th=-0.1), NegativeRate),
    (ModelParams(n_th_tls=-0.1), NegativeRate),
    (ModelParams(delta=math.nan), NonFinite),
    (ModelParams(alpha_in=complex(1, math.inf)), NonFinite),
    (ModelParams(kappa=math.inf), NonFinite),
])
def test_rejections(bad, exc):
    with pytest.raises(exc):
        validate_params(bad)


finite = st.floats(-1e3, 1e3, allow_nan=False)
positive = st.floats(1e-3, 1e3)


@settings(max_examples=200, deadline=None)
@given(kappa=positive, kappa_n=st.floats(0, 1), delta=finite, re=finite, im=finite,
       n=st.floats(0, 10), nt=st.floats(0, 10), plus=st.booleans())
def test_normalization_idempotent(kappa, kappa_n, delta, re, im, n, nt, plus):
    p = ModelParams(kappa, kappa_n, delta, complex(re, im), n, nt, HpBranch.PLUS if plus else HpBranch.MINUS)
    once = validate_params(p)
    assert validate_params(once) == once
    assert once.kappa == 1.0


@settings(max_examples=50, deadline=None)
@given(kappa_n=st.floats(1e-5, 1e-3), delta=st.floats(-30, 30), a=st.floats(0, 600),
       w=st.floats(-40, 40), th=st.floats(0, 3.2), plus=st.booleans())
def test_kappa_rescale_bit_identical(kappa_n, delta, a, w, th, plus):
    """kappa = 4 rescales by exact powers of two, so downstream results agree bit for bit."""
    branch = HpBranch.PLUS if plus else HpBranch.MINUS
    unit = validate_params(ModelParams(1.0, kappa_n, delta, complex(a), 1.0, 1.0, branch))
    scaled = validate_params(ModelParams(4.0, 4 * kappa_n, 4 * delta, complex(2 * a), 1.0, 1.0, branch))
    assert scaled.kappa_unit == 4.0
    assert scaled.with_(kappa_unit=1.0) == unit
    r1, r2 = solve_steady_state(unit), solve_steady_state(scaled)
    assert [s.alpha for s in r1] == [s.alpha for s in r2]
    if r1[0].stable:
        assert susceptibilities(unit, r1[0].alpha, w) == susceptibilities(scaled, r2[0].alpha, w)
        assert quadrature_spectrum(unit, r1[0].alpha, w, th) == quadrature_spectrum(scaled, r2[0].alpha, w, th)


def test_dict_round_trip_and_strictness():
    p = fig3_params(HpBranch.PLUS).with_(alpha_in=complex(3, -4))
    assert ModelParams.from_dict(p.to_dict()) == p
    assert ModelParams.from_dict({"alpha_in": 5}).alpha_in == 5
    with pytest.raises(ParseError, match="kapa"):
        ModelParams.from_dict({"kapa": 1})
    with pytest.raises(ParseError, match="phase"):
        ModelParams.from_dict({"alpha_in": {"re": 1, "phase": 0}})
    with pytest.raises(ParseError):
        ModelParams.from_dict({"kappa": "1"})
    with pytest.raises(ParseError):
        ModelParams.from_dict({"branch": "sideways"})


def test_branch_sign():
    assert HpBranch.MINUS.sign == 1 and HpBranch.PLUS.sign == -1
    assert HpBranch.parse(" Plus ") is HpBranch.PLUS
    assert np.sign(ModelParams(branch=HpBranch.PLUS).sign) == -1
