import dataclasses
import math

import numpy as np
import pytest

from regime_vi.errors import DomainError, ParamOrderViolation, ParamRangeViolation
from regime_vi.model import (ModelParams, canonical_params, hold_time_bounds, make_grid, operator_coeffs,
                             p_star, switch_gain, validate_params)


def test_canonical_set_accepted(params):
    assert validate_params(params) is params


def test_mu1_equal_rho_rejected(params):
    with pytest.raises(ParamOrderViolation) as exc:
        validate_params(dataclasses.replace(params, mu1=0.05))
    assert exc.value.field == "mu1"


def test_rho_not_above_mu2_rejected(params):
    with pytest.raises(ParamOrderViolation) as exc:
        validate_params(dataclasses.replace(params, mu2=0.05))
    assert exc.value.field == "mu2"


@pytest.mark.parametrize("field,value", [
    ("K", 1.0), ("K", 0.0), ("sigma", 0.0), ("lambda1", -1.0), ("lambda2", 0.0), ("T", 0.0),
    ("sigma", float("nan")),
])
def test_range_violations_name_the_field(params, field, value):
    with pytest.raises(ParamRangeViolation) as exc:
        validate_params(dataclasses.replace(params, **{field: value}))
    assert exc.value.field == field
    assert field in str(exc.value)


def test_p_star_values(params):
    assert p_star(params) == pytest.approx(0.5, abs=1e-15)
    assert p_star(dataclasses.replace(params, mu1=0.2, mu2=0.05, rho=0.125)) == pytest.approx(0.5, abs=1e-15)
    assert p_star(dataclasses.replace(params, rho=-0.1 + 1e-9)) < 1e-8


def test_hold_time_bounds(params):
    t0, t1 = hold_time_bounds(params)
    # log(1.001/0.999) = 2 atanh(0.001), divided by mu1 - rho = 0.15
    assert t1 == pytest.approx(2 * math.atanh(0.001) / 0.15, rel=1e-14)
    assert t1 == pytest.approx(0.0133333, abs=1e-7)
    # symmetric rates: mu1 - rho = rho - mu2
    assert t0 == pytest.approx(t1, rel=1e-14)
    small = hold_time_bounds(dataclasses.replace(params, K=1e-12))
    assert max(small) < 1e-10


def test_hold_time_bounds_monotone(params):
    t1 = [hold_time_bounds(dataclasses.replace(params, mu1=m))[1] for m in np.linspace(0.1, 1.0, 20)]
    assert np.all(np.diff(t1) < 0)
    both = np.array([hold_time_bounds(dataclasses.replace(params, K=k)) for k in np.linspace(1e-4, 0.5, 20)])
    assert np.all(np.diff(both, axis=0) > 0)


def test_operator_coeffs_endpoints(params):
    c0 = operator_coeffs(params, 0.0)
    assert (c0.a, c0.b, c0.c) == (0.0, params.lambda2, pytest.approx(params.mu2 - params.rho))
    c1 = operator_coeffs(params, 1.0)
    assert (c1.a, c1.b) == (0.0, -params.lambda1)
    assert c1.c == pytest.approx(params.mu1 - params.rho)


def test_operator_coeffs_midpoint(params):
    co = operator_coeffs(params, 0.5)
    assert co.a == pytest.approx(0.03125, abs=1e-15)
    assert co.b == pytest.approx(0.075, abs=1e-15)
    # 0.3 * 0.5 - 0.15 vanishes: p = 0.5 is p_star, where c changes sign
    assert co.c == pytest.approx(0.0, abs=1e-15)


def test_operator_coeffs_arrays(params):
    p = np.linspace(0, 1, 101)
    co = operator_coeffs(params, p)
    assert np.all(co.a[1:-1] > 0)
    assert co.a[0] == co.a[-1] == 0.0
    assert np.all(np.diff(co.c) > 0)
    assert operator_coeffs(params, p_star(params)).c == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("p", [-1e-9, 1.0 + 1e-9, float("nan")])
def test_operator_coeffs_domain(params, p):
    with pytest.raises(DomainError):
        operator_coeffs(params, p)


def test_switch_gains():
    K = 0.001
    assert switch_gain(0, 1, 100.0, K) == pytest.approx(-100.1)
    assert switch_gain(1, 1, 37.0, K) == 0.0
    assert switch_gain(-1, 1, 100.0, K) == pytest.approx(-200.2)
    assert switch_gain(1, 0, 100.0, K) == pytest.approx(99.9)
    assert switch_gain(0, -1, 100.0, K) == pytest.approx(99.9)
    assert switch_gain(1, -1, 100.0, K) == pytest.approx(199.8)
    with pytest.raises(DomainError):
        switch_gain(2, 0, 1.0, K)


def test_default_grid_puts_p_star_on_a_node(params):
    g = make_grid(params, 401, 2000)
    assert g.p_lo == pytest.approx(1 / 402) and g.p_hi == pytest.approx(401 / 402)
    assert g.h == pytest.approx(1 / 402)
    assert g.dt == pytest.approx(1 / 2000)
    assert np.min(np.abs(g.p - 0.5)) < 1e-14
    assert g.truncated


def test_exact_endpoint_grid(params):
    g = make_grid(params, 11, 10, eps=0.0)
    assert g.p[0] == 0.0 and g.p[-1] == 1.0 and not g.truncated
    with pytest.raises(DomainError):
        make_grid(params, 2, 10)


def test_canonical_params_match_config():
    from regime_vi.io import CANONICAL_CONFIG
    p = canonical_params()
    assert all(math.isclose(getattr(p, k), CANONICAL_CONFIG[k]) for k in ModelParams.__dataclass_fields__)
