from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twophase import radial

configs = st.builds(
    radial.PhaseConfig,
    N=st.integers(2, 6),
    sigma_c=st.floats(0.05, 20.0),
    rho=st.floats(0.02, 0.98),
)


def test_transmission_constant_formula():
    cfg = radial.PhaseConfig(2, 2.0, 0.5)
    assert radial.transmission_constant(cfg) == pytest.approx(-1 * 0.25 + 2.0)


@settings(max_examples=60, deadline=None)
@given(configs)
def test_interface_conditions(cfg):
    sol = radial.radial_solution(cfg)
    res = sol.interface_residuals()
    assert res["dirichlet"] <= 1e-15
    assert res["continuity"] <= 1e-13
    assert res["flux_jump"] <= 1e-14


@settings(max_examples=60, deadline=None)
@given(configs)
def test_trivial_branch_overdetermination(cfg):
    r1, r2 = radial.trivial_residual(cfg)
    assert r1 <= 1e-12 and r2 <= 1e-12


@settings(max_examples=60, deadline=None)
@given(configs)
def test_negative_inside_and_piecewise_laplacian(cfg):
    sol = radial.radial_solution(cfg)
    r = np.linspace(0.0, 1.0, 400, endpoint=False)
    assert np.all(sol.u(r) < 0)
    rr = np.linspace(0.01, 0.99, 50)
    lap = sol.laplacian(rr)
    expected = np.where(rr <= cfg.rho, cfg.N / cfg.sigma_c, cfg.N)
    assert np.allclose(lap, expected, rtol=1e-13)


def test_single_phase_is_paraboloid():
    cfg = radial.PhaseConfig(3, 1.0, 0.4)
    assert cfg.single_phase
    sol = radial.radial_solution(cfg)
    r = np.linspace(0, 1, 11)
    assert np.allclose(sol.u(r), (r**2 - 1) / 2)
    with pytest.raises(ValueError):
        radial.require_two_phase(1.0)


@pytest.mark.parametrize("bad", [dict(N=1, sigma_c=2, rho=0.5), dict(N=2, sigma_c=0, rho=0.5),
                                 dict(N=2, sigma_c=2, rho=1.0), dict(N=2, sigma_c=2, rho=0.0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        radial.PhaseConfig(**bad)


def test_rescale_unit_inner():
    cfg = radial.PhaseConfig(2, 3.0, 0.5)
    R, lam2 = radial.rescale_unit_inner(cfg)
    assert R == 2.0
    assert lam2 == pytest.approx(3.0 * 4 + 1 - 3.0)
    # lambda^2 is T scaled by R^2
    assert lam2 == pytest.approx(radial.transmission_constant(cfg) * R**2)
