from __future__ import annotations

import math

import numpy as np
import pytest

from twophase import ck, identities


@pytest.fixture(scope="module")
def default_domain():
    return ck.build_counterexample(ck.CKConfig(2, 2.0, 1.0, 0.1, gamma=1.0))


def test_modal_coefficients():
    sol = ck.exterior_cauchy_solution(ck.CKConfig(2, 2.0, 1.0, 0.1))
    assert sol.a0 == pytest.approx(-0.2475, abs=1e-15)
    assert sol.b1 == pytest.approx(0.025, abs=1e-15)
    assert sol.a1 == pytest.approx(-0.075, abs=1e-15)


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("sigma", [0.5, 2.0, 5.0])
def test_cauchy_and_transmission_data(N, sigma):
    sol = ck.exterior_cauchy_solution(ck.CKConfig(N, sigma, 1.3, 0.2))
    assert max(ck.cauchy_residuals(sol)) <= 1e-14
    assert max(ck.transmission_residuals(sol, 0.7)) <= 1e-14
    th = np.linspace(0.1, 3.0, 7)
    r = np.linspace(1.3, 2.6, 5)[:, None]
    assert np.allclose(sol.jet(r, th).laplacian, N, atol=1e-12)


def test_single_phase_and_radial_limits():
    sol = ck.exterior_cauchy_solution(ck.CKConfig(3, 1.0, 1.0, 0.2))
    assert sol.a1 == pytest.approx(-0.2) and sol.b1 == 0.0
    sol0 = ck.exterior_cauchy_solution(ck.CKConfig(2, 3.0, 1.5, 0.0))
    assert sol0.a1 == 0.0 and sol0.b1 == 0.0
    assert sol0.a0 == pytest.approx(1.5**2 * (1 / 3.0 - 1) / 2)


def test_admissibility_checks():
    cfg = ck.CKConfig(2, 2.0, 1.0, 0.1)
    sol = ck.exterior_cauchy_solution(cfg)
    ok, m = ck.check_monotonicity(sol, cfg)
    assert ok and m >= 0.9
    ok, lo, hi = ck.check_gap(sol, cfg)
    assert ok
    assert lo == pytest.approx(0.3025, abs=1e-12)
    assert hi == pytest.approx(1.615, abs=1e-12)
    bad = ck.CKConfig(2, 2.0, 1.0, 0.9)
    assert not ck.check_monotonicity(ck.exterior_cauchy_solution(bad), bad)[0]


def test_select_epsilon():
    eps = ck.select_epsilon(2, 2.0)
    assert eps in (0.5, 0.25)
    assert ck.admissible(ck.CKConfig(2, 2.0, 1.0, eps))
    assert ck.select_epsilon(2, 1.0) == 0.25


def test_gamma_resolution():
    cfg = ck.CKConfig(2, 2.0, 1.0, 0.1)
    sol = ck.exterior_cauchy_solution(cfg)
    assert ck.resolve_gamma(sol, cfg) == pytest.approx(0.5 * (0.3025 + 1.615))
    with pytest.raises(ValueError):
        ck.resolve_gamma(sol, ck.CKConfig(2, 2.0, 1.0, 0.1, gamma=2.0))


def test_level_radius(default_domain):
    sol = default_domain.solution
    r = ck.level_radius(sol, 1.0, np.array([np.pi / 2]))[0]
    assert r == pytest.approx(math.sqrt(2.495), abs=1e-12)
    th = np.linspace(0, np.pi, 50)
    rr = ck.level_radius(sol, 1.0, th)
    assert np.max(np.abs(sol.u(rr, th) - 1.0)) <= 1e-12
    assert np.all(rr > 1.0)
    with pytest.raises(ValueError):
        ck.level_radius(sol, 5.0, th)


def test_counterexample_diagnostics(default_domain):
    d = default_domain
    assert d.r_0 == pytest.approx(1.6467, abs=1e-3)
    assert d.r_pi == pytest.approx(1.5167, abs=1e-3)
    assert d.r_0 - d.r_pi == pytest.approx(0.13, abs=5e-3)
    assert d.level_error <= 1e-12
    assert d.interior_radiality_std <= 1e-13
    assert d.outer_flux_std > 0.01
    assert not d.ball_about_origin and not d.ball_about_shift


def test_single_phase_gives_shifted_ball():
    d = ck.build_counterexample(ck.CKConfig(2, 1.0, 1.0, 0.1, gamma=1.0))
    assert d.ball_about_shift
    assert d.outer_flux_std <= 1e-12


def test_flux_spread_scales_with_epsilon():
    ratios = []
    for eps in (0.05, 0.1):
        d = ck.build_counterexample(ck.CKConfig(2, 2.0, 1.0, eps, gamma=1.0))
        ratios.append(d.outer_flux_std / eps)
    assert ratios[0] == pytest.approx(ratios[1], rel=0.05)


@pytest.mark.parametrize("xi", [0.0, 1.0, -0.3])
def test_identity_in_shifted_frame(default_domain, xi):
    inputs = ck.translate_to_identity_frame(default_domain)
    assert inputs.lam2 == pytest.approx(2 * 2.0 * 1.0)
    rep = identities.verify_identity(inputs, xi, 64, 32)
    assert rep.relative_residual <= 1e-6
    assert rep.deficit > 0


def test_config_validation():
    with pytest.raises(ValueError):
        ck.CKConfig(2, 2.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        ck.CKConfig(1, 2.0, 1.0, 0.1)
