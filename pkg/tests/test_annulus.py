from __future__ import annotations

import numpy as np
import pytest

from twophase import annulus, radial
from twophase.selftest import frechet_consistency


@pytest.mark.parametrize("N", [2, 3, 4])
def test_concentric_solution_is_radial(N):
    dom = annulus.trivial_annulus(N, 0.45, 4)
    sol = annulus.solve_dirichlet(dom, 2.0)
    r = np.linspace(0.45, 1.0, 7)
    th = np.linspace(0, np.pi, 5)
    rr, tt = np.meshgrid(r, th)
    u, grad, hess = annulus.eval_solution(sol, rr, tt)
    assert np.max(np.abs(u - (rr**2 - 1) / 2)) <= 1e-12
    assert np.allclose(np.trace(hess, axis1=-2, axis2=-1), N)
    F = annulus.overdet_residual(sol, dom)
    assert F.sup <= 1e-12


def test_transmission_constant_used_for_inner_data():
    dom = annulus.trivial_annulus(2, 0.6, 2)
    sol = annulus.solve_dirichlet(dom, 3.0)
    assert sol.T == pytest.approx(radial.transmission_constant(radial.PhaseConfig(2, 3.0, 0.6)))


def test_perturbed_solve_converges():
    eta = np.array([0.0, 0.02, -0.03, 0.01])
    xi = np.array([0.01, -0.02, 0.015, 0.0])
    dom = annulus.PerturbedAnnulus(2, 0.5, eta, xi)
    th = np.linspace(0, np.pi, 37)
    r = 0.5 * dom.r_in(th) + 0.5 * dom.r_out(th)
    vals = []
    for Ks in (8, 14, 20):
        sol = annulus.solve_dirichlet(dom, 2.0, K_solver=Ks)
        vals.append(annulus.eval_solution(sol, r, th)[0])
    d1 = np.max(np.abs(vals[1] - vals[0]))
    d2 = np.max(np.abs(vals[2] - vals[1]))
    assert d2 < 1e-3 * d1 or d2 < 1e-13
    assert sol.bc_residual <= 1e-12
    assert sol.cond < annulus.COND_LIMIT


@pytest.mark.parametrize("N, k", [(2, 0), (2, 2), (3, 1), (3, 3)])
def test_frechet_consistency(N, k):
    assert frechet_consistency(N, 2.0, 0.55, k) <= 1e-5


def test_degenerate_annulus_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        annulus.PerturbedAnnulus(2, 0.9, np.array([0.0, 0.0, 0.2]), np.zeros(3))
    with pytest.raises(ValueError):
        annulus.PerturbedAnnulus(2, 0.5, np.zeros(3), np.zeros(4))


def test_resolution_validation():
    dom = annulus.trivial_annulus(2, 0.5, 4)
    with pytest.raises(ValueError):
        annulus.solve_dirichlet(dom, 2.0, K_solver=2)
    with pytest.raises(ValueError):
        annulus.solve_dirichlet(dom, 2.0, K_solver=8, n_colloc=10)


def test_condition_guard(monkeypatch):
    dom = annulus.trivial_annulus(2, 0.3, 2)
    cond = annulus.solve_dirichlet(dom, 2.0, K_solver=12).cond
    monkeypatch.setattr(annulus, "COND_LIMIT", cond / 2)
    with pytest.raises(annulus.ResolutionError):
        annulus.solve_dirichlet(dom, 2.0, K_solver=12)


def test_sigma_mismatch_rejected():
    dom = annulus.trivial_annulus(2, 0.5, 2)
    sol = annulus.solve_dirichlet(dom, 2.0)
    with pytest.raises(ValueError):
        annulus.overdet_residual(sol, dom, sigma_c=3.0)
