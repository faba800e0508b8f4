from __future__ import annotations

import numpy as np
import pytest

from twophase import branch, linearization


@pytest.fixture(scope="module")
def short_branch():
    return branch.trace_branch(2, 2.0, 2, 0.01, 4)


def test_branch_points_solve_projected_system(short_branch):
    d = short_branch
    assert d.points[0].t == 0.0
    assert d.points[0].residual_norm <= 1e-12
    assert all(p.residual_norm <= 1e-8 for p in d.points)
    assert d.points[-1].t == pytest.approx(0.01)
    for p in d.points[1:]:
        assert p.eta_hat[2] == p.t


def test_tangent_matches_kernel(short_branch):
    assert short_branch.tangent_error <= 0.1
    beta, gamma = linearization.kernel_vector(2, 2.0, 2)
    assert short_branch.kernel_ratio == pytest.approx(gamma / beta)


def test_rho_bends_quadratically(short_branch):
    # rho(t) - R* is even in t at leading order: halving t quarters the shift
    pts = short_branch.points
    d_half = pts[2].rho - short_branch.R_star
    d_full = pts[4].rho - short_branch.R_star
    assert 3.5 <= d_full / d_half <= 4.5


def test_certificate(short_branch):
    cert = branch.verify_branch_point(short_branch.points[-1], 2, 2.0, short_branch.resolution)
    assert cert.passed
    assert cert.dirichlet_outer <= 1e-12


def test_reflected_point_is_a_solution(short_branch):
    p = short_branch.points[-1]
    q = branch.reflect_point(p)
    assert q.t == -p.t
    assert branch.point_residual(q, 2, 2.0, short_branch.resolution) <= 1e-8


def test_reflection_rejects_odd_modes(short_branch):
    p = short_branch.points[-1]
    eta = p.eta_hat.copy()
    eta[1] = 1e-3
    with pytest.raises(ValueError):
        branch.reflect_point(branch.BranchPoint(p.t, 2, eta, p.xi_hat, p.rho))


def test_tangency_is_quadratic():
    a, b = branch.tangency_ratio(2, 2.0, 2, 1e-2)
    assert 3.5 <= a / b <= 4.5


@pytest.mark.parametrize("k", [0, 1])
def test_no_branch_in_low_modes(k):
    out = branch.pinned_mode_diagnostic(2, 2.0, k, 0.01, 0.6)
    assert out["status"] == "collapsed"


def test_input_validation():
    with pytest.raises(ValueError):
        branch.trace_branch(2, 2.0, 1, 0.01, 2)
    with pytest.raises(ValueError):
        branch.trace_branch(2, 1.0, 2, 0.01, 2)
    with pytest.raises(ValueError):
        branch.trace_branch(2, 2.0, 2, 0.01, 0)
    with pytest.raises(ValueError):
        branch.trace_branch(2, 2.0, 2, 0.01, 2, branch.Resolution.default(2, K=4))


def test_newton_guess_truncation_mismatch():
    res = branch.Resolution.default(2)
    guess = branch.BranchPoint(0.0, 2, np.zeros(4), np.zeros(4), 0.7)
    with pytest.raises(ValueError):
        branch.newton_solve(guess, 2, 2.0, res)


@pytest.mark.slow
def test_three_dimensional_branch_step():
    d = branch.trace_branch(3, 2.0, 2, 0.005, 2)
    assert all(p.residual_norm <= 1e-8 for p in d.points)
    assert d.tangent_error <= 0.1
