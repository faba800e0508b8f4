from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from twophase import harmonics, identities as idt


@pytest.mark.parametrize("N, vol", [(2, math.pi), (3, 4 * math.pi / 3)])
def test_unit_ball_volume(N, vol):
    v, a = idt.unit_ball_volume(N)
    assert v == pytest.approx(vol)
    assert a == pytest.approx(harmonics.sphere_area(N))


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("z", [0.0, 0.2, -0.4])
def test_offset_ball_closed_forms(N, z):
    cfg = idt.OffsetBallConfig(N, 2.5, z, 1.4)
    assert idt.term_II_quadrature(cfg) == pytest.approx(idt.term_II_closed(cfg), rel=1e-10, abs=1e-14)
    for xi in (0.0, 0.7, -1.0):
        assert idt.term_III_quadrature(cfg, xi) == pytest.approx(
            idt.term_III_closed(cfg, xi), rel=1e-10, abs=1e-14
        )


def test_grad_xi_vanishes_only_for_centred_core():
    assert not np.any(idt.grad_xi_III(idt.OffsetBallConfig(3, 2.0, 0.0, 1.2)))
    g = idt.grad_xi_III(idt.OffsetBallConfig(3, 2.0, 0.1, 1.2))
    assert g[0] == pytest.approx((1 / 2.0 - 1) * 0.1 * 4 * math.pi / 3)
    # single phase: III is independent of xi for every offset
    assert not np.any(idt.grad_xi_III(idt.OffsetBallConfig(2, 1.0, 0.3, 1.2)))


def test_general_surface_gradient_matches_closed_form():
    cfg = idt.OffsetBallConfig(2, 0.4, -0.25, 1.3)
    assert np.allclose(idt.grad_xi_III_quadrature(cfg), idt.grad_xi_III(cfg), atol=1e-12)


def test_vector_arguments():
    cfg = idt.OffsetBallConfig(3, 2.0, [0.1, 0.2, 0.0], 1.5)
    assert not cfg.axisymmetric
    assert idt.term_III_closed(cfg, [0.0, 1.0, 0.0]) == pytest.approx(-0.5 * 0.2 * 4 * math.pi / 3)
    with pytest.raises(ValueError):
        idt.term_II_quadrature(cfg)
    with pytest.raises(ValueError):
        idt.OffsetBallConfig(3, 2.0, [0.1, 0.2], 1.5)


def _quadrupole_inputs(c: float, rho: float = 0.5):
    """u = (r^2 - 1)/2 + c (x1^2 - x2^2) on a concentric planar annulus."""

    def field(r, th):
        r, th = np.broadcast_arrays(np.asarray(r, float), np.asarray(th, float))
        cos2, sin2 = np.cos(2 * th), np.sin(2 * th)
        return harmonics.PolarJet(
            2, r, th,
            (r**2 - 1) / 2 + c * r**2 * cos2,
            r + 2 * c * r * cos2,
            -2 * c * r**2 * sin2,
            1 + 2 * c * cos2,
            -4 * c * r * sin2,
            -4 * c * r**2 * cos2,
        )

    return idt.IdentityInputs(
        N=2, sigma_c=2.0, lam2=1.0, center=0.0,
        inner=lambda q: harmonics.SurfaceGraph.sphere(q, rho),
        outer=lambda q: harmonics.SurfaceGraph.sphere(q, 1.0),
        field=field,
    )


def test_deficit_against_scipy_dblquad():
    c = 0.05
    got = idt.deficit_integral(_quadrupole_inputs(c), 32, 16)

    def integrand(r, th):
        u = (r**2 - 1) / 2 + c * r**2 * math.cos(2 * th)
        return -u * 8 * c * c * r

    ref, _ = integrate.dblquad(integrand, 0, 2 * math.pi, 0.5, 1.0, epsabs=1e-14, epsrel=1e-13)
    assert got.value == pytest.approx(ref, rel=1e-10)
    assert got.min_cs == pytest.approx(8 * c * c)


@pytest.mark.parametrize("N", [2, 3])
def test_identity_on_concentric_configuration(N):
    inputs = idt.radial_identity_inputs(N, 3.0, 0.6)
    for xi in (0.0, 0.5):
        rep = idt.verify_identity(inputs, xi, 32, 16)
        assert rep.residual <= 1e-12
        assert abs(rep.deficit) <= 1e-14


def test_precondition_guard():
    # the quadrupole field does not carry the quadratic Cauchy data on the inner circle
    with pytest.raises(ValueError, match="quadratic-compatible"):
        idt.verify_identity(_quadrupole_inputs(0.05), 0.0, 32, 16)
