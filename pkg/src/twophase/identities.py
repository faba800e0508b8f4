"""Weinberger-type integral identity for solutions quadratic inside the core.

For u with ``u = (|x|^2 - lambda^2)/(2 sigma_c)`` in D, ``Laplace u = N`` in
the shell and ``u = 0`` on the outer boundary, the weighted Cauchy-Schwarz
deficit ``int (-u)(|D^2 u|^2 - (Laplace u)^2/N)`` over the shell equals the sum
of three boundary integrals I (outer surface) and II, III (core surface).

Surfaces are axisymmetric polar graphs about a point ``center * e1``; all
positions are absolute, so ``x`` in the formulas is the true position vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .harmonics import (
    AngularQuadrature,
    PolarJet,
    SurfaceGeometry,
    SurfaceGraph,
    build_quadrature,
    surface_geometry,
)


def unit_ball_volume(N: int) -> tuple[float, float]:
    """(|B_1|, |dB_1|) in R^N."""
    if N < 1:
        raise ValueError(f"dimension must be >= 1, got {N}")
    vol = math.pi ** (N / 2) / math.gamma(N / 2 + 1)
    return vol, N * vol


def _vec(v, N: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1:
        out = np.zeros(N)
        out[0] = v[0]
        return out
    if v.size != N:
        raise ValueError(f"expected a scalar or a vector of length {N}")
    return v


@dataclass(frozen=True)
class OffsetBallConfig:
    """Core D = B_1(z) with ``u = (|x|^2 - lam^2)/(2 sigma_c)`` inside."""

    N: int
    sigma_c: float
    z: np.ndarray
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.sigma_c > 0:
            raise ValueError("sigma_c must be positive")
        object.__setattr__(self, "z", _vec(self.z, self.N))

    @property
    def axisymmetric(self) -> bool:
        return bool(np.all(self.z[1:] == 0))

    def surface(self, quad: AngularQuadrature) -> SurfaceGeometry:
        if not self.axisymmetric:
            raise ValueError("quadrature requires z along e1")
        return surface_geometry(SurfaceGraph.sphere(quad, 1.0, center=float(self.z[0])))


# ---------------------------------------------------------------------------
# boundary terms


def _xnu(geo: SurfaceGeometry) -> np.ndarray:
    return np.sum(geo.points * geo.normal, axis=1)


def term_I(u_nu, geo: SurfaceGeometry, xi) -> float:
    """(1/2) int_{dOmega} u_nu^2 [u_nu - <x - xi, nu>]."""
    u_nu = np.asarray(u_nu, dtype=float)
    if u_nu.shape != geo.dS.shape:
        raise ValueError("u_nu samples do not match the surface nodes")
    x_xi = geo.points - np.array([float(xi), 0.0])
    return 0.5 * geo.integrate(u_nu**2 * (u_nu - np.sum(x_xi * geo.normal, axis=1)))


def term_II_surface(geo: SurfaceGeometry, N: int, sigma_c: float, lam2: float) -> float:
    xn = _xnu(geo)
    x2 = np.sum(geo.points**2, axis=1)
    inner = geo.shape_contraction() / sigma_c + (N - 1) * (1 - geo.H * xn) * xn
    integrand = xn * (xn**2 - x2) + 0.5 * (lam2 - x2) * inner
    return (1 / sigma_c) * (1 / sigma_c - 1) * geo.integrate(integrand)


def term_II_quadrature(cfg: OffsetBallConfig, n: int = 64) -> float:
    quad = build_quadrature(cfg.N, n)
    return term_II_surface(cfg.surface(quad), cfg.N, cfg.sigma_c, cfg.lam**2)


def term_II_closed(cfg: OffsetBallConfig) -> float:
    s = cfg.sigma_c
    z2 = float(cfg.z @ cfg.z)
    vol, _ = unit_ball_volume(cfg.N)
    return (1 / s) * (1 / s - 1) ** 2 * (cfg.N - 1) * (cfg.lam**2 - z2 - 1) / 2 * vol * z2


def term_III_surface(geo: SurfaceGeometry, N: int, sigma_c: float, u, xi) -> float:
    s = sigma_c
    xi = float(xi)
    xn = _xnu(geo)
    x2 = np.sum(geo.points**2, axis=1)
    xin = xi * geo.normal[:, 0]
    xix = xi * geo.points[:, 0]
    integrand = (
        N * u * xin
        + 0.5 * xin * ((1 - 1 / s**2) * xn**2 + x2 / s**2)
        - (1 - 1 / s) * xn**2 * xin
        - xn * xix / s
    )
    return geo.integrate(integrand)


def term_III_quadrature(cfg: OffsetBallConfig, xi, n: int = 64) -> float:
    """III for D = B_1(z e1) and xi = xi e1, by quadrature."""
    xi = _vec(xi, cfg.N)
    if np.any(xi[1:] != 0):
        raise ValueError("quadrature supports xi along e1 only")
    quad = build_quadrature(cfg.N, n)
    geo = cfg.surface(quad)
    u = (np.sum(geo.points**2, axis=1) - cfg.lam**2) / (2 * cfg.sigma_c)
    return term_III_surface(geo, cfg.N, cfg.sigma_c, u, xi[0])


def term_III_closed(cfg: OffsetBallConfig, xi) -> float:
    vol, _ = unit_ball_volume(cfg.N)
    return (1 / cfg.sigma_c - 1) * float(cfg.z @ _vec(xi, cfg.N)) * vol


def grad_xi_III(cfg: OffsetBallConfig) -> np.ndarray:
    vol, _ = unit_ball_volume(cfg.N)
    return (1 / cfg.sigma_c - 1) * cfg.z * vol


def grad_xi_III_surface(geo: SurfaceGeometry, N: int, sigma_c: float) -> np.ndarray:
    """xi-gradient of III for a general axisymmetric core (e1 component; others vanish)."""
    s = sigma_c
    xn = _xnu(geo)
    x2 = np.sum(geo.points**2, axis=1)
    # int_D x dx = (1/2) int_dD |x|^2 nu dS
    first_moment = 0.5 * geo.integrate(x2 * geo.normal[:, 0])
    rest = geo.integrate(
        (1 / s - 0.5 - 0.5 / s**2) * xn**2 * geo.normal[:, 0] - xn * geo.points[:, 0] / s
    )
    out = np.zeros(N)
    out[0] = (N / s + 1 / s**2) * first_moment + rest
    return out


def grad_xi_III_quadrature(cfg: OffsetBallConfig, n: int = 64) -> np.ndarray:
    quad = build_quadrature(cfg.N, n)
    return grad_xi_III_surface(cfg.surface(quad), cfg.N, cfg.sigma_c)


# ---------------------------------------------------------------------------
# deficit and the full identity


FieldJet = Callable[[np.ndarray, np.ndarray], PolarJet]


@dataclass(frozen=True)
class IdentityInputs:
    """Everything the identity needs, in the frame where u is quadratic in D.

    Both surfaces are polar graphs about ``center * e1``; the shell is
    ``{r_in(theta) < r < r_out(theta)}`` in those polar coordinates.
    ``field(r, theta)`` returns the jet of u in the shell (same coordinates).
    """

    N: int
    sigma_c: float
    lam2: float
    center: float
    inner: Callable[[AngularQuadrature], SurfaceGraph]
    outer: Callable[[AngularQuadrature], SurfaceGraph]
    field: FieldJet


@dataclass(frozen=True)
class DeficitResult:
    value: float
    richardson: float  # |value - value at half radial order|
    min_cs: float  # smallest pointwise |D^2u|^2 - (Lap u)^2/N
    max_u: float  # largest u sampled in the shell (should be <= 0)


def _cs_density(jet: PolarJet) -> np.ndarray:
    return jet.hessian_norm2 - jet.laplacian**2 / jet.N


def deficit_integral(
    inputs: IdentityInputs, angular_order: int = 64, radial_order: int = 32
) -> DeficitResult:
    """Product Gauss quadrature of (-u)(|D^2u|^2 - (Lap u)^2/N) over the shell."""

    def run(n_ang, n_rad):
        quad = build_quadrature(inputs.N, n_ang)
        r_in = inputs.inner(quad).r
        r_out = inputs.outer(quad).r
        x, w = np.polynomial.legendre.leggauss(n_rad)
        half = 0.5 * (r_out - r_in)
        rr = r_in[:, None] + half[:, None] * (x[None, :] + 1)
        tt = np.broadcast_to(quad.theta[:, None], rr.shape)
        jet = inputs.field(rr, tt)
        cs = _cs_density(jet)
        vol = quad.weights[:, None] * half[:, None] * w[None, :] * rr ** (inputs.N - 1)
        return float(np.sum(vol * (-jet.u) * cs)), float(cs.min()), float(jet.u.max())

    val, min_cs, max_u = run(angular_order, radial_order)
    coarse, _, _ = run(angular_order, max(radial_order // 2, 2))
    return DeficitResult(val, abs(val - coarse), min_cs, max_u)


@dataclass(frozen=True)
class IdentityReport:
    deficit: float
    I: float
    II: float
    III: float
    xi: float
    residual: float
    relative_residual: float
    deficit_richardson: float
    min_cs: float


def precondition_mismatch(inputs: IdentityInputs, quad: AngularQuadrature) -> float:
    """Largest deviation of the shell field from the quadratic Cauchy data on dD."""
    g = inputs.inner(quad)
    geo = surface_geometry(g)
    jet = inputs.field(g.r, quad.theta)
    x2 = np.sum(geo.points**2, axis=1)
    value = np.abs(jet.u - (x2 - inputs.lam2) / (2 * inputs.sigma_c))
    flux = np.abs(np.sum((jet.gradient - geo.points) * geo.normal, axis=1))
    return float(max(value.max(), flux.max()))


def verify_identity(
    inputs: IdentityInputs,
    xi: float = 0.0,
    angular_order: int = 64,
    radial_order: int = 32,
    precondition_tol: float = 1e-10,
) -> IdentityReport:
    """Both sides of the identity by independent quadratures."""
    quad = build_quadrature(inputs.N, angular_order)
    mismatch = precondition_mismatch(inputs, quad)
    if mismatch > precondition_tol:
        raise ValueError(
            f"field is not quadratic-compatible on the core boundary (mismatch {mismatch:.3e})"
        )
    d = deficit_integral(inputs, angular_order, radial_order)

    og = inputs.outer(quad)
    geo_out = surface_geometry(og)
    u_nu = np.sum(inputs.field(og.r, quad.theta).gradient * geo_out.normal, axis=1)
    I = term_I(u_nu, geo_out, xi)

    geo_in = surface_geometry(inputs.inner(quad))
    u_in = (np.sum(geo_in.points**2, axis=1) - inputs.lam2) / (2 * inputs.sigma_c)
    II = term_II_surface(geo_in, inputs.N, inputs.sigma_c, inputs.lam2)
    III = term_III_surface(geo_in, inputs.N, inputs.sigma_c, u_in, xi)
    residual = abs(d.value - (I + II + III))
    scale = max(abs(d.value), abs(I) + abs(II) + abs(III))
    # absolute residual when every term is round-off (concentric configurations)
    rel = residual / scale if scale > 1e-10 else residual
    return IdentityReport(d.value, I, II, III, float(xi), residual, rel, d.richardson, d.min_cs)


def radial_identity_inputs(N: int, sigma_c: float, rho: float) -> IdentityInputs:
    """Concentric configuration B_rho in B_1 with the radial two-phase solution."""
    from .radial import PhaseConfig, transmission_constant

    T = transmission_constant(PhaseConfig(N, sigma_c, rho))

    def field(r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        z = np.zeros_like(r)
        return PolarJet(N, r, theta, (r**2 - 1) / 2, r, z, np.ones_like(r), z, z)

    return IdentityInputs(
        N=N,
        sigma_c=sigma_c,
        lam2=T,
        center=0.0,
        inner=lambda q: SurfaceGraph.sphere(q, rho),
        outer=lambda q: SurfaceGraph.sphere(q, 1.0),
        field=field,
    )
