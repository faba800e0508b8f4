"""Harmonic-basis collocation on zonally perturbed annuli.

The outer-phase solution is written as ``|x|^2/2 + sum_k (a_k s_k + b_k t_k) Y_k``,
which satisfies ``Laplace u = N`` exactly; only the Dirichlet data on the two
boundary surfaces are fitted, in the least-squares sense, at quadrature nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import radial
from .harmonics import (
    AngularQuadrature,
    HarmonicExpansion,
    SurfaceGraph,
    ZonalBasis,
    build_quadrature,
    radial_functions,
    surface_geometry,
)

COND_LIMIT = 1e12


class ResolutionError(RuntimeError):
    """Collocation system too ill-conditioned to trust."""


@dataclass(frozen=True)
class PerturbedAnnulus:
    """Inner surface ``rho + sum eta_hat_k Y_k``, outer ``1 + sum xi_hat_k Y_k``."""

    N: int
    rho: float
    eta_hat: np.ndarray
    xi_hat: np.ndarray
    basis: ZonalBasis = field(init=False, repr=False)

    def __post_init__(self):
        eta = np.atleast_1d(np.asarray(self.eta_hat, dtype=float)).copy()
        xi = np.atleast_1d(np.asarray(self.xi_hat, dtype=float)).copy()
        if eta.shape != xi.shape:
            raise ValueError("eta_hat and xi_hat must have the same length")
        if not 0 < self.rho < 1:
            raise ValueError(f"base inner radius must lie in (0, 1), got {self.rho}")
        object.__setattr__(self, "eta_hat", eta)
        object.__setattr__(self, "xi_hat", xi)
        object.__setattr__(self, "basis", ZonalBasis(self.N, eta.size - 1))
        th = np.linspace(0.0, np.pi, 721)
        r_in, r_out = self.r_in(th), self.r_out(th)
        if r_in.min() <= 0 or r_in.max() >= r_out.min():
            raise ValueError("degenerate annulus: boundaries touch or inner radius vanishes")

    @property
    def K(self) -> int:
        return self.eta_hat.size - 1

    def r_in(self, theta, derivatives: bool = False):
        out = self.basis.synthesize(self.eta_hat, theta, derivatives)
        if derivatives:
            return self.rho + out[0], out[1], out[2]
        return self.rho + out

    def r_out(self, theta, derivatives: bool = False):
        out = self.basis.synthesize(self.xi_hat, theta, derivatives)
        if derivatives:
            return 1.0 + out[0], out[1], out[2]
        return 1.0 + out

    def inner_graph(self, quad: AngularQuadrature) -> SurfaceGraph:
        return SurfaceGraph.from_zonal(quad, self.basis, self.rho, self.eta_hat)

    def outer_graph(self, quad: AngularQuadrature) -> SurfaceGraph:
        return SurfaceGraph.from_zonal(quad, self.basis, 1.0, self.xi_hat)


def trivial_annulus(N: int, rho: float, K: int) -> PerturbedAnnulus:
    return PerturbedAnnulus(N, rho, np.zeros(K + 1), np.zeros(K + 1))


@dataclass(frozen=True)
class SpectralSolution:
    a: np.ndarray
    b: np.ndarray
    bc_residual: float
    cond: float
    T: float
    sigma_c: float
    basis: ZonalBasis
    n_colloc: int

    @property
    def expansion(self) -> HarmonicExpansion:
        return HarmonicExpansion(self.basis, self.a, self.b)

    def dirichlet_data(self, r):
        """Target values: inner quadratic on the core, zero on the outer surface."""
        return (np.asarray(r) ** 2 - self.T) / (2 * self.sigma_c)


def default_resolution(K: int, K_solver: int | None, n_colloc: int | None) -> tuple[int, int]:
    Ks = K + 4 if K_solver is None else K_solver
    n = max(4 * (K + 1), 2 * Ks + 2) if n_colloc is None else n_colloc
    return Ks, n


def _design(basis: ZonalBasis, r, theta) -> np.ndarray:
    cols = []
    for k in range(basis.K + 1):
        s, _, _, t, _, _ = radial_functions(k, basis.N, r)
        y = basis(k, theta)
        cols.append(s * y)
        cols.append(t * y)
    return np.stack(cols, axis=1)


def solve_dirichlet(
    domain: PerturbedAnnulus,
    sigma_c: float,
    K_solver: int | None = None,
    n_colloc: int | None = None,
) -> SpectralSolution:
    """Least-squares collocation of the annular Dirichlet problem."""
    Ks, n = default_resolution(domain.K, K_solver, n_colloc)
    if Ks < domain.K:
        raise ValueError(f"K_solver={Ks} below boundary truncation K={domain.K}")
    if n < 2 * Ks + 2:
        raise ValueError(f"n_colloc={n} must be >= 2*K_solver+2 = {2 * Ks + 2}")
    T = radial.transmission_constant(radial.PhaseConfig(domain.N, sigma_c, domain.rho))
    basis = ZonalBasis(domain.N, Ks)
    quad = build_quadrature(domain.N, n)
    th = quad.theta
    r_in, r_out = domain.r_in(th), domain.r_out(th)
    mat = np.vstack([_design(basis, r_in, th), _design(basis, r_out, th)])
    rhs = np.concatenate([(r_in**2 - T) / (2 * sigma_c) - r_in**2 / 2, -(r_out**2) / 2])
    sw = np.sqrt(np.concatenate([quad.weights, quad.weights]))
    scale = np.linalg.norm(mat * sw[:, None], axis=0)
    scale[scale == 0] = 1.0
    A = mat * sw[:, None] / scale
    coef, _, _, sv = linalg.lstsq(A, rhs * sw, lapack_driver="gelsd")
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > COND_LIMIT:
        raise ResolutionError(
            f"collocation condition number {cond:.3g} exceeds {COND_LIMIT:.0e}; "
            "raise n_colloc or lower K_solver"
        )
    coef = coef / scale
    bc = float(np.max(np.abs(mat @ coef - rhs)))
    return SpectralSolution(
        a=coef[0::2].copy(),
        b=coef[1::2].copy(),
        bc_residual=bc,
        cond=cond,
        T=T,
        sigma_c=sigma_c,
        basis=basis,
        n_colloc=n,
    )


def eval_solution(sol: SpectralSolution, r, theta):
    """(u, gradient in the meridian frame, full N x N Hessian) at (r, theta)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("evaluation requires r > 0")
    jet = sol.expansion.jet(r, theta)
    return jet.u, jet.gradient, jet.full_hessian()


@dataclass(frozen=True)
class OverdetResidual:
    F1_hat: np.ndarray
    F2_hat: np.ndarray
    F1: np.ndarray  # nodal values on the inner surface
    F2: np.ndarray  # nodal values on the outer surface
    sup_F1: float
    sup_F2: float

    @property
    def sup(self) -> float:
        return max(self.sup_F1, self.sup_F2)

    @property
    def modes(self) -> np.ndarray:
        return np.concatenate([self.F1_hat, self.F2_hat])


def overdet_residual(
    sol: SpectralSolution, domain: PerturbedAnnulus, sigma_c: float | None = None,
    n_quad: int | None = None,
) -> OverdetResidual:
    """Inner ``<x - grad u, nu>`` and outer ``u_nu - 1`` pulled back and projected."""
    if sigma_c is not None and sigma_c != sol.sigma_c:
        raise ValueError("sigma_c differs from the one used in the solve")
    quad = build_quadrature(domain.N, n_quad or sol.n_colloc)
    th = quad.theta
    geo_in = surface_geometry(domain.inner_graph(quad))
    geo_out = surface_geometry(domain.outer_graph(quad))
    grad_in = sol.expansion.jet(domain.r_in(th), th).gradient
    grad_out = sol.expansion.jet(domain.r_out(th), th).gradient
    F1 = np.sum((geo_in.points - grad_in) * geo_in.normal, axis=1)
    F2 = np.sum(grad_out * geo_out.normal, axis=1) - 1.0
    basis = domain.basis
    return OverdetResidual(
        F1_hat=basis.project(F1, quad),
        F2_hat=basis.project(F2, quad),
        F1=F1,
        F2=F2,
        sup_F1=float(np.max(np.abs(F1))),
        sup_F2=float(np.max(np.abs(F2))),
    )


def residual_map(
    N: int, sigma_c: float, rho: float, eta_hat, xi_hat,
    K_solver: int | None = None, n_colloc: int | None = None,
) -> OverdetResidual:
    """Convenience composition: build, solve, evaluate F."""
    dom = PerturbedAnnulus(N, rho, eta_hat, xi_hat)
    sol = solve_dirichlet(dom, sigma_c, K_solver, n_colloc)
    return overdet_residual(sol, dom)
