"""Closed-form exterior Cauchy solution with shifted-paraboloid data.

Inside the core ``B_R`` the two-phase solution is the paraboloid
``|x - eps e1|^2/(2 sigma_c)`` (radial about ``eps e1``).  Its Cauchy data on
``|x| = R`` only contain degrees 0 and 1, so the exterior continuation with
``Laplace u = N`` is

    u = r^2/2 + a0 + (a1 r + b1 r^{1-N}) cos(theta)

and the outer boundary is a level set ``{u = gamma}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harmonics import (
    PolarJet,
    SurfaceGraph,
    build_quadrature,
    surface_geometry,
)
from .identities import IdentityInputs


@dataclass(frozen=True)
class CKConfig:
    N: int = 2
    sigma_c: float = 2.0
    R: float = 1.0
    epsilon: float = 0.1
    R2: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("dimension must be >= 2")
        if not self.sigma_c > 0 or not self.R > 0:
            raise ValueError("sigma_c and R must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.R2 is None:
            object.__setattr__(self, "R2", 2.0 * self.R)
        if self.R2 < self.R:
            raise ValueError("outer check radius must be >= R")


@dataclass(frozen=True)
class CKSolution:
    N: int
    sigma_c: float
    R: float
    epsilon: float
    a0: float
    a1: float
    b1: float
    b0: float = 0.0

    def jet(self, r, theta) -> PolarJet:
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        if np.any(r <= 0):
            raise ValueError("exterior solution is singular at r <= 0")
        N = self.N
        c, s = np.cos(theta), np.sin(theta)
        m = 1 - N
        f = self.a1 * r + self.b1 * r**m
        df = self.a1 + self.b1 * m * r ** (m - 1)
        d2f = self.b1 * m * (m - 1) * r ** (m - 2)
        return PolarJet(
            N,
            r,
            theta,
            u=r**2 / 2 + self.a0 + f * c,
            u_r=r + df * c,
            u_t=-f * s,
            u_rr=1.0 + d2f * c,
            u_rt=-df * s,
            u_tt=-f * c,
        )

    def u(self, r, theta):
        return self.jet(r, theta).u

    def cauchy_data(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """Target (f_eps, g_eps) on |x| = R."""
        theta = np.asarray(theta, dtype=float)
        R, e = self.R, self.epsilon
        f = (R**2 - 2 * e * R * np.cos(theta) + e**2) / (2 * self.sigma_c)
        g = R - e * np.cos(theta)
        return f, g


def exterior_cauchy_solution(config: CKConfig) -> CKSolution:
    N, s, R, e = config.N, config.sigma_c, config.R, config.epsilon
    a0 = (R**2 + e**2) / (2 * s) - R**2 / 2
    b1 = e * R**N * (1 - 1 / s) / N
    a1 = -e + (N - 1) / N * e * (1 - 1 / s)
    return CKSolution(N, s, R, e, a0, a1, b1)


def cauchy_residuals(sol: CKSolution, n: int = 257) -> tuple[float, float]:
    th = np.linspace(0.0, np.pi, n)
    jet = sol.jet(sol.R, th)
    f, g = sol.cauchy_data(th)
    return float(np.max(np.abs(jet.u - f))), float(np.max(np.abs(jet.u_r - g)))


def transmission_residuals(sol: CKSolution, gamma: float, n: int = 257) -> tuple[float, float]:
    """Jumps of value and sigma-weighted flux across |x| = R for the glued solution."""
    th = np.linspace(0.0, np.pi, n)
    R, e, s = sol.R, sol.epsilon, sol.sigma_c
    x1, x2 = R * np.cos(th), R * np.sin(th)
    inner_u = ((x1 - e) ** 2 + x2**2) / (2 * s) - gamma
    # sigma_c * d_nu of |x - e e1|^2 / (2 sigma_c)
    inner_flux = (x1 - e) * np.cos(th) + x2 * np.sin(th)
    jet = sol.jet(R, th)
    return (
        float(np.max(np.abs(jet.u - gamma - inner_u))),
        float(np.max(np.abs(jet.u_r - inner_flux))),
    )


def _grid(config: CKConfig, n_r: int = 201, n_t: int = 361):
    r = np.linspace(config.R, config.R2, n_r)
    th = np.linspace(0.0, np.pi, n_t)
    return np.meshgrid(r, th, indexing="ij")


def check_monotonicity(sol: CKSolution, config: CKConfig, grid=None) -> tuple[bool, float]:
    """min of the radial derivative on R <= r <= R2; admissible iff > R/2."""
    rr, tt = grid if grid is not None else _grid(config)
    m = float(sol.jet(rr, tt).u_r.min())
    return m > config.R / 2, m


def check_gap(sol: CKSolution, config: CKConfig, n: int = 721) -> tuple[bool, float, float]:
    """(max u on |x| = R) < (min u on |x| = R2)."""
    th = np.linspace(0.0, np.pi, n)
    inner = float(sol.u(config.R, th).max())
    outer = float(sol.u(config.R2, th).min())
    return inner < outer, inner, outer


def admissible(config: CKConfig) -> bool:
    sol = exterior_cauchy_solution(config)
    return check_monotonicity(sol, config)[0] and check_gap(sol, config)[0]


def select_epsilon(N: int, sigma_c: float, R: float = 1.0, R2: float | None = None) -> float:
    """Largest eps in R/2, R/4, ... passing both admissibility checks."""
    for j in range(1, 21):
        eps = R / 2**j
        if admissible(CKConfig(N, sigma_c, R, eps, R2)):
            return eps
    raise RuntimeError("no admissible epsilon down to R/2^20")


def resolve_gamma(sol: CKSolution, config: CKConfig) -> float:
    ok, lo, hi = check_gap(sol, config)
    if config.gamma is None:
        if not ok:
            raise ValueError("empty gap interval; no admissible level")
        return 0.5 * (lo + hi)
    if not lo < config.gamma < hi:
        raise ValueError(f"gamma={config.gamma} outside the gap ({lo}, {hi})")
    return float(config.gamma)


def level_radius(sol: CKSolution, gamma: float, theta, R2: float | None = None) -> np.ndarray:
    """Unique r in (R, R2) with u(r, theta) = gamma; bisection then Newton polish."""
    theta = np.asarray(theta, dtype=float)
    R2 = 2 * sol.R if R2 is None else R2
    lo = np.full(theta.shape, sol.R)
    hi = np.full(theta.shape, R2)
    if np.any(sol.u(lo, theta) >= gamma) or np.any(sol.u(hi, theta) <= gamma):
        raise ValueError("level value outside the bracket [u(R), u(R2)]")
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        above = sol.u(mid, theta) > gamma
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    r = 0.5 * (lo + hi)
    for _ in range(2):
        jet = sol.jet(r, theta)
        r = r - (jet.u - gamma) / jet.u_r
    return r


def level_graph_derivatives(sol: CKSolution, r, theta):
    """(r', r'') of the level curve from implicit differentiation."""
    j = sol.jet(r, theta)
    d1 = -j.u_t / j.u_r
    d2 = -(j.u_tt + 2 * j.u_rt * d1 + j.u_rr * d1**2) / j.u_r
    return d1, d2


@dataclass(frozen=True)
class CounterexampleDomain:
    config: CKConfig
    solution: CKSolution
    gamma: float
    theta: np.ndarray
    r: np.ndarray
    level_error: float
    asphericity_origin: float
    asphericity_shift: float
    outer_flux_std: float
    outer_flux_mean: float
    interior_radiality_std: float
    r_0: float
    r_pi: float

    @property
    def ball_about_origin(self) -> bool:
        return self.asphericity_origin < 1e-10

    @property
    def ball_about_shift(self) -> bool:
        return self.asphericity_shift < 1e-10

    def diagnostics(self) -> dict:
        return {
            "N": self.config.N,
            "sigma_c": self.config.sigma_c,
            "R": self.config.R,
            "epsilon": self.solution.epsilon,
            "gamma": self.gamma,
            "a0": self.solution.a0,
            "a1": self.solution.a1,
            "b1": self.solution.b1,
            "r_0": self.r_0,
            "r_pi": self.r_pi,
            "r_0_minus_r_pi": self.r_0 - self.r_pi,
            "shifted_diameter_defect": (self.r_0 - self.solution.epsilon)
            - (self.r_pi + self.solution.epsilon),
            "asphericity_origin": self.asphericity_origin,
            "asphericity_shift": self.asphericity_shift,
            "ball_about_origin": self.ball_about_origin,
            "ball_about_shift": self.ball_about_shift,
            "outer_flux_mean": self.outer_flux_mean,
            "outer_flux_std": self.outer_flux_std,
            "interior_radiality_std": self.interior_radiality_std,
            "level_error": self.level_error,
        }


def _weighted_std(values, weights) -> tuple[float, float]:
    mean = float(np.dot(weights, values) / weights.sum())
    var = float(np.dot(weights, (values - mean) ** 2) / weights.sum())
    return mean, float(np.sqrt(max(var, 0.0)))


def interior_radiality(sol: CKSolution, radii=(0.2, 0.5, 0.8), n: int = 64) -> float:
    """Largest std of |grad u| over spheres about eps e1 inside the core."""
    quad = build_quadrature(sol.N, n)
    worst = 0.0
    for frac in radii:
        s = frac * sol.R
        x1 = sol.epsilon + s * np.cos(quad.theta)
        x2 = s * np.sin(quad.theta)
        grad = np.stack([x1 - sol.epsilon, x2], axis=1) / sol.sigma_c
        _, std = _weighted_std(np.linalg.norm(grad, axis=1), quad.weights)
        worst = max(worst, std)
    return worst


def _sphere_deviation(points, weights, center: float) -> float:
    d = np.linalg.norm(points - np.array([center, 0.0]), axis=1)
    mean = np.dot(weights, d) / weights.sum()
    return float(np.max(np.abs(d - mean)))


def build_counterexample(config: CKConfig, angular_order: int = 64) -> CounterexampleDomain:
    sol = exterior_cauchy_solution(config)
    ok, m = check_monotonicity(sol, config)
    if not ok:
        raise ValueError(f"monotonicity fails: min radial derivative {m:.4g} <= R/2")
    gamma = resolve_gamma(sol, config)
    quad = build_quadrature(config.N, angular_order)
    th = quad.theta
    r = level_radius(sol, gamma, th, config.R2)
    level_error = float(np.max(np.abs(sol.u(r, th) - gamma)))
    dr, d2r = level_graph_derivatives(sol, r, th)
    geo = surface_geometry(SurfaceGraph(quad, r, dr, d2r))
    flux = np.sum(sol.jet(r, th).gradient * geo.normal, axis=1)
    mean, std = _weighted_std(flux, geo.dS)
    ends = level_radius(sol, gamma, np.array([0.0, np.pi]), config.R2)
    return CounterexampleDomain(
        config=config,
        solution=sol,
        gamma=gamma,
        theta=th,
        r=r,
        level_error=level_error,
        asphericity_origin=_sphere_deviation(geo.points, geo.dS, 0.0),
        asphericity_shift=_sphere_deviation(geo.points, geo.dS, config.epsilon),
        outer_flux_std=std,
        outer_flux_mean=mean,
        interior_radiality_std=interior_radiality(sol),
        r_0=float(ends[0]),
        r_pi=float(ends[1]),
    )


def translate_to_identity_frame(domain: CounterexampleDomain) -> IdentityInputs:
    """Shift by -eps e1 so the interior quadratic is centred; subtract gamma."""
    sol, gamma, cfg = domain.solution, domain.gamma, domain.config
    center = -sol.epsilon

    def inner(quad):
        return SurfaceGraph.sphere(quad, sol.R, center=center)

    def outer(quad):
        r = level_radius(sol, gamma, quad.theta, cfg.R2)
        dr, d2r = level_graph_derivatives(sol, r, quad.theta)
        return SurfaceGraph(quad, r, dr, d2r, center=center)

    def field(r, theta):
        j = sol.jet(r, theta)
        return PolarJet(j.N, j.r, j.theta, j.u - gamma, j.u_r, j.u_t, j.u_rr, j.u_rt, j.u_tt)

    return IdentityInputs(
        N=sol.N,
        sigma_c=sol.sigma_c,
        lam2=2 * sol.sigma_c * gamma,
        center=center,
        inner=inner,
        outer=outer,
        field=field,
    )
