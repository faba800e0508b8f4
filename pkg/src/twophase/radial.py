"""Concentric two-phase configuration: transmission constant and radial solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhaseConfig:
    """Core B_rho with conductivity sigma_c inside the unit ball B_1 in R^N."""

    N: int
    sigma_c: float
    rho: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"dimension must be >= 2, got {self.N}")
        if not self.sigma_c > 0:
            raise ValueError(f"sigma_c must be positive, got {self.sigma_c}")
        if not 0 < self.rho < 1:
            raise ValueError(f"inner radius must lie in (0, 1), got {self.rho}")

    @property
    def single_phase(self) -> bool:
        return self.sigma_c == 1.0


def require_two_phase(sigma_c: float) -> None:
    if sigma_c == 1.0:
        raise ValueError("sigma_c = 1 is the single-phase case; the bifurcation data degenerate")


def transmission_constant(config: PhaseConfig) -> float:
    """T(rho) = (1 - sigma_c) rho^2 + sigma_c."""
    return (1.0 - config.sigma_c) * config.rho**2 + config.sigma_c


@dataclass(frozen=True)
class RadialSolution:
    config: PhaseConfig
    T: float

    def u(self, r):
        r = np.asarray(r, dtype=float)
        sc = self.config.sigma_c
        return np.where(r <= self.config.rho, (r**2 - self.T) / (2 * sc), (r**2 - 1) / 2)

    def du(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.config.rho, r / self.config.sigma_c, r)

    def u_inner(self, r):
        return (np.asarray(r, dtype=float) ** 2 - self.T) / (2 * self.config.sigma_c)

    def u_outer(self, r):
        return (np.asarray(r, dtype=float) ** 2 - 1) / 2

    def du_inner(self, r):
        return np.asarray(r, dtype=float) / self.config.sigma_c

    def du_outer(self, r):
        return np.asarray(r, dtype=float)

    def d2u(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.config.rho, 1.0 / self.config.sigma_c, 1.0)

    def laplacian(self, r):
        """Radial Laplacian u'' + (N-1)u'/r, equal to N/sigma piecewise."""
        r = np.asarray(r, dtype=float)
        return self.d2u(r) + (self.config.N - 1) * self.du(r) / r

    def interface_residuals(self) -> dict[str, float]:
        """Dirichlet, continuity and flux-jump residuals at r = 1 and r = rho."""
        cfg = self.config
        rho, sc = cfg.rho, cfg.sigma_c
        return {
            "dirichlet": abs(float(self.u_outer(1.0))),
            "continuity": abs(float(self.u_outer(rho) - self.u_inner(rho))),
            "flux_jump": abs(float(self.du_outer(rho) - sc * self.du_inner(rho))),
        }


def radial_solution(config: PhaseConfig) -> RadialSolution:
    return RadialSolution(config, transmission_constant(config))


def trivial_residual(config: PhaseConfig) -> tuple[float, float]:
    """Overdetermination residuals of the concentric configuration.

    ``r1 = |u_nu - <x, nu>|`` on the inner sphere (outer-phase trace) and
    ``r2 = |u_nu - 1|`` on the outer sphere.
    """
    sol = radial_solution(config)
    rho = config.rho
    r1 = abs(float(sol.du_outer(rho)) - rho)
    r2 = abs(float(sol.du_outer(1.0)) - 1.0)
    return r1, r2


def rescale_unit_inner(config: PhaseConfig) -> tuple[float, float]:
    """Map to the frame with D = B_1, Omega = B_R.

    Returns ``(R, lambda^2)`` with ``R = 1/rho`` and
    ``lambda^2 = sigma_c R^2 + 1 - sigma_c``.
    """
    R = 1.0 / config.rho
    return R, config.sigma_c * R**2 + 1.0 - config.sigma_c
