"""Newton continuation of the non-radial branch emanating from (0, 0, R*(k*))."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .annulus import (
    PerturbedAnnulus,
    ResolutionError,
    default_resolution,
    overdet_residual,
    solve_dirichlet,
)
from .harmonics import build_quadrature, surface_geometry
from .linearization import critical_radius, kernel_vector
from .radial import require_two_phase

log = logging.getLogger(__name__)


class BranchError(RuntimeError):
    """Newton or continuation failure; carries the last accepted data."""

    def __init__(self, msg, last=None):
        super().__init__(msg)
        self.last = last


@dataclass(frozen=True)
class BranchPoint:
    t: float
    k_star: int
    eta_hat: np.ndarray
    xi_hat: np.ndarray
    rho: float
    residual_norm: float = np.inf
    newton_iters: int = 0

    @property
    def K(self) -> int:
        return self.eta_hat.size - 1

    def domain(self, N: int) -> PerturbedAnnulus:
        return PerturbedAnnulus(N, self.rho, self.eta_hat, self.xi_hat)


@dataclass(frozen=True)
class Resolution:
    K: int
    K_solver: int
    n_colloc: int

    @classmethod
    def default(cls, k_star: int, K: int | None = None, K_solver=None, n_colloc=None):
        K = k_star + 6 if K is None else K
        Ks, n = default_resolution(K, K_solver, n_colloc)
        return cls(K, Ks, n)


def _residual_vector(N, sigma_c, rho, eta, xi, res: Resolution) -> np.ndarray:
    dom = PerturbedAnnulus(N, rho, eta, xi)
    sol = solve_dirichlet(dom, sigma_c, res.K_solver, res.n_colloc)
    return overdet_residual(sol, dom).modes


def point_residual(p: BranchPoint, N: int, sigma_c: float, res: Resolution) -> float:
    return float(np.max(np.abs(_residual_vector(N, sigma_c, p.rho, p.eta_hat, p.xi_hat, res))))


def newton_solve(
    guess: BranchPoint,
    N: int,
    sigma_c: float,
    res: Resolution | None = None,
    tol: float = 1e-11,
    max_iter: int = 20,
    fd_step: float = 1e-6,
) -> BranchPoint:
    """Solve the projected F = 0 with eta_hat[k*] pinned to guess.t."""
    k = guess.k_star
    res = res or Resolution.default(k, guess.K)
    K = res.K
    if guess.K != K:
        raise ValueError(f"guess truncation {guess.K} does not match resolution K={K}")
    free = np.array([j for j in range(K + 1) if j != k])

    def unpack(z):
        eta = np.empty(K + 1)
        eta[free] = z[: K]
        eta[k] = guess.t
        return eta, z[K : 2 * K + 1], z[-1]

    def G(z):
        eta, xi, rho = unpack(z)
        try:
            return _residual_vector(N, sigma_c, rho, eta, xi, res)
        except ValueError as exc:  # degenerate annulus
            raise BranchError(f"annulus degenerated during Newton: {exc}") from exc

    z = np.concatenate([guess.eta_hat[free], guess.xi_hat, [guess.rho]])
    F = G(z)
    it = 0
    while np.max(np.abs(F)) > tol:
        if it >= max_iter:
            raise BranchError(
                f"Newton did not converge in {max_iter} iterations "
                f"(residual {np.max(np.abs(F)):.3e})"
            )
        J = np.empty((F.size, z.size))
        for j in range(z.size):
            e = np.zeros_like(z)
            e[j] = fd_step
            J[:, j] = (G(z + e) - G(z - e)) / (2 * fd_step)
        cond = np.linalg.cond(J)
        if cond > 1e12:
            raise BranchError(f"singular Newton Jacobian (cond {cond:.3g})")
        dz = np.linalg.solve(J, -F)
        z = z + dz
        F = G(z)
        it += 1
        log.debug("newton t=%g iter=%d |F|=%.3e", guess.t, it, np.max(np.abs(F)))
        if np.max(np.abs(dz)) < 1e-15:
            break
    eta, xi, rho = unpack(z)
    return BranchPoint(guess.t, k, eta, xi.copy(), float(rho), float(np.max(np.abs(F))), it)


@dataclass
class BranchDiagram:
    N: int
    sigma_c: float
    k_star: int
    R_star: float
    beta: float
    gamma: float
    resolution: Resolution
    points: list[BranchPoint] = field(default_factory=list)
    probe: BranchPoint | None = None

    @property
    def kernel_ratio(self) -> float:
        return self.gamma / self.beta

    @property
    def tangent_ratio(self) -> float:
        p = self.probe
        return p.xi_hat[self.k_star] / p.eta_hat[self.k_star]

    @property
    def tangent_error(self) -> float:
        return abs(self.tangent_ratio - self.kernel_ratio) / abs(self.kernel_ratio)


def _kernel_guess(t, k, R_star, ratio, K) -> BranchPoint:
    eta = np.zeros(K + 1)
    xi = np.zeros(K + 1)
    eta[k] = t
    xi[k] = t * ratio
    return BranchPoint(t, k, eta, xi, R_star)


def trace_branch(
    N: int,
    sigma_c: float,
    k_star: int,
    t_max: float,
    steps: int,
    res: Resolution | None = None,
    tol: float = 1e-11,
    probe_t: float = 1e-3,
) -> BranchDiagram:
    """Continue the branch in the pinned amplitude t = eta_hat[k*] over [0, t_max]."""
    if k_star < 2:
        raise ValueError("bifurcation requires k* >= 2")
    require_two_phase(sigma_c)
    if steps < 1:
        raise ValueError("need at least one continuation step")
    res = res or Resolution.default(k_star)
    if res.K < k_star + 4:
        raise ValueError(f"truncation K={res.K} must be >= k*+4={k_star + 4}")
    R_star = critical_radius(N, k_star).R_star
    beta, gamma = kernel_vector(N, sigma_c, k_star)
    ratio = gamma / beta
    diag = BranchDiagram(N, sigma_c, k_star, R_star, beta, gamma, res)

    start = _kernel_guess(0.0, k_star, R_star, ratio, res.K)
    start = replace(start, residual_norm=point_residual(start, N, sigma_c, res))
    diag.points.append(start)
    try:
        diag.probe = newton_solve(
            _kernel_guess(probe_t, k_star, R_star, ratio, res.K), N, sigma_c, res, tol
        )
        ts = np.linspace(0.0, t_max, steps + 1)
        for t in ts[1:]:
            prev = diag.points[-1]
            dt = t - prev.t
            eta = prev.eta_hat.copy()
            xi = prev.xi_hat.copy()
            eta[k_star] = t
            xi[k_star] += dt * ratio
            guess = BranchPoint(float(t), k_star, eta, xi, prev.rho)
            diag.points.append(newton_solve(guess, N, sigma_c, res, tol))
    except (BranchError, ResolutionError) as exc:
        raise BranchError(f"continuation stopped: {exc}", last=diag) from exc
    return diag


def reflect_point(p: BranchPoint) -> BranchPoint:
    """Image under the quarter-turn rotation (N = 2): flips modes k = 2 mod 4."""
    sign = np.array([(-1.0) ** (k // 2) if k % 2 == 0 else 1.0 for k in range(p.K + 1)])
    odd = max(np.max(np.abs(p.eta_hat[1::2]), initial=0), np.max(np.abs(p.xi_hat[1::2]), initial=0))
    if odd > 1e-10:
        raise ValueError("quarter-turn image is zonal only for even-mode configurations")
    sign[1::2] = 0.0  # odd modes are round-off here
    return replace(p, t=-p.t, eta_hat=p.eta_hat * sign, xi_hat=p.xi_hat * sign)


@dataclass(frozen=True)
class BranchCertificate:
    residual_hi: float
    dirichlet_inner: float
    flux_inner: float
    dirichlet_outer: float
    u_max_interior: float
    tol: float

    @property
    def residual_ok(self) -> bool:
        return self.residual_hi <= 2 * self.tol

    @property
    def radiality_ok(self) -> bool:
        return self.dirichlet_inner <= self.tol and self.flux_inner <= self.tol

    @property
    def max_principle_ok(self) -> bool:
        return self.u_max_interior < 0

    @property
    def passed(self) -> bool:
        return self.residual_ok and self.radiality_ok and self.max_principle_ok


def verify_branch_point(
    p: BranchPoint,
    N: int,
    sigma_c: float,
    res: Resolution | None = None,
    tol: float = 1e-8,
    n_fine: int = 2000,
) -> BranchCertificate:
    """Re-solve at higher resolution and check Cauchy data on the traced core boundary."""
    res = res or Resolution.default(p.k_star, p.K)
    hi = Resolution(res.K, res.K_solver + 4, 2 * res.n_colloc)
    dom = p.domain(N)
    sol = solve_dirichlet(dom, sigma_c, hi.K_solver, hi.n_colloc)
    F = overdet_residual(sol, dom)
    residual_hi = float(np.max(np.abs(F.modes)))

    # off-node Cauchy data on the inner surface
    fine = build_quadrature(N, n_fine)
    th = fine.theta
    geo = surface_geometry(dom.inner_graph(fine))
    r_in = dom.r_in(th)
    jet = sol.expansion.jet(r_in, th)
    dirichlet = np.abs(jet.u - (r_in**2 - sol.T) / (2 * sigma_c))
    flux = np.abs(np.sum((jet.gradient - geo.points) * geo.normal, axis=1))
    r_out = dom.r_out(th)
    outer = np.abs(sol.expansion.jet(r_out, th).u)

    # interior samples for the maximum principle, 40 angles x 25 radii
    th_s = np.linspace(0.0, np.pi, 40)
    frac = (np.arange(25) + 0.5) / 25
    ri, ro = dom.r_in(th_s), dom.r_out(th_s)
    rr = ri[:, None] + frac[None, :] * (ro - ri)[:, None]
    tt = np.broadcast_to(th_s[:, None], rr.shape)
    u_int = sol.expansion.jet(rr, tt).u
    return BranchCertificate(
        residual_hi=residual_hi,
        dirichlet_inner=float(dirichlet.max()),
        flux_inner=float(flux.max()),
        dirichlet_outer=float(outer.max()),
        u_max_interior=float(u_int.max()),
        tol=tol,
    )


def outer_oscillation(p: BranchPoint, N: int, n: int = 2001) -> float:
    th = np.linspace(0.0, np.pi, n)
    r = p.domain(N).r_out(th)
    return float(r.max() - r.min())


def tangency_ratio(
    N: int, sigma_c: float, k_star: int, t: float, res: Resolution | None = None
) -> tuple[float, float]:
    """Sup-norm of F along the kernel direction at t and t/2."""
    res = res or Resolution.default(k_star)
    R_star = critical_radius(N, k_star).R_star
    beta, gamma = kernel_vector(N, sigma_c, k_star)
    out = []
    for s in (t, t / 2):
        eta = np.zeros(res.K + 1)
        xi = np.zeros(res.K + 1)
        eta[k_star] = s * beta
        xi[k_star] = s * gamma
        dom = PerturbedAnnulus(N, R_star, eta, xi)
        sol = solve_dirichlet(dom, sigma_c, res.K_solver, res.n_colloc)
        out.append(overdet_residual(sol, dom).sup)
    return out[0], out[1]


def pinned_mode_diagnostic(
    N: int, sigma_c: float, k: int, t: float, rho: float, res: Resolution | None = None
) -> dict:
    """Try to sustain amplitude t in mode k; for k <= 1 no branch exists.

    Returns ``{"k", "status", "detail"}`` with status ``"sustained"`` when
    Newton converges to an accepted point and ``"collapsed"`` otherwise.
    """
    res = res or Resolution.default(max(k, 2))
    eta = np.zeros(res.K + 1)
    eta[k] = t
    guess = BranchPoint(t, k, eta, np.zeros(res.K + 1), rho)
    try:
        p = newton_solve(guess, N, sigma_c, res)
    except (BranchError, ResolutionError) as exc:
        return {"k": k, "status": "collapsed", "detail": str(exc)}
    return {"k": k, "status": "sustained", "detail": f"rho={p.rho:.12g}", "point": p}
