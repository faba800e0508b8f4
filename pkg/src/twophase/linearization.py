"""Per-mode linearisation of the overdetermination map at the concentric branch.

For a zonal perturbation ``eta = beta Y_k(./R)`` of the inner sphere and
``xi = gamma Y_k`` of the outer sphere, the shape derivative of the annular
Dirichlet solution is ``u' = {(beta A + gamma C) s_k + (beta B + gamma D) t_k} Y_k``
and the derivative of the overdetermination residual acts on ``(beta, gamma)``
through the 2x2 matrix ``M = [[calA, calB], [calC, calD]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .harmonics import eigenvalue, radial_functions
from .radial import require_two_phase


def _check_R(R: float) -> None:
    if not 0 < R < 1:
        raise ValueError(f"inner radius must lie in (0, 1), got {R}")


def _is_log(N: int, k: int) -> bool:
    return N == 2 and k == 0


@dataclass(frozen=True)
class ModeCoefficients:
    k: int
    N: int
    R: float
    sigma_c: float
    A: float
    B: float
    C: float
    D: float

    def radial(self, r):
        """(s_k, s_k', s_k'', t_k, t_k', t_k'') at r."""
        return radial_functions(self.k, self.N, r)

    def boundary_residuals(self) -> np.ndarray:
        """Residuals of the four boundary conditions defining the coefficients."""
        sR, _, _, tR, _, _ = self.radial(self.R)
        s1, _, _, t1, _, _ = self.radial(1.0)
        jump = (1 - self.sigma_c) / self.sigma_c * self.R
        return np.array(
            [
                self.A * sR + self.B * tR - jump,
                self.C * sR + self.D * tR,
                self.A * s1 + self.B * t1,
                self.C * s1 + self.D * t1 + 1.0,
            ]
        )


def mode_coefficients(N: int, sigma_c: float, R: float, k: int) -> ModeCoefficients:
    """Closed-form coefficients of the mode-k shape derivative."""
    _check_R(R)
    if N < 2 or k < 0 or not sigma_c > 0:
        raise ValueError("need N >= 2, k >= 0, sigma_c > 0")
    ratio = (1 - sigma_c) / sigma_c
    if _is_log(N, k):
        L = math.log(R)
        return ModeCoefficients(k, N, R, sigma_c, 0.0, ratio * R / L, -1.0, 1.0 / L)
    q = R ** (N - 2 + 2 * k)
    A = ratio * R ** (N - 1 + k) / (q - 1)
    return ModeCoefficients(k, N, R, sigma_c, A, -A, 1.0 / (q - 1), -q / (q - 1))


def mode_coefficients_solve(N: int, sigma_c: float, R: float, k: int) -> ModeCoefficients:
    """Same coefficients from the 4x4 boundary system (independent check)."""
    _check_R(R)
    sR, _, _, tR, _, _ = radial_functions(k, N, R)
    s1, _, _, t1, _, _ = radial_functions(k, N, 1.0)
    mat = np.array(
        [[sR, tR, 0, 0], [0, 0, sR, tR], [s1, t1, 0, 0], [0, 0, s1, t1]], dtype=float
    )
    rhs = np.array([(1 - sigma_c) / sigma_c * R, 0.0, 0.0, -1.0])
    A, B, C, D = np.linalg.solve(mat, rhs)
    return ModeCoefficients(k, N, R, sigma_c, float(A), float(B), float(C), float(D))


@dataclass(frozen=True)
class LinearizedField:
    coeffs: ModeCoefficients
    beta: float
    gamma: float

    @property
    def a(self) -> float:
        c = self.coeffs
        return self.beta * c.A + self.gamma * c.C

    @property
    def b(self) -> float:
        c = self.coeffs
        return self.beta * c.B + self.gamma * c.D

    def radial_profile(self, r):
        """(f, f', f'') with u' = f(r) Y_k(theta)."""
        s, ds, d2s, t, dt, d2t = self.coeffs.radial(r)
        a, b = self.a, self.b
        return a * s + b * t, a * ds + b * dt, a * d2s + b * d2t

    def __call__(self, r, theta, basis):
        f, _, _ = self.radial_profile(r)
        return f * basis(self.coeffs.k, theta)

    def ode_residual(self, r) -> np.ndarray:
        """f'' + (N-1) f'/r - lambda_k f / r^2 (zero for a harmonic field)."""
        r = np.asarray(r, dtype=float)
        f, df, d2f = self.radial_profile(r)
        N, k = self.coeffs.N, self.coeffs.k
        return d2f + (N - 1) * df / r - eigenvalue(k, N) * f / r**2


def linearized_field(coeffs: ModeCoefficients, beta: float, gamma: float) -> LinearizedField:
    return LinearizedField(coeffs, float(beta), float(gamma))


@dataclass(frozen=True)
class FrechetMatrix:
    calA: float
    calB: float
    calC: float
    calD: float
    k: int
    N: int
    R: float
    sigma_c: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.calA, self.calB], [self.calC, self.calD]])

    @property
    def det(self) -> float:
        return self.calA * self.calD - self.calB * self.calC


def frechet_entries(N: int, sigma_c, R, k: int, log=math.log) -> tuple:
    """(calA, calB, calC, calD) for any real number type supporting ** and log."""
    c = (sigma_c - 1) / sigma_c
    if _is_log(N, k):
        L = log(R)
        # u' = B log r on the beta side, C + D log r on the gamma side
        return c / L, -1 / (R * L), -c * R / L, 1 + 1 / L
    p = N - 2 + 2 * k
    q = R**p
    den = q - 1
    return (
        c * (k * q + k + N - 2) / den,
        (2 - N - 2 * k) * R ** (k - 1) / den,
        c * (2 - N - 2 * k) * R ** (N - 1 + k) / den,
        ((k + N - 1) * q + k - 1) / den,
    )


def frechet_matrix(N: int, sigma_c: float, R: float, k: int) -> FrechetMatrix:
    """Entries of the mode-k linearisation.

    Rows are (inner flux residual, outer flux residual); columns act on the
    inner and outer perturbation amplitudes.
    """
    _check_R(R)
    return FrechetMatrix(*frechet_entries(N, sigma_c, R, k), k, N, R, sigma_c)


def g_polynomial(N: int, k: int, x):
    """Quadratic g in x = R^{N-2+2k} whose roots are the zeros of det M (k >= 2)."""
    a = k * N + k * k - k
    b = -2 * k * N - 2 * k * k + N + 4 * k - 2
    c0 = k * N + k * k - N - 3 * k + 2
    return a * x * x + b * x + c0


def det_M(N: int, sigma_c: float, R: float, k: int) -> float:
    """det M(R, k) with the 2x2 products expanded in q = R^{N-2+2k}.

    Forming calA*calD - calB*calC from rounded entries cancels badly when
    q is small and k <= 1; the expansion below is algebraically identical.
    """
    _check_R(R)
    c = (sigma_c - 1) / sigma_c
    if _is_log(N, k):
        return c / math.log(R)
    p = N - 2 + 2 * k
    q = R**p
    # (k q + k+N-2)((k+N-1) q + k-1) - p^2 q
    n2 = k * (k + N - 1)
    n1 = k * (k - 1) + (k + N - 2) * (k + N - 1) - p * p
    n0 = (k + N - 2) * (k - 1)
    return c * ((n2 * q + n1) * q + n0) / (q - 1) ** 2


def det_M_factored(N: int, sigma_c: float, R: float, k: int) -> float:
    """Closed forms of det M for each regime of k."""
    _check_R(R)
    c = (sigma_c - 1) / sigma_c
    if k == 0:
        if N == 2:
            return c / math.log(R)
        return c * (N - 2) * R ** (2 - N) / (1 - R ** (2 - N))
    if k == 1:
        return c * N * R**N / (R**N - 1)
    x = R ** (N - 2 + 2 * k)
    return c * g_polynomial(N, k, x) / (x - 1) ** 2


@dataclass(frozen=True)
class CriticalRadius:
    k: int
    N: int
    R_star: float
    provenance: str


def _critical_closed(N: int, k: int) -> float:
    x = 1 - (N + 2 * k - 2) / (k * N + k * k - k)
    return x ** (1.0 / (N - 2 + 2 * k))


def _critical_root(N: int, k: int, sigma_c: float) -> float:
    lo, hi = 1e-6, 1 - 1e-6
    grid = np.linspace(lo, hi, 1000)
    vals = np.array([det_M(N, sigma_c, R, k) for R in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size != 1:
        raise RuntimeError(f"expected one sign change of det M, found {idx.size}")
    i = int(idx[0])
    return optimize.bisect(
        lambda R: det_M(N, sigma_c, R, k), grid[i], grid[i + 1], xtol=1e-13, maxiter=200
    )


def critical_radius(
    N: int, k: int, method: str = "closed-form", sigma_c: float = 2.0
) -> CriticalRadius:
    """Radius in (0, 1) where det M(., k) vanishes (k >= 2 only)."""
    if k < 2:
        raise ValueError(f"no critical radius for k = {k}; det M(R, k) never vanishes for k < 2")
    if N < 2:
        raise ValueError(f"dimension must be >= 2, got {N}")
    if method == "closed-form":
        R = _critical_closed(N, k)
    elif method == "root-found":
        require_two_phase(sigma_c)
        R = _critical_root(N, k, sigma_c)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CriticalRadius(k, N, float(R), method)


def dR_frechet_matrix(N: int, sigma_c: float, R: float, k: int) -> tuple[np.ndarray, float]:
    """Entrywise analytic R-derivative of M and its determinant."""
    _check_R(R)
    c = (sigma_c - 1) / sigma_c
    if _is_log(N, k):
        L = math.log(R)
        d = np.array(
            [
                [-c / (R * L * L), (L + 1) / (R * L) ** 2],
                [-c * (L - 1) / (L * L), -1 / (R * L * L)],
            ]
        )
        return d, float(np.linalg.det(d))
    p = N - 2 + 2 * k
    q = R**p
    dq = p * R ** (p - 1)
    den2 = (q - 1) ** 2
    # both diagonal quotients collapse to -p q'/(q-1)^2
    dA = -c * p * dq / den2
    dD = -p * dq / den2
    m = 2 - N - 2 * k

    def quot(e):
        # d/dR [R^e / (q - 1)]
        return (e * R ** (e - 1) * (q - 1) - R**e * dq) / den2

    dB = m * quot(k - 1)
    dC = c * m * quot(N - 1 + k)
    d = np.array([[dA, dB], [dC, dD]])
    return d, float(dA * dD - dB * dC)


def det_dR_closed(N: int, sigma_c: float, R: float, k: int) -> float:
    """Closed form of det dM/dR for the power-law branch."""
    if _is_log(N, k):
        raise ValueError("closed form does not cover the logarithmic mode (N=2, k=0)")
    p = N - 2 + 2 * k
    return (
        (1 - sigma_c)
        / sigma_c
        * R ** (2 * k + N - 4)
        / (R**p - 1) ** 2
        * (N + 2 * k - 2) ** 2
        * (N + k - 1)
        * (k - 1)
    )


def kernel_vector(N: int, sigma_c: float, k: int) -> tuple[float, float]:
    """Unit null vector (beta, gamma) of M(R*(k), k), first nonzero entry positive."""
    require_two_phase(sigma_c)
    R = critical_radius(N, k).R_star
    m = frechet_matrix(N, sigma_c, R, k)
    v = np.array([-m.calB, m.calA])
    v /= np.linalg.norm(v)
    first = v[np.nonzero(np.abs(v) > 1e-15)[0][0]]
    if first < 0:
        v = -v
    return float(v[0]), float(v[1])
