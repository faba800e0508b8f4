"""Zonal spherical harmonics, angular quadrature and polar-graph geometry.

Everything here works in the meridian half-plane of an axisymmetric
configuration: a point is described by its polar angle ``theta`` measured
from the symmetry axis ``e1`` and its distance ``r`` to a centre lying on
that axis.  Cartesian meridian coordinates are ``(x1, varrho)`` with
``varrho`` the distance to the axis (signed for N = 2, where the "meridian
plane" is the whole plane).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def eigenvalue(k: int, N: int) -> int:
    """Eigenvalue of -Laplace-Beltrami on S^{N-1} for harmonics of degree k."""
    if k < 0 or N < 2:
        raise ValueError(f"need k >= 0 and N >= 2, got k={k}, N={N}")
    return k * (k + N - 2)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class AngularQuadrature:
    """Nodes/weights with ``sum(w * f(theta)) ~ int_{S^{N-1}} f dS`` for zonal f.

    For N = 2 the nodes are equispaced on [0, 2pi) (trapezoid rule, exact for
    trigonometric polynomials of degree <= n-1).  For N >= 3 they are
    Gauss-Gegenbauer nodes in cos(theta), exact for polynomials in cos(theta)
    of degree <= 2n-1; the weights already carry the |S^{N-2}| sin^{N-2}
    factor.
    """

    N: int
    theta: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def n(self) -> int:
        return self.theta.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


@lru_cache(maxsize=128)
def _gegenbauer_rule(N: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    if N == 3:
        x, w = np.polynomial.legendre.leggauss(n)
    else:
        x, w = special.roots_gegenbauer(n, (N - 2) / 2.0)
    order = np.argsort(-x)  # increasing theta
    return x[order], w[order]


def build_quadrature(N: int, n: int) -> AngularQuadrature:
    """Angular quadrature on S^{N-1} for zonal integrands with n nodes."""
    if N < 2:
        raise ValueError(f"dimension must be >= 2, got {N}")
    if n < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got {n}")
    if N == 2:
        theta = 2.0 * np.pi * np.arange(n) / n
        weights = np.full(n, 2.0 * np.pi / n)
        degree = n - 1
    else:
        x, w = _gegenbauer_rule(N, n)
        theta = np.arccos(x)
        weights = w * sphere_area(N - 1)
        degree = 2 * n - 1
    theta.setflags(write=False)
    weights.setflags(write=False)
    return AngularQuadrature(N=N, theta=theta, weights=weights, degree=degree)


# ---------------------------------------------------------------------------
# zonal basis


@dataclass(frozen=True)
class ZonalBasis:
    """L^2(S^{N-1})-normalised zonal harmonics Y_0..Y_K.

    N = 2: ``Y_0 = 1/sqrt(2pi)``, ``Y_k = cos(k theta)/sqrt(pi)``.
    N >= 3: ``Y_k = n_k C_k^{(N-2)/2}(cos theta)``, with the constants n_k
    obtained once by quadrature.
    """

    N: int
    K: int
    norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"dimension must be >= 2, got {self.N}")
        if self.K < 0:
            raise ValueError(f"truncation degree must be >= 0, got {self.K}")
        object.__setattr__(self, "norms", _zonal_norms(self.N, self.K))

    @property
    def alpha(self) -> float:
        return (self.N - 2) / 2.0

    def _check(self, k: int) -> None:
        if not 0 <= k <= self.K:
            raise ValueError(f"degree {k} outside basis range 0..{self.K}")

    def __call__(self, k: int, theta) -> np.ndarray:
        """Value of Y_k at polar angle(s) theta."""
        self._check(k)
        theta = np.asarray(theta, dtype=float)
        if self.N == 2:
            return self.norms[k] * np.cos(k * theta)
        return self.norms[k] * special.eval_gegenbauer(k, self.alpha, np.cos(theta))

    def derivatives(self, k: int, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(Y_k, dY_k/dtheta, d^2Y_k/dtheta^2) at theta."""
        self._check(k)
        theta = np.asarray(theta, dtype=float)
        c = self.norms[k]
        if self.N == 2:
            return (
                c * np.cos(k * theta),
                -c * k * np.sin(k * theta),
                -c * k * k * np.cos(k * theta),
            )
        a = self.alpha
        x = np.cos(theta)
        s = np.sin(theta)
        val = special.eval_gegenbauer(k, a, x)
        d1 = 2 * a * special.eval_gegenbauer(k - 1, a + 1, x) if k >= 1 else np.zeros_like(x)
        d2 = (
            4 * a * (a + 1) * special.eval_gegenbauer(k - 2, a + 2, x)
            if k >= 2
            else np.zeros_like(x)
        )
        return c * val, -c * s * d1, c * (s * s * d2 - x * d1)

    def matrix(self, theta) -> np.ndarray:
        """Array of shape (K+1, len(theta)) with rows Y_0..Y_K."""
        return np.array([self(k, theta) for k in range(self.K + 1)])

    def synthesize(self, coeffs, theta, derivatives: bool = False):
        """Evaluate sum_k coeffs[k] Y_k(theta) (and theta-derivatives)."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.size > self.K + 1:
            raise ValueError("more coefficients than basis functions")
        theta = np.asarray(theta, dtype=float)
        f = np.zeros_like(theta)
        df = np.zeros_like(theta)
        d2f = np.zeros_like(theta)
        for k, ck in enumerate(coeffs):
            if ck == 0.0:
                continue
            y, dy, d2y = self.derivatives(k, theta)
            f += ck * y
            df += ck * dy
            d2f += ck * d2y
        if derivatives:
            return f, df, d2f
        return f

    def project(self, values, quad: AngularQuadrature) -> np.ndarray:
        """L^2 projection of nodal values onto Y_0..Y_K."""
        if quad.N != self.N:
            raise ValueError("quadrature dimension does not match basis")
        values = np.asarray(values, dtype=float)
        if values.shape != quad.theta.shape:
            raise ValueError("nodal values do not match quadrature nodes")
        return self.matrix(quad.theta) @ (quad.weights * values)


@lru_cache(maxsize=64)
def _zonal_norms(N: int, K: int) -> np.ndarray:
    if N == 2:
        norms = np.full(K + 1, 1.0 / math.sqrt(math.pi))
        norms[0] = 1.0 / math.sqrt(2.0 * math.pi)
    else:
        quad = build_quadrature(N, K + 2)
        x = np.cos(quad.theta)
        a = (N - 2) / 2.0
        norms = np.array(
            [
                1.0 / math.sqrt(quad.integrate(special.eval_gegenbauer(k, a, x) ** 2))
                for k in range(K + 1)
            ]
        )
    norms.setflags(write=False)
    return norms


def zonal_norm_closed_form(N: int, k: int) -> float:
    """Closed-form normalisation of the degree-k zonal harmonic (N >= 3)."""
    if N < 3:
        raise ValueError("closed form is for the Gegenbauer case N >= 3")
    a = (N - 2) / 2.0
    log_h = (
        math.log(math.pi)
        + (1 - 2 * a) * math.log(2.0)
        + math.lgamma(k + 2 * a)
        - math.lgamma(k + 1)
        - math.log(k + a)
        - 2 * math.lgamma(a)
    )
    return 1.0 / math.sqrt(sphere_area(N - 1) * math.exp(log_h))


def zonal_eval(basis: ZonalBasis, k: int, theta) -> np.ndarray:
    return basis(k, theta)


def laplace_beltrami_fd(f, theta, N: int, h: float = 1e-4) -> np.ndarray:
    """Centred-difference zonal Laplace-Beltrami operator applied to f(theta)."""
    theta = np.asarray(theta, dtype=float)
    fp, f0, fm = f(theta + h), f(theta), f(theta - h)
    d2 = (fp - 2 * f0 + fm) / h**2
    if N == 2:
        return d2
    d1 = (fp - fm) / (2 * h)
    return d2 + (N - 2) * d1 / np.tan(theta)


# ---------------------------------------------------------------------------
# radial solutions of the separated Laplace equation


def radial_functions(k: int, N: int, r) -> tuple[np.ndarray, ...]:
    """(s, s', s'', t, t', t'') for the two radial solutions of mode k.

    ``s_k = r^k``; ``t_k = r^{2-N-k}`` except ``t_0 = log r`` when N = 2.
    """
    r = np.asarray(r, dtype=float)
    s = r**k
    ds = k * r ** (k - 1) if k >= 1 else np.zeros_like(r)
    d2s = k * (k - 1) * r ** (k - 2) if k >= 2 else np.zeros_like(r)
    if N == 2 and k == 0:
        t, dt, d2t = np.log(r), 1.0 / r, -1.0 / r**2
    else:
        m = 2 - N - k
        t, dt, d2t = r**m, m * r ** (m - 1), m * (m - 1) * r ** (m - 2)
    return s, ds, d2s, t, dt, d2t


# ---------------------------------------------------------------------------
# pointwise differential data of axisymmetric fields


@dataclass(frozen=True)
class PolarJet:
    """Second-order jet of a zonal field in polar coordinates (r, theta).

    The Cartesian quantities are reported in the meridian frame
    ``(e1, e_varrho)``; the N-2 directions orthogonal to the meridian plane
    carry the Hessian eigenvalue ``lateral = u_varrho / varrho``.
    """

    N: int
    r: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    u_r: np.ndarray
    u_t: np.ndarray
    u_rr: np.ndarray
    u_rt: np.ndarray
    u_tt: np.ndarray

    def _frame(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        e_r = np.stack([c, s], axis=-1)
        e_t = np.stack([-s, c], axis=-1)
        return e_r, e_t

    @property
    def gradient(self) -> np.ndarray:
        e_r, e_t = self._frame()
        return self.u_r[..., None] * e_r + (self.u_t / self.r)[..., None] * e_t

    @property
    def hessian(self) -> np.ndarray:
        """2x2 Hessian in the meridian plane."""
        e_r, e_t = self._frame()
        h_rr = self.u_rr
        h_tt = self.u_r / self.r + self.u_tt / self.r**2
        h_rt = self.u_rt / self.r - self.u_t / self.r**2
        outer = lambda a, b: a[..., :, None] * b[..., None, :]  # noqa: E731
        return (
            h_rr[..., None, None] * outer(e_r, e_r)
            + h_tt[..., None, None] * outer(e_t, e_t)
            + h_rt[..., None, None] * (outer(e_r, e_t) + outer(e_t, e_r))
        )

    @property
    def lateral(self) -> np.ndarray:
        if self.N == 2:
            return np.zeros_like(self.u)
        sin = np.sin(self.theta)
        on_axis = np.abs(sin) < 1e-12
        # zonal fields have u_t = 0 on the axis; the quotient tends to u_tt
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(on_axis, self.u_tt, self.u_t * np.cos(self.theta) / sin)
        return self.u_r / self.r + q / self.r**2

    @property
    def laplacian(self) -> np.ndarray:
        return np.trace(self.hessian, axis1=-2, axis2=-1) + (self.N - 2) * self.lateral

    @property
    def hessian_norm2(self) -> np.ndarray:
        """Squared Frobenius norm of the full N x N Hessian."""
        return np.sum(self.hessian**2, axis=(-2, -1)) + (self.N - 2) * self.lateral**2

    def full_hessian(self) -> np.ndarray:
        """N x N Hessian in the frame (e1, e_varrho, lateral directions...)."""
        shape = self.u.shape + (self.N, self.N)
        out = np.zeros(shape)
        out[..., :2, :2] = self.hessian
        for i in range(2, self.N):
            out[..., i, i] = self.lateral
        return out


@dataclass(frozen=True)
class HarmonicExpansion:
    """``u = q |x|^2 + c + sum_k (a_k s_k(r) + b_k t_k(r)) Y_k(theta)``."""

    basis: ZonalBasis
    a: np.ndarray
    b: np.ndarray
    quad_coef: float = 0.5
    const: float = 0.0

    def jet(self, r, theta) -> PolarJet:
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        if np.any(r <= 0):
            raise ValueError("radial basis is singular at r <= 0")
        q = self.quad_coef
        u = q * r**2 + self.const
        u_r = 2 * q * r
        u_rr = np.full_like(r, 2 * q)
        u_t = np.zeros_like(r)
        u_rt = np.zeros_like(r)
        u_tt = np.zeros_like(r)
        N = self.basis.N
        for k in range(len(self.a)):
            ak, bk = self.a[k], self.b[k]
            if ak == 0.0 and bk == 0.0:
                continue
            s, ds, d2s, t, dt, d2t = radial_functions(k, N, r)
            y, dy, d2y = self.basis.derivatives(k, theta)
            f, df, d2f = ak * s + bk * t, ak * ds + bk * dt, ak * d2s + bk * d2t
            u = u + f * y
            u_r = u_r + df * y
            u_rr = u_rr + d2f * y
            u_t = u_t + f * dy
            u_rt = u_rt + df * dy
            u_tt = u_tt + f * d2y
        return PolarJet(N, r, theta, u, u_r, u_t, u_rr, u_rt, u_tt)


# ---------------------------------------------------------------------------
# polar graphs


@dataclass(frozen=True)
class SurfaceGraph:
    """Axisymmetric surface ``{c e1 + r(theta) theta}`` sampled at quadrature nodes."""

    quad: AngularQuadrature
    r: np.ndarray
    dr: np.ndarray
    d2r: np.ndarray
    center: float = 0.0

    def __post_init__(self):
        n = self.quad.n
        for name in ("r", "dr", "d2r"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            object.__setattr__(self, name, arr)
        if np.any(self.r <= 0):
            raise ValueError("polar graph radius must be positive")

    @property
    def N(self) -> int:
        return self.quad.N

    @classmethod
    def sphere(cls, quad: AngularQuadrature, radius: float, center: float = 0.0):
        n = quad.n
        return cls(quad, np.full(n, float(radius)), np.zeros(n), np.zeros(n), center)

    @classmethod
    def from_zonal(cls, quad, basis: ZonalBasis, base: float, coeffs, center=0.0):
        f, df, d2f = basis.synthesize(coeffs, quad.theta, derivatives=True)
        return cls(quad, base + f, df, d2f, center)


@dataclass(frozen=True)
class SurfaceGeometry:
    points: np.ndarray  # (n, 2) absolute meridian coordinates
    normal: np.ndarray  # (n, 2) outward unit normal
    tangent: np.ndarray  # (n, 2) unit meridian tangent
    kappa_meridian: np.ndarray
    kappa_lateral: np.ndarray
    H: np.ndarray
    dS: np.ndarray  # quadrature weight times area element

    def integrate(self, values) -> float:
        return float(np.dot(self.dS, np.asarray(values, dtype=float)))

    def shape_contraction(self) -> np.ndarray:
        """<D_tau nu x_tau, x_tau> for the position vector x."""
        xt = np.einsum("ij,ij->i", self.points, self.tangent)
        return self.kappa_meridian * xt**2


def surface_geometry(g: SurfaceGraph) -> SurfaceGeometry:
    """Normal, mean curvature H = div_tau(nu)/(N-1) and area element of g."""
    if np.any(g.r <= 0):
        raise ValueError("polar graph radius must be positive")
    N = g.N
    th = g.quad.theta
    c, s = np.cos(th), np.sin(th)
    r, dr, d2r = g.r, g.dr, g.d2r
    speed = np.sqrt(r**2 + dr**2)
    tangent = np.stack([dr * c - r * s, dr * s + r * c], axis=-1) / speed[:, None]
    normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=-1)
    kappa_m = (r**2 + 2 * dr**2 - r * d2r) / speed**3
    if N == 2:
        kappa_l = np.zeros_like(r)
    else:
        kappa_l = normal[:, 1] / (r * s)
    H = (kappa_m + (N - 2) * kappa_l) / (N - 1)
    points = np.stack([g.center + r * c, r * s], axis=-1)
    dS = g.quad.weights * speed * r ** (N - 2)
    return SurfaceGeometry(points, normal, tangent, kappa_m, kappa_l, H, dS)


def tangential_split(grad, normal) -> tuple[np.ndarray, np.ndarray]:
    """Split gradient samples into (tangential part, normal derivative)."""
    grad = np.asarray(grad, dtype=float)
    normal = np.asarray(normal, dtype=float)
    if grad.shape != normal.shape:
        raise ValueError(f"shape mismatch: {grad.shape} vs {normal.shape}")
    f_nu = np.sum(grad * normal, axis=-1)
    return grad - f_nu[..., None] * normal, f_nu
