"""The continuous telegraph equation

    phi_XY + beta1 phi_Y + beta2 phi_X = u,   phi(x,0) = chi(x), phi(0,y) = psi(y),

solved two independent ways: through the Riemann function

    R(X,Y;x,y) = (1/2 pi i) oint_{-beta1} (beta2-beta1)/((z+beta1)(z+beta2))
                 * exp[(beta1-beta2)(-(X-x) z/(z+beta2) + (Y-y) z/(z+beta1))] dz

with the solution formula

    phi(X,Y) = psi(0) R(X,Y;0,0) + int_0^Y R(X,Y;0,y)(psi' + beta2 psi) dy
             + int_0^X R(X,Y;x,0)(chi' + beta1 chi) dx + int int R u,

and through Picard iteration on the integrated form

    phi(X,Y) + lam int_0^X phi + mu int_0^Y phi + nu int int phi = g(X,Y).

The contour integral collapses to exp(-beta1 dX - beta2 dY) I_0(2 sqrt(beta1
beta2 dX dY)); the closed form is what the inner quadrature loops evaluate
(it is cross-checked against the contour definition in the test suite).  The
Picard solver sweeps cells sized so the in-cell map is a contraction, in the
order that makes data outside the active cell already final.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e, roots_legendre

from .backends import impl
from .contours import ContourSpec, contour_integrate
from .core import Field2D


@dataclass(frozen=True)
class ContinuousProblem:
    """Rates, boundary callables, and optional source over [0,a]x[0,b].

    chi and psi take numpy arrays; chi_prime/psi_prime are optional analytic
    derivatives (central differences with step h_fd are used otherwise);
    u(x, y) broadcasts over arrays, or is None for the homogeneous equation.
    """

    beta1: float
    beta2: float
    chi: object
    psi: object
    u: object = None
    domain: tuple = (1.0, 1.0)
    chi_prime: object = None
    psi_prime: object = None
    h_fd: float = 1e-6

    def __post_init__(self):
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise ValueError("beta1, beta2 must be positive")
        if self.beta1 == self.beta2:
            raise ValueError("beta1 = beta2 collides the Riemann-function poles")
        if self.domain[0] <= 0 or self.domain[1] <= 0:
            raise ValueError("domain must have positive extent")
        c0 = float(np.asarray(self.chi(np.zeros(1)))[0])
        p0 = float(np.asarray(self.psi(np.zeros(1)))[0])
        if abs(c0 - p0) > 1e-12 * max(1.0, abs(c0)):
            raise ValueError("chi(0) and psi(0) must agree")

    def corner(self) -> float:
        return float(np.asarray(self.psi(np.zeros(1)))[0])

    def dchi(self, x):
        if self.chi_prime is not None:
            return self.chi_prime(x)
        h = self.h_fd
        return (self.chi(x + h) - self.chi(np.maximum(x - h, 0.0))) / \
            (h + np.minimum(x, h))

    def dpsi(self, y):
        if self.psi_prime is not None:
            return self.psi_prime(y)
        h = self.h_fd
        return (self.psi(y + h) - self.psi(np.maximum(y - h, 0.0))) / \
            (h + np.minimum(y, h))


@dataclass(frozen=True)
class IntegratedProblem:
    """Coefficients and right-hand side of the integrated equation."""

    lam: float
    mu: float
    nu: float
    g: object
    domain: tuple = (1.0, 1.0)


class PicardError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Riemann function
# ---------------------------------------------------------------------------

def riemann(beta1: float, beta2: float, dX: float, dY: float) -> float:
    """Contour-integral definition, evaluated on a circle around -beta1."""
    if beta1 <= 0 or beta2 <= 0 or beta1 == beta2:
        raise ValueError("need positive distinct beta1, beta2")
    if dX < 0 or dY < 0:
        raise ValueError("offsets must be nonnegative")
    spec = ContourSpec(center=-beta1, radius=abs(beta2 - beta1) / 2.0,
                       nodes=64, inside=(-beta1,), outside=(-beta2,))
    d = beta1 - beta2

    def f(z):
        return (-d / ((z + beta1) * (z + beta2))
                * np.exp(d * (-dX * z / (z + beta2) + dY * z / (z + beta1))))

    return float(contour_integrate(f, spec, rtol=1e-13).real)


def riemann_fast(beta1: float, beta2: float, dX, dY):
    """Closed form exp(-b1 dX - b2 dY) I0(2 sqrt(b1 b2 dX dY)), vectorized.

    Written with the exponentially scaled Bessel function, so the result never
    overflows: the exponent -(sqrt(b1 dX) - sqrt(b2 dY))^2 is nonpositive.
    """
    dX = np.asarray(dX, dtype=np.float64)
    dY = np.asarray(dY, dtype=np.float64)
    t = 2.0 * np.sqrt(beta1 * beta2 * np.maximum(dX, 0.0) * np.maximum(dY, 0.0))
    return np.exp(-beta1 * dX - beta2 * dY + t) * i0e(t)


def riemann_property_residuals(beta1: float, beta2: float,
                               window=((0.1, 2.0), (0.1, 2.0)),
                               h_fd: float = 1e-3, n: int = 7) -> dict:
    """Finite-difference residuals of the four defining properties of R.

    Property 1 is the homogeneous equation in (X, Y); 2 and 3 are the
    exponential edge laws in both argument pairs; 4 is R = 1 at zero offset.
    Central differences make the residuals O(h_fd^2).
    """
    xs = np.linspace(window[0][0], window[0][1], n)
    ys = np.linspace(window[1][0], window[1][1], n)
    DX, DY = np.meshgrid(xs, ys, indexing="ij")
    h = h_fd
    R = lambda a, b: riemann_fast(beta1, beta2, a, b)  # noqa: E731
    r_xy = (R(DX + h, DY + h) - R(DX - h, DY + h)
            - R(DX + h, DY - h) + R(DX - h, DY - h)) / (4 * h * h)
    r_x = (R(DX + h, DY) - R(DX - h, DY)) / (2 * h)
    r_y = (R(DX, DY + h) - R(DX, DY - h)) / (2 * h)
    prop1 = np.abs(r_xy + beta1 * r_y + beta2 * r_x).max()
    # on Y = y the function is exp(-beta1 dX): check d/dX + beta1 and d/dx - beta1
    edge_x = (R(xs + h, 0.0) - R(xs - h, 0.0)) / (2 * h) + beta1 * R(xs, 0.0)
    edge_y = (R(0.0, ys + h) - R(0.0, ys - h)) / (2 * h) + beta2 * R(0.0, ys)
    return {
        "equation": float(prop1),
        "edge_x": float(np.abs(edge_x).max()),
        "edge_y": float(np.abs(edge_y).max()),
        "unit_at_origin": abs(float(riemann_fast(beta1, beta2, 0.0, 0.0)) - 1.0),
    }


# ---------------------------------------------------------------------------
# quadrature solution
# ---------------------------------------------------------------------------

_GL_CACHE: dict = {}


def _gl(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = roots_legendre(n)
    return _GL_CACHE[n]


def _boundary_terms(p: ContinuousProblem, X, Y, n: int):
    """psi(0) R + int_0^Y R(psi'+b2 psi) + int_0^X R(chi'+b1 chi) at targets.

    X, Y are equal-length arrays; Gauss-Legendre with n nodes per axis.
    """
    xg, wg = _gl(n)
    X = np.atleast_1d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_1d(np.asarray(Y, dtype=np.float64))
    out = p.corner() * riemann_fast(p.beta1, p.beta2, X, Y)
    # y-integral: nodes scale with each target's Y
    yq = 0.5 * Y[:, None] * (xg[None, :] + 1.0)
    wy = 0.5 * Y[:, None] * wg[None, :]
    gy = p.dpsi(yq) + p.beta2 * p.psi(yq)
    out = out + np.sum(wy * riemann_fast(p.beta1, p.beta2, X[:, None], Y[:, None] - yq) * gy, axis=1)
    xq = 0.5 * X[:, None] * (xg[None, :] + 1.0)
    wx = 0.5 * X[:, None] * wg[None, :]
    gx = p.dchi(xq) + p.beta1 * p.chi(xq)
    out = out + np.sum(wx * riemann_fast(p.beta1, p.beta2, X[:, None] - xq, Y[:, None]) * gx, axis=1)
    return out


def _source_term(p: ContinuousProblem, X, Y, n: int):
    """Midpoint rule for int_0^X int_0^Y R(X,Y;x,y) u(x,y) dx dy at targets."""
    X = np.atleast_1d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_1d(np.asarray(Y, dtype=np.float64))
    out = np.zeros_like(X)
    t = (np.arange(n) + 0.5) / n
    for k in range(X.shape[0]):
        xq = X[k] * t
        yq = Y[k] * t
        XX, YY = np.meshgrid(xq, yq, indexing="ij")
        vals = riemann_fast(p.beta1, p.beta2, X[k] - XX, Y[k] - YY) * p.u(XX, YY)
        out[k] = vals.sum() * (X[k] / n) * (Y[k] / n)
    return out


def solve_quadrature(p: ContinuousProblem, grid, tol: float = 1e-7,
                     max_nodes: int = 4096):
    """Evaluate the Riemann-function solution formula.

    grid may be (nx, ny) for a Field2D over the problem domain, or an
    (npts, 2) array of target points (returns the values).  Node counts double
    until the result moves by less than tol in the sup norm.
    """
    if isinstance(grid, tuple) and len(grid) == 2 and isinstance(grid[0], int):
        nx, ny = grid
        xs = np.linspace(0.0, p.domain[0], nx + 1)
        ys = np.linspace(0.0, p.domain[1], ny + 1)
        XX, YY = np.meshgrid(xs, ys, indexing="ij")
        vals = _solve_targets(p, XX.ravel(), YY.ravel(), tol, max_nodes)
        return Field2D(vals.reshape(nx + 1, ny + 1),
                       dx=p.domain[0] / nx, dy=p.domain[1] / ny)
    pts = np.asarray(grid, dtype=np.float64)
    return _solve_targets(p, pts[:, 0], pts[:, 1], tol, max_nodes)


def _solve_targets(p: ContinuousProblem, X, Y, tol, max_nodes):
    # boundary integrals: Gauss-Legendre converges spectrally, double to tol/10
    n = 32
    out = prev = _boundary_terms(p, X, Y, n)
    while n < max_nodes:
        n *= 2
        out = _boundary_terms(p, X, Y, n)
        if np.max(np.abs(out - prev)) < 0.1 * tol:
            break
        prev = out
    if p.u is None:
        return out
    # source integral: composite midpoint doubling; the two-point Richardson
    # extrapolate (4 I_2n - I_n)/3 is returned and used for the stop test
    n = 32
    cur = _source_term(p, X, Y, n)
    prev_extrap = None
    while n < max_nodes:
        n *= 2
        nxt = _source_term(p, X, Y, n)
        extrap = (4.0 * nxt - cur) / 3.0
        if prev_extrap is not None and np.max(np.abs(extrap - prev_extrap)) < tol:
            return out + extrap
        prev_extrap = extrap
        cur = nxt
    return out + prev_extrap


# ---------------------------------------------------------------------------
# Picard iteration on the integrated equation
# ---------------------------------------------------------------------------

def integrated_from_telegraph(p: ContinuousProblem, grid: tuple) -> np.ndarray:
    """Right-hand side g of the integrated form on an (nx+1, ny+1) node grid."""
    nx, ny = grid
    a, b = p.domain
    xs = np.linspace(0.0, a, nx + 1)
    ys = np.linspace(0.0, b, ny + 1)
    chi = p.chi(xs)
    psi = p.psi(ys)
    dx = a / nx
    dy = b / ny
    cchi = np.concatenate(([0.0], np.cumsum(0.5 * dx * (chi[:-1] + chi[1:]))))
    cpsi = np.concatenate(([0.0], np.cumsum(0.5 * dy * (psi[:-1] + psi[1:]))))
    g = (chi[:, None] + psi[None, :] - chi[0]
         + p.beta1 * cchi[:, None] + p.beta2 * cpsi[None, :])
    if p.u is not None:
        XX, YY = np.meshgrid(xs, ys, indexing="ij")
        u = p.u(XX, YY)
        cu = np.zeros_like(u)
        cu[1:, :] = np.cumsum(0.5 * dx * (u[:-1, :] + u[1:, :]), axis=0)
        cu2 = np.zeros_like(u)
        cu2[:, 1:] = np.cumsum(0.5 * dy * (cu[:, :-1] + cu[:, 1:]), axis=1)
        g = g + cu2
    return g


def picard_solve(p: IntegratedProblem, grid: tuple = (256, 256),
                 tol: float = 1e-10, max_iter: int = 200) -> Field2D:
    """Fixed point of Theta f = g - lam Ix f - mu Iy f - nu Ixy f by cell sweeping.

    Cells are sized so (|lam|+|mu|+|nu|)(sx+sy+sx*sy) <= 1/2, which makes the
    in-cell map a contraction; cells to the left and below are already final
    when a cell is solved, exactly as in the translation argument behind
    uniqueness.  Raises PicardError with the last residual on non-convergence.
    """
    nx, ny = grid
    a, b = p.domain
    if callable(p.g):
        xs = np.linspace(0.0, a, nx + 1)
        ys = np.linspace(0.0, b, ny + 1)
        XX, YY = np.meshgrid(xs, ys, indexing="ij")
        g = np.asarray(p.g(XX, YY), dtype=np.float64)
    else:
        g = np.asarray(p.g, dtype=np.float64)
        if g.shape != (nx + 1, ny + 1):
            raise ValueError("g grid does not match the requested grid")
    dx = a / nx
    dy = b / ny
    ctot = abs(p.lam) + abs(p.mu) + abs(p.nu)
    if ctot == 0.0:
        return Field2D(g.copy(), dx=dx, dy=dy)
    # cell side s with ctot (2s + s^2) = 1/2, clipped to the domain
    s = math.sqrt(1.0 + 0.5 / ctot) - 1.0
    knx = max(1, min(nx, int(s / dx)))
    kny = max(1, min(ny, int(s / dy)))
    if ctot * (knx * dx + kny * dy + knx * dx * kny * dy) >= 1.0:
        raise PicardError("grid too coarse to form contracting cells; refine it")
    xe = np.arange(0, nx + 1, knx, dtype=np.int64)
    if xe[-1] != nx:
        xe = np.append(xe, nx)
    ye = np.arange(0, ny + 1, kny, dtype=np.int64)
    if ye[-1] != ny:
        ye = np.append(ye, ny)
    phi, ok, resid = impl.picard_sweep(g, p.lam, p.mu, p.nu, dx, dy, xe, ye,
                                       tol, max_iter)
    if not ok:
        raise PicardError(f"no convergence after {max_iter} iterations; "
                          f"last sup-change {resid:.3e}")
    return Field2D(phi, dx=dx, dy=dy)


def picard_solve_telegraph(p: ContinuousProblem, grid: tuple = (256, 256),
                           tol: float = 1e-10, max_iter: int = 200) -> Field2D:
    """Picard route for the telegraph problem itself (lam=beta1, mu=beta2, nu=0)."""
    g = integrated_from_telegraph(p, grid)
    ip = IntegratedProblem(p.beta1, p.beta2, 0.0, g, p.domain)
    return picard_solve(ip, grid, tol, max_iter)


# ---------------------------------------------------------------------------
# closed forms for Bernoulli-profile boundary data
# ---------------------------------------------------------------------------

def homogeneous_bernoulli_shape(x: float, y: float, p1: float, p2: float,
                                beta1: float, beta2: float) -> float:
    """The homogeneous solution with chi(x) = qs^(-p1 x), psi(y) = qs^(p2 y),
    qs = exp(beta1 - beta2).

    The defining contour encircles -beta1 and the simple pole B = beta2*rho1
    (rho_i = p_i/(1-p_i)) while avoiding -beta2 and C = beta1*rho2.  It is
    evaluated as a small circle around -beta1 plus the analytic residue at B,
    exp[(beta1-beta2)(-x p1 + y B/(B+beta1))]; the residue's (B-C)/(B-C)
    factor cancels exactly, so the evaluation stays stable through the
    translation-invariant line beta2 rho1 = beta1 rho2 (where the value
    degenerates to qs^(-p1 x + p2 y)) and through p2 = 1, where C leaves
    through infinity.  p1 = 1 is handled by the mirror symmetry
    (x, y, p1, p2, beta1, beta2) -> (y, x, p2, p1, beta2, beta1).
    """
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
        raise ValueError("densities must lie in [0, 1]")
    if beta1 <= 0 or beta2 <= 0 or beta1 == beta2:
        raise ValueError("need positive distinct beta1, beta2")
    d = beta1 - beta2
    if p1 == 1.0:
        if p2 == 1.0:
            return math.exp(d * (y - x))  # every row and column carries a path
        return homogeneous_bernoulli_shape(y, x, p2, p1, beta2, beta1)
    rho1 = p1 / (1.0 - p1)
    B = beta2 * rho1
    dists = [abs(beta2 - beta1), B + beta1]
    outside = [-beta2, B]
    if p2 == 1.0:
        def f(z):
            return (np.exp(d * (-x * z / (z + beta2) + y * z / (z + beta1)))
                    / (z - B))
    else:
        rho2 = p2 / (1.0 - p2)
        C = beta1 * rho2
        dists.append(C + beta1)
        outside.append(C)

        def f(z):
            return (np.exp(d * (-x * z / (z + beta2) + y * z / (z + beta1)))
                    * (B - C) / ((z - C) * (z - B)))
    spec = ContourSpec(center=-beta1, radius=0.6 * min(dists), nodes=64,
                       inside=(-beta1,), outside=tuple(outside))
    res_b = math.exp(d * (-x * p1 + y * B / (B + beta1)))
    return float(contour_integrate(f, spec, rtol=1e-12).real) + res_b
