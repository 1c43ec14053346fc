"""Numerical evaluation of the exact and asymptotic contour-integral formulas:
shifted q-moments, limit shapes, asymptotic covariances, and the variance
functionals of the fluctuation fields.

Conventions.  Macroscopic formulas use qs = exp(beta1 - beta2) and
s = beta1/beta2, with the common exponential factor

    K(z; x, y) = exp[ln(qs) (-x s z / (1 + s z) + y z / (1 + z))]

integrated around z = -1 (avoiding 0 and -1/s).  Lattice-scale moment
formulas use q = b2/b1 with contours around -q.  The lattice height sampled
by this package satisfies E q^(H(x,y)) = (moment formula at first argument
x+1): the sampler's update-table bookkeeping and the moment formulas differ
by one unit of x, calibrated exactly on the 1x1 lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .contours import (ContourError, ContourSpec, contour_integrate,
                       contour_integrate_adaptive)
from .core import ModelParams
from .telegraph_continuous import riemann_fast


# ---------------------------------------------------------------------------
# domain-wall limit shape (law of large numbers)
# ---------------------------------------------------------------------------

def _dw_contour(s: float) -> ContourSpec:
    radius = 0.6 * min(1.0, abs(1.0 / s - 1.0))
    return ContourSpec(center=-1.0, radius=radius, nodes=64,
                       inside=(-1.0,), outside=(0.0, -1.0 / s))


def _dw_rhs(x: float, y: float, log_qs: float, s: float) -> float:
    """(1/2 pi i) oint_{-1} K(z; x, y) dz / z, with mpmath escalation for
    strongly scaled exponents."""
    spec = _dw_contour(s)

    def f(z):
        return np.exp(log_qs * (-x * s * z / (1 + s * z) + y * z / (1 + z))) / z

    def f_mp(z):
        import mpmath as mp
        return mp.e ** (log_qs * (-x * s * z / (1 + s * z) + y * z / (1 + z))) / z

    val = contour_integrate_adaptive(f, spec, f_mp=f_mp, rtol=1e-12, atol=1e-12)
    return float(val.real)


def limit_shape_dw(x: float, y: float, params: ModelParams,
                   alpha: float | None = None) -> float:
    """The domain-wall limit shape h(x, y) of H(Lx, Ly)/L.

    For alpha = 0 the defining relation reads qs^h - 1 = rhs and h is read off
    directly; for alpha > 0 the left side is
    (qs^(-h) qs^(y-x) + 1/alpha)(qs^h - 1)/(1 + 1/alpha), monotone in h, and
    the unique root is bisected out of [-(x v y), (x v y) + 1].
    """
    if x < 0 or y < 0:
        raise ValueError("coordinates must be nonnegative")
    if y == 0:
        return 0.0
    if x == 0:
        return float(y)  # every row of the left boundary carries a path
    alpha = params.alpha if alpha is None else alpha
    log_qs = params.log_qs
    rhs = _dw_rhs(x, y, log_qs, params.s)
    if alpha == 0.0:
        return math.log1p(rhs) / log_qs
    inv_a = 1.0 / alpha

    def lhs(h):
        return ((math.exp(-log_qs * h) * math.exp(log_qs * (y - x)) + inv_a)
                * (math.exp(log_qs * h) - 1.0) / (1.0 + inv_a))

    lo = -max(x, y)
    hi = max(x, y) + 1.0
    flo = lhs(lo) - rhs
    fhi = lhs(hi) - rhs
    if flo * fhi > 0:
        raise ValueError(
            f"no root bracketed in [{min(0.0, y - x)}, {max(y, 0.0)}]; "
            "the formula is being used outside its regime")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = lhs(mid) - rhs
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def limit_shape_dw_field(xs, ys, params: ModelParams) -> np.ndarray:
    """qs^h on the grid xs x ys for alpha = 0, one shared contour for all
    points (double precision; meant for the moderate-|ln qs| regime)."""
    spec = _dw_contour(params.s)
    log_qs = params.log_qs
    s = params.s
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    n = 64
    prev = None
    while n <= 1 << 16:
        z = spec.points(n)
        ex = -s * z / (1 + s * z)
        ey = z / (1 + z)
        w = (z - spec.center) / z
        # kernel over (x, y, node)
        K = np.exp(log_qs * (xs[:, None, None] * ex[None, None, :]
                             + ys[None, :, None] * ey[None, None, :]))
        val = (K * w[None, None, :]).mean(axis=2).real
        if prev is not None and np.max(np.abs(val - prev)) < 1e-12:
            return 1.0 + val
        prev = val
        n *= 2
    raise ContourError("limit-shape field quadrature did not converge")


def limit_shape_q0(x: float, y: float, s: float) -> float:
    """The qs -> 0 closed form of the domain-wall limit shape (s < 1):
    0 right of the path region, y - x left of it, and the parabola-like
    ((s x)^1/2 - y^1/2)^2 / (1 - s) in between."""
    if s >= 1 or s <= 0:
        raise ValueError("the closed form is stated for 0 < s < 1")
    if y <= 0:
        return 0.0
    ratio = x / y
    if ratio > 1.0 / s:
        return 0.0
    if ratio < s:
        return y - x
    return (math.sqrt(s * x) - math.sqrt(y)) ** 2 / (1.0 - s)


@dataclass(frozen=True)
class ShapeField:
    """A limit shape with derivatives: f = qs^h plus its partials, callables
    vectorized over numpy arrays.  ``bundle``, when present, returns
    (f, fx, fy) in one pass and is what the quadrature loops call."""

    f: object
    fx: object
    fy: object
    log_qs: float
    bundle: object = None

    @staticmethod
    def from_function(f, log_qs: float, delta: float = 1e-4) -> "ShapeField":
        """Central-difference derivatives for solver-produced shapes."""
        def fx(x, y):
            return (f(x + delta, y) - f(np.maximum(x - delta, 0.0), y)) / \
                (delta + np.minimum(x, delta))

        def fy(x, y):
            return (f(x, y + delta) - f(x, np.maximum(y - delta, 0.0))) / \
                (delta + np.minimum(y, delta))
        return ShapeField(f, fx, fy, log_qs)

    def all_three(self, x, y):
        if self.bundle is not None:
            return self.bundle(x, y)
        return self.f(x, y), self.fx(x, y), self.fy(x, y)

    def h(self, x, y):
        return np.log(self.f(x, y)) / self.log_qs

    def hx(self, x, y):
        return self.fx(x, y) / (self.log_qs * self.f(x, y))

    def hy(self, x, y):
        return self.fy(x, y) / (self.log_qs * self.f(x, y))


def shape_dw(params: ModelParams, nodes: int = 512) -> ShapeField:
    """Domain-wall qs^h with derivatives taken under the integral sign.

    One fixed trapezoid grid serves f, f_x, f_y (the integrand is analytic on
    the circle, so 512 nodes carry it to machine precision for moderate
    |ln qs|; validated against the doubling engine in the tests)."""
    spec = _dw_contour(params.s)
    log_qs = params.log_qs
    s = params.s
    z = spec.points(nodes)
    ex = -s * z / (1 + s * z)
    ey = z / (1 + z)
    w = (z - spec.center) / z

    def bundle(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        shape = np.broadcast_shapes(x.shape, y.shape)
        xf = np.broadcast_to(x, shape).ravel()[:, None]
        yf = np.broadcast_to(y, shape).ravel()[:, None]
        Kw = np.exp(log_qs * (xf * ex[None, :] + yf * ey[None, :])) * w[None, :]
        f = 1.0 + Kw.mean(axis=1).real.reshape(shape)
        fx = (Kw * (log_qs * ex)[None, :]).mean(axis=1).real.reshape(shape)
        fy = (Kw * (log_qs * ey)[None, :]).mean(axis=1).real.reshape(shape)
        return f, fx, fy

    def f(x, y):
        return bundle(x, y)[0]

    def fx(x, y):
        return bundle(x, y)[1]

    def fy(x, y):
        return bundle(x, y)[2]

    return ShapeField(f, fx, fy, log_qs, bundle)


# ---------------------------------------------------------------------------
# lattice-scale moment formulas (contours around -q)
# ---------------------------------------------------------------------------

def _moment_radii(params: ModelParams, n: int):
    """Concentric circles around -q realizing the nesting z_i inside q z_j:
    each radius is (1+min(q,1/q))/2 of the admissible bound from the next one."""
    q = params.q
    kappa = (1.0 - params.b1) / (1.0 - params.b2)
    r_max = 0.6 * min(q, abs(-q + 1.0 / kappa))
    shrink = 0.5 * (1.0 + min(q, 1.0 / q))
    radii = [r_max]
    for _ in range(n - 1):
        bound = q * radii[-1] - q * abs(1.0 - q)
        r = bound * shrink
        if r <= 0:
            raise ContourError(
                "nested moment contours infeasible for these weights; "
                "use smaller radii or weights closer to 1")
        radii.append(r)
    radii.reverse()  # radii[0] is the innermost (pairs with x_1)
    return radii, kappa


def moments_EN(xs, y: int, params: ModelParams, nodes: int = 256,
               max_nodes: int = 4096) -> float:
    """E_N(x_1.., y): the n-fold nested contour formula for the shifted
    q-moments; at alpha = 0 it equals E prod_k (q^(H(x_k, y)) - q^(k-1)).

    xs must be weakly decreasing positive integers (n = len(xs) <= 4); the
    coordinates are formula coordinates (sampler heights sit at x-1).
    """
    xs = [int(v) for v in (xs if np.iterable(xs) else [xs])]
    n = len(xs)
    if n < 1 or n > 4:
        raise ValueError("n-fold nesting supported for 1 <= n <= 4")
    if any(xs[i] < xs[i + 1] for i in range(n - 1)) or xs[-1] < 1 or y < 1:
        raise ValueError("need x_1 >= ... >= x_n >= 1 and y >= 1")
    q = params.q
    radii, kappa = _moment_radii(params, n)
    for r in radii:
        ContourSpec(center=-q, radius=r, nodes=16, inside=(-q,),
                    outside=(0.0, -1.0 / kappa))
    if n >= 3:
        nodes = min(nodes, 128)
        max_nodes = min(max_nodes, 256)

    def evaluate(m):
        zs = [(-q + radii[i] * np.exp(2j * np.pi * (np.arange(m) + 0.5 * i) / m))
              for i in range(n)]
        grids = np.meshgrid(*zs, indexing="ij")
        val = np.ones_like(grids[0])
        for i in range(n):
            zi = grids[i]
            val = val * (((1 + kappa / q * zi) / (1 + kappa * zi)) ** (xs[i] - 1)
                         * ((1 + zi) / (1 + zi / q)) ** y
                         * (zi + q) / zi)
        for i in range(n):
            for j in range(i + 1, n):
                val = val * (grids[i] - grids[j]) / (grids[i] - q * grids[j])
        return q ** (n * (n - 1) // 2) * complex(val.mean())

    prev = None
    m = nodes
    while m <= max_nodes:
        cur = evaluate(m)
        if prev is not None and abs(cur - prev) <= 1e-11 * max(1.0, abs(cur)):
            return float(cur.real)
        prev = cur
        m *= 2
    return float(prev.real)


def qh_moment(x: int, y: int, params: ModelParams) -> float:
    """E q^(H(x, y)) in formula coordinates: 1 + E_1(x; y)."""
    return 1.0 + moments_EN([x], y, params)


def observable_O(H: int, x: int, y: int, alpha: float, q: float) -> float:
    """-q^H / alpha + q^(y - x + 1 - H); the alpha = 0 analysis works with
    q^H itself, so alpha must be positive here."""
    if alpha <= 0:
        raise ValueError("alpha = 0 reduces the observable to q^H; use that form")
    return -q ** H / alpha + q ** (y - x + 1 - H)


# ---------------------------------------------------------------------------
# asymptotic covariances
# ---------------------------------------------------------------------------

def _dw_double_integral(x1, x2, y, log_qs, s, n2: int = 512):
    """ln(qs)/(2 pi i)^2 oint oint z1/(z1-z2) K(z1;x1) K(z2;x2) dz1 dz2/(z1 z2),
    z1 on the inner circle (pairs with x1 >= x2 on the outer)."""
    base = _dw_contour(s)
    r2 = base.radius
    r1 = 0.5 * r2
    prev = None
    m = 128
    while m <= 4096:
        th1 = 2 * np.pi * (np.arange(m) + 0.25) / m
        th2 = 2 * np.pi * np.arange(m) / m
        z1 = -1 + r1 * np.exp(1j * th1)
        z2 = -1 + r2 * np.exp(1j * th2)
        Z1 = z1[:, None]
        Z2 = z2[None, :]
        K1 = np.exp(log_qs * (-x1 * s * Z1 / (1 + s * Z1) + y * Z1 / (1 + Z1)))
        K2 = np.exp(log_qs * (-x2 * s * Z2 / (1 + s * Z2) + y * Z2 / (1 + Z2)))
        w = Z1 / (Z1 - Z2) * K1 * K2 / (Z1 * Z2) * (Z1 + 1) * (Z2 + 1)
        val = complex(w.mean())
        if prev is not None and abs(val - prev) <= 1e-11 * max(1.0, abs(val)):
            return val
        prev = val
        m *= 2
    return prev


def covariance_dw(x1: float, x2: float, y: float, params: ModelParams,
                  alpha: float | None = None) -> float:
    """Asymptotic covariance on a horizontal section, domain wall.

    For alpha = 0: lim L Cov(qs^(H(Lx1,Ly)/L...), ...) per the double contour
    plus the single-integral correction; for alpha > 0 the normalized limit
    of L Cov(O(Lx1, Ly), O(Lx2, Ly)) / (1 + 1/alpha)^2.  Requires x1 >= x2.
    """
    if x1 < x2:
        raise ValueError("need x1 >= x2 (the x1 factor rides the inner contour)")
    alpha = params.alpha if alpha is None else alpha
    log_qs = params.log_qs
    s = params.s
    dbl = _dw_double_integral(x1, x2, y, log_qs, s)
    single1 = _dw_rhs(x1, y, log_qs, s)
    if alpha == 0.0:
        return float((log_qs * dbl).real + log_qs * single1)
    inv_a = 1.0 / alpha
    single2 = _dw_rhs(x2, y, log_qs, s)
    corr = (math.exp(log_qs * (y - x2)) + inv_a + single2) / (1.0 + inv_a)
    return float((log_qs * dbl).real + log_qs * single1 * corr)


def lln_bernoulli_shape(x: float, y: float, p_left: float, p_bottom: float,
                        params: ModelParams) -> float:
    """qs^h for Bernoulli boundary densities (p_left on the y-axis, p_bottom
    on the x-axis): one contour around -1 plus the explicit exponential term
    carrying the pole at rho_bottom / s."""
    s = params.s
    log_qs = params.log_qs
    if not (0 <= p_left < 1 and 0 <= p_bottom < 1):
        raise ValueError("densities must lie in [0, 1) for this formula")
    rho1 = p_left / (1.0 - p_left)
    rho2 = p_bottom / (1.0 - p_bottom)
    b = rho2 / s
    dists = [1.0, abs(1.0 / s - 1.0), rho1 + 1.0, b + 1.0]
    spec = ContourSpec(center=-1.0, radius=0.6 * min(dists), nodes=64,
                       inside=(-1.0,), outside=(0.0, -1.0 / s, rho1, b))

    def f(z):
        K = np.exp(log_qs * (-x * s * z / (1 + s * z) + y * z / (1 + z)))
        return K * (1.0 / (rho1 - z) + 1.0 / (z - b))

    extra = math.exp(log_qs * (-x * rho2 / (1 + rho2) + y * b / (1 + b)))
    return float(contour_integrate(f, spec, rtol=1e-12).real) + extra


def covariance_bernoulli(x1: float, y1: float, x2: float, y2: float,
                         p_left: float, p_bottom: float,
                         params: ModelParams) -> float:
    """Asymptotic covariance of qs-exponents for Bernoulli boundaries on a
    monotone section (x1 >= x2, y1 <= y2).

    Double contour around -1 and rho_bottom/s (z1 inside z2), kernel
    (z1 rho1 - z2 rho2/s) / ((z1 - z2)(rho1 - rho2/s)); the parameter line
    rho1 = rho2/s needs the split-contour continuation and is rejected here.
    """
    if x1 < x2 or y1 > y2:
        raise ValueError("points must form a monotone section: x1 >= x2, y1 <= y2")
    if not (0 <= p_left < 1 and 0 <= p_bottom < 1):
        raise ValueError("densities must lie in [0, 1) for this formula")
    s = params.s
    log_qs = params.log_qs
    rho1 = p_left / (1.0 - p_left)
    rho2 = p_bottom / (1.0 - p_bottom)
    b = rho2 / s
    if abs(rho1 - b) < 1e-9 * max(1.0, rho1, b):
        raise ValueError("rho_left = rho_bottom/s needs the split-contour "
                         "analytic continuation, which is out of scope")
    lo = min(-1.0, b)
    hi = max(-1.0, b)
    c = 0.5 * (lo + hi)
    half = (hi - lo) / 2.0
    r1 = half * (4.0 / 3.0) * 1.05
    r2 = half * (4.0 / 3.0) * 1.15
    # audit both circles: they enclose -1 and b, avoid rho1 and -1/s
    for r in (r1, r2):
        ContourSpec(center=c, radius=r, nodes=16, inside=(-1.0, b),
                    outside=(rho1, -1.0 / s))
    prev = None
    m = 256
    while m <= 8192:
        th1 = 2 * np.pi * (np.arange(m) + 0.25) / m
        th2 = 2 * np.pi * np.arange(m) / m
        Z1 = (c + r1 * np.exp(1j * th1))[:, None]
        Z2 = (c + r2 * np.exp(1j * th2))[None, :]

        def kern(Z, x, y):
            K = np.exp(log_qs * (-x * s * Z / (1 + s * Z) + y * Z / (1 + Z)))
            return K * (1.0 / (rho1 - Z) + 1.0 / (Z - b))

        w = ((Z1 * rho1 - Z2 * b) / ((Z1 - Z2) * (rho1 - b))
             * kern(Z1, x1, y1) * kern(Z2, x2, y2)
             * (Z1 - c) * (Z2 - c))
        val = complex(w.mean()) * log_qs
        if prev is not None and abs(val - prev) <= 1e-10 * max(1.0, abs(val)):
            return float(val.real)
        prev = val
        m *= 2
    return float(prev.real)


# ---------------------------------------------------------------------------
# variance functionals of the fluctuation fields
# ---------------------------------------------------------------------------

def richardson_leading(values, eps_list, power: int = 2) -> float:
    """Leading coefficient c of f(eps) = c eps^power + O(eps^(power+1)) from
    three values at eps, eps/2, eps/4 (two-stage elimination)."""
    values = list(values)
    eps_list = list(eps_list)
    if len(values) != 3 or len(eps_list) != 3:
        raise ValueError("need exactly three (value, eps) pairs")
    if not all(abs(eps_list[i + 1] - eps_list[i] / 2) < 1e-12 * eps_list[i]
               for i in range(2)):
        raise ValueError("eps values must halve: eps, eps/2, eps/4")
    g = [v / e ** power for v, e in zip(values, eps_list)]
    h0 = 2.0 * g[1] - g[0]
    h1 = 2.0 * g[2] - g[1]
    return (4.0 * h1 - h0) / 3.0


def bernoulli_mixed_mean_coefficient(p_left: float, p_bottom: float,
                                     params: ModelParams, x: float = 1.0,
                                     y: float = 1.0,
                                     eps: float = 0.08) -> dict:
    """Leading eps^2 coefficient of the mixed difference of the Bernoulli
    limit shape, M(eps) = qs^h(ex,ey) - qs^h(ex,0) - qs^h(0,ey) + 1, via
    Richardson; the expansion predicts x y (beta2-beta1)(p_left beta1
    - p_bottom beta2)."""
    eps_list = [eps, eps / 2, eps / 4]
    vals = []
    for e in eps_list:
        vals.append(lln_bernoulli_shape(e * x, e * y, p_left, p_bottom, params)
                    - lln_bernoulli_shape(e * x, 0.0, p_left, p_bottom, params)
                    - lln_bernoulli_shape(0.0, e * y, p_left, p_bottom, params)
                    + 1.0)
    coef = richardson_leading(vals, eps_list)
    ref = x * y * (params.beta2 - params.beta1) * \
        (p_left * params.beta1 - p_bottom * params.beta2)
    return {"coefficient": coef, "reference": ref, "values": vals}


def bernoulli_mixed_variance_coefficient(p_left: float, p_bottom: float,
                                         params: ModelParams, x: float = 1.0,
                                         y: float = 1.0,
                                         eps: float = 0.08) -> dict:
    """Leading eps^2 coefficient of Var of the mixed difference of the
    Bernoulli fluctuation field, assembled from the pair covariances on
    monotone sections; predicted x y (beta2-beta1)^2 (-p_l p_b (beta1+beta2)
    + p_l beta1 + p_b beta2)."""
    def cov(xa, ya, xb, yb):
        if xa >= xb and ya <= yb:
            return covariance_bernoulli(xa, ya, xb, yb, p_left, p_bottom, params)
        return covariance_bernoulli(xb, yb, xa, ya, p_left, p_bottom, params)

    eps_list = [eps, eps / 2, eps / 4]
    vals = []
    for e in eps_list:
        ex = e * x
        ey = e * y
        # Var[h(ex,ey) - h(ex,0) - h(0,ey)]; the corner term h(0,0) vanishes
        v = (cov(ex, ey, ex, ey) + cov(ex, 0.0, ex, 0.0) + cov(0.0, ey, 0.0, ey)
             - 2.0 * cov(ex, 0.0, ex, ey) - 2.0 * cov(ex, ey, 0.0, ey)
             + 2.0 * cov(ex, 0.0, 0.0, ey))
        vals.append(v)
    coef = richardson_leading(vals, eps_list)
    ref = x * y * (params.beta2 - params.beta1) ** 2 * \
        (-p_left * p_bottom * (params.beta1 + params.beta2)
         + p_left * params.beta1 + p_bottom * params.beta2)
    return {"coefficient": coef, "reference": ref, "values": vals}


def noise_variance_density(shape: ShapeField, x, y, beta1: float,
                           beta2: float) -> np.ndarray:
    """V_inf(x, y) = (beta1+beta2) f_x f_y - beta2 ln(qs) f f_x
    + beta1 ln(qs) f f_y, the white-noise variance of the qs-exponent field.

    Algebraically identical to the square of the noise coefficient in the
    fluctuation equation written through h_x, h_y."""
    f, fx, fy = shape.all_three(x, y)
    lq = shape.log_qs
    return (beta1 + beta2) * fx * fy - beta2 * lq * f * fx + beta1 * lq * f * fy


def covariance_general(X1: float, Y1: float, X2: float, Y2: float,
                       shape: ShapeField, beta1: float, beta2: float,
                       nodes: int = 64, rtol: float = 2e-4) -> float:
    """Cov(phi(X1,Y1), phi(X2,Y2)) of the fluctuation field for a general
    limit shape: the Riemann-kernel square integral of V_inf over
    [0, X1^X2] x [0, Y1^Y2], by tensor Gauss-Legendre with doubling checks."""
    Xm = min(X1, X2)
    Ym = min(Y1, Y2)

    def evaluate(m):
        xg, wg = roots_legendre(m)
        xq = 0.5 * Xm * (xg + 1.0)
        wx = 0.5 * Xm * wg
        yq = 0.5 * Ym * (xg + 1.0)
        wy = 0.5 * Ym * wg
        XX, YY = np.meshgrid(xq, yq, indexing="ij")
        V = noise_variance_density(shape, XX, YY, beta1, beta2)
        R1 = riemann_fast(beta1, beta2, X1 - XX, Y1 - YY)
        R2 = riemann_fast(beta1, beta2, X2 - XX, Y2 - YY)
        return float(np.einsum("i,j,ij->", wx, wy, R1 * R2 * V))

    a = evaluate(nodes)
    b = evaluate(2 * nodes)
    if abs(b - a) > rtol * max(abs(b), 1e-12):
        b = evaluate(4 * nodes)
    return b


def variance_low_density(X: float, Y: float, shape_h, beta1: float,
                         beta2: float, nodes: int = 96) -> float:
    """Variance of the low-density fluctuation field at (X, Y):
    int int R^2 (beta1 h_y - beta2 h_x) over [0,X] x [0,Y].

    shape_h provides hx(x, y) and hy(x, y) on the H scale; the noise variance
    beta1 h_y - beta2 h_x must be nonnegative on the domain.
    """
    def evaluate(m, check):
        xg, wg = roots_legendre(m)
        xq = 0.5 * X * (xg + 1.0)
        wx = 0.5 * X * wg
        yq = 0.5 * Y * (xg + 1.0)
        wy = 0.5 * Y * wg
        XX, YY = np.meshgrid(xq, yq, indexing="ij")
        V = beta1 * shape_h.hy(XX, YY) - beta2 * shape_h.hx(XX, YY)
        if check and (V < -1e-9).any():
            raise ValueError("negative noise variance: the shape is not a "
                             "valid low-density profile")
        R2 = riemann_fast(beta1, beta2, X - XX, Y - YY) ** 2
        return float(np.einsum("i,j,ij->", wx, wy, R2 * V))

    a = evaluate(nodes, True)
    b = evaluate(2 * nodes, False)
    if abs(b - a) > 1e-4 * max(1.0, abs(b)):
        b = evaluate(4 * nodes, False)
    return b
