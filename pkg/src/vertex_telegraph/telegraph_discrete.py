"""The discrete telegraph equation

    Phi(x+1,y+1) - b1 Phi(x,y+1) - b2 Phi(x+1,y) + (b1+b2-1) Phi(x,y) = u(x+1,y+1)

on the quadrant lattice, solved two independent ways: by marching the
recursion from the boundary, and through the discrete Riemann function

    r(a, b) = (1/2 pi i) * oint (b2-b1) / ((1+b2(1-b1)z)(1+b1(1-b2)z))
              * ((1+b1(1-b1)z)/(1+b2(1-b1)z))^a
              * ((1+b2(1-b2)z)/(1+b1(1-b2)z))^b  dz

around the pole -1/(b2(1-b1)).  r itself is computed two ways (circle
quadrature and the exact four-point recursion in the offsets, seeded by
r(a,0) = b1^a, r(0,b) = b2^b); the recursion is the default, the quadrature
the independent cross-check.  Negative offsets return 0, which is the
convention that makes the solution sums and the telescoping identities
implementable verbatim.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .backends import impl
from .contours import ContourSpec, contour_integrate_adaptive
from .core import Field2D


@dataclass(frozen=True)
class DiscreteProblem:
    """Boundary data chi (along y=0), psi (along x=0) and source u.

    chi has length X+1, psi length Y+1, u shape (X+1, Y+1) with u[x, y] read
    for x, y >= 1 (the boundary row/column of u is ignored); u may be None.
    """

    b1: float
    b2: float
    chi: np.ndarray
    psi: np.ndarray
    u: np.ndarray | None = None

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=np.float64)
        psi = np.asarray(self.psi, dtype=np.float64)
        if chi.ndim != 1 or psi.ndim != 1:
            raise ValueError("boundary sequences must be one-dimensional")
        if chi[0] != psi[0]:
            raise ValueError("chi(0) and psi(0) must agree")
        # the recursion tolerates the degenerate endpoint b = 1; the
        # Riemann-function routes reject it separately
        if not (0.0 < self.b1 <= 1.0 and 0.0 < self.b2 <= 1.0):
            raise ValueError("weights must lie in (0, 1]")
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "psi", psi)
        if self.u is not None:
            u = np.asarray(self.u, dtype=np.float64)
            if u.shape != (chi.shape[0], psi.shape[0]):
                raise ValueError("u must have shape (X+1, Y+1)")
            object.__setattr__(self, "u", u)

    @property
    def X(self) -> int:
        return self.chi.shape[0] - 1

    @property
    def Y(self) -> int:
        return self.psi.shape[0] - 1

    def source(self) -> np.ndarray:
        if self.u is None:
            return np.zeros((self.X + 1, self.Y + 1))
        return self.u


def solve_recursive(p: DiscreteProblem) -> Field2D:
    """March the recursion; works for any b1, b2 including b1 = b2."""
    phi = impl.solve_recursive(p.b1, p.b2, p.source(), p.chi, p.psi)
    return Field2D(phi)


def _check_distinct(b1, b2):
    if b1 == b2:
        raise ValueError("b1 = b2 collides the Riemann-function poles; "
                         "use solve_recursive instead")
    if b1 >= 1.0 or b2 >= 1.0:
        raise ValueError("the Riemann function needs weights strictly below 1")


def riemann_discrete_table(b1: float, b2: float, A: int, B: int) -> np.ndarray:
    """r(a, b) for 0 <= a <= A, 0 <= b <= B by the exact offset recursion."""
    _check_distinct(b1, b2)
    return impl.riemann_table(b1, b2, int(A), int(B))


def riemann_discrete(b1: float, b2: float, dx: int, dy: int,
                     method: str = "recursion") -> float:
    """The discrete Riemann function at offsets (dx, dy); 0 for negative offsets."""
    if dx < 0 or dy < 0:
        return 0.0
    if method == "recursion":
        return float(riemann_discrete_table(b1, b2, dx, dy)[dx, dy])
    if method == "quadrature":
        return riemann_discrete_quadrature(b1, b2, dx, dy)
    raise ValueError(f"unknown method {method!r}")


def riemann_discrete_quadrature(b1: float, b2: float, dx: int, dy: int) -> float:
    """Circle quadrature around -1/(b2(1-b1)), radius half the pole distance.

    At large offsets the integrand can exceed the answer by many orders; the
    adaptive engine then re-sums the same contour in mpmath.
    """
    _check_distinct(b1, b2)
    if dx < 0 or dy < 0:
        return 0.0
    p_in = -1.0 / (b2 * (1.0 - b1))
    p_out = -1.0 / (b1 * (1.0 - b2))
    spec = ContourSpec(center=p_in, radius=abs(p_out - p_in) / 2.0,
                       nodes=64, inside=(p_in,), outside=(p_out,))
    c11 = b1 * (1.0 - b1)
    c21 = b2 * (1.0 - b1)
    c22 = b2 * (1.0 - b2)
    c12 = b1 * (1.0 - b2)
    d = b2 - b1

    def f(z):
        return (d / ((1 + c21 * z) * (1 + c12 * z))
                * ((1 + c11 * z) / (1 + c21 * z)) ** dx
                * ((1 + c22 * z) / (1 + c12 * z)) ** dy)

    def f_mp(z):
        return (d / ((1 + c21 * z) * (1 + c12 * z))
                * ((1 + c11 * z) / (1 + c21 * z)) ** dx
                * ((1 + c22 * z) / (1 + c12 * z)) ** dy)

    val = contour_integrate_adaptive(f, spec, f_mp=f_mp, rtol=1e-13, atol=1e-12)
    return float(val.real)


def solve_riemann(p: DiscreteProblem) -> Field2D:
    """Superpose the Riemann kernel over boundary increments and the source.

    Phi(X,Y) = chi(0) r(X,Y) + sum_y r(X, Y-y)(psi(y) - b2 psi(y-1))
             + sum_x r(X-x, Y)(chi(x) - b1 chi(x-1)) + sum_{x,y} r(X-x, Y-y) u(x,y),

    realized as one 2d convolution of r with the combined weight array.
    """
    _check_distinct(p.b1, p.b2)
    X, Y = p.X, p.Y
    r = riemann_discrete_table(p.b1, p.b2, X, Y)
    w = p.source().copy()
    w[0, 0] = p.chi[0]
    w[0, 1:] = p.psi[1:] - p.b2 * p.psi[:-1]
    w[1:, 0] = p.chi[1:] - p.b1 * p.chi[:-1]
    if max(X, Y) >= 48:
        phi = fftconvolve(w, r)[:X + 1, :Y + 1]
    else:
        phi = np.zeros((X + 1, Y + 1))
        for a in range(X + 1):
            for b in range(Y + 1):
                phi[a:, b:] += w[a, b] * r[:X + 1 - a, :Y + 1 - b]
    return Field2D(phi)


def riemann_fourpoint_residual(b1: float, b2: float, max_dx: int, max_dy: int) -> float:
    """Max residual of the four-point identity satisfied by r over a window of
    offsets, including the vanishing extension to one negative offset (the
    both-negative corner is excluded: the identity genuinely fails there)."""
    _check_distinct(b1, b2)
    r = riemann_discrete_table(b1, b2, max_dx + 1, max_dy + 1)

    def rr(a, b):
        return r[a, b] if a >= 0 and b >= 0 else 0.0

    worst = 0.0
    c0 = b1 + b2 - 1.0
    for a in range(-2, max_dx + 1):
        for b in range(-2, max_dy + 1):
            if a < 0 and b < 0:
                continue
            res = abs(rr(a + 1, b + 1) - b1 * rr(a, b + 1) - b2 * rr(a + 1, b)
                      + c0 * rr(a, b))
            worst = max(worst, res)
    return worst


def riemann_summed_identity(b1: float, b2: float, A: int, B: int) -> float:
    """r(A,B) + (1-b1) sum_{j<A} r(j,B) + (1-b2) sum_{k<B} r(A,k); equals 1."""
    _check_distinct(b1, b2)
    r = riemann_discrete_table(b1, b2, A, B)
    return float(r[A, B] + (1 - b1) * r[:A, B].sum() + (1 - b2) * r[A, :B].sum())
