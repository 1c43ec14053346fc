"""Reversed lattice walks, persistent Poisson walks, and the Feynman-Kac
estimators they carry for the two telegraph equations.

A reversed walk starts at (X+1, Y) moving left (or (X, Y+1) moving down) and
keeps its direction with probability b1 horizontally and b2 vertically; the
persistent Poisson walk is the continuum limit, turning with intensity beta1
while moving left and beta2 while moving down.  Boundary data are read where
the paths first meet the axes; the inhomogeneity is summed (or integrated)
between the two paths with a sign that flips with their vertical order:

    I_between(x, y) = 1{(x,y) weakly below T_minus}
                    + 1{(x,y) weakly left of T_bar} - 1.

Both paths of a pair are sampled independently, from per-sample derived
streams of the counter-based generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backends import impl
from .core import ModelParams
from .rng import STREAM_WALK_H, STREAM_WALK_V, replica_key, stream_key, uniform
from .telegraph_continuous import ContinuousProblem
from .telegraph_discrete import DiscreteProblem

_WALK_CAP = 10_000_000

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class WalkPath:
    """A monotone staircase trajectory recorded by its corner points.

    corners[0] is the start; consecutive corners alternate horizontal and
    vertical segments, each moving toward the origin.  ``exit`` is the first
    point on the target axis (x = 0 for horizontal-start measurement walks,
    y = 0 for vertical-start ones).
    """

    corners: tuple
    orientation: str
    exit: tuple

    def __post_init__(self):
        prev = self.corners[0]
        for cur in self.corners[1:]:
            if not ((cur[0] < prev[0] and cur[1] == prev[1])
                    or (cur[0] == prev[0] and cur[1] < prev[1])):
                raise ValueError("corners must step monotonically toward the origin")
            prev = cur

    def height_at(self, x: float) -> float:
        """Largest ordinate of the path at abscissa x (-inf if never reached)."""
        best = -math.inf
        prev = self.corners[0]
        if x > prev[0]:
            return best
        for cur in self.corners[1:]:
            if cur[1] == prev[1] and cur[0] <= x <= prev[0]:
                best = max(best, prev[1])
            elif cur[0] == prev[0] and x == cur[0]:
                best = max(best, prev[1])
            prev = cur
        return best

    def abscissa_at(self, y: float) -> float:
        """Largest abscissa of the path at ordinate y (-inf if never reached)."""
        best = -math.inf
        prev = self.corners[0]
        if y > prev[1]:
            return best
        for cur in self.corners[1:]:
            if cur[0] == prev[0] and cur[1] <= y <= prev[1]:
                best = max(best, prev[0])
            elif cur[1] == prev[1] and y == cur[1]:
                best = max(best, prev[0])
            prev = cur
        return best


def reversed_walk(params: ModelParams, start, orientation: str,
                  seed: int, replica: int = 0) -> WalkPath:
    """Sample the reversed lattice walk from ``start`` until it reaches the
    measurement axis (x = 0 for horizontal starts, y = 0 for vertical)."""
    b1, b2 = params.b1, params.b2
    cx, cy = int(start[0]), int(start[1])
    if cx < 1 or cy < 1:
        raise ValueError("start must lie in the positive quadrant")
    salt = STREAM_WALK_H if orientation == HORIZONTAL else STREAM_WALK_V
    key = stream_key(replica_key(seed, replica), salt)
    corners = [(cx, cy)]
    horizontal = orientation == HORIZONTAL
    # first edge is forced along the starting orientation
    if horizontal:
        cx -= 1
    else:
        cy -= 1
    t = 0
    while (cx > 0) if orientation == HORIZONTAL else (cy > 0):
        u = uniform(key, t)
        t += 1
        if horizontal:
            if u < b1:
                cx -= 1
            else:
                corners.append((cx, cy))
                horizontal = False
                cy -= 1
        else:
            if u < b2:
                cy -= 1
            else:
                corners.append((cx, cy))
                horizontal = True
                cx -= 1
        if t > _WALK_CAP:
            raise RuntimeError("reversed walk exceeded the step cap")
    corners.append((cx, cy))
    return WalkPath(tuple(corners), orientation, (cx, cy))


def persistent_walk(beta1: float, beta2: float, start, orientation: str,
                    seed: int, replica: int = 0) -> WalkPath:
    """Persistent Poisson walk: exponential holding times with rate beta1 on
    horizontal stretches and beta2 on vertical ones, stopped at its axis."""
    if beta1 <= 0 or beta2 <= 0:
        raise ValueError("beta1, beta2 must be positive")
    cx, cy = float(start[0]), float(start[1])
    salt = STREAM_WALK_H if orientation == HORIZONTAL else STREAM_WALK_V
    key = stream_key(replica_key(seed, replica), salt)
    corners = [(cx, cy)]
    horizontal = orientation == HORIZONTAL
    t = 0
    while True:
        u = uniform(key, t)
        t += 1
        if horizontal:
            step = -math.log(1.0 - u) / beta1
            nxt = cx - step
            if orientation == HORIZONTAL and nxt <= 0.0:
                corners.append((0.0, cy))
                return WalkPath(tuple(corners), orientation, (0.0, cy))
            cx = nxt
        else:
            step = -math.log(1.0 - u) / beta2
            nxt = cy - step
            if orientation == VERTICAL and nxt <= 0.0:
                corners.append((cx, 0.0))
                return WalkPath(tuple(corners), orientation, (cx, 0.0))
            cy = nxt
        corners.append((cx, cy))
        horizontal = not horizontal
        if t > _WALK_CAP:
            raise RuntimeError("persistent walk exceeded the step cap")


def i_between(t_minus: WalkPath, t_bar: WalkPath, x, y) -> int:
    """1{weakly below t_minus} + 1{weakly left of t_bar} - 1.

    Weakly below means some point of the square (x-1/2, x+1/2) x (y-1/2, y+1/2)
    lies below a path point with the same abscissa; for these monotone
    staircases that is just a comparison with the path's largest ordinate near
    abscissa x (and symmetrically for weakly-left).
    """
    below = _weakly_below(t_minus, x, y)
    left = _weakly_left(t_bar, x, y)
    return int(below) + int(left) - 1


def _weakly_below(path: WalkPath, x, y) -> bool:
    h = max(path.height_at(x - 0.499), path.height_at(x), path.height_at(x + 0.499))
    return h > y - 0.5


def _weakly_left(path: WalkPath, x, y) -> bool:
    v = max(path.abscissa_at(y - 0.499), path.abscissa_at(y), path.abscissa_at(y + 0.499))
    return v > x - 0.5


# ---------------------------------------------------------------------------
# Feynman-Kac estimators
# ---------------------------------------------------------------------------

def fk_discrete(p: DiscreteProblem, X: int, Y: int, n_samples: int,
                seed: int) -> tuple[float, float]:
    """Monte Carlo solution of the discrete telegraph equation at (X, Y).

    Averages psi(y-exit) + chi(x-exit) + sum of u between the two reversed
    walks launched at (X+1, Y) and (X, Y+1); the corner value chi(0) = psi(0)
    is subtracted up front (constants solve the homogeneous equation) and
    added back to the estimate.  Returns (estimate, standard error).
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if not (1 <= X <= p.X and 1 <= Y <= p.Y):
        raise ValueError("target outside the problem rectangle")
    corner = float(p.chi[0])
    psi0 = np.ascontiguousarray(p.psi[:Y + 1] - corner)
    chi0 = np.ascontiguousarray(p.chi[:X + 1] - corner)
    u = p.source()[:X + 1, :Y + 1]
    col_cum = np.zeros((X + 1, Y + 1))
    col_cum[:, 1:] = np.cumsum(u[:, 1:], axis=1)
    row_cum = np.zeros((Y + 1, X + 1))
    row_cum[:, 1:] = np.cumsum(u.T[:, 1:], axis=1)
    u_total = float(u[1:, 1:].sum())
    vals = impl.fk_discrete_samples(p.b1, p.b2, X, Y, seed, n_samples,
                                    STREAM_WALK_H, STREAM_WALK_V,
                                    col_cum, row_cum, psi0, chi0, u_total)
    est = corner + float(vals.mean())
    return est, float(vals.std(ddof=1) / math.sqrt(n_samples))


def fk_continuous(p: ContinuousProblem, X: float, Y: float, n_samples: int,
                  seed: int, u_grid: tuple = (256, 256)) -> tuple[float, float]:
    """Monte Carlo solution of the continuous telegraph equation at (X, Y).

    u is frozen to a cell-constant field on u_grid over [0,X]x[0,Y] (midpoint
    values), so the signed area integral between the persistent walks is
    computed exactly from the prefix-integral table.  Returns
    (estimate, standard error).
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if X <= 0 or Y <= 0:
        raise ValueError("target must be in the open quadrant")
    corner = p.corner()
    nx, ny = u_grid
    dx = X / nx
    dy = Y / ny
    if p.u is not None:
        xm = (np.arange(nx) + 0.5) * dx
        ym = (np.arange(ny) + 0.5) * dy
        cells = p.u(xm[:, None], ym[None, :]) * dx * dy
        P = np.zeros((nx + 1, ny + 1))
        P[1:, 1:] = np.cumsum(np.cumsum(cells, axis=0), axis=1)
    else:
        P = np.zeros((nx + 1, ny + 1))
    xs, ys, areas = impl.fk_continuous_samples(p.beta1, p.beta2, float(X), float(Y),
                                               seed, n_samples,
                                               STREAM_WALK_H, STREAM_WALK_V,
                                               P, dx, dy)
    if np.isnan(xs).any() or np.isnan(ys).any():
        raise RuntimeError("persistent walk exceeded the step cap")
    vals = areas.copy()
    mask = xs > 0
    if mask.any():
        vals[mask] += np.asarray(p.chi(xs[mask]), dtype=np.float64) - corner
    mask = ys > 0
    if mask.any():
        vals[mask] += np.asarray(p.psi(ys[mask]), dtype=np.float64) - corner
    est = corner + float(vals.mean())
    return est, float(vals.std(ddof=1) / math.sqrt(n_samples))


def reversed_exit_distribution(params: ModelParams, X: int, Y: int,
                               n_samples: int, seed: int, mode: str) -> np.ndarray:
    """Exit coordinates of n reversed walks (mode 'horizontal': ordinate where
    the walk from (X+1, Y) meets x = 0; 'vertical': abscissa where the walk
    from (X, Y+1) meets y = 0)."""
    m = 0 if mode == HORIZONTAL else 1
    salt = STREAM_WALK_H if mode == HORIZONTAL else STREAM_WALK_V
    out = impl.walk_exits(params.b1, params.b2, X, Y, seed, n_samples, m, salt)
    if (out <= -(1 << 62)).any():
        raise RuntimeError("reversed walk exceeded the step cap")
    return out
