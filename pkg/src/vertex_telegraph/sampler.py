"""Sequential sampling of the stochastic six-vertex model in a rectangle, and
exact extraction of the four-point martingale noise.

The sweep visits vertices row by row; at vertex (x, y) the already-determined
heights H(x-1, y-1) = h, H(x-1, y), H(x, y-1) encode the incoming edges
(a path enters from the left iff H(x-1, y) = h + 1, from below iff
H(x, y-1) = h - 1), and the local update is

  no path in        -> H(x, y) = h                      (empty)
  both paths in     -> H(x, y) = h                      (crossing)
  from below only   -> h - 1 w.p. b2 (straight-vertical), else h (turn-right)
  from the left only-> h + 1 w.p. b1 (straight-horizontal), else h (turn-up)

Exactly one uniform is consumed per single-input vertex, drawn from the
counter-based generator keyed by (seed, replica, x, y).

The noise field is q^{H(x,y)} - b1 q^{H(x-1,y)} - b2 q^{H(x,y-1)}
+ (b1+b2-1) q^{H(x-1,y-1)}; per vertex it takes one of six exact values
(scaled by q^h) and is conditionally centered given the past.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backends import impl
from .core import BoundaryData, HeightField, ModelParams
from .rng import MAX_EXTENT, replica_key

STRAIGHT_HORIZONTAL = "straight-horizontal"
TURN_UP = "turn-up"
STRAIGHT_VERTICAL = "straight-vertical"
TURN_RIGHT = "turn-right"
CROSSING = "crossing"
EMPTY = "empty"


@dataclass(frozen=True)
class VertexOutcome:
    """Incoming and outgoing edge occupation of one vertex."""

    left_in: bool
    bottom_in: bool
    right_out: bool
    top_out: bool

    def __post_init__(self):
        n_in = int(self.left_in) + int(self.bottom_in)
        n_out = int(self.right_out) + int(self.top_out)
        if n_in != n_out:
            raise ValueError("path conservation violated")
        if self.left_in and self.bottom_in and not (self.right_out and self.top_out):
            raise ValueError("two incoming paths must cross deterministically")

    @property
    def kind(self) -> str:
        if self.left_in and self.bottom_in:
            return CROSSING
        if self.left_in:
            return STRAIGHT_HORIZONTAL if self.right_out else TURN_UP
        if self.bottom_in:
            return STRAIGHT_VERTICAL if self.top_out else TURN_RIGHT
        return EMPTY


@dataclass(frozen=True)
class Configuration:
    """A sampled six-vertex configuration, encoded by its height field."""

    heights: HeightField
    params: ModelParams
    boundary: BoundaryData
    seed: int
    replica: int = 0

    @property
    def X(self) -> int:
        return self.heights.X

    @property
    def Y(self) -> int:
        return self.heights.Y

    def edge_grids(self):
        """Boolean arrays (left_in, bottom_in, right_out, top_out), indexed
        [x-1, y-1] for vertices (x, y) in {1..X}x{1..Y}."""
        H = self.heights.values
        left_in = H[:-1, 1:] - H[:-1, :-1] == 1
        bottom_in = H[1:, :-1] - H[:-1, :-1] == -1
        right_out = H[1:, 1:] - H[1:, :-1] == 1
        top_out = H[1:, 1:] - H[:-1, 1:] == -1
        return left_in, bottom_in, right_out, top_out

    def outcome(self, x: int, y: int) -> VertexOutcome:
        if not (1 <= x <= self.X and 1 <= y <= self.Y):
            raise IndexError("vertex outside the lattice")
        li, bi, ro, to = (g[x - 1, y - 1] for g in self.edge_grids())
        return VertexOutcome(bool(li), bool(bi), bool(ro), bool(to))


@dataclass(frozen=True)
class NoiseField:
    """Four-point noise values xi(x, y) on the vertex grid, values[x-1, y-1]."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def sample(params: ModelParams, boundary: BoundaryData, X: int | None = None,
           Y: int | None = None, seed: int = 0, replica: int = 0) -> Configuration:
    """Sample one configuration; deterministic given (params, boundary, seed, replica)."""
    if params.alpha != 0.0:
        raise ValueError("sampling is defined for alpha = 0 only")
    if X is None:
        X = boundary.X
    if Y is None:
        Y = boundary.Y
    if X != boundary.X or Y != boundary.Y:
        raise ValueError("extents disagree with the boundary data")
    if X < 1 or Y < 1:
        raise ValueError("extents must be at least 1")
    if X >= MAX_EXTENT or Y >= MAX_EXTENT:
        raise ValueError("lattice extent exceeds the RNG counter range")
    key = replica_key(seed, replica)
    H = impl.sample_field(params.b1, params.b2, boundary.heights_left(),
                          boundary.heights_bottom(), np.uint64(key))
    return Configuration(HeightField(H), params, boundary, seed, replica)


def sample_points(params: ModelParams, boundary: BoundaryData, points,
                  n: int, seed: int, rep0: int = 0) -> np.ndarray:
    """Heights at the given lattice points for n replicas; shape (n, len(points)).

    ``points`` is a sequence of (x, y) lattice coordinates.  Replica ``rep0+i``
    uses its own derived key, so batches can be split or merged freely.
    """
    if params.alpha != 0.0:
        raise ValueError("sampling is defined for alpha = 0 only")
    pts = np.asarray(points, dtype=np.int64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (npts, 2) array of lattice coordinates")
    X, Y = boundary.X, boundary.Y
    if (pts[:, 0] < 0).any() or (pts[:, 0] > X).any() or \
       (pts[:, 1] < 0).any() or (pts[:, 1] > Y).any():
        raise ValueError("points outside the lattice rectangle")
    order = np.argsort(pts[:, 1], kind="stable")
    px = np.ascontiguousarray(pts[order, 0])
    py = pts[order, 1]
    row_ptr = np.searchsorted(py, np.arange(Y + 2), side="left").astype(np.int64)
    out_sorted = impl.sample_points(params.b1, params.b2, boundary.heights_left(),
                                    boundary.heights_bottom(), seed, rep0, n,
                                    px, row_ptr)
    out = np.empty_like(out_sorted)
    out[:, order] = out_sorted
    return out


def extract_noise(config: Configuration, params: ModelParams | None = None) -> NoiseField:
    """xi(x, y) from the four height values around each vertex, literally."""
    params = params or config.params
    q = params.q
    qh = np.power(q, config.heights.values.astype(np.float64))
    xi = (qh[1:, 1:] - params.b1 * qh[:-1, 1:] - params.b2 * qh[1:, :-1]
          + (params.b1 + params.b2 - 1.0) * qh[:-1, :-1])
    return NoiseField(xi)


def expected_noise_by_case(config: Configuration, params: ModelParams | None = None) -> np.ndarray:
    """The exact per-case noise values (the proof's case table), for checking
    extract_noise vertex by vertex.

    With b = b1, q = b2/b1 and h the lower-left height: crossing and empty
    give 0; from below, straight-vertical gives q^h (1/q - b)(1 - q) and
    turn-right q^h b (q - 1); from the left, straight-horizontal gives
    q^h (1 - b)(q - 1) and turn-up q^h b (1 - q).
    """
    params = params or config.params
    b = params.b1
    q = params.q
    H = config.heights.values
    qh = np.power(q, H[:-1, :-1].astype(np.float64))
    left_in, bottom_in, right_out, top_out = config.edge_grids()
    out = np.zeros_like(qh)
    sv = ~left_in & bottom_in & top_out
    tr = ~left_in & bottom_in & ~top_out
    sh = left_in & ~bottom_in & right_out
    tu = left_in & ~bottom_in & ~right_out
    out[sv] = qh[sv] * (1.0 / q - b) * (1.0 - q)
    out[tr] = qh[tr] * b * (q - 1.0)
    out[sh] = qh[sh] * (1.0 - b) * (q - 1.0)
    out[tu] = qh[tu] * b * (1.0 - q)
    return out


def conditional_noise_variance(h: int, h_right: int, h_up: int,
                               params: ModelParams) -> float:
    """Conditional variance of xi at a vertex whose three determined corner
    heights are h = H(x,y), h_right = H(x+1,y), h_up = H(x,y+1)."""
    b = params.b1
    bq = params.b2
    q = params.q
    qh = q ** h
    dx = q ** h_right - qh
    dy = q ** h_up - qh
    return ((bq * (1 - b) + b * (1 - bq)) * dx * dy
            + b * (1 - bq) * (1 - q) * qh * dx
            - b * (1 - b) * (1 - q) * qh * dy)


def conditional_noise_variance_field(config: Configuration,
                                     params: ModelParams | None = None) -> np.ndarray:
    """conditional_noise_variance at every vertex, indexed [x-1, y-1]."""
    params = params or config.params
    b = params.b1
    bq = params.b2
    q = params.q
    qh = np.power(q, config.heights.values.astype(np.float64))
    dx = qh[1:, :-1] - qh[:-1, :-1]
    dy = qh[:-1, 1:] - qh[:-1, :-1]
    return ((bq * (1 - b) + b * (1 - bq)) * dx * dy
            + b * (1 - bq) * (1 - q) * qh[:-1, :-1] * dx
            - b * (1 - b) * (1 - q) * qh[:-1, :-1] * dy)


def conditional_noise_moment_fields(config: Configuration,
                                    params: ModelParams | None = None):
    """Exact conditional variance and fourth moment of xi at every vertex,
    straight from the two-branch case table.  These are the predictable
    normalizers for the martingale diagnostics (sample-variance t-statistics
    misbehave here: the conditional law can put tiny probability on a large
    branch that balances a frequent small one)."""
    params = params or config.params
    b = params.b1
    bq = params.b2
    q = params.q
    qh = np.power(q, config.heights.values[:-1, :-1].astype(np.float64))
    left_in, bottom_in, _, _ = config.edge_grids()
    v2 = np.zeros_like(qh)
    v4 = np.zeros_like(qh)
    bot = bottom_in & ~left_in
    a = qh * (1.0 / q - b) * (1.0 - q)
    c = qh * b * (q - 1.0)
    v2[bot] = (bq * a ** 2 + (1 - bq) * c ** 2)[bot]
    v4[bot] = (bq * a ** 4 + (1 - bq) * c ** 4)[bot]
    lef = left_in & ~bottom_in
    a = qh * (1.0 - b) * (q - 1.0)
    c = qh * b * (1.0 - q)
    v2[lef] = (b * a ** 2 + (1 - b) * c ** 2)[lef]
    v4[lef] = (b * a ** 4 + (1 - b) * c ** 4)[lef]
    return v2, v4


def integrated_identity_residual(config: Configuration,
                                 params: ModelParams | None = None,
                                 X: int | None = None, Y: int | None = None) -> float:
    """Left side of the summed four-point identity minus sum(xi); telescopes to 0."""
    params = params or config.params
    X = X if X is not None else config.X
    Y = Y if Y is not None else config.Y
    if not (1 <= X <= config.X and 1 <= Y <= config.Y):
        raise ValueError("rectangle outside the sampled lattice")
    b = params.b1
    bq = params.b2
    q = params.q
    H = config.heights.values
    qh = np.power(q, H.astype(np.float64))
    lhs = (-(1 - b) * qh[1:X, 0].sum()
           - (1 - bq) * qh[0, 1:Y].sum()
           + (1 - b) * qh[1:X, Y].sum()
           + (1 - bq) * qh[X, 1:Y].sum()
           + (b + bq - 1.0) * qh[0, 0]
           - bq * qh[X, 0]
           - b * qh[0, Y]
           + qh[X, Y])
    xi = extract_noise(config, params).values
    return float(lhs - xi[:X, :Y].sum())
