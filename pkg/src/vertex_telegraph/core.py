"""Shared domain types: model parameters, boundary data, height fields, grids.

The lattice model lives on the vertex grid {1..X}x{1..Y}; height functions live
on the corner grid {0..X}x{0..Y} with H(0,0) = 0.  Heights step by {0,+1} in y
and {-1,0} in x.  All types are immutable after construction (arrays are
frozen), so they can be shared freely between threads.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import STREAM_COINS, stream_key, uniform, vertex_counter


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Vertex weights (b1, b2) and the derived scaling data.

    b1 is the horizontal persistence weight, b2 the vertical one.  With the
    scale parameter L the rates are beta_i = -L*ln(b_i); qs = exp(beta1-beta2)
    is the quantization parameter on the macroscopic scale and s = beta1/beta2
    the anisotropy.  ``alpha`` is the dynamic parameter; it only enters the
    contour formulas, sampling requires alpha = 0.
    """

    b1: float
    b2: float
    L: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.b1 < 1.0 and 0.0 < self.b2 < 1.0):
            raise ValueError("weights must satisfy 0 < b1, b2 < 1")
        if self.b1 == self.b2:
            raise ValueError("b1 == b2 is degenerate (q = 1 and beta1 = beta2)")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    @property
    def q(self) -> float:
        return self.b2 / self.b1

    @property
    def beta1(self) -> float:
        return -self.L * math.log(self.b1)

    @property
    def beta2(self) -> float:
        return -self.L * math.log(self.b2)

    @property
    def qs(self) -> float:
        """exp(beta1 - beta2) = q**L."""
        return math.exp(self.beta1 - self.beta2)

    @property
    def s(self) -> float:
        """beta1 / beta2."""
        return self.beta1 / self.beta2

    @property
    def log_qs(self) -> float:
        return self.beta1 - self.beta2


def derive_params(b1: float, b2: float, L: float = 1.0, alpha: float = 0.0) -> ModelParams:
    """Validate (b1, b2, L) and bundle them with the derived scaling data."""
    return ModelParams(float(b1), float(b2), float(L), float(alpha))


def params_from_rates(beta1: float, beta2: float, L: float, alpha: float = 0.0) -> ModelParams:
    """Inverse of derive_params: weights b_i = exp(-beta_i / L)."""
    if beta1 <= 0 or beta2 <= 0:
        raise ValueError("beta1, beta2 must be positive")
    if beta1 == beta2:
        raise ValueError("beta1 == beta2 is degenerate")
    return ModelParams(math.exp(-beta1 / L), math.exp(-beta2 / L), L, alpha)


@dataclass(frozen=True)
class BoundaryData:
    """Entry pattern of paths on the two axes.

    left_entries[j] == 1 means a path enters from the left at row j+1 (so the
    boundary height H(0, y) = sum of the first y entries); bottom_entries[i]
    == 1 means a path enters from below at column i+1, and H(x, 0) = -(sum of
    the first x entries).
    """

    left_entries: np.ndarray
    bottom_entries: np.ndarray

    def __post_init__(self):
        le = np.asarray(self.left_entries, dtype=np.int64)
        be = np.asarray(self.bottom_entries, dtype=np.int64)
        if le.ndim != 1 or be.ndim != 1:
            raise ValueError("entry sequences must be one-dimensional")
        if not (np.isin(le, (0, 1)).all() and np.isin(be, (0, 1)).all()):
            raise ValueError("entries must be 0/1")
        object.__setattr__(self, "left_entries", _frozen(le))
        object.__setattr__(self, "bottom_entries", _frozen(be))

    @property
    def Y(self) -> int:
        return self.left_entries.shape[0]

    @property
    def X(self) -> int:
        return self.bottom_entries.shape[0]

    def heights_left(self) -> np.ndarray:
        """H(0, y) for y = 0..Y."""
        out = np.zeros(self.Y + 1, dtype=np.int64)
        np.cumsum(self.left_entries, out=out[1:])
        return out

    def heights_bottom(self) -> np.ndarray:
        """H(x, 0) for x = 0..X."""
        out = np.zeros(self.X + 1, dtype=np.int64)
        np.cumsum(self.bottom_entries, out=out[1:])
        return -out

    @staticmethod
    def domain_wall(X: int, Y: int) -> "BoundaryData":
        """Paths enter at every row of the left boundary, none from below."""
        return BoundaryData(np.ones(Y, dtype=np.int64), np.zeros(X, dtype=np.int64))

    @staticmethod
    def empty(X: int, Y: int) -> "BoundaryData":
        return BoundaryData(np.zeros(Y, dtype=np.int64), np.zeros(X, dtype=np.int64))

    @staticmethod
    def bernoulli(X: int, Y: int, p_left: float, p_bottom: float, seed: int) -> "BoundaryData":
        """Independent entry coins: heads w.p. p_left per left-boundary row and
        p_bottom per bottom-boundary column.  Deterministic given seed."""
        if not (0 <= p_left <= 1 and 0 <= p_bottom <= 1):
            raise ValueError("entry probabilities must lie in [0, 1]")
        key = stream_key(seed, STREAM_COINS)
        le = np.array([1 if uniform(key, vertex_counter(0, j + 1)) < p_left else 0
                       for j in range(Y)], dtype=np.int64)
        be = np.array([1 if uniform(key, vertex_counter(i + 1, 0)) < p_bottom else 0
                       for i in range(X)], dtype=np.int64)
        return BoundaryData(le, be)

    @staticmethod
    def from_profiles(X: int, Y: int, L: float, chi, psi) -> "BoundaryData":
        """Deterministic rounding of Lipschitz monotone profiles.

        chi (nonincreasing, chi(0)=0) prescribes H(x,0) ~ L*chi(x/L); psi
        (nondecreasing, psi(0)=0) prescribes H(0,y) ~ L*psi(y/L).
        """
        hy = np.floor([L * psi(y / L) for y in range(Y + 1)]).astype(np.int64)
        hx = np.floor([L * (-chi(x / L)) for x in range(X + 1)]).astype(np.int64)
        le = np.diff(hy)
        be = np.diff(hx)
        if not (np.isin(le, (0, 1)).all() and np.isin(be, (0, 1)).all()):
            raise ValueError("profiles must be monotone and 1-Lipschitz after scaling")
        return BoundaryData(le, be)

    @staticmethod
    def low_density(X: int, Y: int, L: float, delta: float, chi, psi) -> "BoundaryData":
        """Entry counts of order L**(1-delta) * profile.

        chi <= 0 nonincreasing and psi >= 0 nondecreasing are the macroscopic
        profiles of H(Lx,0)/L**(1-delta) and H(0,Ly)/L**(1-delta).
        """
        if not (0.0 < delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        scale = L ** (1.0 - delta)
        hy = np.floor([scale * psi(y / L) for y in range(Y + 1)]).astype(np.int64)
        hx = np.floor([scale * (-chi(x / L)) for x in range(X + 1)]).astype(np.int64)
        if hy[-1] == 0 and hx[-1] == 0:
            raise ValueError("entry counts round to zero: delta too large for this L")
        le = np.diff(hy)
        be = np.diff(hx)
        if not (np.isin(le, (0, 1)).all() and np.isin(be, (0, 1)).all()):
            raise ValueError("low-density profiles must scale to 1-Lipschitz boundary heights")
        return BoundaryData(le, be)

    @staticmethod
    def from_boundary_heights(h_left: np.ndarray, h_bottom: np.ndarray) -> "BoundaryData":
        """Round-trip constructor from H(0, 0..Y) and H(0..X, 0)."""
        h_left = np.asarray(h_left, dtype=np.int64)
        h_bottom = np.asarray(h_bottom, dtype=np.int64)
        if h_left[0] != 0 or h_bottom[0] != 0:
            raise ValueError("boundary heights must start at H(0,0) = 0")
        return BoundaryData(np.diff(h_left), -np.diff(h_bottom))


@dataclass(frozen=True)
class HeightField:
    """Integer height function on the corner grid {0..X}x{0..Y}."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        if v.ndim != 2:
            raise ValueError("height values must be a 2d array indexed [x, y]")
        if v[0, 0] != 0:
            raise ValueError("H(0,0) must be 0")
        dy = np.diff(v, axis=1)
        dx = np.diff(v, axis=0)
        if dy.size and not ((dy == 0) | (dy == 1)).all():
            raise ValueError("vertical increments must lie in {0, 1}")
        if dx.size and not ((dx == -1) | (dx == 0)).all():
            raise ValueError("horizontal increments must lie in {-1, 0}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def X(self) -> int:
        return self.values.shape[0] - 1

    @property
    def Y(self) -> int:
        return self.values.shape[1] - 1

    def __getitem__(self, xy) -> int:
        x, y = xy
        return int(self.values[x, y])


def modified_height(H: HeightField, x: int, y: int) -> int:
    """d(x, y) = x - y - 1 + 2 H(x, y), the height seen along the paths."""
    if not (0 <= x <= H.X and 0 <= y <= H.Y):
        raise IndexError("coordinates outside the lattice")
    return x - y - 1 + 2 * H[x, y]


def extend_bilinear(H: HeightField, x: float, y: float) -> float:
    """Piecewise-bilinear extension: linear in x, then linear in y.

    Matches lattice values at integer points and stays 1-Lipschitz in each
    variable because the lattice increments are.
    """
    if not (0.0 <= x <= H.X and 0.0 <= y <= H.Y):
        raise ValueError("coordinates outside the lattice rectangle")
    x0 = min(int(math.floor(x)), H.X - 1) if H.X > 0 else 0
    y0 = min(int(math.floor(y)), H.Y - 1) if H.Y > 0 else 0
    fx = x - x0
    fy = y - y0
    v = H.values
    if H.X == 0 and H.Y == 0:
        return float(v[0, 0])
    if H.X == 0:
        return float((1 - fy) * v[0, y0] + fy * v[0, y0 + 1])
    if H.Y == 0:
        return float((1 - fx) * v[x0, 0] + fx * v[x0 + 1, 0])
    bottom = (1 - fx) * v[x0, y0] + fx * v[x0 + 1, y0]
    top = (1 - fx) * v[x0, y0 + 1] + fx * v[x0 + 1, y0 + 1]
    return float((1 - fy) * bottom + fy * top)


@dataclass(frozen=True)
class Field2D:
    """Real-valued function on a rectangular grid with uniform spacing.

    values[i, j] is the value at (origin_x + i*dx, origin_y + j*dy).
    """

    values: np.ndarray
    dx: float = 1.0
    dy: float = 1.0
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("field values must be 2d, indexed [x, y]")
        if not np.isfinite(v).all():
            raise ValueError("field values must be finite")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def shape(self):
        return self.values.shape

    def xs(self) -> np.ndarray:
        return self.origin[0] + self.dx * np.arange(self.shape[0])

    def ys(self) -> np.ndarray:
        return self.origin[1] + self.dy * np.arange(self.shape[1])


# ---------------------------------------------------------------------------
# serialization: CSV with header "x,y,value" and a JSON envelope
# ---------------------------------------------------------------------------

def field_to_csv(values: np.ndarray, dx: float = 1.0, dy: float = 1.0,
                 origin=(0.0, 0.0)) -> str:
    values = np.asarray(values)
    buf = io.StringIO()
    buf.write("x,y,value\n")
    nx, ny = values.shape
    for i in range(nx):
        x = origin[0] + i * dx
        for j in range(ny):
            y = origin[1] + j * dy
            buf.write(f"{_num(x)},{_num(y)},{_num(values[i, j])}\n")
    return buf.getvalue()


def _num(v) -> str:
    f = float(v)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def field_from_csv(text: str) -> tuple[np.ndarray, float, float, tuple]:
    rows = [line.split(",") for line in text.strip().splitlines()[1:] if line.strip()]
    xs = sorted({float(r[0]) for r in rows})
    ys = sorted({float(r[1]) for r in rows})
    ix = {v: i for i, v in enumerate(xs)}
    iy = {v: j for j, v in enumerate(ys)}
    vals = np.full((len(xs), len(ys)), np.nan)
    for r in rows:
        vals[ix[float(r[0])], iy[float(r[1])]] = float(r[2])
    if np.isnan(vals).any():
        raise ValueError("CSV does not cover a full rectangular grid")
    dx = xs[1] - xs[0] if len(xs) > 1 else 1.0
    dy = ys[1] - ys[0] if len(ys) > 1 else 1.0
    return vals, dx, dy, (xs[0], ys[0])


def field_to_json(values: np.ndarray, dx: float = 1.0, dy: float = 1.0,
                  origin=(0.0, 0.0)) -> str:
    values = np.asarray(values)
    doc = {
        "dims": list(values.shape),
        "spacing": [dx, dy],
        "origin": list(origin),
        "data": [float(v) for v in values.reshape(-1)],  # row-major over [x, y]
    }
    return json.dumps(doc, sort_keys=True)


def field_from_json(text: str) -> tuple[np.ndarray, float, float, tuple]:
    doc = json.loads(text)
    vals = np.asarray(doc["data"], dtype=np.float64).reshape(doc["dims"])
    dx, dy = doc["spacing"]
    origin = tuple(doc.get("origin", (0.0, 0.0)))
    return vals, float(dx), float(dy), origin
