"""Numba kernels for the hot loops: sequential sampling, lattice recursions,
reversed/persistent walks, and the Picard cell sweep.

Each function here has a signature-compatible twin in ``numpy_impl``; the
sampler and walk kernels are bit-identical across backends because all
randomness comes from the shared counter-based generator in ``rng``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX_A = U64(0xBF58476D1CE4E5B9)
_MIX_B = U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0
_WALK_CAP = 10_000_000


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX_A
    z = (z ^ (z >> U64(27))) * _MIX_B
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _uniform(key, ctr):
    return np.float64(_mix64(key + _GOLDEN * ctr) >> U64(11)) * _INV53


@njit(cache=True, inline="always")
def _vertex_ctr(x, y):
    return U64(x) + (U64(y) << U64(21))


@njit(cache=True)
def replica_key(seed, replica):
    return _mix64(U64(seed) * _GOLDEN + U64(replica) * _MIX_A)


@njit(cache=True)
def stream_key(key, salt):
    return _mix64(key + U64(salt))


@njit(cache=True)
def sample_field(b1, b2, h_left, h_bottom, key):
    """Sample one height configuration; h_left = H(0, 0..Y), h_bottom = H(0..X, 0).

    Row-major sweep; the vertex at (x, y) reads h = H(x-1, y-1) and the already
    decided neighbors H(x-1, y), H(x, y-1), consumes one uniform iff exactly one
    path enters, and writes H(x, y).
    """
    X = h_bottom.shape[0] - 1
    Y = h_left.shape[0] - 1
    H = np.empty((X + 1, Y + 1), dtype=np.int64)
    for x in range(X + 1):
        H[x, 0] = h_bottom[x]
    for y in range(Y + 1):
        H[0, y] = h_left[y]
    for y in range(1, Y + 1):
        for x in range(1, X + 1):
            h = H[x - 1, y - 1]
            left_in = H[x - 1, y] - h == 1
            bottom_in = H[x, y - 1] - h == -1
            if left_in:
                if bottom_in:
                    H[x, y] = h  # crossing
                else:
                    u = _uniform(key, _vertex_ctr(x, y))
                    H[x, y] = h + 1 if u < b1 else h
            else:
                if bottom_in:
                    u = _uniform(key, _vertex_ctr(x, y))
                    H[x, y] = h - 1 if u < b2 else h
                else:
                    H[x, y] = h  # empty
    return H


@njit(cache=True)
def sample_points(b1, b2, h_left, h_bottom, seed, rep0, n, px, row_ptr):
    """Heights at selected lattice points for a batch of replicas.

    Points are pre-sorted by row: indices k with row_ptr[y] <= k < row_ptr[y+1]
    have ordinate y and abscissa px[k].  Only two height rows are kept.
    """
    X = h_bottom.shape[0] - 1
    Y = h_left.shape[0] - 1
    npts = px.shape[0]
    out = np.empty((n, npts), dtype=np.int64)
    row_prev = np.empty(X + 1, dtype=np.int64)
    row_cur = np.empty(X + 1, dtype=np.int64)
    for rep in range(n):
        key = _mix64(U64(seed) * _GOLDEN + U64(rep0 + rep) * _MIX_A)
        for x in range(X + 1):
            row_prev[x] = h_bottom[x]
        for k in range(row_ptr[0], row_ptr[1]):
            out[rep, k] = row_prev[px[k]]
        for y in range(1, Y + 1):
            row_cur[0] = h_left[y]
            for x in range(1, X + 1):
                h = row_prev[x - 1]
                left_in = row_cur[x - 1] - h == 1
                bottom_in = row_prev[x] - h == -1
                if left_in:
                    if bottom_in:
                        row_cur[x] = h
                    else:
                        u = _uniform(key, _vertex_ctr(x, y))
                        row_cur[x] = h + 1 if u < b1 else h
                else:
                    if bottom_in:
                        u = _uniform(key, _vertex_ctr(x, y))
                        row_cur[x] = h - 1 if u < b2 else h
                    else:
                        row_cur[x] = h
            for k in range(row_ptr[y], row_ptr[y + 1]):
                out[rep, k] = row_cur[px[k]]
            tmp = row_prev
            row_prev = row_cur
            row_cur = tmp
    return out


@njit(cache=True)
def solve_recursive(b1, b2, u, chi, psi):
    """March the discrete telegraph recursion from the boundary rows/columns."""
    X = chi.shape[0] - 1
    Y = psi.shape[0] - 1
    phi = np.empty((X + 1, Y + 1), dtype=np.float64)
    for x in range(X + 1):
        phi[x, 0] = chi[x]
    for y in range(Y + 1):
        phi[0, y] = psi[y]
    c0 = b1 + b2 - 1.0
    for y in range(1, Y + 1):
        for x in range(1, X + 1):
            phi[x, y] = (b1 * phi[x - 1, y] + b2 * phi[x, y - 1]
                         - c0 * phi[x - 1, y - 1] + u[x, y])
    return phi


@njit(cache=True)
def riemann_table(b1, b2, A, B):
    """Discrete Riemann function r(a, b) for offsets 0..A x 0..B.

    Forward recursion in the offsets, seeded by r(a,0) = b1**a, r(0,b) = b2**b.
    """
    r = np.empty((A + 1, B + 1), dtype=np.float64)
    r[0, 0] = 1.0
    for a in range(1, A + 1):
        r[a, 0] = r[a - 1, 0] * b1
    for b in range(1, B + 1):
        r[0, b] = r[0, b - 1] * b2
    c0 = b1 + b2 - 1.0
    for a in range(A):
        for b in range(B):
            r[a + 1, b + 1] = b1 * r[a, b + 1] + b2 * r[a + 1, b] - c0 * r[a, b]
    return r


@njit(cache=True)
def walk_profile_h(b1, b2, X, Y, key):
    """Reversed walk leaving (X+1, Y) to the left; returns first-arrival heights.

    prof[x] is the ordinate at which the walk first reaches abscissa x, for
    x = 0..X+1 (prof[0] is the exit ordinate on the line x = 0).  Moving left
    persists w.p. b1; moving down persists w.p. b2.
    """
    prof = np.empty(X + 2, dtype=np.int64)
    prof[X + 1] = Y
    cx = X + 1
    cy = Y
    horizontal = True
    cx -= 1  # first edge is forced to the left
    prof[cx] = cy
    t = U64(0)
    while cx > 0:
        u = _uniform(key, t)
        t += U64(1)
        if horizontal:
            if u < b1:
                cx -= 1
                prof[cx] = cy
            else:
                horizontal = False
                cy -= 1
        else:
            if u < b2:
                cy -= 1
            else:
                horizontal = True
                cx -= 1
                prof[cx] = cy
        if t > U64(_WALK_CAP):
            prof[0] = np.int64(-(1 << 62))
            return prof
    return prof


@njit(cache=True)
def walk_profile_v(b1, b2, X, Y, key):
    """Reversed walk leaving (X, Y+1) downward; prof[y] is the abscissa at which
    the walk first reaches ordinate y, for y = 0..Y+1."""
    prof = np.empty(Y + 2, dtype=np.int64)
    prof[Y + 1] = X
    cx = X
    cy = Y + 1
    horizontal = False
    cy -= 1  # first edge is forced downward
    prof[cy] = cx
    t = U64(0)
    while cy > 0:
        u = _uniform(key, t)
        t += U64(1)
        if horizontal:
            if u < b1:
                cx -= 1
            else:
                horizontal = False
                cy -= 1
                prof[cy] = cx
        else:
            if u < b2:
                cy -= 1
                prof[cy] = cx
            else:
                horizontal = True
                cx -= 1
        if t > U64(_WALK_CAP):
            prof[0] = np.int64(-(1 << 62))
            return prof
    return prof


@njit(cache=True)
def walk_exits(b1, b2, X, Y, seed, n, mode, salt):
    """Exit coordinate of n independent reversed walks (mode 0: horizontal
    start from (X+1, Y), exit ordinate; mode 1: vertical start from (X, Y+1),
    exit abscissa)."""
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = stream_key(replica_key(seed, i), salt)
        if mode == 0:
            prof = walk_profile_h(b1, b2, X, Y, key)
        else:
            prof = walk_profile_v(b1, b2, X, Y, key)
        out[i] = prof[0]
    return out


@njit(cache=True)
def fk_discrete_samples(b1, b2, X, Y, seed, n, salt_h, salt_v,
                        col_cum, row_cum, psi0, chi0, u_total):
    """Per-sample Feynman-Kac values for the discrete telegraph equation.

    col_cum[x, k] = sum_{y<=k} u(x, y); row_cum[y, k] = sum_{x<=k} u(x, y);
    psi0/chi0 are corner-subtracted boundary tables (index 0 holds 0).
    """
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        base = replica_key(seed, i)
        kh = stream_key(base, salt_h)
        kv = stream_key(base, salt_v)
        hprof = walk_profile_h(b1, b2, X, Y, kh)
        vprof = walk_profile_v(b1, b2, X, Y, kv)
        yexit = hprof[0]
        xexit = vprof[0]
        val = 0.0
        if yexit >= 0:
            val += psi0[yexit]
        if xexit >= 0:
            val += chi0[xexit]
        s = 0.0
        for x in range(1, X + 1):
            k = hprof[x]
            if k > Y:
                k = Y
            if k > 0:
                s += col_cum[x, k]
        for y in range(1, Y + 1):
            k = vprof[y]
            if k > X:
                k = X
            if k > 0:
                s += row_cum[y, k]
        out[i] = val + s - u_total
    return out


@njit(cache=True, inline="always")
def _cum_eval(P, dx, dy, x, y):
    """Evaluate the prefix integral U(x, y) of a cell-constant field from its
    node table P[i, j] = U(i*dx, j*dy); bilinear interpolation is exact here."""
    if x <= 0.0 or y <= 0.0:
        return 0.0
    nx = P.shape[0] - 1
    ny = P.shape[1] - 1
    tx = x / dx
    ty = y / dy
    i = int(tx)
    j = int(ty)
    if i >= nx:
        i = nx - 1
    if j >= ny:
        j = ny - 1
    fx = tx - i
    fy = ty - j
    return ((1 - fx) * (1 - fy) * P[i, j] + fx * (1 - fy) * P[i + 1, j]
            + (1 - fx) * fy * P[i, j + 1] + fx * fy * P[i + 1, j + 1])


@njit(cache=True)
def fk_continuous_samples(beta1, beta2, X, Y, seed, n, salt_h, salt_v, P, dx, dy):
    """Exit coordinates and signed u-integrals for persistent-walk pairs.

    Returns (xs, ys, areas): ys[i] is the exit ordinate of the horizontal-start
    path, xs[i] the exit abscissa of the vertical-start path, and areas[i] the
    exact integral of u with the between-paths sign over [0,X]x[0,Y].
    """
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    areas = np.empty(n, dtype=np.float64)
    utot = _cum_eval(P, dx, dy, X, Y)
    for i in range(n):
        base = replica_key(seed, i)
        # horizontal-start path: integrate the region below it
        key = stream_key(base, salt_h)
        cx = X
        cy = Y
        s = 0.0
        t = U64(0)
        while True:
            u = _uniform(key, t)
            t += U64(1)
            xnew = cx - (-np.log(1.0 - u) / beta1)
            if cy > 0.0:
                s += (_cum_eval(P, dx, dy, min(cx, X), min(cy, Y))
                      - _cum_eval(P, dx, dy, max(xnew, 0.0), min(cy, Y)))
            if xnew <= 0.0:
                ys[i] = cy
                break
            cx = xnew
            u = _uniform(key, t)
            t += U64(1)
            cy -= -np.log(1.0 - u) / beta2
            if t > U64(_WALK_CAP):
                ys[i] = np.nan
                break
        # vertical-start path: integrate the region to its left
        key = stream_key(base, salt_v)
        cx = X
        cy = Y
        t = U64(0)
        while True:
            u = _uniform(key, t)
            t += U64(1)
            ynew = cy - (-np.log(1.0 - u) / beta2)
            if cx > 0.0:
                s += (_cum_eval(P, dx, dy, min(cx, X), min(cy, Y))
                      - _cum_eval(P, dx, dy, min(cx, X), max(ynew, 0.0)))
            if ynew <= 0.0:
                xs[i] = cx
                break
            cy = ynew
            u = _uniform(key, t)
            t += U64(1)
            cx -= -np.log(1.0 - u) / beta1
            if t > U64(_WALK_CAP):
                xs[i] = np.nan
                break
        areas[i] = s - utot
    return xs, ys, areas


@njit(cache=True)
def picard_sweep(g, lam, mu, nu, dx, dy, xe, ye, tol, max_iter):
    """Solve phi + lam*Ix[phi] + mu*Iy[phi] + nu*Ixy[phi] = g by cell sweeping.

    xe/ye are block-edge node indices (xe[0] = 0, xe[-1] = nx); blocks are
    swept bottom-left to top-right, so each block sees only finalized data
    outside itself and its local fixed-point map is a contraction.  Integrals
    are trapezoidal on the grid.  Returns (phi, ok, last_residual).
    """
    nx = g.shape[0] - 1
    ny = g.shape[1] - 1
    phi = g.copy()
    cum_y = np.zeros(nx + 1, dtype=np.float64)   # int_0^{y_band} phi(x, .) dy
    cum_xy = np.zeros(nx + 1, dtype=np.float64)  # int_0^x of cum_y
    last = 0.0
    for by in range(ye.shape[0] - 1):
        y0 = ye[by]
        y1 = ye[by + 1]
        bh = y1 - y0 + 1
        jj_lo = 0 if by == 0 else 1
        cum_xy[0] = 0.0
        for ix in range(1, nx + 1):
            cum_xy[ix] = cum_xy[ix - 1] + 0.5 * dx * (cum_y[ix - 1] + cum_y[ix])
        cum_x = np.zeros(bh, dtype=np.float64)   # int_0^{x_block} phi(., y) dx
        for bx in range(xe.shape[0] - 1):
            x0 = xe[bx]
            x1 = xe[bx + 1]
            bw = x1 - x0 + 1
            ii_lo = 0 if bx == 0 else 1
            termB = np.zeros(bh, dtype=np.float64)
            for jj in range(1, bh):
                termB[jj] = termB[jj - 1] + 0.5 * dy * (cum_x[jj - 1] + cum_x[jj])
            block = np.empty((bw, bh), dtype=np.float64)
            for ii in range(bw):
                for jj in range(bh):
                    block[ii, jj] = phi[x0 + ii, y0 + jj]
            cx_blk = np.zeros((bw, bh), dtype=np.float64)
            cy_blk = np.zeros((bw, bh), dtype=np.float64)
            cxy_blk = np.zeros((bw, bh), dtype=np.float64)
            ok_block = False
            delta = 0.0
            for _ in range(max_iter):
                delta = 0.0
                for jj in range(bh):
                    for ii in range(1, bw):
                        cx_blk[ii, jj] = cx_blk[ii - 1, jj] + 0.5 * dx * (block[ii - 1, jj] + block[ii, jj])
                for ii in range(bw):
                    for jj in range(1, bh):
                        cy_blk[ii, jj] = cy_blk[ii, jj - 1] + 0.5 * dy * (block[ii, jj - 1] + block[ii, jj])
                for jj in range(1, bh):
                    for ii in range(bw):
                        cxy_blk[ii, jj] = cxy_blk[ii, jj - 1] + 0.5 * dy * (cx_blk[ii, jj - 1] + cx_blk[ii, jj])
                for ii in range(ii_lo, bw):
                    for jj in range(jj_lo, bh):
                        Ix = cum_x[jj] + cx_blk[ii, jj]
                        Iy = cum_y[x0 + ii] + cy_blk[ii, jj]
                        Ixy = cum_xy[x0 + ii] + termB[jj] + cxy_blk[ii, jj]
                        new = g[x0 + ii, y0 + jj] - lam * Ix - mu * Iy - nu * Ixy
                        d = new - block[ii, jj]
                        if d < 0.0:
                            d = -d
                        if d > delta:
                            delta = d
                        block[ii, jj] = new
                if delta < tol:
                    ok_block = True
                    break
            if not ok_block:
                return phi, False, delta
            last = delta
            for ii in range(ii_lo, bw):
                for jj in range(jj_lo, bh):
                    phi[x0 + ii, y0 + jj] = block[ii, jj]
            for jj in range(bh):
                acc = cum_x[jj]
                for ii in range(1, bw):
                    acc += 0.5 * dx * (phi[x0 + ii - 1, y0 + jj] + phi[x0 + ii, y0 + jj])
                cum_x[jj] = acc
        for ix in range(nx + 1):
            acc = cum_y[ix]
            for jj in range(1, bh):
                acc += 0.5 * dy * (phi[ix, y0 + jj - 1] + phi[ix, y0 + jj])
            cum_y[ix] = acc
    return phi, True, last
