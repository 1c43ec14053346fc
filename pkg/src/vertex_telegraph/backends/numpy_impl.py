"""Pure-numpy fallback for the hot kernels (selected via VERTEX_TELEGRAPH_NO_NUMBA).

Sampling batches vectorize over replicas (the lattice sweep itself is a data
dependency and stays a Python loop); the walk and recursion kernels are plain
Python loops.  Sampler and walk outputs are bit-identical to the numba backend
because both consume the same counter-based generator.
"""
from __future__ import annotations

import numpy as np

from ..rng import (GOLDEN, INV53, MIX_A, mix64_np, replica_key, stream_key,
                   uniform)

_WALK_CAP = 10_000_000
_U64 = np.uint64


def _uniform_vec(keys: np.ndarray, ctr: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        state = keys + _U64(GOLDEN) * _U64(ctr)
        return (mix64_np(state) >> _U64(11)).astype(np.float64) * INV53


def sample_field(b1, b2, h_left, h_bottom, key):
    key = int(key)  # the scalar generator works in python ints
    X = h_bottom.shape[0] - 1
    Y = h_left.shape[0] - 1
    H = np.empty((X + 1, Y + 1), dtype=np.int64)
    H[:, 0] = h_bottom
    H[0, :] = h_left
    for y in range(1, Y + 1):
        for x in range(1, X + 1):
            h = H[x - 1, y - 1]
            left_in = H[x - 1, y] - h == 1
            bottom_in = H[x, y - 1] - h == -1
            if left_in:
                if bottom_in:
                    H[x, y] = h
                else:
                    H[x, y] = h + 1 if uniform(key, x + (y << 21)) < b1 else h
            else:
                if bottom_in:
                    H[x, y] = h - 1 if uniform(key, x + (y << 21)) < b2 else h
                else:
                    H[x, y] = h
    return H


def sample_points(b1, b2, h_left, h_bottom, seed, rep0, n, px, row_ptr):
    X = h_bottom.shape[0] - 1
    Y = h_left.shape[0] - 1
    npts = px.shape[0]
    out = np.empty((n, npts), dtype=np.int64)
    with np.errstate(over="ignore"):
        keys = mix64_np(_U64(seed) * _U64(GOLDEN)
                        + np.arange(rep0, rep0 + n, dtype=np.uint64) * _U64(MIX_A))
    row_prev = np.empty((n, X + 1), dtype=np.int64)
    row_cur = np.empty((n, X + 1), dtype=np.int64)
    row_prev[:] = h_bottom[None, :]
    for k in range(row_ptr[0], row_ptr[1]):
        out[:, k] = row_prev[:, px[k]]
    for y in range(1, Y + 1):
        row_cur[:, 0] = h_left[y]
        for x in range(1, X + 1):
            h = row_prev[:, x - 1]
            left_in = row_cur[:, x - 1] - h == 1
            bottom_in = row_prev[:, x] - h == -1
            u = _uniform_vec(keys, x + (y << 21))
            new = h.copy()
            new[left_in & ~bottom_in & (u < b1)] += 1
            new[~left_in & bottom_in & (u < b2)] -= 1
            row_cur[:, x] = new
        for k in range(row_ptr[y], row_ptr[y + 1]):
            out[:, k] = row_cur[:, px[k]]
        row_prev, row_cur = row_cur, row_prev
    return out


def solve_recursive(b1, b2, u, chi, psi):
    X = chi.shape[0] - 1
    Y = psi.shape[0] - 1
    phi = np.empty((X + 1, Y + 1), dtype=np.float64)
    phi[:, 0] = chi
    phi[0, :] = psi
    c0 = b1 + b2 - 1.0
    for y in range(1, Y + 1):
        for x in range(1, X + 1):
            phi[x, y] = (b1 * phi[x - 1, y] + b2 * phi[x, y - 1]
                         - c0 * phi[x - 1, y - 1] + u[x, y])
    return phi


def riemann_table(b1, b2, A, B):
    r = np.empty((A + 1, B + 1), dtype=np.float64)
    r[:, 0] = b1 ** np.arange(A + 1)
    r[0, :] = b2 ** np.arange(B + 1)
    c0 = b1 + b2 - 1.0
    for a in range(A):
        for b in range(B):
            r[a + 1, b + 1] = b1 * r[a, b + 1] + b2 * r[a + 1, b] - c0 * r[a, b]
    return r


def walk_profile_h(b1, b2, X, Y, key):
    key = int(key)
    prof = np.empty(X + 2, dtype=np.int64)
    prof[X + 1] = Y
    cx, cy = X, Y
    prof[cx] = cy
    horizontal = True
    t = 0
    while cx > 0:
        u = uniform(key, t)
        t += 1
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
        if t > _WALK_CAP:
            prof[0] = -(1 << 62)
            return prof
    return prof


def walk_profile_v(b1, b2, X, Y, key):
    key = int(key)
    prof = np.empty(Y + 2, dtype=np.int64)
    prof[Y + 1] = X
    cx, cy = X, Y
    prof[cy] = cx
    horizontal = False
    t = 0
    while cy > 0:
        u = uniform(key, t)
        t += 1
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
        if t > _WALK_CAP:
            prof[0] = -(1 << 62)
            return prof
    return prof


def walk_exits(b1, b2, X, Y, seed, n, mode, salt):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        key = stream_key(replica_key(seed, i), salt)
        prof = walk_profile_h(b1, b2, X, Y, key) if mode == 0 else \
            walk_profile_v(b1, b2, X, Y, key)
        out[i] = prof[0]
    return out


def fk_discrete_samples(b1, b2, X, Y, seed, n, salt_h, salt_v,
                        col_cum, row_cum, psi0, chi0, u_total):
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        base = replica_key(seed, i)
        hprof = walk_profile_h(b1, b2, X, Y, stream_key(base, salt_h))
        vprof = walk_profile_v(b1, b2, X, Y, stream_key(base, salt_v))
        val = 0.0
        if hprof[0] >= 0:
            val += psi0[hprof[0]]
        if vprof[0] >= 0:
            val += chi0[vprof[0]]
        kh = np.clip(hprof[1:X + 1], 0, Y)
        kv = np.clip(vprof[1:Y + 1], 0, X)
        s = col_cum[np.arange(1, X + 1), kh].sum() + row_cum[np.arange(1, Y + 1), kv].sum()
        out[i] = val + s - u_total
    return out


def _cum_eval(P, dx, dy, x, y):
    if x <= 0.0 or y <= 0.0:
        return 0.0
    nx = P.shape[0] - 1
    ny = P.shape[1] - 1
    i = min(int(x / dx), nx - 1)
    j = min(int(y / dy), ny - 1)
    fx = x / dx - i
    fy = y / dy - j
    return ((1 - fx) * (1 - fy) * P[i, j] + fx * (1 - fy) * P[i + 1, j]
            + (1 - fx) * fy * P[i, j + 1] + fx * fy * P[i + 1, j + 1])


def fk_continuous_samples(beta1, beta2, X, Y, seed, n, salt_h, salt_v, P, dx, dy):
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    areas = np.empty(n, dtype=np.float64)
    utot = _cum_eval(P, dx, dy, X, Y)
    for i in range(n):
        base = replica_key(seed, i)
        key = stream_key(base, salt_h)
        cx, cy, s, t = X, Y, 0.0, 0
        while True:
            u = uniform(key, t)
            t += 1
            xnew = cx - (-np.log(1.0 - u) / beta1)
            if cy > 0.0:
                s += (_cum_eval(P, dx, dy, min(cx, X), min(cy, Y))
                      - _cum_eval(P, dx, dy, max(xnew, 0.0), min(cy, Y)))
            if xnew <= 0.0:
                ys[i] = cy
                break
            cx = xnew
            u = uniform(key, t)
            t += 1
            cy -= -np.log(1.0 - u) / beta2
            if t > _WALK_CAP:
                ys[i] = np.nan
                break
        key = stream_key(base, salt_v)
        cx, cy, t = X, Y, 0
        while True:
            u = uniform(key, t)
            t += 1
            ynew = cy - (-np.log(1.0 - u) / beta2)
            if cx > 0.0:
                s += (_cum_eval(P, dx, dy, min(cx, X), min(cy, Y))
                      - _cum_eval(P, dx, dy, min(cx, X), max(ynew, 0.0)))
            if ynew <= 0.0:
                xs[i] = cx
                break
            cy = ynew
            u = uniform(key, t)
            t += 1
            cx -= -np.log(1.0 - u) / beta1
            if t > _WALK_CAP:
                xs[i] = np.nan
                break
        areas[i] = s - utot
    return xs, ys, areas


def _cumtrapz(a, h, axis):
    a = np.asarray(a, dtype=np.float64)
    lo = [slice(None)] * a.ndim
    hi = [slice(None)] * a.ndim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    out = np.zeros_like(a)
    out[tuple(hi)] = np.cumsum(0.5 * h * (a[tuple(lo)] + a[tuple(hi)]), axis=axis)
    return out


def picard_sweep(g, lam, mu, nu, dx, dy, xe, ye, tol, max_iter):
    nx = g.shape[0] - 1
    ny = g.shape[1] - 1
    phi = g.copy()
    cum_y = np.zeros(nx + 1)
    last = 0.0
    for by in range(len(ye) - 1):
        y0, y1 = ye[by], ye[by + 1]
        bh = y1 - y0 + 1
        jj_lo = 0 if by == 0 else 1
        cum_xy = _cumtrapz(cum_y, dx, 0)
        cum_x = np.zeros(bh)
        for bx in range(len(xe) - 1):
            x0, x1 = xe[bx], xe[bx + 1]
            bw = x1 - x0 + 1
            ii_lo = 0 if bx == 0 else 1
            termB = _cumtrapz(cum_x, dy, 0)
            block = phi[x0:x1 + 1, y0:y1 + 1].copy()
            gblk = g[x0:x1 + 1, y0:y1 + 1]
            ok_block = False
            delta = 0.0
            for _ in range(max_iter):
                cx_blk = _cumtrapz(block, dx, 0)
                cy_blk = _cumtrapz(block, dy, 1)
                cxy_blk = _cumtrapz(cx_blk, dy, 1)
                new = (gblk - lam * (cum_x[None, :] + cx_blk)
                       - mu * (cum_y[x0:x1 + 1, None] + cy_blk)
                       - nu * (cum_xy[x0:x1 + 1, None] + termB[None, :] + cxy_blk))
                delta = float(np.abs(new[ii_lo:, jj_lo:] - block[ii_lo:, jj_lo:]).max())
                block[ii_lo:, jj_lo:] = new[ii_lo:, jj_lo:]
                if delta < tol:
                    ok_block = True
                    break
            if not ok_block:
                return phi, False, delta
            last = delta
            phi[x0 + ii_lo:x1 + 1, y0 + jj_lo:y1 + 1] = block[ii_lo:, jj_lo:]
            seg = phi[x0:x1 + 1, y0:y1 + 1]
            cum_x = cum_x + np.trapezoid(seg, dx=dx, axis=0)
        cum_y = cum_y + np.trapezoid(phi[:, y0:y1 + 1], dx=dy, axis=1)
    return phi, True, last
