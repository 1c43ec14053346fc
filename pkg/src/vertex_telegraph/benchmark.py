"""Timing comparison of the numba kernels against the pure-numpy fallback.

Run as ``python -m vertex_telegraph.benchmark``; both backends are imported
directly (independent of VERTEX_TELEGRAPH_NO_NUMBA) and produce identical
sampler output, so the table is a like-for-like speed comparison.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from .backends import numpy_impl
from .rng import STREAM_WALK_H, STREAM_WALK_V


def _time(fn, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(L: int = 64, reps: int = 200, walks: int = 5000) -> list[dict]:
    try:
        from .backends import numba_impl
    except ImportError:
        numba_impl = None
    b1 = float(np.exp(-1.0 / L))
    b2 = float(np.exp(-2.0 / L))
    X = Y = L
    h_left = np.arange(Y + 1, dtype=np.int64)
    h_bottom = np.zeros(X + 1, dtype=np.int64)
    px = np.array([X // 2, X], dtype=np.int64)  # both points sit in row Y
    row_ptr = np.searchsorted(np.array([Y, Y]), np.arange(Y + 2), side="left").astype(np.int64)
    g = np.add.outer(np.linspace(0, 1, 129) ** 2, np.linspace(0, 1, 129))
    xe = np.arange(0, 129, 16, dtype=np.int64)
    if xe[-1] != 128:
        xe = np.append(xe, 128)
    rows = []

    def bench(name, nb_fn, np_fn, check=None):
        t_np = _time(np_fn)
        if numba_impl is not None:
            nb_fn()  # compile
            t_nb = _time(nb_fn)
        else:
            t_nb = float("nan")
        row = {"kernel": name, "numba_s": t_nb, "numpy_s": t_np,
               "speedup": t_np / t_nb if t_nb == t_nb else float("nan")}
        if check is not None:
            row["identical"] = bool(check())
        rows.append(row)

    bench("sample_points",
          lambda: numba_impl.sample_points(b1, b2, h_left, h_bottom, 7, 0, reps, px, row_ptr),
          lambda: numpy_impl.sample_points(b1, b2, h_left, h_bottom, 7, 0, reps, px, row_ptr),
          check=lambda: np.array_equal(
              numba_impl.sample_points(b1, b2, h_left, h_bottom, 7, 0, 8, px, row_ptr),
              numpy_impl.sample_points(b1, b2, h_left, h_bottom, 7, 0, 8, px, row_ptr)))
    bench("walk_exits",
          lambda: numba_impl.walk_exits(b1, b2, X, Y, 3, walks, 0, STREAM_WALK_H),
          lambda: numpy_impl.walk_exits(b1, b2, X, Y, 3, walks, 0, STREAM_WALK_H),
          check=lambda: np.array_equal(
              numba_impl.walk_exits(b1, b2, X, Y, 3, 200, 1, STREAM_WALK_V),
              numpy_impl.walk_exits(b1, b2, X, Y, 3, 200, 1, STREAM_WALK_V)))
    bench("picard_sweep",
          lambda: numba_impl.picard_sweep(g, 1.0, 2.0, 0.0, 1 / 128, 1 / 128, xe, xe, 1e-10, 200),
          lambda: numpy_impl.picard_sweep(g, 1.0, 2.0, 0.0, 1 / 128, 1 / 128, xe, xe, 1e-10, 200),
          check=lambda: np.allclose(
              numba_impl.picard_sweep(g, 1.0, 2.0, 0.0, 1 / 128, 1 / 128, xe, xe, 1e-10, 200)[0],
              numpy_impl.picard_sweep(g, 1.0, 2.0, 0.0, 1 / 128, 1 / 128, xe, xe, 1e-10, 200)[0],
              atol=1e-9))
    bench("solve_recursive",
          lambda: numba_impl.solve_recursive(b1, b2, g, g[:, 0], g[0, :]),
          lambda: numpy_impl.solve_recursive(b1, b2, g, g[:, 0], g[0, :]),
          check=lambda: np.allclose(
              numba_impl.solve_recursive(b1, b2, g, g[:, 0], g[0, :]),
              numpy_impl.solve_recursive(b1, b2, g, g[:, 0], g[0, :])))
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=64, help="lattice scale")
    ap.add_argument("--reps", type=int, default=200, help="sampler replicas")
    ap.add_argument("--walks", type=int, default=5000)
    args = ap.parse_args(argv)
    rows = run(args.L, args.reps, args.walks)
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}  match")
    for r in rows:
        print(f"{r['kernel']:<{width}}  {r['numba_s']:>9.4f}s  {r['numpy_s']:>9.4f}s  "
              f"{r['speedup']:>7.1f}x  {r.get('identical', '-')}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
