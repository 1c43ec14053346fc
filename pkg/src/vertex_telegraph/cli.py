"""Command-line interface: sampling, solvers, formulas, Feynman-Kac
estimation, and the verification suites.

Outputs are deterministic given the invocation: fields go to CSV with the
header "x,y,value", scalars and reports to JSON with sorted keys, and every
numeric output carries a provenance block naming its source (formula, solver,
or monte-carlo) and the sha256 of the resolved configuration.

Exit codes: 0 success, 1 validation error, 2 numerical failure
(non-convergence), 3 statistical-suite failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import observables as obs
from . import stats as st
from .backends import backend_name
from .contours import ContourError
from .core import (BoundaryData, field_from_csv, field_to_csv, derive_params,
                   params_from_rates)
from .sampler import sample
from .telegraph_continuous import (ContinuousProblem, PicardError,
                                   picard_solve_telegraph, solve_quadrature)
from .telegraph_discrete import DiscreteProblem, solve_recursive, solve_riemann
from .walks import fk_continuous, fk_discrete


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _config_hash(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _emit_json(doc, out: str | None):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_csv(text: str, out: str | None, source: str | None = None,
              config: dict | None = None):
    if out:
        Path(out).write_text(text)
        if source is not None:
            # CSV keeps the bare x,y,value schema; provenance rides sidecar
            side = {"provenance": {"source": source,
                                   "config_sha256": _config_hash(config or {})}}
            Path(str(out) + ".provenance.json").write_text(
                json.dumps(side, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _scalar_doc(value: float, source: str, config: dict) -> dict:
    return {"value": value,
            "provenance": {"source": source, "config_sha256": _config_hash(config)}}


def _parse_boundary(spec: str, X: int, Y: int, seed: int) -> BoundaryData:
    if spec == "domain-wall":
        return BoundaryData.domain_wall(X, Y)
    if spec == "empty":
        return BoundaryData.empty(X, Y)
    if spec.startswith("bernoulli:"):
        parts = spec.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ValueError("bernoulli boundary needs bernoulli:p_left,p_bottom")
        return BoundaryData.bernoulli(X, Y, float(parts[0]), float(parts[1]), seed)
    if spec.startswith("file:"):
        doc = json.loads(Path(spec.split(":", 1)[1]).read_text())
        return BoundaryData(np.asarray(doc["left_entries"]),
                            np.asarray(doc["bottom_entries"]))
    raise ValueError(f"unknown boundary spec {spec!r}")


def _expr_fn(spec: str, var: str):
    """A boundary function from 'expr:<python>' (in x or y) or a CSV of values
    at integer indices (discrete) / a two-column grid (continuous)."""
    if spec.startswith("expr:"):
        code = compile(spec.split(":", 1)[1], "<expr>", "eval")

        def fn(v):
            return np.asarray(eval(code, {"np": np, "exp": np.exp, "sqrt": np.sqrt,
                                          "sin": np.sin, "cos": np.cos, "log": np.log,
                                          var: np.asarray(v, dtype=np.float64)}),
                              dtype=np.float64)
        return fn
    raise ValueError(f"expected expr:<expression of {var}> but got {spec!r}")


def _load_sequence(path: str) -> np.ndarray:
    vals = [float(line.split(",")[-1]) for line in
            Path(path).read_text().strip().splitlines()
            if line.strip() and not line.lower().startswith(("value", "x,"))]
    return np.asarray(vals)


def _threads(args):
    n = args.threads or os.environ.get("VERTEX_TELEGRAPH_THREADS")
    if n:
        try:
            import numba
            numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
        except ImportError:
            pass


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_sample(args) -> int:
    pars = derive_params(args.b1, args.b2, args.L)
    bd = _parse_boundary(args.boundary, args.X, args.Y, args.seed)
    cfg = sample(pars, bd, args.X, args.Y, seed=args.seed)
    argdoc = {k: v for k, v in vars(args).items() if k != "func"}
    _emit_csv(field_to_csv(cfg.heights.values), args.out, "monte-carlo",
              argdoc | {"cmd": "sample"})
    if args.edge_json:
        li, bi, ro, to = cfg.edge_grids()
        doc = {"vertices": [
            {"vertex": [x + 1, y + 1],
             "in": [bool(li[x, y]), bool(bi[x, y])],
             "out": [bool(ro[x, y]), bool(to[x, y])]}
            for x in range(cfg.X) for y in range(cfg.Y)],
            "provenance": {"source": "monte-carlo",
                           "config_sha256": _config_hash(argdoc | {"cmd": "sample"})}}
        _emit_json(doc, args.edge_json)
    return 0


def _cmd_solve_discrete(args) -> int:
    chi = _load_sequence(args.chi)
    psi = _load_sequence(args.psi)
    u = None
    if args.u:
        u, _, _, _ = field_from_csv(Path(args.u).read_text())
    X = args.X if args.X is not None else chi.shape[0] - 1
    Y = args.Y if args.Y is not None else psi.shape[0] - 1
    p = DiscreteProblem(args.b1, args.b2, chi[:X + 1], psi[:Y + 1],
                        None if u is None else u[:X + 1, :Y + 1])
    phi = solve_recursive(p) if args.method == "recursive" else solve_riemann(p)
    _emit_csv(field_to_csv(phi.values), args.out, "solver",
              {k: v for k, v in vars(args).items() if k != "func"})
    return 0


def _cmd_solve_telegraph(args) -> int:
    a, b = (float(v) for v in args.domain.split(","))
    nx, ny = (int(v) for v in args.grid.split(","))
    chi = _expr_fn(args.chi, "x")
    psi = _expr_fn(args.psi, "y")
    u = None
    if args.u:
        code = compile(args.u.split(":", 1)[1], "<expr>", "eval")

        def u(x, y):  # noqa: E306
            return np.asarray(eval(code, {"np": np, "exp": np.exp, "sin": np.sin,
                                          "cos": np.cos, "x": x, "y": y}),
                              dtype=np.float64)
    p = ContinuousProblem(args.beta1, args.beta2, chi, psi, u, (a, b))
    cfgdoc = {k: v for k, v in vars(args).items() if k != "func"}
    if args.method == "picard":
        phi = picard_solve_telegraph(p, grid=(nx, ny), tol=args.tol)
    else:
        phi = solve_quadrature(p, (nx, ny))
    _emit_csv(field_to_csv(phi.values, dx=phi.dx, dy=phi.dy), args.out,
              "solver", cfgdoc)
    return 0


def _cmd_fk(args) -> int:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    if args.mode == "discrete":
        chi = _load_sequence(args.chi)
        psi = _load_sequence(args.psi)
        u = None
        if args.u:
            u, _, _, _ = field_from_csv(Path(args.u).read_text())
        p = DiscreteProblem(args.b1, args.b2, chi, psi, u)
        est, se = fk_discrete(p, int(args.X), int(args.Y), args.samples, args.seed)
    else:
        a, b = (float(v) for v in args.domain.split(","))
        p = ContinuousProblem(args.beta1, args.beta2, _expr_fn(args.chi, "x"),
                              _expr_fn(args.psi, "y"), None, (a, b))
        est, se = fk_continuous(p, args.X, args.Y, args.samples, args.seed)
    _emit_json({"estimate": est, "std_error": se, "n": args.samples,
                "provenance": {"source": "monte-carlo",
                               "config_sha256": _config_hash(config)}}, args.out)
    return 0


def _cmd_shape(args) -> int:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    if args.kind == "dw-q0":
        val = obs.limit_shape_q0(args.x, args.y, args.s)
    elif args.kind == "dw":
        pars = params_from_rates(args.beta1, args.beta2, 1.0)
        val = obs.limit_shape_dw(args.x, args.y, pars, args.alpha)
    elif args.kind == "bernoulli":
        pars = params_from_rates(args.beta1, args.beta2, 1.0)
        f = obs.lln_bernoulli_shape(args.x, args.y, args.p_left, args.p_bottom, pars)
        val = float(np.log(f) / pars.log_qs)
    elif args.kind == "general":
        p = ContinuousProblem(args.beta1, args.beta2, _expr_fn(args.chi, "x"),
                              _expr_fn(args.psi, "y"), None,
                              (args.x + 0.1, args.y + 0.1))
        f = solve_quadrature(p, np.array([[args.x, args.y]]))[0]
        val = float(np.log(f) / (args.beta1 - args.beta2))
    else:
        raise ValueError(f"unknown shape kind {args.kind!r}")
    _emit_json(_scalar_doc(float(val), "formula", config), args.out)
    return 0


def _cmd_covariance(args) -> int:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    pars = params_from_rates(args.beta1, args.beta2, 1.0)
    if args.kind == "dw":
        val = obs.covariance_dw(args.x1, args.x2, args.y, pars, args.alpha)
    elif args.kind == "bernoulli":
        val = obs.covariance_bernoulli(args.x1, args.y1, args.x2, args.y2,
                                       args.p_left, args.p_bottom, pars)
    elif args.kind in ("general", "low-density"):
        chi = _expr_fn(args.chi, "x")
        psi = _expr_fn(args.psi, "y")
        dom = (max(args.x1, args.x2) + 0.2, max(args.y1, args.y2) + 0.2)
        if args.kind == "general":
            log_qs = args.beta1 - args.beta2
            p = ContinuousProblem(args.beta1, args.beta2,
                                  lambda x: np.exp(log_qs * chi(x)),
                                  lambda y: np.exp(log_qs * psi(y)), None, dom)

            def f(xx, yy):
                xx = np.asarray(xx, dtype=np.float64)
                yy = np.asarray(yy, dtype=np.float64)
                sh = np.broadcast_shapes(xx.shape, yy.shape)
                tgt = np.column_stack([np.broadcast_to(xx, sh).ravel(),
                                       np.broadcast_to(yy, sh).ravel()])
                return solve_quadrature(p, tgt).reshape(sh)

            shape = obs.ShapeField.from_function(f, log_qs)
            val = obs.covariance_general(args.x1, args.y1, args.x2, args.y2,
                                         shape, args.beta1, args.beta2)
        else:
            p = ContinuousProblem(args.beta1, args.beta2, chi, psi, None, dom)

            def f(xx, yy):
                xx = np.asarray(xx, dtype=np.float64)
                yy = np.asarray(yy, dtype=np.float64)
                sh = np.broadcast_shapes(xx.shape, yy.shape)
                tgt = np.column_stack([np.broadcast_to(xx, sh).ravel(),
                                       np.broadcast_to(yy, sh).ravel()])
                return solve_quadrature(p, tgt).reshape(sh)

            shape_h = obs.ShapeField.from_function(f, 1.0)

            class _H:
                hx = staticmethod(shape_h.fx)
                hy = staticmethod(shape_h.fy)

            val = obs.variance_low_density(args.x1, args.y1, _H(), args.beta1,
                                           args.beta2)
    else:
        raise ValueError(f"unknown covariance kind {args.kind!r}")
    _emit_json(_scalar_doc(float(val), "formula", config), args.out)
    return 0


def _cmd_verify(args) -> int:
    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    seed = int(config.get("seed", 7))
    samples = config.get("samples")
    pr = config.get("params", {})
    if "b1" in pr:
        pars = derive_params(pr["b1"], pr["b2"], pr.get("L", 1.0))
    elif "beta1" in pr:
        pars = params_from_rates(pr["beta1"], pr["beta2"], pr.get("L", 256.0))
    else:
        pars = params_from_rates(1.0, 2.0, 64.0)
    lat = config.get("lattice", {})
    X = int(lat.get("X", 16))
    Y = int(lat.get("Y", 16))
    suites = ([args.suite] if args.suite != "all"
              else ["exact", "fourpoint", "lln", "clt", "lowdensity"])
    report = {"backend": backend_name(), "config_sha256": _config_hash(config),
              "suites": {}}
    ok = True
    for suite in suites:
        if suite == "exact":
            small = derive_params(0.7, 0.55, 1.0)
            worst = 0.0
            for (sx, sy) in [(2, 2), (3, 3), (4, 4)]:
                dist = st.enumerate_exact(small, BoundaryData.domain_wall(sx, sy))
                for x in range(1, sx + 1):
                    en = dist.qh_expectation(small.q, x, sy)
                    fo = obs.qh_moment(x + 1, sy, small)
                    worst = max(worst, abs(en - fo))
            res = {"max_error": worst, "passed": bool(worst < 1e-9)}
        elif suite == "fourpoint":
            bd = _parse_boundary(config.get("boundary", "domain-wall"), X, Y, seed)
            res = st.fourpoint_report(pars, bd, int(samples or 600), seed)
        elif suite == "lln":
            grid = [(x, y) for x in np.linspace(0.25, 1.0, 4)
                    for y in np.linspace(0.25, 1.0, 4)]
            res = st.lln_experiment(pars.beta1, pars.beta2, grid,
                                    config.get("L_list", [32, 64]),
                                    int(samples or 100), seed)
            res["passed"] = bool(res["final_sup_error"] < 0.05)
        elif suite == "clt":
            res = st.clt_experiment(pars.beta1, pars.beta2,
                                    [(0.5, 1.0), (0.75, 1.0)],
                                    int(config.get("L", 64)),
                                    int(samples or 20000), seed)
        elif suite == "lowdensity":
            res = st.low_density_experiment(pars.beta1, pars.beta2,
                                            float(config.get("delta", 0.4)),
                                            [(0.75, 0.75), (1.0, 1.0)],
                                            int(config.get("L", 200)),
                                            int(samples or 1500), seed)
        else:
            raise ValueError(f"unknown suite {suite!r}")
        report["suites"][suite] = res
        ok = ok and bool(res.get("passed", False))
    report["passed"] = ok
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        _emit_json(report, str(outdir / "report.json"))
    else:
        _emit_json(report, None)
    return 0 if ok else 3


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    ap = _Parser(prog="vertex-telegraph",
                 description="Six-vertex sampling, telegraph solvers, and "
                             "their cross-validation suites")
    ap.add_argument("--threads", type=int, default=None,
                    help="cap worker threads (default: VERTEX_TELEGRAPH_THREADS or all)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("sample", help="sample a six-vertex configuration")
    p.add_argument("--b1", type=float, required=True)
    p.add_argument("--b2", type=float, required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--Y", type=int, required=True)
    p.add_argument("--boundary", default="domain-wall",
                   help="domain-wall | empty | bernoulli:pl,pb | file:<json>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--edge-json", default=None)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("solve-discrete", help="discrete telegraph equation")
    p.add_argument("--b1", type=float, required=True)
    p.add_argument("--b2", type=float, required=True)
    p.add_argument("--X", type=int, default=None)
    p.add_argument("--Y", type=int, default=None)
    p.add_argument("--chi", required=True, help="CSV of chi(0..X)")
    p.add_argument("--psi", required=True, help="CSV of psi(0..Y)")
    p.add_argument("--u", default=None, help="CSV grid x,y,value")
    p.add_argument("--method", choices=("recursive", "riemann"), default="recursive")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve_discrete)

    p = sub.add_parser("solve-telegraph", help="continuous telegraph equation")
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    p.add_argument("--domain", default="1,1")
    p.add_argument("--grid", default="256,256")
    p.add_argument("--chi", required=True, help="expr:<f(x)>")
    p.add_argument("--psi", required=True, help="expr:<f(y)>")
    p.add_argument("--u", default=None, help="expr:<f(x,y)>")
    p.add_argument("--method", choices=("quadrature", "picard"), default="quadrature")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve_telegraph)

    p = sub.add_parser("fk", help="Feynman-Kac Monte Carlo estimate")
    p.add_argument("--mode", choices=("discrete", "continuous"), required=True)
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--Y", type=float, required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--b1", type=float, default=None)
    p.add_argument("--b2", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--chi", default=None)
    p.add_argument("--psi", default=None)
    p.add_argument("--u", default=None)
    p.add_argument("--domain", default="1,1")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_fk)

    p = sub.add_parser("shape", help="limit-shape formulas")
    p.add_argument("--kind", choices=("dw", "dw-q0", "bernoulli", "general"),
                   required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--p-left", dest="p_left", type=float, default=None)
    p.add_argument("--p-bottom", dest="p_bottom", type=float, default=None)
    p.add_argument("--chi", default=None)
    p.add_argument("--psi", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_shape)

    p = sub.add_parser("covariance", help="asymptotic covariance formulas")
    p.add_argument("--kind", choices=("dw", "bernoulli", "general", "low-density"),
                   required=True)
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--x1", type=float, required=True)
    p.add_argument("--x2", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    p.add_argument("--y1", type=float, default=None)
    p.add_argument("--y2", type=float, default=None)
    p.add_argument("--p-left", dest="p_left", type=float, default=None)
    p.add_argument("--p-bottom", dest="p_bottom", type=float, default=None)
    p.add_argument("--chi", default=None)
    p.add_argument("--psi", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_covariance)

    p = sub.add_parser("verify", help="verification suites")
    p.add_argument("--suite",
                   choices=("exact", "fourpoint", "lln", "clt", "lowdensity", "all"),
                   required=True)
    p.add_argument("--config", default=None, help="JSON experiment config")
    p.add_argument("--out", default=None, help="directory for report.json")
    p.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    _threads(args)
    try:
        return args.func(args)
    except (ContourError, PicardError, RuntimeError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
