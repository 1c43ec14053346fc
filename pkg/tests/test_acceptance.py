"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured numbers (run with ``pytest tests/test_acceptance.py -v -s``).

Statistical comparisons use fixed seeds, so every run reproduces the same
numbers; bands are 4 standard errors unless the criterion states a tolerance.
"""
import math
import time
from itertools import combinations, product

import numpy as np
import pytest

from vertex_telegraph import observables as obs
from vertex_telegraph.core import BoundaryData, derive_params, params_from_rates
from vertex_telegraph.cumulants import MomentTable, shifted_cumulant_expansion_check
from vertex_telegraph.sampler import (expected_noise_by_case, extract_noise,
                                      integrated_identity_residual, sample,
                                      sample_points)
from vertex_telegraph.stats import enumerate_exact, low_density_experiment
from vertex_telegraph.telegraph_continuous import (ContinuousProblem,
                                                   homogeneous_bernoulli_shape,
                                                   picard_solve_telegraph,
                                                   riemann_fast,
                                                   solve_quadrature)
from vertex_telegraph.telegraph_discrete import (DiscreteProblem,
                                                 riemann_discrete_quadrature,
                                                 riemann_discrete_table,
                                                 solve_recursive, solve_riemann)
from vertex_telegraph.walks import (HORIZONTAL, VERTICAL, fk_continuous,
                                    fk_discrete, reversed_exit_distribution)


def _report(num, name, detail):
    print(f"ACCEPTANCE {num} ({name}): PASS [{detail}]")


def test_criterion_1_fourpoint_identity():
    """100 sampled configurations, mixed boundaries: the per-vertex noise
    matches the case table and the summed identity telescopes below 1e-10.
    Weights are drawn in the scaling window (rates in (0.3, 3)), where q^H
    stays order one and the absolute 1e-10 bound is meaningful in floats."""
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst_case = 0.0
    worst_resid = 0.0
    for rep in range(100):
        X = int(rng.integers(4, 129))
        Y = int(rng.integers(4, 129))
        L = float(max(X, Y))
        beta1, beta2 = rng.uniform(0.3, 3.0, 2)
        while abs(beta1 - beta2) < 1e-3:
            beta2 = rng.uniform(0.3, 3.0)
        pars = params_from_rates(beta1, beta2, L)
        kind = rep % 3
        if kind == 0:
            bd = BoundaryData.domain_wall(X, Y)
        elif kind == 1:
            bd = BoundaryData.bernoulli(X, Y, rng.uniform(0, 1), rng.uniform(0, 1),
                                        seed=rep)
        else:
            bd = BoundaryData.empty(X, Y)
        cfg = sample(pars, bd, seed=rep)
        xi = extract_noise(cfg).values
        worst_case = max(worst_case, float(np.abs(xi - expected_noise_by_case(cfg)).max()))
        worst_resid = max(worst_resid, abs(integrated_identity_residual(cfg)))
    dt = time.time() - t0
    assert worst_case < 1e-12
    assert worst_resid < 1e-10
    assert dt < 10.0
    _report(1, "four-point identity",
            f"case-table err {worst_case:.2e}, residual {worst_resid:.2e}, {dt:.1f}s")


def test_criterion_2_solver_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        X = int(rng.integers(2, 65))
        Y = int(rng.integers(2, 65))
        b1, b2 = rng.uniform(0.05, 0.95, 2)
        while abs(b1 - b2) < 1e-3:
            b2 = rng.uniform(0.05, 0.95)
        chi = rng.uniform(-1, 1, X + 1)
        psi = rng.uniform(-1, 1, Y + 1)
        psi[0] = chi[0]
        u = rng.uniform(-1, 1, (X + 1, Y + 1))
        p = DiscreteProblem(b1, b2, chi, psi, u)
        d = np.abs(solve_recursive(p).values - solve_riemann(p).values).max()
        worst = max(worst, float(d))
    assert worst < 1e-9
    # dual evaluation of the Riemann function, offsets up to 100
    worst_q = 0.0
    cases = {
        (math.exp(-1 / 64), math.exp(-2 / 64)):
            [(a, b) for a in (0, 1, 3, 10, 40, 100) for b in (0, 2, 7, 25, 100)],
        (0.3, 0.7): [(0, 0), (10, 4), (60, 60), (100, 100), (100, 0)],
        (0.9, 0.8): [(0, 0), (5, 3), (20, 20), (100, 100)],
    }
    for (b1, b2), offsets in cases.items():
        r = riemann_discrete_table(b1, b2, 100, 100)
        for (a, b) in offsets:
            q = riemann_discrete_quadrature(b1, b2, a, b)
            worst_q = max(worst_q, abs(q - r[a, b]))
    dt = time.time() - t0
    assert worst_q < 1e-10
    assert dt < 30.0
    _report(2, "solver equivalence",
            f"riemann vs recursion {worst:.2e}, quad vs recursion {worst_q:.2e}, {dt:.1f}s")


def test_criterion_3_continuous_cross_check():
    t0 = time.time()
    rng = np.random.default_rng(11)
    betas = [(1.0, 2.0), (2.0, 1.0), (0.5, 3.0)]
    worst = 0.0
    for rep in range(10):
        beta1, beta2 = betas[rep % 3]
        a0, a1, a2, a3 = rng.uniform(-0.8, 0.8, 4)
        chi = lambda x: a0 + a1 * np.sin(2 * x) + a2 * x ** 2  # noqa: E731
        psi = lambda y: a0 + a3 * (1 - np.exp(-1.5 * y))  # noqa: E731
        u = lambda x, y: a1 * np.cos(3 * x) * (0.5 + y) + a2 * np.sin(2 * y)  # noqa: E731
        p = ContinuousProblem(beta1, beta2, chi, psi, u, (1.0, 1.0))
        phi = picard_solve_telegraph(p, grid=(512, 512), tol=1e-11)
        idx = [(256, 256), (512, 512), (128, 448), (448, 64), (64, 64)]
        pts = np.array([[i / 512, j / 512] for i, j in idx])
        quad = solve_quadrature(p, pts)
        pic = np.array([phi.values[i, j] for i, j in idx])
        worst = max(worst, float(np.abs(quad - pic).max()))
    assert worst < 1e-6
    # Bernoulli boundary data reproduce the closed form
    worst_b = 0.0
    for (p1, p2, b1v, b2v) in [(0.3, 0.6, 1.0, 2.0), (0.5, 0.25, 2.0, 1.0),
                               (0.15, 0.8, 0.5, 3.0)]:
        qs = np.exp(b1v - b2v)
        pb = ContinuousProblem(b1v, b2v, lambda x: qs ** (-p1 * x),
                               lambda y: qs ** (p2 * y), None, (1.0, 1.0))
        pts = np.array([[0.6, 0.8], [1.0, 0.5], [0.25, 0.25]])
        vq = solve_quadrature(pb, pts)
        vc = np.array([homogeneous_bernoulli_shape(x, y, p1, p2, b1v, b2v)
                       for x, y in pts])
        worst_b = max(worst_b, float(np.abs(vq - vc).max()))
    assert worst_b < 1e-6
    # p1 = 0, p2 = 1 reproduces the domain-wall step formula
    pars = params_from_rates(1.0, 2.0, 1.0)
    worst_s = 0.0
    for (x, y) in [(0.5, 0.8), (1.0, 1.0)]:
        v = homogeneous_bernoulli_shape(x, y, 0.0, 1.0, 1.0, 2.0)
        h = obs.limit_shape_dw(x, y, pars, alpha=0.0)
        worst_s = max(worst_s, abs(v - math.exp(pars.log_qs * h)))
    dt = time.time() - t0
    assert worst_s < 1e-9
    assert dt < 60.0
    _report(3, "continuous cross-check",
            f"quad vs picard {worst:.2e}, bernoulli {worst_b:.2e}, "
            f"step {worst_s:.2e}, {dt:.1f}s")


def test_criterion_4_observable_exactness():
    t0 = time.time()
    worst = 0.0
    for (b1, b2) in [(0.7, 0.55), (0.9, 0.8)]:
        p = derive_params(b1, b2, 1.0)
        q = p.q
        for (X, Y) in [(2, 2), (3, 3), (4, 4), (4, 2)]:
            dist = enumerate_exact(p, BoundaryData.domain_wall(X, Y))
            for x in range(1, X + 1):
                for y in range(1, Y + 1):
                    en = dist.qh_expectation(q, x, y)
                    fo = obs.qh_moment(x + 1, y, p)
                    worst = max(worst, abs(en - fo))
            for x1 in range(1, X + 1):
                for x2 in range(1, x1 + 1):
                    en = dist.moment_product(q, [x1, x2], Y)
                    fo = obs.moments_EN([x1 + 1, x2 + 1], Y, p)
                    worst = max(worst, abs(en - fo))
        # 1x1 calibration: E q^H(1,1) = 1 - b + bq at formula coordinate x = 2
        cal = abs(obs.qh_moment(2, 1, p) - (1 - p.b1 + p.b2))
        worst = max(worst, cal)
    dt = time.time() - t0
    assert worst < 1e-9
    assert dt < 10.0
    _report(4, "observable exactness", f"max |enum - formula| {worst:.2e}, {dt:.1f}s")


def test_criterion_5_feynman_kac():
    t0 = time.time()
    rng = np.random.default_rng(31)
    worst_z = 0.0
    n = 100_000
    for rep in range(6):
        L = 16
        pars = params_from_rates(*rng.uniform(0.5, 2.5, 2), L)
        X = int(rng.integers(6, 15))
        Y = int(rng.integers(6, 15))
        chi = rng.uniform(-1, 1, X + 1)
        psi = rng.uniform(-1, 1, Y + 1)
        psi[0] = chi[0]
        u = rng.uniform(-0.5, 0.5, (X + 1, Y + 1))
        p = DiscreteProblem(pars.b1, pars.b2, chi, psi, u)
        exact = solve_recursive(p).values[X, Y]
        est, se = fk_discrete(p, X, Y, n, seed=rep)
        worst_z = max(worst_z, abs(est - exact) / se)
    for rep in range(4):
        beta1, beta2 = [(1.0, 2.0), (2.0, 1.0), (0.5, 3.0), (1.5, 0.7)][rep]
        c0, c1 = rng.uniform(-0.8, 0.8, 2)
        p = ContinuousProblem(beta1, beta2,
                              lambda x: c0 * x + c1 * np.sin(x),
                              lambda y: c0 * np.log1p(y) * 0.0 + c1 * (1 - np.exp(-y)) * 0.0,
                              lambda x, y: c1 * np.cos(2 * x) + c0 * y, (1.0, 1.0))
        ref = solve_quadrature(p, np.array([[1.0, 1.0]]))[0]
        est, se = fk_continuous(p, 1.0, 1.0, n, seed=100 + rep)
        worst_z = max(worst_z, abs(est - ref) / se)
    assert worst_z < 4.0
    # exit frequencies against the Riemann-kernel combinations, 20 pairs
    pars = params_from_rates(1.0, 2.0, 16.0)
    r = riemann_discrete_table(pars.b1, pars.b2, 18, 18)
    nw = 20_000
    worst_ze = 0.0
    pairs = [(X, Y) for X in (4, 7, 11, 15, 16) for Y in (3, 6, 12, 16)]
    for k, (X, Y) in enumerate(pairs):
        ex = reversed_exit_distribution(pars, X, Y, nw, seed=500 + k, mode=HORIZONTAL)
        for y0 in range(0, Y + 1):
            pr = r[X, Y - y0] - pars.b2 * (r[X, Y - y0 - 1] if Y - y0 - 1 >= 0 else 0.0)
            se = math.sqrt(max(pr * (1 - pr), 1e-12) / nw)
            worst_ze = max(worst_ze, abs(np.mean(ex == y0) - pr) / se)
        ex = reversed_exit_distribution(pars, X, Y, nw, seed=900 + k, mode=VERTICAL)
        for x0 in range(0, X + 1):
            pr = r[X - x0, Y] - pars.b1 * (r[X - x0 - 1, Y] if X - x0 - 1 >= 0 else 0.0)
            se = math.sqrt(max(pr * (1 - pr), 1e-12) / nw)
            worst_ze = max(worst_ze, abs(np.mean(ex == x0) - pr) / se)
    dt = time.time() - t0
    assert worst_ze < 4.0
    assert dt < 120.0
    _report(5, "feynman-kac",
            f"solver z {worst_z:.2f}, exit-kernel z {worst_ze:.2f}, {dt:.1f}s")


def test_criterion_6_lln():
    t0 = time.time()
    beta1, beta2 = 1.0, 2.0
    pars_ref = params_from_rates(beta1, beta2, 256.0)
    grid = [(x, y) for x in np.linspace(1 / 16, 1.0, 16)
            for y in np.linspace(1 / 16, 1.0, 16)]
    pts = np.asarray(grid)
    f = obs.limit_shape_dw_field(np.linspace(1 / 16, 1.0, 16),
                                 np.linspace(1 / 16, 1.0, 16), pars_ref)
    href = (np.log(f) / pars_ref.log_qs).reshape(-1)
    sups = []
    n = 400
    for L in (64, 128, 256):
        pars = params_from_rates(beta1, beta2, L)
        lattice = np.rint(pts * L).astype(np.int64)
        bd = BoundaryData.domain_wall(int(lattice[:, 0].max()), int(lattice[:, 1].max()))
        hs = sample_points(pars, bd, lattice, n, seed=1000 + L)
        sups.append(float(np.abs(hs.mean(axis=0) / L - href).max()))
    assert sups[-1] < 0.05
    assert sups[2] < sups[1] < sups[0]
    # qs -> 0 closed form against the contour formula at ln(qs) = -40
    pars40 = params_from_rates(40.0, 80.0, 1.0)
    worst_q0 = 0.0
    for x in (0.25, 1.95, 2.2, 2.6):
        h = obs.limit_shape_dw(x, 1.0, pars40, 0.0)
        worst_q0 = max(worst_q0, abs(h - obs.limit_shape_q0(x, 1.0, 0.5)))
    dt = time.time() - t0
    assert worst_q0 < 2e-2
    assert dt < 300.0
    _report(6, "law of large numbers",
            f"sup errors L=64/128/256: {sups[0]:.4f}/{sups[1]:.4f}/{sups[2]:.4f}, "
            f"q->0 gap {worst_q0:.2e}, {dt:.1f}s")


def test_criterion_7_clt_covariance():
    t0 = time.time()
    beta1, beta2 = 1.0, 2.0
    L = 256
    n = 200_000
    pars = params_from_rates(beta1, beta2, L)
    # domain wall, horizontal section y = 1, x in {0.5, 0.75}
    px = np.array([128, 192])
    hs = sample_points(pars, BoundaryData.domain_wall(192, 256),
                       [(128, 256), (192, 256)], n, seed=123)
    qh = np.power(pars.q, hs.astype(np.float64))
    A, B = qh[:, 0], qh[:, 1]
    Ac, Bc = A - A.mean(), B - B.mean()
    zs = []
    for (u, v, x1f, x2f) in [(Ac, Bc, (px[1] + 1) / L, (px[0] + 1) / L),
                             (Ac, Ac, (px[0] + 1) / L, (px[0] + 1) / L),
                             (Bc, Bc, (px[1] + 1) / L, (px[1] + 1) / L)]:
        cov = float(np.dot(u, v) / (n - 1))
        se = float(np.sqrt(np.mean((u * v - cov) ** 2) / n))
        ref = obs.covariance_dw(x1f, x2f, 1.0, pars, alpha=0.0)
        zs.append((L * cov - ref) / (L * se))
    assert max(abs(z) for z in zs) < 4.0
    # one smooth non-domain-wall boundary: one-point variance against the
    # Riemann-kernel quadrature with the (beta1+beta2) coefficient
    chi = lambda x: -0.3 * x - 0.2 * (1 - np.exp(-x))  # noqa: E731
    psi = lambda y: 0.5 * y + 0.25 * (1 - np.exp(-2 * y))  # noqa: E731
    bd = BoundaryData.from_profiles(192, 192, L, chi, psi)
    hs2 = sample_points(pars, bd, [(192, 192)], n, seed=20)
    qh2 = np.power(pars.q, hs2[:, 0].astype(np.float64))
    var = qh2.var(ddof=1)
    se_var = float(np.sqrt(np.mean(((qh2 - qh2.mean()) ** 2 - var) ** 2) / n))
    log_qs = beta1 - beta2
    prob = ContinuousProblem(beta1, beta2, lambda x: np.exp(log_qs * chi(x)),
                             lambda y: np.exp(log_qs * psi(y)), None, (1.0, 1.0))

    def fshape(xx, yy):
        xx = np.asarray(xx, dtype=np.float64)
        yy = np.asarray(yy, dtype=np.float64)
        sh = np.broadcast_shapes(xx.shape, yy.shape)
        tgt = np.column_stack([np.broadcast_to(xx, sh).ravel(),
                               np.broadcast_to(yy, sh).ravel()])
        return solve_quadrature(prob, tgt, tol=1e-7).reshape(sh)

    shape = obs.ShapeField.from_function(fshape, log_qs)
    ref = obs.covariance_general(0.75, 0.75, 0.75, 0.75, shape, beta1, beta2)
    z_gen = (L * var - ref) / (L * se_var)
    assert abs(z_gen) < 4.0
    # the (beta1+beta1) misprint is excluded by the same band: replacing the
    # coefficient shifts the prediction by the fx*fy integral
    from scipy.special import roots_legendre
    xg, wg = roots_legendre(96)
    xq = 0.5 * 0.75 * (xg + 1)
    wq = 0.5 * 0.75 * wg
    XX, YY = np.meshgrid(xq, xq, indexing="ij")
    fxv = shape.fx(XX, YY)
    fyv = shape.fy(XX, YY)
    R2 = riemann_fast(beta1, beta2, 0.75 - XX, 0.75 - YY) ** 2
    fxfy_int = float(np.einsum("i,j,ij->", wq, wq, R2 * fxv * fyv))
    ref_typo = ref + (2 * beta1 - (beta1 + beta2)) * fxfy_int
    z_typo = (L * var - ref_typo) / (L * se_var)
    assert abs(z_typo) > 4.0
    # moment-based normality diagnostics on a subsample sized so the bands
    # dominate the O(L^-1/2) finite-size skew
    n_norm = 2000
    diag_ok = True
    worst_g = 0.0
    for vcol in (A[:n_norm], B[:n_norm], qh2[:n_norm]):
        zv = (vcol - vcol.mean()) / vcol.std()
        g1 = abs(float(np.mean(zv ** 3)))
        g2 = abs(float(np.mean(zv ** 4) - 3.0))
        worst_g = max(worst_g, g1 / (4 * math.sqrt(6 / n_norm)),
                      g2 / (4 * math.sqrt(24 / n_norm)))
        diag_ok = diag_ok and g1 < 4 * math.sqrt(6 / n_norm) \
            and g2 < 4 * math.sqrt(24 / n_norm)
    dt = time.time() - t0
    assert diag_ok
    assert dt < 600.0
    _report(7, "clt covariance",
            f"dw z {max(abs(z) for z in zs):.2f}, general z {z_gen:.2f}, "
            f"typo z {z_typo:.2f} (>4 rejects), normality frac {worst_g:.2f}, {dt:.0f}s")


def test_criterion_8_cumulant_theorem():
    t0 = time.time()
    rng = np.random.default_rng(77)
    for n in (3, 4):
        values = rng.normal(size=(n, 3))
        pmf = rng.dirichlet(np.ones(3 ** n)).reshape((3,) * n)
        moms = {}
        for m in range(1, n + 1):
            for c in combinations(range(1, n + 1), m):
                tot = 0.0
                for idx in product(range(3), repeat=n):
                    w = pmf[idx]
                    f = 1.0
                    for i in c:
                        f *= values[i - 1, idx[i - 1]]
                    tot += w * f
                moms[c] = tot
        mt = MomentTable(n, moms)
        rep = shifted_cumulant_expansion_check(rng.normal(size=n),
                                               rng.normal(size=(n, n)), mt, n)
        assert abs(rep["eps_n_coefficient"] - rep["cumulant"]) <= \
            1e-6 * abs(rep["cumulant"])
        assert rep["max_lower_coefficient"] < 1e-8
    dt = time.time() - t0
    assert dt < 5.0
    _report(8, "cumulant theorem", f"n=3,4 coefficients match, {dt:.1f}s")


def test_criterion_9_low_density():
    t0 = time.time()
    rep = low_density_experiment(1.0, 2.0, 0.4, [(0.75, 0.75), (1.0, 1.0)],
                                 L=400, n=3000, seed=99)
    worst_mean = max(abs(r["mean_error"]) for r in rep["rows"])
    worst_z = max(abs(r["variance_z"]) for r in rep["rows"])
    dt = time.time() - t0
    assert worst_mean < 0.05
    assert worst_z < 4.0
    assert dt < 600.0
    _report(9, "low density",
            f"mean sup err {worst_mean:.4f}, variance z {worst_z:.2f}, "
            f"{rep['entries_left']} paths, {dt:.0f}s")


def test_criterion_10_appendix_expansions():
    t0 = time.time()
    worst = 0.0
    for (pl, pb, b1v, b2v) in [(0.65, 0.15, 1.0, 2.0), (0.7, 0.1, 0.5, 1.5),
                               (0.72, 0.12, 1.0, 3.0)]:
        pars = params_from_rates(b1v, b2v, 1.0)
        m = obs.bernoulli_mixed_mean_coefficient(pl, pb, pars)
        v = obs.bernoulli_mixed_variance_coefficient(pl, pb, pars)
        worst = max(worst,
                    abs(m["coefficient"] - m["reference"]) / abs(m["reference"]),
                    abs(v["coefficient"] - v["reference"]) / abs(v["reference"]))
    dt = time.time() - t0
    assert worst < 5e-2
    assert dt < 30.0
    _report(10, "appendix expansions", f"max rel err {worst:.2e}, {dt:.1f}s")
