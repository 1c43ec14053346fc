"""Continuous telegraph equation: Riemann function, quadrature formula,
Picard iteration, and the Bernoulli-boundary closed forms."""
import numpy as np
import pytest

from vertex_telegraph.core import params_from_rates
from vertex_telegraph.telegraph_continuous import (ContinuousProblem,
                                                   IntegratedProblem,
                                                   PicardError,
                                                   homogeneous_bernoulli_shape,
                                                   integrated_from_telegraph,
                                                   picard_solve,
                                                   picard_solve_telegraph,
                                                   riemann, riemann_fast,
                                                   riemann_property_residuals,
                                                   solve_quadrature)
from vertex_telegraph.telegraph_discrete import DiscreteProblem, solve_recursive


def test_riemann_unit_and_edge_laws():
    assert riemann(1.0, 2.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert riemann(1.0, 2.0, 1.3, 0.0) == pytest.approx(np.exp(-1.3), abs=1e-10)
    assert riemann(1.0, 2.0, 0.0, 0.7) == pytest.approx(np.exp(-1.4), abs=1e-10)
    assert riemann(3.0, 0.5, 0.4, 0.0) == pytest.approx(np.exp(-1.2), abs=1e-10)


def test_riemann_contour_equals_closed_form():
    for (b1, b2) in [(1.0, 2.0), (2.0, 1.0), (0.5, 3.0)]:
        for dx in (0.0, 0.4, 1.9):
            for dy in (0.0, 0.8, 2.3):
                assert riemann(b1, b2, dx, dy) == pytest.approx(
                    float(riemann_fast(b1, b2, dx, dy)), abs=5e-11)


def test_riemann_property_residuals_scale_quadratically():
    res_h = riemann_property_residuals(1.0, 2.0, h_fd=1e-3)
    res_h2 = riemann_property_residuals(1.0, 2.0, h_fd=5e-4)
    assert res_h["unit_at_origin"] < 1e-12
    assert res_h["equation"] < 1e-5
    assert res_h["edge_x"] < 1e-5 and res_h["edge_y"] < 1e-5
    # halving the step divides the central-difference residual by about 4
    ratio = res_h["equation"] / res_h2["equation"]
    assert 3.0 < ratio < 5.0


def test_constants_solve_homogeneous():
    p = ContinuousProblem(1.0, 2.0, lambda x: 3.0 + 0 * x, lambda y: 3.0 + 0 * y,
                          None, (1.0, 1.0))
    vals = solve_quadrature(p, np.array([[0.3, 0.4], [1.0, 1.0]]))
    assert np.abs(vals - 3.0).max() < 1e-8
    phi = picard_solve_telegraph(p, grid=(64, 64), tol=1e-12)
    assert np.abs(phi.values - 3.0).max() < 1e-9


def test_picard_trivial_and_manufactured():
    # lam = mu = nu = 0: the fixed point is g itself
    g = lambda x, y: np.sin(x) + y  # noqa: E731
    phi = picard_solve(IntegratedProblem(0.0, 0.0, 0.0, g, (1.0, 1.0)), (32, 32))
    xs = np.linspace(0, 1, 33)
    assert np.abs(phi.values - (np.sin(xs)[:, None] + xs[None, :])).max() < 1e-12
    # manufactured solution: apply the integral operator to a chosen phi*
    lam, mu, nu = 1.0, 2.0, 1.5
    star = lambda x, y: np.cos(2 * x) * (1 + y)  # noqa: E731

    def g2(x, y):
        ix = (np.sin(2 * x) / 2) * (1 + y)
        iy = np.cos(2 * x) * (y + y ** 2 / 2)
        ixy = (np.sin(2 * x) / 2) * (y + y ** 2 / 2)
        return star(x, y) + lam * ix + mu * iy + nu * ixy

    phi = picard_solve(IntegratedProblem(lam, mu, nu, g2, (1.0, 1.0)),
                       grid=(512, 512), tol=1e-12)
    xs = np.linspace(0, 1, 513)
    exact = star(xs[:, None], xs[None, :])
    assert np.abs(phi.values - exact).max() < 2e-6


def test_picard_grid_too_coarse_raises():
    with pytest.raises(PicardError):
        picard_solve(IntegratedProblem(50.0, 50.0, 0.0,
                                       lambda x, y: x + y, (1.0, 1.0)), (8, 8))


def test_quadrature_matches_picard_smooth_instances():
    rng = np.random.default_rng(3)
    for rep, (b1, b2) in enumerate([(1.0, 2.0), (2.0, 1.0), (0.5, 3.0)]):
        a0, a1, a2 = rng.uniform(-1, 1, 3)
        chi = lambda x: a0 + a1 * np.sin(2 * x) + a2 * x ** 2  # noqa: E731
        psi = lambda y: a0 + a1 * np.tanh(y) * 0.5  # noqa: E731
        u = lambda x, y: np.cos(3 * x) * (0.5 + y) + a2 * np.sin(2 * y)  # noqa: E731
        p = ContinuousProblem(b1, b2, chi, psi, u, (1.0, 1.0))
        phi = picard_solve_telegraph(p, grid=(512, 512), tol=1e-11)
        idx = [(256, 256), (512, 512), (128, 448), (448, 64)]
        pts = np.array([[i / 512, j / 512] for i, j in idx])
        quad = solve_quadrature(p, pts)
        pic = np.array([phi.values[i, j] for i, j in idx])
        assert np.abs(quad - pic).max() < 1e-6


def test_integrated_form_matches_direct_solution():
    p = ContinuousProblem(1.0, 2.0, lambda x: np.cos(x), lambda y: 1 + 0.3 * y,
                          lambda x, y: x * y, (1.0, 1.0))
    g = integrated_from_telegraph(p, (256, 256))
    phi = picard_solve(IntegratedProblem(1.0, 2.0, 0.0, g, (1.0, 1.0)), (256, 256))
    quad = solve_quadrature(p, np.array([[0.5, 0.5]]))
    assert abs(phi.values[128, 128] - quad[0]) < 5e-6


def test_bernoulli_closed_form_against_quadrature():
    for (p1, p2, b1, b2) in [(0.3, 0.6, 1.0, 2.0), (0.0, 1.0, 1.0, 2.0),
                             (0.5, 0.25, 2.0, 1.0), (1.0, 0.4, 1.0, 2.0)]:
        qs = np.exp(b1 - b2)
        prob = ContinuousProblem(b1, b2, lambda x: qs ** (-p1 * x),
                                 lambda y: qs ** (p2 * y), None, (1.0, 1.0))
        pts = np.array([[0.6, 0.8], [1.0, 0.5], [0.2, 0.2]])
        v_quad = solve_quadrature(prob, pts)
        v_cf = np.array([homogeneous_bernoulli_shape(x, y, p1, p2, b1, b2)
                         for x, y in pts])
        assert np.abs(v_quad - v_cf).max() < 1e-6


def test_bernoulli_boundary_values():
    # x = 0 reproduces psi = qs^(p2 y); y = 0 reproduces chi = qs^(-p1 x)
    qs = np.exp(1.0 - 2.0)
    for (p1, p2) in [(0.3, 0.6), (0.15, 0.9)]:
        assert homogeneous_bernoulli_shape(0.0, 0.7, p1, p2, 1.0, 2.0) == \
            pytest.approx(qs ** (p2 * 0.7), rel=1e-9)
        assert homogeneous_bernoulli_shape(0.9, 0.0, p1, p2, 1.0, 2.0) == \
            pytest.approx(qs ** (-p1 * 0.9), rel=1e-9)


def test_bernoulli_translation_invariant_line():
    b1, b2 = 1.0, 2.0
    p1 = 0.25
    rho1 = p1 / (1 - p1)
    rho2 = rho1 * b2 / b1
    p2 = rho2 / (1 + rho2)
    v = homogeneous_bernoulli_shape(0.7, 0.4, p1, p2, b1, b2)
    assert v == pytest.approx(np.exp((b1 - b2) * (-p1 * 0.7 + p2 * 0.4)), rel=1e-10)


def test_bernoulli_step_case_is_domain_wall_formula():
    """p1 = 0, p2 = 1 reduces to the domain-wall step formula, i.e. the
    alpha = 0 limit shape's qs-exponent."""
    from vertex_telegraph.observables import limit_shape_dw
    pars = params_from_rates(1.0, 2.0, 1.0)
    for (x, y) in [(0.4, 0.9), (1.1, 0.6)]:
        v = homogeneous_bernoulli_shape(x, y, 0.0, 1.0, 1.0, 2.0)
        h = limit_shape_dw(x, y, pars, alpha=0.0)
        assert v == pytest.approx(np.exp((1.0 - 2.0) * h), rel=1e-9)


def test_discrete_solution_converges_to_continuous():
    """Lattice spacing 1/L with b_i = exp(-beta_i/L): sup error at the grid
    corners decreases as L doubles, at first order or better."""
    beta1, beta2 = 1.0, 2.0
    chi = lambda x: np.cos(x) - 1.0  # noqa: E731
    psi = lambda y: 0.5 * np.sin(2 * y)  # noqa: E731
    p = ContinuousProblem(beta1, beta2, chi, psi, None, (1.0, 1.0))
    pts = np.array([[0.5, 0.5], [1.0, 1.0], [0.25, 0.75]])
    ref = solve_quadrature(p, pts)
    errs = []
    for L in (16, 32, 64):
        b1 = np.exp(-beta1 / L)
        b2 = np.exp(-beta2 / L)
        xs = np.arange(L + 1) / L
        dp = DiscreteProblem(b1, b2, chi(xs), psi(xs), None)
        phi = solve_recursive(dp).values
        vals = np.array([phi[int(x * L), int(y * L)] for x, y in pts])
        errs.append(np.abs(vals - ref).max())
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[2] / errs[1] < 0.65  # empirical order >= 1


def test_corner_mismatch_rejected():
    with pytest.raises(ValueError):
        ContinuousProblem(1.0, 2.0, lambda x: 1.0 + 0 * x, lambda y: 0 * y,
                          None, (1.0, 1.0))
