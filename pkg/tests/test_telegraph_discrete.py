"""Discrete telegraph equation: recursion vs Riemann superposition, and the
two evaluations of the discrete Riemann function."""
import math

import numpy as np
import pytest
from scipy.special import comb

from vertex_telegraph.telegraph_discrete import (DiscreteProblem,
                                                 riemann_discrete,
                                                 riemann_discrete_quadrature,
                                                 riemann_discrete_table,
                                                 riemann_fourpoint_residual,
                                                 riemann_summed_identity,
                                                 solve_recursive, solve_riemann)


def riemann_sum_oracle(b1, b2, a, b):
    """Independent closed form: r(a,b) = sum_k C(a,k)C(b,k)
    [(1-b1)(1-b2)]^k b1^(a-k) b2^(b-k), an all-positive sum (no cancellation).
    Derived by induction on the defining recursion."""
    total = 0.0
    for k in range(min(a, b) + 1):
        total += (comb(a, k, exact=True) * comb(b, k, exact=True)
                  * ((1 - b1) * (1 - b2)) ** k * b1 ** (a - k) * b2 ** (b - k))
    return total


def test_constants_solve_homogeneous():
    chi = np.full(11, 2.5)
    psi = np.full(9, 2.5)
    p = DiscreteProblem(0.6, 0.3, chi, psi, None)
    assert np.abs(solve_recursive(p).values - 2.5).max() < 1e-12


def test_degenerate_weights_one():
    rng = np.random.default_rng(0)
    chi = rng.uniform(-1, 1, 8)
    psi = rng.uniform(-1, 1, 8)
    psi[0] = chi[0]
    p = DiscreteProblem(1.0, 1.0, chi, psi, None)
    phi = solve_recursive(p).values
    assert phi[7, 7] == pytest.approx(chi[7] + psi[7] - chi[0], abs=1e-12)


def test_riemann_edge_values():
    r = riemann_discrete_table(0.85, 0.35, 10, 10)
    assert r[0, 0] == 1.0
    assert np.allclose(r[:, 0], 0.85 ** np.arange(11))
    assert np.allclose(r[0, :], 0.35 ** np.arange(11))
    assert riemann_discrete(0.85, 0.35, -1, 3) == 0.0
    assert riemann_discrete(0.85, 0.35, 3, -2) == 0.0


def test_riemann_against_positive_sum_oracle():
    for (b1, b2) in [(0.9, 0.8), (0.3, 0.7), (0.55, 0.4)]:
        r = riemann_discrete_table(b1, b2, 30, 30)
        for (a, b) in [(0, 0), (1, 1), (2, 1), (7, 3), (30, 30), (25, 4)]:
            assert r[a, b] == pytest.approx(riemann_sum_oracle(b1, b2, a, b),
                                            rel=1e-12)


def test_riemann_quadrature_matches_recursion():
    cases = {
        (math.exp(-1 / 64), math.exp(-2 / 64)): [(0, 0), (3, 5), (40, 40), (100, 0),
                                                 (0, 100), (100, 100), (64, 17)],
        (0.3, 0.7): [(0, 0), (10, 10), (100, 100), (50, 3)],
        (0.9, 0.8): [(0, 0), (5, 3), (20, 20), (100, 100)],  # escalated path
    }
    for (b1, b2), offsets in cases.items():
        r = riemann_discrete_table(b1, b2, 100, 100)
        for (a, b) in offsets:
            q = riemann_discrete_quadrature(b1, b2, a, b)
            assert abs(q - r[a, b]) < 1e-10


def test_riemann_rejects_degenerate():
    with pytest.raises(ValueError):
        riemann_discrete(0.5, 0.5, 1, 1)
    with pytest.raises(ValueError):
        riemann_discrete_table(1.0, 0.5, 1, 1)


def test_fourpoint_residual_including_vanishing_extension():
    assert riemann_fourpoint_residual(0.9, 0.8, 15, 15) < 1e-10
    assert riemann_fourpoint_residual(0.35, 0.6, 15, 15) < 1e-10


def test_summed_identity():
    for (A, B) in [(0, 0), (5, 3), (30, 17), (60, 60)]:
        assert abs(riemann_summed_identity(0.9, 0.8, A, B) - 1.0) < 1e-10


def test_point_mass_source_gives_riemann_kernel():
    b1, b2 = 0.7, 0.45
    X = Y = 12
    x0, y0 = 4, 7
    u = np.zeros((X + 1, Y + 1))
    u[x0, y0] = 1.0
    p = DiscreteProblem(b1, b2, np.zeros(X + 1), np.zeros(Y + 1), u)
    phi = solve_recursive(p).values
    r = riemann_discrete_table(b1, b2, X, Y)
    for xx in range(X + 1):
        for yy in range(Y + 1):
            want = r[xx - x0, yy - y0] if (xx >= x0 and yy >= y0) else 0.0
            assert phi[xx, yy] == pytest.approx(want, abs=1e-12)


def test_zero_data_gives_zero():
    p = DiscreteProblem(0.7, 0.45, np.zeros(9), np.zeros(9), None)
    assert np.abs(solve_riemann(p).values).max() < 1e-14


def test_solver_equivalence_random_instances():
    rng = np.random.default_rng(42)
    for rep in range(8):
        X = int(rng.integers(2, 33))
        Y = int(rng.integers(2, 33))
        b1, b2 = rng.uniform(0.05, 0.95, 2)
        while abs(b1 - b2) < 1e-3:
            b2 = rng.uniform(0.05, 0.95)
        chi = rng.uniform(-1, 1, X + 1)
        psi = rng.uniform(-1, 1, Y + 1)
        psi[0] = chi[0]
        u = rng.uniform(-1, 1, (X + 1, Y + 1))
        p = DiscreteProblem(b1, b2, chi, psi, u)
        d = np.abs(solve_recursive(p).values - solve_riemann(p).values).max()
        assert d < 1e-10


def test_boundary_reproduction():
    rng = np.random.default_rng(7)
    chi = rng.uniform(-1, 1, 21)
    psi = rng.uniform(-1, 1, 16)
    psi[0] = chi[0]
    p = DiscreteProblem(0.62, 0.41, chi, psi, None)
    phi = solve_riemann(p).values
    assert np.abs(phi[:, 0] - chi).max() < 1e-11
    assert np.abs(phi[0, :] - psi).max() < 1e-11
