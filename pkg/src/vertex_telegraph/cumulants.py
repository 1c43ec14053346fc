"""Joint cumulants from joint moments via set partitions, and the shifted-
cumulant expansion check.

The cumulant of order n is the alternating sum over set partitions s of
{1..n}: sum (-1)^(l(s)+1) (l(s)-1)! prod_{A in s} M_A.  The shifted check
builds the modified moments

    M'_A = E[prod_k (r_{i_k} + eps xi_{i_k})] * prod_{k<l} (1 + eps^2 a_{i_k i_l})

as exact polynomials in eps, assembles the corresponding cumulant polynomial,
and verifies that everything below eps^n cancels while the eps^n coefficient
is the plain cumulant of the xi's.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np


def set_partitions(n: int):
    """All set partitions of {1..n}, each a tuple of disjoint tuples."""
    if n == 0:
        yield ()
        return
    for rest in set_partitions(n - 1):
        # element n joins an existing part or opens a new one
        for i in range(len(rest)):
            yield rest[:i] + (rest[i] + (n,),) + rest[i + 1:]
        yield rest + ((n,),)


@dataclass(frozen=True)
class MomentTable:
    """Joint moments M_A indexed by subsets A of {1..n}; M_emptyset = 1."""

    n: int
    moments: dict

    def __post_init__(self):
        table = {frozenset(): 1.0}
        for key, val in self.moments.items():
            fs = frozenset(int(i) for i in key)
            if fs and (min(fs) < 1 or max(fs) > self.n):
                raise ValueError(f"subset {sorted(fs)} outside 1..{self.n}")
            table[fs] = float(val)
        object.__setattr__(self, "moments", table)

    def __getitem__(self, subset) -> float:
        fs = frozenset(int(i) for i in subset)
        if fs not in self.moments:
            raise KeyError(f"moment for subset {sorted(fs)} missing")
        return self.moments[fs]

    def has_all_subsets(self) -> bool:
        full = range(1, self.n + 1)
        return all(frozenset(c) in self.moments
                   for m in range(1, self.n + 1) for c in combinations(full, m))


def cumulant(moments: MomentTable, n: int) -> float:
    """Joint cumulant of order n from the moment table."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > 8:
        raise ValueError("set-partition enumeration capped at n = 8")
    total = 0.0
    for s in set_partitions(n):
        ell = len(s)
        term = (-1.0) ** (ell + 1) * factorial(ell - 1)
        for part in s:
            term *= moments[part]
        total += term
    return total


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def shifted_moment_poly(subset, r, a, xi_moments: MomentTable) -> np.ndarray:
    """Coefficients (in eps) of M'_A for A = subset.

    E[prod (r + eps xi)] expands over sub-subsets B with eps^|B| r_{A\\B} M_B;
    the pair factor prod (1 + eps^2 a_ij) multiplies in as a polynomial in
    eps^2.  Indices in subset are 1-based.
    """
    idx = tuple(sorted(subset))
    m = len(idx)
    base = np.zeros(m + 1)
    for size in range(m + 1):
        for B in combinations(idx, size):
            rest = [i for i in idx if i not in B]
            coef = xi_moments[B]
            for i in rest:
                coef *= r[i - 1]
            base[size] += coef
    poly = base
    for k in range(m):
        for l in range(k + 1, m):
            pair = np.array([1.0, 0.0, a[idx[k] - 1, idx[l] - 1]])
            poly = _poly_mul(poly, pair)
    return poly


def shifted_moment_poly_homogeneous(subset, r, a_tilde, xi_moments: MomentTable) -> np.ndarray:
    """The same M'_A when a_ij depends only on j: the pair product collapses to
    prod_k (1 + eps^2 a~_{i_k})^(k-1) with k the rank of i_k inside A."""
    idx = tuple(sorted(subset))
    m = len(idx)
    base = np.zeros(m + 1)
    for size in range(m + 1):
        for B in combinations(idx, size):
            rest = [i for i in idx if i not in B]
            coef = xi_moments[B]
            for i in rest:
                coef *= r[i - 1]
            base[size] += coef
    poly = base
    for rank, i in enumerate(idx):
        pair = np.array([1.0, 0.0, a_tilde[i - 1]])
        for _ in range(rank):
            poly = _poly_mul(poly, pair)
    return poly


def shifted_cumulant_expansion_check(r, a, xi_moments: MomentTable, n: int,
                                     eps_list=(0.1, 0.05, 0.025)) -> dict:
    """Assemble C'_n as a polynomial in eps and compare with eps^n * C_n.

    Returns the plain cumulant, the eps^n coefficient, the largest coefficient
    below order n (these must vanish), the full polynomial, and C'_n evaluated
    at the requested eps values.
    """
    if n <= 2:
        raise ValueError("the shifted-cumulant statement needs n > 2")
    if n > 8:
        raise ValueError("set-partition enumeration capped at n = 8")
    r = np.asarray(r, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if r.shape != (n,) or a.shape != (n, n):
        raise ValueError("need r of length n and a of shape (n, n)")
    if len(set(eps_list)) < 2:
        raise ValueError("need at least two distinct eps values to report")
    polys = {}
    for m in range(1, n + 1):
        for A in combinations(range(1, n + 1), m):
            polys[A] = shifted_moment_poly(A, r, a, xi_moments)
    cprime = np.zeros(1)
    for s in set_partitions(n):
        ell = len(s)
        term = np.array([(-1.0) ** (ell + 1) * factorial(ell - 1)])
        for part in s:
            term = _poly_mul(term, polys[tuple(sorted(part))])
        width = max(len(cprime), len(term))
        cprime = np.pad(cprime, (0, width - len(cprime)))
        cprime = cprime + np.pad(term, (0, width - len(term)))
    cn = cumulant(xi_moments, n)
    evaluations = {float(e): float(np.polyval(cprime[::-1], e)) for e in eps_list}
    return {
        "cumulant": cn,
        "eps_n_coefficient": float(cprime[n]) if len(cprime) > n else 0.0,
        "max_lower_coefficient": float(np.max(np.abs(cprime[:n]))),
        "polynomial": cprime,
        "evaluations": evaluations,
    }
