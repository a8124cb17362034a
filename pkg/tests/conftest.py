"""Shared oracles and the acceptance report hook.

The oracles here deliberately avoid the package's own enumeration code:
they walk the full point set with ``itertools.product`` and exact
``Fraction`` arithmetic.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_values(a, values):
    """Exact ``x^T a x`` for every ``x`` in ``values^n``, as {x: Fraction}."""
    a = [[Fraction(float(v)) for v in row] for row in np.asarray(a, dtype=float)]
    n = len(a)
    out = {}
    for x in itertools.product(values, repeat=n):
        out[x] = sum(a[i][j] * x[i] * x[j] for i in range(n) for j in range(n))
    return out


def brute_min(a, values=(1, -1)):
    vals = brute_values(a, values)
    m = min(vals.values())
    return m, sorted(x for x, v in vals.items() if v == m)


def brute_anti_stable(e):
    """All x in {+-1}^n (both signs) with x_i (E x)_i <= 0 for every i."""
    e = np.asarray(e, dtype=float)
    n = e.shape[0]
    out = []
    for x in itertools.product((1, -1), repeat=n):
        h = [sum(Fraction(float(e[i, j])) * x[j] for j in range(n)) for i in range(n)]
        if all(x[i] * h[i] <= 0 for i in range(n)):
            out.append(x)
    return out


def triangle_member(rho):
    """Cut-polytope membership for N <= 4 via the triangle inequalities.

    For at most four points the triangle inequalities are the complete facet
    description of the correlation (cut) polytope.
    """
    n = len(rho)
    assert n <= 4
    c = lambda i, j: rho[abs(i - j)]
    for i, j, k in itertools.combinations(range(n), 3):
        for s in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
            if 1 + s[0] * c(i, j) + s[1] * c(i, k) + s[2] * c(j, k) < -1e-12:
                return False
    return True


def telegraph_decomposition(a, n):
    """Exact decomposition of the Toeplitz matrix of a^k over sign vectors.

    Path probabilities of the two-state chain with flip probability
    ``(1 - a)/2``; representative ``eps`` (first entry +1) carries the mass
    of both ``eps`` and ``-eps``.
    """
    p = (1 - a) / 2
    out = []
    for tail in itertools.product((1, -1), repeat=n - 1):
        eps = (1,) + tail
        w = 1.0
        for u, v in zip(eps, eps[1:]):
            w *= p if u != v else 1 - p
        out.append((w, np.array(eps)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
