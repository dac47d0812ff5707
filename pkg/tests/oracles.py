"""Reference computations that share no code with the library."""
from itertools import combinations, permutations

import numpy as np
from scipy.optimize import linprog


def lp_value(mu, nu, c):
    """Optimal transport value by a generic LP solver."""
    mu, nu, c = (np.asarray(a, float) for a in (mu, nu, c))
    n = mu.size
    a_eq = np.zeros((2 * n, n * n))
    for i in range(n):
        a_eq[i, i * n:(i + 1) * n] = 1.0
        a_eq[n + i, i::n] = 1.0
    res = linprog(c.ravel(), A_eq=a_eq, b_eq=np.concatenate([mu, nu]), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun), res.x.reshape(n, n)


def lp_cell_range(mu, nu, c, value, tol=1e-9):
    """Min and max of every cell over the optimal face (LP over the face)."""
    mu, nu, c = (np.asarray(a, float) for a in (mu, nu, c))
    n = mu.size
    a_eq = np.zeros((2 * n + 1, n * n))
    for i in range(n):
        a_eq[i, i * n:(i + 1) * n] = 1.0
        a_eq[n + i, i::n] = 1.0
    a_eq[-1] = c.ravel()
    b_eq = np.concatenate([mu, nu, [value + tol]])
    lo, hi = np.zeros(n * n), np.zeros(n * n)
    for k in range(n * n):
        e = np.zeros(n * n)
        e[k] = 1.0
        lo[k] = linprog(e, A_eq=a_eq[:-1], b_eq=b_eq[:-1], A_ub=a_eq[-1:], b_ub=b_eq[-1:], bounds=(0, None), method="highs").fun
        hi[k] = -linprog(-e, A_eq=a_eq[:-1], b_eq=b_eq[:-1], A_ub=a_eq[-1:], b_ub=b_eq[-1:], bounds=(0, None), method="highs").fun
    return lo.reshape(n, n), hi.reshape(n, n)


_BASES = {}


def _bases(n):
    """Cell sets of size ``2n - 1`` with invertible margin equations, and their inverses."""
    if n not in _BASES:
        a = np.zeros((2 * n, n * n))
        for i in range(n):
            a[i, i * n:(i + 1) * n] = 1.0
            a[n + i, i::n] = 1.0
        a = a[:-1]  # one margin equation is redundant
        cells = np.array(list(combinations(range(n * n), 2 * n - 1)))
        subs = np.transpose(a[:, cells], (1, 0, 2))
        ok = np.abs(np.linalg.det(subs)) > 0.5  # the matrices are unimodular
        _BASES[n] = (cells[ok], np.linalg.inv(subs[ok]))
    return _BASES[n]


def vertex_value(mu, nu, c):
    """Minimum cost over all vertices of the coupling polytope.

    A vertex is the non-negative solution of the margin equations on a set
    of ``2n - 1`` cells whose equations are independent. Every such set is
    enumerated, so this is only practical for ``n <= 4``.
    """
    mu, nu, c = (np.asarray(a, float) for a in (mu, nu, c))
    n = mu.size
    cells, inv = _bases(n)
    b = np.concatenate([mu, nu])[:-1]
    x = inv @ b
    feasible = np.all(x >= -1e-12, axis=1)
    vals = np.einsum("kc,kc->k", c.ravel()[cells], x)
    vals[~feasible] = np.inf
    k = int(np.argmin(vals))
    table = np.zeros(n * n)
    table[cells[k]] = x[k]
    return float(vals[k]), table.reshape(n, n)


def brute_cograduation(x, y):
    """Min and max of sum |x_s(i) - y_t(i)| over all pairs of permutations."""
    x, y = list(x), list(y)
    vals = [sum(abs(a - b) for a, b in zip(x, py)) for py in permutations(y)]
    # permuting both sequences is the same as permuting one of them
    return min(vals), max(vals)


def north_west_counts(rows, cols):
    """North-West rule on integer counts, plain loops."""
    rows, cols = list(rows), list(cols)
    out = [[0] * len(cols) for _ in rows]
    i = j = 0
    while i < len(rows) and j < len(cols):
        v = min(rows[i], cols[j])
        out[i][j] = v
        rows[i] -= v
        cols[j] -= v
        if rows[i] == 0:
            i += 1
        else:
            j += 1
    return out


def w1_line(mu, nu):
    """Kantorovich distance for |i - j| on a line: L1 distance of the CDFs."""
    return float(np.abs(np.cumsum(mu) - np.cumsum(nu))[:-1].sum())
