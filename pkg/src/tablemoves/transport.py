"""Exact transport cost by cycle cancelling, dual checks, geodesics and support clean-up."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidInterval, NonConvergence, NotMetric
from .homophily import homophily_coupling
from .moves import MonotonicityVerdict, SimpleMove, is_cyclically_monotone, max_step, move_cost
from .tables import (
    METRIC_TOL,
    SUPPORT_TOL,
    Coupling,
    as_cost,
    as_probability,
    cost_of,
    metric_violation,
    table_of,
    validate_coupling,
)

#: a diagonal-filling move is applied when its cost change per unit is at most this
FILL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransportSolution:
    coupling: Coupling
    value: float
    certificate: MonotonicityVerdict
    iterations: int
    history: list = field(default_factory=list, repr=False)

    @property
    def certified(self) -> bool:
        return bool(self.certificate)

    def to_json(self) -> dict:
        return {
            "certified": self.certified,
            "coupling": self.coupling.table.tolist(),
            "iterations": self.iterations,
            "value": self.value,
        }


def _cancel(t: np.ndarray, f: SimpleMove, alpha: float) -> np.ndarray:
    new = t - alpha * f.table
    donors = f.table > 0
    # the cell that fixed alpha must leave the support exactly
    limiting = donors & (np.abs(new) <= SUPPORT_TOL)
    new[limiting] = 0.0
    return new


def exact_kcost(mu, nu, c, max_iter: int | None = None) -> TransportSolution:
    """Minimum expected cost over all couplings of ``mu`` and ``nu``.

    Starts at the homophily coupling and applies positive-cost admissible
    simple moves at their largest step until the support admits none.
    """
    mu, nu = as_probability(mu), as_probability(nu)
    cm = as_cost(c)
    if not mu.n == nu.n == cm.n:
        raise DimensionMismatch(f"margin lengths {mu.n}, {nu.n} vs cost size {cm.n}")
    n = mu.n
    if max_iter is None:
        max_iter = 10 * n**4
    t = np.array(homophily_coupling(mu, nu).table)
    history = [cost_of(t, cm)]
    for it in range(max_iter + 1):
        verdict = is_cyclically_monotone(t > SUPPORT_TOL, cm)
        if verdict.monotone:
            coupling = validate_coupling(t, mu, nu)
            return TransportSolution(coupling, cost_of(coupling, cm), verdict, it, history)
        if it == max_iter:
            break
        f = verdict.witness
        t = _cancel(t, f, max_step(f, t))
        history.append(cost_of(t, cm))
    raise NonConvergence(f"cycle cancelling did not terminate within {max_iter} iterations")


# --------------------------------------------------------------------------
# dual side


@dataclass(frozen=True, eq=False)
class DualPair:
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=np.float64).ravel()
        psi = np.array(self.psi, dtype=np.float64).ravel()
        if phi.size != psi.size:
            raise DimensionMismatch(f"potentials have lengths {phi.size} and {psi.size}")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)


def _cost_array(c) -> np.ndarray:
    return np.asarray(getattr(c, "entries", c), dtype=np.float64)


def dual_feasible(phi, psi, c, tol: float = 1e-12) -> bool:
    """``phi(x) + psi(y) <= c(x, y)`` for all pairs."""
    cm = _cost_array(c)
    phi, psi = np.asarray(phi, float), np.asarray(psi, float)
    if cm.shape != (phi.size, psi.size):
        raise DimensionMismatch(f"potentials ({phi.size}, {psi.size}) vs cost {cm.shape}")
    return bool(np.all(phi[:, None] + psi[None, :] <= cm + tol))


def dual_value(phi, psi, mu, nu) -> float:
    mu, nu = as_probability(mu), as_probability(nu)
    return float(np.dot(phi, mu.values) + np.dot(psi, nu.values))


def c_transform(psi, c) -> np.ndarray:
    """``phi(x) = min_y c(x, y) - psi(y)``: the largest phi feasible with ``psi``."""
    return np.min(_cost_array(c) - np.asarray(psi, float)[None, :], axis=1)


def tighten(phi, psi, c) -> DualPair:
    """Raise ``phi`` then ``psi`` to their c-transforms; the value can only grow."""
    cm = _cost_array(c)
    phi1 = c_transform(psi, cm)
    psi1 = np.min(cm - phi1[:, None], axis=0)
    return DualPair(phi1, psi1)


# --------------------------------------------------------------------------
# metric-cost operations


def _require_metric(d) -> np.ndarray:
    cm = _cost_array(d)
    problem = metric_violation(cm, METRIC_TOL)
    if problem is not None:
        raise NotMetric(problem)
    return cm


def geodesic_coupling(gamma_opt, mu, nu, s: float, t: float) -> Coupling:
    """``diag((1 - t) mu + s nu) + (t - s) gamma_opt``: couples ``mu(s)`` with ``mu(t)``.

    ``mu(r) = (1 - r) mu + r nu``. For an optimal ``gamma_opt`` under a
    metric its cost is ``(t - s)`` times the optimal value.
    """
    if not (0.0 <= s <= t <= 1.0):
        raise InvalidInterval(f"need 0 <= s <= t <= 1, got s={s}, t={t}")
    mu, nu = as_probability(mu), as_probability(nu)
    g = table_of(gamma_opt)
    if g.shape != (mu.n, nu.n):
        raise DimensionMismatch(f"coupling shape {g.shape} vs margins ({mu.n}, {nu.n})")
    table = np.diag((1 - t) * mu.values + s * nu.values) + (t - s) * g
    mu_s = (1 - s) * mu.values + s * nu.values
    mu_t = (1 - t) * mu.values + t * nu.values
    return validate_coupling(table, mu_s, mu_t)


def _fill_pairs(n: int, x: int, patterns: str):
    """``(a, b)`` pairs for the diagonal-filling move around ``x``.

    The move takes mass from ``(x, a)`` and ``(b, x)`` and puts it on
    ``(b, a)`` and ``(x, x)``.
    """
    for a in range(n):
        if a == x:
            continue
        for b in range(n):
            if b == x:
                continue
            if patterns == "monotone" and not (b < x < a or a < x < b):
                continue
            yield a, b


def fill_diagonal(gamma, d, patterns: str = "all", max_passes: int | None = None, tol: float = FILL_TOL):
    """Move mass onto the diagonal without raising the cost.

    For every ``x`` and every pair of cells ``(x, a)``, ``(b, x)`` carrying
    mass, the chain ``b -> x -> a`` is shortened to ``b -> a`` plus a stay at
    ``x`` when that does not raise the cost by more than ``tol`` per unit.
    ``patterns="monotone"`` restricts to ``b < x < a`` and ``a < x < b``.
    Sweeps repeat until one makes no change (at most ``n**2`` sweeps).
    """
    if patterns not in ("all", "monotone"):
        raise ValueError(f"patterns must be 'all' or 'monotone', got {patterns!r}")
    cm = _require_metric(d)
    t = np.array(table_of(gamma))
    n = t.shape[0]
    if cm.shape != t.shape:
        raise DimensionMismatch(f"coupling shape {t.shape} vs cost {cm.shape}")
    if max_passes is None:
        max_passes = n * n
    for _ in range(max_passes):
        changed = False
        for x in range(n):
            for a, b in _fill_pairs(n, x, patterns):
                alpha = min(t[x, a], t[b, x])
                if alpha <= SUPPORT_TOL:
                    continue
                delta = cm[b, a] + cm[x, x] - cm[x, a] - cm[b, x]
                if delta > tol:
                    continue
                # move the smaller donor out exactly so the support shrinks
                if t[x, a] <= t[b, x]:
                    t[x, a] = 0.0
                    t[b, x] -= alpha
                else:
                    t[b, x] = 0.0
                    t[x, a] -= alpha
                t[b, a] += alpha
                t[x, x] += alpha
                changed = True
        if not changed:
            break
    if isinstance(gamma, Coupling):
        return validate_coupling(t, gamma.row_margin, gamma.col_margin)
    return Coupling.from_table(t)


def _forest_cycle(mask: np.ndarray):
    """A cycle of the undirected graph behind the off-diagonal arcs of ``mask``.

    Returns a list of ``(u, v, forward)`` edges walking round the cycle, where
    ``forward`` tells whether the arc is ``u -> v`` (else ``v -> u``), or None.
    """
    n = mask.shape[0]
    adj: list[dict[int, bool]] = [dict() for _ in range(n)]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x, y in zip(*np.nonzero(mask)):
        x, y = int(x), int(y)
        if x == y:
            continue
        rx, ry = find(x), find(y)
        if rx == ry:
            # tree path from y back to x, then close with the arc x -> y
            prev = {y: None}
            stack = [y]
            while stack:
                u = stack.pop()
                if u == x:
                    break
                for v in adj[u]:
                    if v not in prev:
                        prev[v] = u
                        stack.append(v)
            path = [x]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            # path runs x ... y along tree edges; walk y -> ... -> x, then x -> y
            path.reverse()
            edges = [(path[k], path[k + 1], adj[path[k]][path[k + 1]]) for k in range(len(path) - 1)]
            edges.append((x, y, True))
            return edges
        parent[rx] = ry
        adj[x][y] = True
        adj[y][x] = False
    return None


def reduce_cycles(gamma, d, max_iter: int | None = None):
    """Remove cycles from the off-diagonal support without raising the cost.

    Two opposite arcs are cancelled through the diagonal. Otherwise a cycle
    of the underlying undirected graph is taken: two consecutive arcs in the
    same direction ``x1 -> x2 -> x3`` are shortened to ``x1 -> x3``; a cycle
    whose arcs alternate in direction is broken by the alternating move in
    the direction that does not raise the cost.
    """
    cm = _require_metric(d)
    t = np.array(table_of(gamma))
    n = t.shape[0]
    if cm.shape != t.shape:
        raise DimensionMismatch(f"coupling shape {t.shape} vs cost {cm.shape}")
    if max_iter is None:
        max_iter = 10 * n**4
    for _ in range(max_iter):
        mask = t > SUPPORT_TOL
        two = mask & mask.T
        np.fill_diagonal(two, False)
        if two.any():
            x1, x2 = (int(v) for v in np.argwhere(two)[0])
            f = np.zeros((n, n))
            f[x1, x2] = f[x2, x1] = 1.0
            f[x1, x1] = f[x2, x2] = -1.0
            t = _cancel(t, SimpleMove(f), min(t[x1, x2], t[x2, x1]))
            continue
        edges = _forest_cycle(mask)
        if edges is None:
            break
        k = len(edges)
        arcs = [(u, v) if fw else (v, u) for u, v, fw in edges]
        f = np.zeros((n, n))
        for e in range(k):
            (u1, v1, fw1), (u2, v2, fw2) = edges[e], edges[(e + 1) % k]
            if fw1 == fw2:
                # x1 -> x2 -> x3 in walking direction (or against it)
                x1, x2, x3 = (u1, v1, v2) if fw1 else (v2, v1, u1)
                f[x1, x2] += 1.0
                f[x2, x3] += 1.0
                f[x1, x3] -= 1.0
                f[x2, x2] -= 1.0
                break
        else:
            for e, (x, y) in enumerate(arcs):
                f[x, y] = 1.0 if e % 2 == 0 else -1.0
            if move_cost(f, cm) < 0:
                f = -f
        move = SimpleMove(f) if np.all(np.isin(f, (-1.0, 0.0, 1.0))) else None
        if move is None:
            raise NonConvergence("cycle move is not simple")
        t = _cancel(t, move, max_step(move, t))
    else:
        raise NonConvergence(f"cycle reduction did not finish within {max_iter} moves")
    if isinstance(gamma, Coupling):
        return validate_coupling(t, gamma.row_margin, gamma.col_margin)
    return Coupling.from_table(t)


__all__ = [
    "DualPair",
    "TransportSolution",
    "c_transform",
    "dual_feasible",
    "dual_value",
    "exact_kcost",
    "fill_diagonal",
    "geodesic_coupling",
    "reduce_cycles",
    "tighten",
]
