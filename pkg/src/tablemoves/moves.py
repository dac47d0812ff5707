"""Moves: tables with zero margins, and what can be done with them.

A move ``M`` acts on a coupling ``g`` through ``g - alpha * M``: cells where
``M > 0`` give mass away, cells where ``M < 0`` receive it. Indices are
0-based throughout.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import DegenerateIndices, DimensionMismatch, NotAMove, NotSimple
from .tables import (
    MARGIN_TOL,
    SUPPORT_TOL,
    SupportGraph,
    as_probability,
    north_west,
    table_of,
    validate_coupling,
)

MOVE_TOL = 1e-12
#: strictness threshold for exchange-cycle weights
CYCLE_TOL = 1e-12


def _margin_tol(t: np.ndarray) -> float:
    return MOVE_TOL * max(1.0, float(np.abs(t).max(initial=0.0)) * t.shape[0])


class Move:
    """A real square table whose row and column sums all vanish."""

    __slots__ = ("table",)

    def __init__(self, table, *, check: bool = True):
        t = np.array(table, dtype=np.float64, copy=True)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DimensionMismatch(f"a move must be a square table, got shape {t.shape}")
        if check:
            tol = _margin_tol(t)
            worst = max(np.abs(t.sum(axis=0)).max(), np.abs(t.sum(axis=1)).max())
            if worst > tol:
                raise NotAMove(f"margins are not zero (largest residual {worst:.3e})")
        t.setflags(write=False)
        self.table = t

    @property
    def n(self) -> int:
        return self.table.shape[0]

    @property
    def plus_set(self) -> list[tuple[int, int]]:
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(self.table > 0))]

    @property
    def minus_set(self) -> list[tuple[int, int]]:
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(self.table < 0))]

    def is_zero(self) -> bool:
        return not np.any(self.table)

    def __array__(self, dtype=None, copy=None):
        return self.table if dtype is None else self.table.astype(dtype)

    def __neg__(self):
        return Move(-self.table, check=False)

    def __mul__(self, scalar):
        return Move(float(scalar) * self.table, check=False)

    __rmul__ = __mul__

    def __add__(self, other):
        return Move(self.table + table_of(other))

    def __sub__(self, other):
        return Move(self.table - table_of(other))

    def __repr__(self):
        return f"{type(self).__name__}({self.table.tolist()})"

    def triplets(self) -> list[tuple[int, int, float]]:
        """Sparse ``(i, j, value)`` form of the non-zero cells."""
        return [(int(i), int(j), float(self.table[i, j])) for i, j in zip(*np.nonzero(self.table))]

    @classmethod
    def from_triplets(cls, triplets, n: int) -> "Move":
        t = np.zeros((n, n))
        for i, j, v in triplets:
            t[int(i), int(j)] += float(v)
        return cls(t)


class SimpleMove(Move):
    """A move with entries in ``{-1, 0, +1}``."""

    __slots__ = ()

    def __init__(self, table, *, check: bool = True):
        super().__init__(table, check=check)
        if check and not np.all(np.isin(self.table, (-1.0, 0.0, 1.0))):
            raise NotSimple("entries must lie in {-1, 0, 1}")

    def __neg__(self):
        return SimpleMove(-self.table, check=False)


class BasicMove(SimpleMove):
    """``(e_x1 - e_x2) (x) (e_y1 - e_y2)``: +1 at (x1, y1), (x2, y2); -1 at (x1, y2), (x2, y1)."""

    __slots__ = ("indices",)

    def __init__(self, x1: int, x2: int, y1: int, y2: int, n: int):
        if x1 == x2 or y1 == y2:
            raise DegenerateIndices(f"basic move needs x1 != x2 and y1 != y2, got {(x1, x2, y1, y2)}")
        if not all(0 <= k < n for k in (x1, x2, y1, y2)):
            raise DimensionMismatch(f"indices {(x1, x2, y1, y2)} out of range for n={n}")
        t = np.zeros((n, n))
        t[x1, y1] = t[x2, y2] = 1.0
        t[x1, y2] = t[x2, y1] = -1.0
        super().__init__(t, check=False)
        self.indices = (int(x1), int(x2), int(y1), int(y2))

    def __neg__(self):
        x1, x2, y1, y2 = self.indices
        return BasicMove(x1, x2, y2, y1, self.n)

    def __repr__(self):
        return f"BasicMove{self.indices}"


def as_move(m) -> Move:
    return m if isinstance(m, Move) else Move(m)


def make_basic(x1: int, x2: int, y1: int, y2: int, n: int) -> BasicMove:
    return BasicMove(x1, x2, y1, y2, n)


def basic_moves(n: int) -> list[BasicMove]:
    """Every basic move up to sign: C(n, 2)**2 of them."""
    pairs = list(combinations(range(n), 2))
    return [BasicMove(x1, x2, y1, y2, n) for x1, x2 in pairs for y1, y2 in pairs]


# --------------------------------------------------------------------------
# linear structure


def pivotal_basis(u: int, v: int, n: int) -> list[BasicMove]:
    """The (n-1)**2 moves ``(e_x - e_u) (x) (e_y - e_v)``, x != u, y != v, in row-major order."""
    return [BasicMove(x, u, y, v, n) for x in range(n) if x != u for y in range(n) if y != v]


def express_in_basis(m, u: int, v: int) -> np.ndarray:
    """Coefficients of ``m`` on the pivotal basis around ``(u, v)``.

    The coefficient of ``(e_x - e_u) (x) (e_y - e_v)`` is simply ``m[x, y]``;
    row ``u`` and column ``v`` of the result are zero.
    """
    m = as_move(m)
    coef = np.array(m.table)
    coef[u, :] = 0.0
    coef[:, v] = 0.0
    return coef


def reconstruct_from_basis(coef, u: int, v: int) -> Move:
    coef = np.asarray(coef, dtype=np.float64)
    n = coef.shape[0]
    e_u = np.zeros(n)
    e_u[u] = 1.0
    e_v = np.zeros(n)
    e_v[v] = 1.0
    t = coef - np.outer(e_u, coef.sum(axis=0)) - np.outer(coef.sum(axis=1), e_v) + coef.sum() * np.outer(e_u, e_v)
    return Move(t)


def averaged_pivot_form(m) -> Move:
    """Rebuild ``m`` by averaging its pivotal expansions over every pivot in ``{m > 0}``.

    Each pivot ``(u, v)`` contributes ``sum_{x,y} m[x,y] (e_x - e_u) (x) (e_y - e_v)``
    (all cells, including row ``u`` and column ``v``).
    """
    m = as_move(m)
    t = m.table
    pivots = m.plus_set
    if not pivots:
        return Move(np.zeros_like(t), check=False)
    total = t.sum()
    rows, cols = t.sum(axis=1), t.sum(axis=0)
    acc = np.zeros_like(t)
    for u, v in pivots:
        term = t.copy()
        term[u, :] -= cols
        term[:, v] -= rows
        term[u, v] += total
        acc += term
    return Move(acc / len(pivots))


# --------------------------------------------------------------------------
# moves acting on couplings


def max_step(m, gamma) -> float:
    """Largest ``alpha`` with ``gamma - alpha * m >= 0``; 0 when ``m`` is not admissible."""
    t = table_of(m)
    g = table_of(gamma)
    if t.shape != g.shape:
        raise DimensionMismatch(f"move shape {t.shape} vs coupling shape {g.shape}")
    pos = t > 0
    if not pos.any():
        return 0.0
    return float(np.min(g[pos] / t[pos]))


def is_admissible(m, gamma) -> bool:
    return max_step(m, gamma) > 0.0


def apply_move(gamma, m, alpha: float):
    """Return the coupling ``gamma - alpha * m`` (validated)."""
    g = table_of(gamma)
    new = g - alpha * table_of(m)
    new[(new < 0) & (new > -SUPPORT_TOL)] = 0.0
    mu = getattr(gamma, "row_margin", g.sum(axis=1))
    nu = getattr(gamma, "col_margin", g.sum(axis=0))
    return validate_coupling(new, mu, nu)


@dataclass(frozen=True, eq=False)
class DifferenceWitness:
    """Outcome of :func:`difference_criterion`; truthy when the bound holds."""

    holds: bool
    gamma: object = None
    gamma_bar: object = None

    def __bool__(self):
        return self.holds


def difference_criterion(m, mu, nu, tol: float = MARGIN_TOL) -> DifferenceWitness:
    """Decide whether ``m`` is the difference of two couplings of ``(mu, nu)``.

    When it is, the witnesses ``gamma - gamma_bar == m`` are built from the
    positive and negative parts of ``m`` plus a common North-West filler.
    """
    m = as_move(m)
    mu, nu = as_probability(mu), as_probability(nu)
    t = m.table
    if t.shape != (mu.n, nu.n):
        raise DimensionMismatch(f"move shape {t.shape} vs margins ({mu.n}, {nu.n})")
    absm = np.abs(t)
    if np.any(absm.sum(axis=1) > 2 * mu.values + tol) or np.any(absm.sum(axis=0) > 2 * nu.values + tol):
        return DifferenceWitness(False)
    plus = np.clip(t, 0, None)
    minus = np.clip(-t, 0, None)
    a = plus.sum(axis=1)
    b = plus.sum(axis=0)
    filler = north_west(np.clip(mu.values - a, 0, None), np.clip(nu.values - b, 0, None))
    gamma = validate_coupling(plus + filler, mu, nu)
    gamma_bar = validate_coupling(minus + filler, mu, nu)
    return DifferenceWitness(True, gamma, gamma_bar)


# --------------------------------------------------------------------------
# decomposition into simple moves


@dataclass(frozen=True, eq=False)
class CycleDecomposition:
    """``source = sum(alpha * F for alpha, F in terms)``."""

    source: Move
    terms: list = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.source.table)
        for alpha, f in self.terms:
            out += alpha * f.table
        return out

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)


def _shortest_alternating_cycle(t: np.ndarray, tol: float):
    """Shortest cycle (+ cell -> - cell in its row -> + cell in its column -> ...).

    Starts are tried in lexicographic order and neighbours are expanded in
    index order, so ties resolve to the lexicographically first cycle.
    """
    plus = t > tol
    minus = t < -tol
    best = None
    for s in zip(*np.nonzero(plus)):
        s = (int(s[0]), int(s[1]))
        parent = {s: None}
        queue = deque([s])
        found = None
        while queue and found is None:
            x, y = queue.popleft()
            if plus[x, y]:
                nbrs = [(x, int(c)) for c in np.flatnonzero(minus[x])]
            else:
                nbrs = [(int(r), y) for r in np.flatnonzero(plus[:, y])]
            for nb in nbrs:
                if nb == s:
                    found = (x, y)
                    break
                if nb not in parent:
                    parent[nb] = (x, y)
                    queue.append(nb)
        if found is None:
            continue
        path = []
        node = found
        while node is not None:
            path.append(node)
            node = parent[node]
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
            if len(best) == 4:
                break
    return best


def decompose_simple(m, tol: float | None = None) -> CycleDecomposition:
    """Write a move as a positive combination of simple moves.

    Each step removes the shortest alternating cycle of the remainder with the
    largest coefficient that keeps signs, which zeroes at least one cell.
    """
    m = as_move(m)
    if tol is None:
        tol = MOVE_TOL * max(1.0, float(np.abs(m.table).max(initial=0.0)))
    rem = np.array(m.table)
    rem[np.abs(rem) <= tol] = 0.0
    terms = []
    for _ in range(rem.size + 1):
        if not np.any(rem):
            break
        cycle = _shortest_alternating_cycle(rem, tol)
        if cycle is None:
            break
        f = np.zeros_like(rem)
        for k, (x, y) in enumerate(cycle):
            f[x, y] = 1.0 if k % 2 == 0 else -1.0
        alpha = min(abs(rem[x, y]) for x, y in cycle)
        rem = rem - alpha * f
        for x, y in cycle:
            if abs(rem[x, y]) <= tol:
                rem[x, y] = 0.0
        terms.append((float(alpha), SimpleMove(f)))
    return CycleDecomposition(m, terms)


# --------------------------------------------------------------------------
# simple moves and permutations


def simple_from_permutation(points, sigma, n: int) -> SimpleMove:
    """``sum_i e_{x_i} (x) e_{y_i} - sum_i e_{x_i} (x) e_{y_sigma(i)}``."""
    points = [(int(x), int(y)) for x, y in points]
    sigma = [int(s) for s in sigma]
    if len(set(points)) != len(points):
        raise NotSimple("points must be distinct")
    if sorted(sigma) != list(range(len(points))):
        raise ValueError(f"{sigma} is not a permutation of 0..{len(points) - 1}")
    t = np.zeros((n, n))
    for i, (x, y) in enumerate(points):
        t[x, y] += 1.0
        t[x, points[sigma[i]][1]] -= 1.0
    return SimpleMove(t)


def permutation_of_simple(f) -> tuple[list[tuple[int, int]], list[int]]:
    """Inverse of :func:`simple_from_permutation` for a canonical choice of sigma.

    ``points`` is ``{f = +1}`` in lexicographic order. Within every row the
    minus cells are paired in order with the plus cells of that row, and
    within every column likewise; sigma follows from the two pairings.
    """
    if not isinstance(f, SimpleMove):
        f = SimpleMove(table_of(f))
    points = f.plus_set
    minus = f.minus_set
    by_row: dict[int, list[int]] = {}
    by_col: dict[int, list[int]] = {}
    for i, (x, y) in enumerate(points):
        by_row.setdefault(x, []).append(i)
        by_col.setdefault(y, []).append(i)
    sigma = [0] * len(points)
    row_seen: dict[int, int] = {}
    col_seen: dict[int, int] = {}
    col_rank = {}
    for x, y in sorted(minus, key=lambda c: (c[1], c[0])):
        col_rank[(x, y)] = col_seen.get(y, 0)
        col_seen[y] = col_rank[(x, y)] + 1
    for x, y in minus:
        r = row_seen.get(x, 0)
        row_seen[x] = r + 1
        sigma[by_row[x][r]] = by_col[y][col_rank[(x, y)]]
    return points, sigma


def move_cost(f, c) -> float:
    """``sum_{f=+1} c - sum_{f=-1} c`` (for any move: ``sum(f * c)``)."""
    t = table_of(f)
    cm = np.asarray(getattr(c, "entries", c), dtype=np.float64)
    if t.shape != cm.shape:
        raise DimensionMismatch(f"move shape {t.shape} vs cost shape {cm.shape}")
    return float(np.sum(t * cm))


# --------------------------------------------------------------------------
# cyclical monotonicity


def _edge_mask(g, n: int | None) -> np.ndarray:
    if isinstance(g, SupportGraph):
        return np.asarray(g.mask, dtype=bool)
    arr = np.asarray(g) if not isinstance(g, (set, frozenset, list, tuple)) else None
    if arr is not None and arr.ndim == 2 and arr.shape[0] == arr.shape[1] and arr.dtype == bool:
        return arr
    if n is None:
        raise ValueError("n is required when the edge set is given as pairs")
    mask = np.zeros((n, n), dtype=bool)
    for x, y in g:
        mask[int(x), int(y)] = True
    return mask


def exchange_graph(mask: np.ndarray, c: np.ndarray):
    """Column graph of mass exchanges allowed by the edge set ``mask``.

    Arc ``y -> y2`` stands for moving row ``x``'s mass from column ``y`` to
    ``y2``, which is allowed when ``(x, y)`` is an edge; its weight is
    ``c[x, y2] - c[x, y]``. Parallel arcs are reduced to the cheapest one and
    ``rows[y, y2]`` records its row.
    """
    n = c.shape[0]
    w = np.full((n, n), np.inf)
    rows = np.full((n, n), -1, dtype=np.int64)
    for x in range(n):
        cols = np.flatnonzero(mask[x])
        if cols.size == 0:
            continue
        cand = c[x][None, :] - c[x, cols][:, None]
        better = cand < w[cols]
        sub_w = w[cols]
        sub_r = rows[cols]
        sub_w[better] = cand[better]
        sub_r[better] = x
        w[cols] = sub_w
        rows[cols] = sub_r
    np.fill_diagonal(w, np.inf)
    np.fill_diagonal(rows, -1)
    return w, rows


def _short_negative_cycle(w: np.ndarray, k_max: int, tol: float):
    """Negative cycle with at most ``k_max`` arcs, by min-plus powers of ``w``."""
    n = w.shape[0]
    power = w.copy()
    via = []
    for length in range(1, k_max + 1):
        diag = np.diag(power)
        if length >= 2 and np.any(diag < -tol):
            s = int(np.argmin(diag))
            walk = [s]
            end = s
            for step in reversed(via):
                end = int(step[s, end])
                walk.append(end)
            walk.reverse()
            # walk is a closed walk s -> ... -> s; peel off a negative simple cycle
            stack: list[int] = []
            for node in walk:
                if node in stack:
                    k = stack.index(node)
                    cyc = stack[k:]
                    weight = sum(w[cyc[t], cyc[(t + 1) % len(cyc)]] for t in range(len(cyc)))
                    if weight < -tol:
                        return cyc
                    del stack[k + 1:]
                else:
                    stack.append(node)
            return None
        if length == k_max:
            break
        cand = power[:, :, None] + w[None, :, :]
        via.append(np.argmin(cand, axis=1))
        power = np.min(cand, axis=1)
    return None


@dataclass(frozen=True, eq=False)
class MonotonicityVerdict:
    """``monotone`` is False exactly when ``witness`` (a positive-cost simple move) is set."""

    monotone: bool
    witness: SimpleMove | None = None
    gain: float = 0.0

    def __bool__(self):
        return self.monotone


def _cycle_to_move(cycle, rows, n: int) -> SimpleMove:
    f = np.zeros((n, n))
    k = len(cycle)
    for t in range(k):
        y, y2 = cycle[t], cycle[(t + 1) % k]
        x = rows[y, y2]
        f[x, y] += 1.0
        f[x, y2] -= 1.0
    return SimpleMove(f)


def is_cyclically_monotone(g, c, k_max: int | None = None, tol: float = CYCLE_TOL) -> MonotonicityVerdict:
    """Check that no simple move with ``{F > 0}`` inside ``g`` has positive cost.

    ``g`` is a :class:`SupportGraph`, a boolean mask or an iterable of
    ``(x, y)`` pairs. A violation is searched as a negative cycle of the
    exchange graph; ``k_max`` caps the number of exchanges (the default, and
    any value >= n, makes the search exhaustive).
    """
    cm = np.asarray(getattr(c, "entries", c), dtype=np.float64)
    n = cm.shape[0]
    mask = _edge_mask(g, n)
    if mask.shape != cm.shape:
        raise DimensionMismatch(f"edge mask shape {mask.shape} vs cost shape {cm.shape}")
    w, rows = exchange_graph(mask, cm)
    if k_max is None:
        k_max = n * n
    if k_max >= n:
        cycle = _kernels.negative_cycle(np.ascontiguousarray(w), tol)
    else:
        cycle = _short_negative_cycle(w, max(k_max, 2), tol)
    if cycle is None:
        return MonotonicityVerdict(True)
    f = _cycle_to_move(cycle, rows, n)
    return MonotonicityVerdict(False, f, move_cost(f, cm))


def improving_move(gamma, c, tol: float = CYCLE_TOL) -> SimpleMove | None:
    """An admissible simple move of positive cost for ``gamma``, if one exists."""
    verdict = is_cyclically_monotone(table_of(gamma) > SUPPORT_TOL, c, tol=tol)
    return verdict.witness


__all__ = [
    "BasicMove",
    "CycleDecomposition",
    "DifferenceWitness",
    "Move",
    "MonotonicityVerdict",
    "SimpleMove",
    "apply_move",
    "as_move",
    "averaged_pivot_form",
    "basic_moves",
    "decompose_simple",
    "difference_criterion",
    "exchange_graph",
    "express_in_basis",
    "improving_move",
    "is_admissible",
    "is_cyclically_monotone",
    "make_basic",
    "max_step",
    "move_cost",
    "permutation_of_simple",
    "pivotal_basis",
    "reconstruct_from_basis",
    "simple_from_permutation",
]
