"""Three-margin tables: maximal homophily and connectivity by three-way moves."""
from __future__ import annotations

from itertools import product

import numpy as np

from .errors import DimensionMismatch, NonConvergence, NotAMove
from .tables import (
    SUPPORT_TOL,
    Coupling3,
    as_probability,
    north_west,
    table_of,
    validate_coupling3,
)

T1 = "T1"
T2 = "T2"
COMPOSITE = "composite"

BOUND_TOL = 1e-12


class TriMove:
    """Integer ``n x n x n`` table with zero one-dimensional margins.

    ``cells`` maps ``(i, j, k)`` to a non-zero integer. ``kind`` is ``T1``
    when the two +1 cells of a four-cell move share an index, ``T2`` when
    they share none, and ``composite`` otherwise.
    """

    __slots__ = ("cells", "n", "kind")

    def __init__(self, cells: dict, n: int):
        clean = {tuple(int(a) for a in key): int(v) for key, v in cells.items() if int(v) != 0}
        for key in clean:
            if len(key) != 3 or not all(0 <= a < n for a in key):
                raise DimensionMismatch(f"cell {key} out of range for n={n}")
        self.cells = clean
        self.n = n
        for axis in range(3):
            tot = np.zeros(n, dtype=np.int64)
            for key, v in clean.items():
                tot[key[axis]] += v
            if np.any(tot):
                raise NotAMove(f"margin along axis {axis} is not zero")
        self.kind = self._classify()

    def _classify(self) -> str:
        plus = [c for c, v in self.cells.items() if v == 1]
        minus = [c for c, v in self.cells.items() if v == -1]
        if len(plus) == 2 and len(minus) == 2 and len(self.cells) == 4:
            shared = sum(a == b for a, b in zip(*plus))
            if shared == 0:
                return T2
            if shared == 1:
                return T1
        return COMPOSITE

    @property
    def table(self) -> np.ndarray:
        t = np.zeros((self.n,) * 3)
        for key, v in self.cells.items():
            t[key] = v
        return t

    def __neg__(self):
        return TriMove({k: -v for k, v in self.cells.items()}, self.n)

    def __add__(self, other):
        out = dict(self.cells)
        for k, v in other.cells.items():
            out[k] = out.get(k, 0) + v
        return TriMove(out, self.n)

    def __eq__(self, other):
        return isinstance(other, TriMove) and self.n == other.n and self.cells == other.cells

    def __hash__(self):
        return hash((self.n, frozenset(self.cells.items())))

    def __len__(self):
        return len(self.cells)

    def __repr__(self):
        return f"TriMove({self.kind}, {sorted(self.cells.items())})"

    def triplets(self):
        return [[*k, v] for k, v in sorted(self.cells.items())]


def trimove(plus, minus, n: int) -> TriMove:
    cells: dict = {}
    for c in plus:
        cells[tuple(c)] = cells.get(tuple(c), 0) + 1
    for c in minus:
        cells[tuple(c)] = cells.get(tuple(c), 0) - 1
    return TriMove(cells, n)


def t1_move(i, i2, j, j2, k, k2, n: int, second: str = "j") -> TriMove:
    """+1 at (i,j,k) and one of (i2,j,k2) / (i2,j2,k); the two -1 cells balance the margins.

    ``second="j"`` puts the second +1 at ``(i2, j, k2)`` (shared j index),
    ``second="k"`` at ``(i2, j2, k)`` (shared k index), ``second="i"`` at
    ``(i, j2, k2)`` (shared i index).
    """
    if second == "i":
        return trimove([(i, j, k), (i, j2, k2)], [(i, j2, k), (i, j, k2)], n)
    if second == "j":
        return trimove([(i, j, k), (i2, j, k2)], [(i2, j, k), (i, j, k2)], n)
    if second == "k":
        return trimove([(i, j, k), (i2, j2, k)], [(i2, j, k), (i, j2, k)], n)
    raise ValueError(f"second must be 'i', 'j' or 'k', got {second!r}")


def t2_move(i, i2, j, j2, k, k2, n: int, split: int = 0) -> TriMove:
    """+1 at (i,j,k), (i2,j2,k2); ``split`` picks which coordinate the -1 pair exchanges."""
    minus = [
        [(i, j2, k2), (i2, j, k)],
        [(i2, j, k2), (i, j2, k)],
        [(i2, j2, k), (i, j, k2)],
    ][split]
    return trimove([(i, j, k), (i2, j2, k2)], minus, n)


def homophily3(mu, nu, zeta, method: str = "recursion") -> Coupling3:
    """Three-way table of maximal homophily.

    ``method="recursion"`` fills cells in lexicographic order, each taking
    the least of what its three lines still allow. ``method="lifting"``
    flattens the bivariate homophily coupling of ``mu`` and ``nu`` row by
    row and couples it with ``zeta`` by the North-West rule.
    """
    margins = [as_probability(m) for m in (mu, nu, zeta)]
    if len({m.n for m in margins}) != 1:
        raise DimensionMismatch("margins have different lengths")
    a, b, c = (m.values for m in margins)
    n = a.size
    if method == "lifting":
        flat = north_west(a, b).ravel()
        t = north_west(flat, c).reshape(n, n, n)
    elif method == "recursion":
        t = np.zeros((n, n, n))
        used = [np.zeros(n) for _ in range(3)]
        floor = 8 * np.finfo(float).eps
        for i, j, k in product(range(n), repeat=3):
            v = min(a[i] - used[0][i], b[j] - used[1][j], c[k] - used[2][k])
            if v <= floor:
                continue
            t[i, j, k] = v
            used[0][i] += v
            used[1][j] += v
            used[2][k] += v
    else:
        raise ValueError(f"unknown method {method!r}")
    return validate_coupling3(t, *margins)


def homophily3_bounds(table) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Residual masses before each cell, along the three lines through it."""
    t = table_of(table)
    n = t.shape[0]
    a, b, c = t.sum(axis=(1, 2)), t.sum(axis=(0, 2)), t.sum(axis=(0, 1))
    # predecessors in lexicographic order of the two free indices
    row = np.cumsum(t.reshape(n, -1), axis=1).reshape(t.shape) - t
    col = np.cumsum(t.transpose(1, 0, 2).reshape(n, -1), axis=1).reshape(n, n, n).transpose(1, 0, 2) - t
    dep = np.cumsum(t.transpose(2, 0, 1).reshape(n, -1), axis=1).reshape(n, n, n).transpose(1, 2, 0) - t
    return a[:, None, None] - row, b[None, :, None] - col, c[None, None, :] - dep


def _successor(mask2d: np.ndarray, after: tuple[int, int]):
    """First positive cell of a 2-d slice strictly after ``after`` in row-major order."""
    flat = np.flatnonzero(mask2d.ravel())
    start = after[0] * mask2d.shape[1] + after[1]
    idx = flat[flat > start]
    if idx.size == 0:
        return None
    return divmod(int(idx[0]), mask2d.shape[1])


def _apply(t: np.ndarray, move: TriMove, alpha: float) -> np.ndarray:
    new = t.copy()
    scale = max(1.0, float(t.max(initial=0.0)))
    for key, v in move.cells.items():
        new[key] -= alpha * v
        if v > 0 and abs(new[key]) <= SUPPORT_TOL * scale:
            new[key] = 0.0
    return new


def path_to_homophily3(gamma, max_steps: int | None = None) -> list[tuple[TriMove, float]]:
    """Three-way moves from ``gamma`` to :func:`homophily3` of its margins.

    At a cell below its bound, witnesses are the first positive cells after
    it along its row slice ``(i, ., .)``, its column slice ``(., j, .)`` and
    its depth slice ``(., ., k)``. The six-cell move they define is applied
    with the largest step keeping the table non-negative, emitted as one
    move when it has at most four cells and as its two four-cell parts
    otherwise (the part whose donors are all witnesses goes first).
    """
    t = np.array(table_of(gamma))
    if t.ndim != 3 or len(set(t.shape)) != 1:
        raise DimensionMismatch(f"expected an n x n x n table, got {t.shape}")
    n = t.shape[0]
    margins = (t.sum(axis=(1, 2)), t.sum(axis=(0, 2)), t.sum(axis=(0, 1)))
    if max_steps is None:
        max_steps = 8 * n**5 + 16
    pos = lambda arr: arr > SUPPORT_TOL  # noqa: E731
    out = []
    a, b, c = margins
    for i, j, k in product(range(n), repeat=3):
        while True:
            ra = a[i] - t[i].ravel()[: j * n + k].sum()
            rb = b[j] - t[:, j, :].ravel()[: i * n + k].sum()
            rc = c[k] - t[:, :, k].ravel()[: i * n + j].sum()
            if not t[i, j, k] < min(ra, rb, rc) - BOUND_TOL:
                break
            w1 = _successor(pos(t[i]), (j, k))
            w2 = _successor(pos(t[:, j, :]), (i, k))
            w3 = _successor(pos(t[:, :, k]), (i, j))
            if w1 is None or w2 is None or w3 is None:
                break
            (j1, k1), (i2, k2), (i3, j3) = w1, w2, w3
            m1 = trimove([(i, j1, k1), (i2, j, k)], [(i, j, k), (i2, j1, k1)], n)
            m2 = trimove([(i2, j, k2), (i3, j3, k)], [(i2, j, k), (i3, j3, k2)], n)
            net = m1 + m2
            alpha = float(min(t[key] / v for key, v in net.cells.items() if v > 0))
            parts = [net] if len(net) <= 4 else [m2, m1]
            for part in parts:
                out.append((part, alpha))
                t = _apply(t, part, alpha)
            if len(out) > max_steps:
                raise NonConvergence(f"no convergence within {max_steps} moves")
    return out


def apply_path3(gamma, path) -> np.ndarray:
    """Replay a path; returns the final table."""
    t = np.array(table_of(gamma))
    for move, alpha in path:
        t = _apply(t, move, alpha)
    return t


def path_tables3(gamma, path):
    """Yield the start table and every intermediate table of ``path``."""
    t = np.array(table_of(gamma))
    yield t.copy()
    for move, alpha in path:
        t = _apply(t, move, alpha)
        yield t.copy()


__all__ = [
    "COMPOSITE",
    "T1",
    "T2",
    "TriMove",
    "apply_path3",
    "homophily3",
    "homophily3_bounds",
    "path_tables3",
    "path_to_homophily3",
    "t1_move",
    "t2_move",
    "trimove",
]
