"""Co-graduation, the maximal-homophily coupling and basic-move paths to it."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MarginMismatch, NonConvergence
from .moves import BasicMove
from .tables import (
    MARGIN_TOL,
    SUPPORT_TOL,
    Coupling,
    as_probability,
    north_west,
    table_of,
    validate_coupling,
)

#: absolute slack when testing whether a cell sits below its recursion bound
BOUND_TOL = 1e-12


@dataclass(frozen=True)
class BivariateSample:
    """Paired observations ``(x_i, y_i)``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64).ravel()
        y = np.array(self.y, dtype=np.float64).ravel()
        if x.size == 0 or x.size != y.size:
            raise DimensionMismatch(f"need two equally long non-empty sequences, got {x.size} and {y.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    @classmethod
    def from_counts(cls, row_counts, col_counts, values=None) -> "BivariateSample":
        """Co-graduated sample with the given marginal counts.

        Category ``k`` takes the value ``values[k]`` (default ``k + 1``).
        """
        rc = np.asarray(row_counts, dtype=np.int64)
        cc = np.asarray(col_counts, dtype=np.int64)
        if rc.sum() != cc.sum():
            raise MarginMismatch(0, 0, float(rc.sum() - cc.sum()))
        vals = np.arange(1, max(rc.size, cc.size) + 1, dtype=np.float64) if values is None else np.asarray(values, float)
        return cls(np.repeat(vals[: rc.size], rc), np.repeat(vals[: cc.size], cc))


def cograduation_index(sample) -> tuple[float, float]:
    """``(M_min, M_max)``: total absolute difference after co- and counter-graduation."""
    if not isinstance(sample, BivariateSample):
        sample = BivariateSample(*sample)
    xs = np.sort(sample.x)
    ys = np.sort(sample.y)
    return float(np.abs(xs - ys).sum()), float(np.abs(xs - ys[::-1]).sum())


def homophily_coupling(mu, nu) -> Coupling:
    """North-West coupling: each cell in row-major order takes all the mass its row and column still allow."""
    mu, nu = as_probability(mu), as_probability(nu)
    if mu.n != nu.n:
        raise DimensionMismatch(f"margins have lengths {mu.n} and {nu.n}")
    return validate_coupling(north_west(mu.values, nu.values), mu, nu)


def homophily_bounds(table, mu, nu) -> np.ndarray:
    """Cell-wise right-hand side of the lexicographic recursion, evaluated on ``table``."""
    t = table_of(table)
    mu, nu = as_probability(mu), as_probability(nu)
    row_before = np.cumsum(t, axis=1) - t
    col_before = np.cumsum(t, axis=0) - t
    return np.minimum(mu.values[:, None] - row_before, nu.values[None, :] - col_before)


def is_homophily(table, mu, nu, tol: float = BOUND_TOL) -> bool:
    """True when every cell equals its recursion bound."""
    return bool(np.all(np.abs(table_of(table) - homophily_bounds(table, mu, nu)) <= tol))


def _step(t: np.ndarray, move: BasicMove, alpha: float) -> np.ndarray:
    new = t - alpha * move.table
    # cells drained to (numerically) nothing become exact zeros
    donors = move.table > 0
    scale = max(1.0, float(t.max(initial=0.0)))
    new[donors & (np.abs(new) <= SUPPORT_TOL * scale)] = 0.0
    return new


@dataclass(frozen=True, eq=False)
class MovePath:
    """``end = start - sum(alpha_k * M_k)`` with every prefix in the polytope."""

    start: Coupling
    steps: list = field(default_factory=list)
    end: Coupling | None = None

    def __len__(self):
        return len(self.steps)

    def tables(self):
        """Yield the start table and the table after each step."""
        t = np.array(self.start.table)
        yield t.copy()
        for move, alpha in self.steps:
            t = _step(t, move, alpha)
            yield t.copy()

    def prefixes(self, tol: float = MARGIN_TOL):
        """Yield every intermediate state as a validated :class:`Coupling`."""
        mu, nu = self.start.row_margin, self.start.col_margin
        for t in self.tables():
            yield validate_coupling(t, mu, nu, tol)

    def to_json(self) -> dict:
        return {
            "start": self.start.table.tolist(),
            "steps": [{"move": list(m.indices), "alpha": float(a)} for m, a in self.steps],
            "end": None if self.end is None else self.end.table.tolist(),
        }


def _first_positive(v: np.ndarray, start: int) -> int:
    idx = np.flatnonzero(v[start:] > SUPPORT_TOL)
    return -1 if idx.size == 0 else int(start + idx[0])


def path_to_homophily(gamma, max_steps: int | None = None) -> MovePath:
    """Basic moves leading from ``gamma`` to the homophily coupling of its margins.

    Cells are scanned row by row. While ``gamma[i, j]`` is below its bound
    the move with +1 at ``(i, j1)``, ``(i1, j)`` and -1 at ``(i, j)``,
    ``(i1, j1)`` is applied, taking the first positive ``i1 > i`` in column
    ``j`` and the first positive ``j1 > j`` in row ``i``.
    """
    if not isinstance(gamma, Coupling):
        gamma = Coupling.from_table(gamma)
    mu, nu = gamma.row_margin, gamma.col_margin
    n = gamma.n
    if max_steps is None:
        max_steps = 4 * n**3 + 16
    t = np.array(gamma.table)
    steps = []
    for i in range(n):
        for j in range(n):
            while True:
                bound = min(mu.values[i] - t[i, :j].sum(), nu.values[j] - t[:i, j].sum())
                if not t[i, j] < bound - BOUND_TOL:
                    break
                i1 = _first_positive(t[:, j], i + 1)
                j1 = _first_positive(t[i, :], j + 1)
                if i1 < 0 or j1 < 0:
                    break
                move = BasicMove(i, i1, j1, j, n)
                alpha = float(min(t[i, j1], t[i1, j]))
                steps.append((move, alpha))
                t = _step(t, move, alpha)
                if len(steps) > max_steps:
                    raise NonConvergence(f"path did not reach the homophily coupling within {max_steps} moves")
    end = validate_coupling(t, mu, nu)
    return MovePath(gamma, steps, end)


def connect(gamma, gamma_tilde, tol: float = MARGIN_TOL) -> MovePath:
    """Basic-move path from ``gamma`` to ``gamma_tilde`` through the homophily coupling."""
    if not isinstance(gamma, Coupling):
        gamma = Coupling.from_table(gamma)
    if not isinstance(gamma_tilde, Coupling):
        gamma_tilde = Coupling.from_table(gamma_tilde)
    if gamma.n != gamma_tilde.n:
        raise DimensionMismatch(f"tables have sizes {gamma.n} and {gamma_tilde.n}")
    for axis, (a, b) in enumerate(((gamma.row_margin, gamma_tilde.row_margin), (gamma.col_margin, gamma_tilde.col_margin))):
        residual = np.abs(a.values - b.values)
        worst = int(np.argmax(residual))
        if residual[worst] > tol:
            raise MarginMismatch(axis, worst, float(residual[worst]))
    there = path_to_homophily(gamma)
    back = path_to_homophily(gamma_tilde)
    steps = list(there.steps) + [(-m, a) for m, a in reversed(back.steps)]
    t = np.array(gamma.table)
    for m, a in steps:
        t = _step(t, m, a)
    end = validate_coupling(t, gamma.row_margin, gamma.col_margin)
    return MovePath(gamma, steps, end)


__all__ = [
    "BivariateSample",
    "MovePath",
    "cograduation_index",
    "connect",
    "homophily_bounds",
    "homophily_coupling",
    "is_homophily",
    "path_to_homophily",
]
