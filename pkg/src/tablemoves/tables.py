"""Margins, cost matrices, couplings and their support graphs.

All value types are immutable: arrays are copied on construction and marked
read-only, so they can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    MarginMismatch,
    NegativeEntry,
    NotAProbability,
    NotMetric,
)

#: margins whose total is off by at most this much are rescaled to sum to one
NORMALIZATION_SLACK = 1e-3
#: tolerance on margin residuals of a coupling
MARGIN_TOL = 1e-9
#: cells at or below this mass are not part of the support
SUPPORT_TOL = 1e-12
#: tolerance for the metric axioms
METRIC_TOL = 1e-12


def _frozen(a, ndim=None) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """A non-negative vector summing to one.

    A total within ``NORMALIZATION_SLACK`` of one is rescaled, so that data
    printed with four decimals (summing to e.g. 1.0001) is accepted.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 1 or v.size == 0:
            raise DimensionMismatch(f"a margin must be a non-empty vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NotAProbability("margin has non-finite entries")
        if np.any(v < 0):
            i = int(np.argmin(v))
            raise NegativeEntry((i,), float(v[i]))
        s = float(v.sum())
        if abs(s - 1.0) > NORMALIZATION_SLACK:
            raise NotAProbability(f"margin sums to {s!r}, too far from 1 to renormalize")
        if abs(s - 1.0) > SUPPORT_TOL:
            v = v / s
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __repr__(self):
        return f"ProbabilityVector({np.array2string(self.values, precision=6)})"


def as_probability(x) -> ProbabilityVector:
    return x if isinstance(x, ProbabilityVector) else ProbabilityVector(x)


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Square non-negative cost matrix, optionally certified to be a metric."""

    entries: np.ndarray
    metric: bool | None = None

    def __post_init__(self):
        c = _frozen(self.entries, ndim=2)
        if c.shape[0] != c.shape[1]:
            raise DimensionMismatch(f"cost matrix must be square, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("cost matrix has non-finite entries")
        if np.any(c < 0):
            idx = np.unravel_index(np.argmin(c), c.shape)
            raise NegativeEntry(tuple(int(i) for i in idx), float(c[idx]))
        object.__setattr__(self, "entries", c)
        if self.metric:
            problem = metric_violation(c)
            if problem is not None:
                raise NotMetric(problem)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def is_metric(self, tol: float = METRIC_TOL) -> bool:
        return metric_violation(self.entries, tol) is None

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @classmethod
    def line(cls, n: int, power: float = 1.0) -> "CostMatrix":
        """``|i - j| ** power`` on ``{0, ..., n-1}``; a metric for ``0 < power <= 1``."""
        i = np.arange(n, dtype=np.float64)
        c = np.abs(i[:, None] - i[None, :]) ** power
        return cls(c, metric=True if 0 < power <= 1 else None)

    @classmethod
    def euclidean(cls, n: int) -> "CostMatrix":
        return cls.line(n, 1.0)

    @classmethod
    def sqrt_distance(cls, n: int) -> "CostMatrix":
        return cls.line(n, 0.5)


def metric_violation(c, tol: float = METRIC_TOL) -> str | None:
    """Describe the first failed metric axiom of ``c``, or return None."""
    c = np.asarray(c, dtype=np.float64)
    if np.any(np.abs(np.diag(c)) > tol):
        i = int(np.argmax(np.abs(np.diag(c))))
        return f"non-zero diagonal at {i}"
    asym = np.abs(c - c.T)
    if np.any(asym > tol):
        i, j = np.unravel_index(np.argmax(asym), c.shape)
        return f"asymmetric at ({i}, {j})"
    # slack[x, z, y] = c[x, z] + c[z, y] - c[x, y]
    slack = c[:, :, None] + c[None, :, :] - c[:, None, :]
    if np.any(slack < -tol):
        x, z, y = np.unravel_index(np.argmin(slack), slack.shape)
        return f"triangle inequality fails: c[{x},{y}] > c[{x},{z}] + c[{z},{y}]"
    return None


def as_cost(c) -> CostMatrix:
    return c if isinstance(c, CostMatrix) else CostMatrix(c)


@dataclass(frozen=True, eq=False)
class Coupling:
    """A joint table with prescribed row and column margins.

    Build instances with :func:`validate_coupling` unless the table is known
    to be valid.
    """

    table: np.ndarray
    row_margin: ProbabilityVector
    col_margin: ProbabilityVector

    def __post_init__(self):
        object.__setattr__(self, "table", _frozen(self.table, ndim=2))

    @property
    def n(self) -> int:
        return self.table.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.table if dtype is None else self.table.astype(dtype)

    @classmethod
    def from_table(cls, table, tol: float = MARGIN_TOL) -> "Coupling":
        """Validate ``table`` against its own row and column sums."""
        t = np.asarray(table, dtype=np.float64)
        return validate_coupling(t, t.sum(axis=1), t.sum(axis=0), tol=tol)


@dataclass(frozen=True, eq=False)
class Coupling3:
    """A three-way table with three prescribed one-dimensional margins."""

    table: np.ndarray
    margins: tuple

    def __post_init__(self):
        object.__setattr__(self, "table", _frozen(self.table, ndim=3))

    @property
    def n(self) -> int:
        return self.table.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.table if dtype is None else self.table.astype(dtype)


@dataclass(frozen=True, eq=False)
class SupportGraph:
    """Directed graph on ``{0, ..., n-1}`` with an arc x -> y for each positive cell."""

    n: int
    mask: np.ndarray = field(repr=False)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(self.mask))]

    def __len__(self):
        return int(self.mask.sum())

    def __contains__(self, edge):
        x, y = edge
        return bool(self.mask[x, y])


class Component(NamedTuple):
    vertices: tuple[int, ...]
    mu_mass: float
    nu_mass: float


def table_of(x) -> np.ndarray:
    """Return the float array behind a coupling, move or raw array."""
    t = getattr(x, "table", x)
    return np.asarray(t, dtype=np.float64)


def north_west(row, col) -> np.ndarray:
    """Fill a table with the given (unnormalized) margins by the North-West rule.

    Each cell, scanned row by row, takes the largest mass still allowed by
    its row and column. ``row`` and ``col`` must have equal totals.
    """
    row = np.asarray(row, dtype=np.float64)
    col = np.asarray(col, dtype=np.float64)
    out = np.zeros((row.size, col.size))
    floor = 8 * np.finfo(float).eps * max(float(row.max(initial=0)), float(col.max(initial=0)), 1.0)
    row_used = np.zeros(row.size)
    col_used = np.zeros(col.size)
    for i in range(row.size):
        for j in range(col.size):
            v = min(row[i] - row_used[i], col[j] - col_used[j])
            if v <= floor:
                continue
            out[i, j] = v
            row_used[i] += v
            col_used[j] += v
    return out


def validate_coupling(table, mu, nu, tol: float = MARGIN_TOL) -> Coupling:
    mu, nu = as_probability(mu), as_probability(nu)
    t = np.asarray(table, dtype=np.float64)
    if t.ndim != 2 or t.shape != (mu.n, nu.n):
        raise DimensionMismatch(f"table shape {t.shape} does not match margins ({mu.n}, {nu.n})")
    if not np.all(np.isfinite(t)):
        raise ValueError("table has non-finite entries")
    if np.any(t < 0):
        idx = np.unravel_index(np.argmin(t), t.shape)
        raise NegativeEntry(tuple(int(i) for i in idx), float(t[idx]))
    for axis, margin in ((0, mu), (1, nu)):
        residual = np.abs(t.sum(axis=1 - axis) - margin.values)
        worst = int(np.argmax(residual))
        if residual[worst] > tol:
            raise MarginMismatch(axis, worst, float(residual[worst]))
    return Coupling(t, mu, nu)


def validate_coupling3(table, mu, nu, zeta, tol: float = MARGIN_TOL) -> Coupling3:
    margins = tuple(as_probability(m) for m in (mu, nu, zeta))
    t = np.asarray(table, dtype=np.float64)
    if t.ndim != 3 or t.shape != tuple(m.n for m in margins):
        raise DimensionMismatch(f"table shape {t.shape} does not match the margins")
    if np.any(t < 0):
        idx = np.unravel_index(np.argmin(t), t.shape)
        raise NegativeEntry(tuple(int(i) for i in idx), float(t[idx]))
    for axis, margin in enumerate(margins):
        other = tuple(a for a in range(3) if a != axis)
        residual = np.abs(t.sum(axis=other) - margin.values)
        worst = int(np.argmax(residual))
        if residual[worst] > tol:
            raise MarginMismatch(axis, worst, float(residual[worst]))
    return Coupling3(t, margins)


def product_coupling(mu, nu) -> Coupling:
    mu, nu = as_probability(mu), as_probability(nu)
    if mu.n != nu.n:
        raise DimensionMismatch(f"margins have lengths {mu.n} and {nu.n}")
    return Coupling(np.outer(mu.values, nu.values), mu, nu)


def product_coupling3(mu, nu, zeta) -> Coupling3:
    margins = tuple(as_probability(m) for m in (mu, nu, zeta))
    if len({m.n for m in margins}) != 1:
        raise DimensionMismatch("margins have different lengths")
    a, b, c = (m.values for m in margins)
    return Coupling3(np.einsum("i,j,k->ijk", a, b, c), margins)


def cost_of(gamma, c) -> float:
    t = table_of(gamma)
    cm = np.asarray(getattr(c, "entries", c), dtype=np.float64)
    if t.shape != cm.shape:
        raise DimensionMismatch(f"table shape {t.shape} vs cost shape {cm.shape}")
    return float(np.sum(cm * t))


def support(gamma, tol: float = SUPPORT_TOL) -> SupportGraph:
    t = table_of(gamma)
    mask = t > tol
    mask.setflags(write=False)
    return SupportGraph(t.shape[0], mask)


def support_components(gamma, tol: float = SUPPORT_TOL) -> list[Component]:
    """Weakly connected components of the support graph with their masses.

    Rows and columns are the same point set, so the arc x -> y joins x and y.
    """
    t = table_of(gamma)
    g = support(t, tol)
    count, labels = connected_components(csr_matrix(g.mask), directed=True, connection="weak")
    rows, cols = t.sum(axis=1), t.sum(axis=0)
    out = []
    for k in range(count):
        verts = np.flatnonzero(labels == k)
        out.append(Component(tuple(int(v) for v in verts), float(rows[verts].sum()), float(cols[verts].sum())))
    out.sort(key=lambda comp: comp.vertices)
    return out


def vertex_support_check(gamma, tol: float = SUPPORT_TOL) -> bool:
    """True when the support is small enough for a polytope vertex (at most 2n - 1 arcs)."""
    g = support(gamma, tol)
    return len(g) <= 2 * g.n - 1
