"""Simulated annealing over the coupling polytope with basic-move proposals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import DimensionMismatch, ValidationError
from ..tables import (
    Coupling,
    as_cost,
    as_probability,
    cost_of,
    metric_violation,
    validate_coupling,
)
from ..transport import fill_diagonal

#: random draws are generated and consumed this many steps at a time
CHUNK = 10_000


@dataclass(frozen=True)
class Schedule:
    """Temperature after ``b`` steps: ``tau0 * rho**b``, ``tau0 / b`` or ``tau0 / log(1 + b)``."""

    kind: str = "geometric"
    rho: float = 0.95

    def __post_init__(self):
        if self.kind not in ("geometric", "harmonic", "logarithmic"):
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "geometric" and not 0.0 < self.rho < 1.0:
            raise ValidationError(f"geometric ratio must lie in (0, 1), got {self.rho}")

    def temperatures(self, tau0: float, start: int, stop: int) -> np.ndarray:
        """Temperatures in force at steps ``start + 1 .. stop`` (step 1 runs at ``tau0``)."""
        b = np.arange(start, stop, dtype=np.float64)
        out = np.empty(b.size)
        first = b == 0
        rest = ~first
        out[first] = tau0
        if self.kind == "geometric":
            out[rest] = tau0 * np.power(self.rho, b[rest])
        elif self.kind == "harmonic":
            out[rest] = tau0 / b[rest]
        else:
            out[rest] = tau0 / np.log1p(b[rest])
        return out

    @classmethod
    def named(cls, name: str) -> "Schedule":
        """``geom95``, ``geom99``, ``harmonic`` or ``log``."""
        table = {
            "geom95": cls("geometric", 0.95),
            "geom99": cls("geometric", 0.99),
            "harmonic": cls("harmonic"),
            "log": cls("logarithmic"),
        }
        try:
            return table[name]
        except KeyError:
            raise ValidationError(f"unknown schedule {name!r}; choose from {sorted(table)}") from None

    def to_json(self) -> dict:
        return {"kind": self.kind, "rho": self.rho} if self.kind == "geometric" else {"kind": self.kind}


@dataclass(frozen=True)
class AnnealConfig:
    tau0: float = 1e-2
    steps: int = 10_000
    schedule: Schedule = field(default_factory=Schedule)
    seed: int = 0
    final_fill: bool = True
    keep_trace: bool = True

    def __post_init__(self):
        if not (self.tau0 > 0 and math.isfinite(self.tau0)):
            raise ValidationError(f"tau0 must be positive, got {self.tau0}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"steps must be a positive integer, got {self.steps}")
        if isinstance(self.schedule, str):
            object.__setattr__(self, "schedule", Schedule.named(self.schedule))
        elif isinstance(self.schedule, dict):
            object.__setattr__(self, "schedule", Schedule(**self.schedule))

    @classmethod
    def from_json(cls, obj: dict) -> "AnnealConfig":
        known = {"tau0", "B", "steps", "schedule", "seed", "final_fill"}
        extra = set(obj) - known
        if extra:
            raise ValidationError(f"unknown config fields: {sorted(extra)}")
        kw = {}
        if "tau0" in obj:
            kw["tau0"] = float(obj["tau0"])
        if "B" in obj or "steps" in obj:
            kw["steps"] = int(obj.get("B", obj.get("steps")))
        if "schedule" in obj:
            kw["schedule"] = obj["schedule"]
        if "seed" in obj:
            kw["seed"] = int(obj["seed"])
        if "final_fill" in obj:
            kw["final_fill"] = bool(obj["final_fill"])
        return cls(**kw)

    def to_json(self) -> dict:
        return {"B": self.steps, "schedule": self.schedule.to_json(), "seed": self.seed, "tau0": self.tau0}


@dataclass(frozen=True, eq=False)
class AnnealReport:
    coupling: Coupling
    cost: float
    chain_cost: float
    best_cost: float
    accepted: int
    proposals: int
    admissible: int
    fill_gain: float
    cost_trace: np.ndarray | None = field(default=None, repr=False)
    status: np.ndarray | None = field(default=None, repr=False)
    backend: str = ""

    def to_json(self) -> dict:
        return {
            "accepted": self.accepted,
            "admissible": self.admissible,
            "best_cost": self.best_cost,
            "chain_cost": self.chain_cost,
            "cost": self.cost,
            "coupling": self.coupling.table.tolist(),
            "proposals": self.proposals,
        }


def draw_chunk(rng: np.random.Generator, n: int, size: int):
    """Index pairs and uniforms for ``size`` steps.

    ``(i1, i2)`` and ``(j1, j2)`` are uniform ordered pairs of distinct
    indices, so each unordered pair and each orientation is equally likely.
    ``ufrac`` lies in ``(0, 1]``.
    """
    i1 = rng.integers(0, n, size)
    i2 = (i1 + rng.integers(1, n, size)) % n
    j1 = rng.integers(0, n, size)
    j2 = (j1 + rng.integers(1, n, size)) % n
    ufrac = 1.0 - rng.random(size)
    vdraw = rng.random(size)
    as_idx = lambda a: np.ascontiguousarray(a, dtype=np.int64)  # noqa: E731
    return as_idx(i1), as_idx(i2), as_idx(j1), as_idx(j2), ufrac, vdraw


def _resync(table: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> None:
    """Undo rounding drift of the margins by one proportional-fitting sweep."""
    rows = table.sum(axis=1)
    ok = rows > 0
    table[ok] *= (mu[ok] / rows[ok])[:, None]
    cols = table.sum(axis=0)
    ok = cols > 0
    table[:, ok] *= nu[ok] / cols[ok]


def run_chain(table, cost, cfg: AnnealConfig, rng: np.random.Generator, mu=None, nu=None, kernels=None):
    """Advance the chain ``cfg.steps`` steps in place.

    Returns ``(accepted, admissible, costs, status)``; ``costs`` and
    ``status`` hold the per-step cost and kernel status code (0 inadmissible,
    1 accepted, 2 rejected), or None unless ``cfg.keep_trace``.
    """
    k = kernels or _kernels
    n = table.shape[0]
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    current = float(np.sum(table * cost))
    accepted = admissible = 0
    costs = np.empty(cfg.steps) if cfg.keep_trace else None
    flags = np.empty(cfg.steps, dtype=np.uint8) if cfg.keep_trace else None
    done = 0
    while done < cfg.steps:
        size = min(CHUNK, cfg.steps - done)
        i1, i2, j1, j2, ufrac, vdraw = draw_chunk(rng, n, size)
        temps = cfg.schedule.temperatures(cfg.tau0, done, done + size)
        c_out = np.empty(size)
        a_out = np.empty(size, dtype=np.uint8)
        _, nacc = k.sa_chain(table, cost, i1, i2, j1, j2, ufrac, vdraw, temps, current, c_out, a_out)
        accepted += int(nacc)
        admissible += int(np.count_nonzero(a_out))
        if mu is not None:
            _resync(table, mu, nu)
        current = float(np.sum(table * cost))
        if costs is not None:
            costs[done:done + size] = c_out
            flags[done:done + size] = a_out
        done += size
    return accepted, admissible, costs, flags


def anneal(mu, nu, cfg: AnnealConfig, cost=None, kernels=None) -> AnnealReport:
    """Run the annealing chain from the independence coupling.

    ``cost`` defaults to ``sqrt(|i - j|)``. When the cost is a metric and
    ``cfg.final_fill`` is set, the chain's end state is post-processed by
    the monotone diagonal-filling sweep.
    """
    from ..tables import CostMatrix

    mu, nu = as_probability(mu), as_probability(nu)
    cm = CostMatrix.sqrt_distance(mu.n) if cost is None else as_cost(cost)
    if not mu.n == nu.n == cm.n:
        raise DimensionMismatch(f"margin lengths {mu.n}, {nu.n} vs cost size {cm.n}")
    rng = np.random.default_rng(cfg.seed)
    table = np.ascontiguousarray(np.outer(mu.values, nu.values))
    start_cost = cost_of(table, cm)
    accepted, admissible, costs, status = run_chain(table, cm.entries, cfg, rng, mu.values, nu.values, kernels)
    chain = validate_coupling(table, mu, nu)
    chain_cost = cost_of(chain, cm)
    best = min(start_cost, chain_cost) if costs is None else min(start_cost, float(costs.min()))
    final = chain
    if cfg.final_fill and metric_violation(cm.entries) is None:
        final = fill_diagonal(chain, cm, patterns="monotone")
    final_cost = cost_of(final, cm)
    k = kernels or _kernels
    return AnnealReport(
        coupling=final,
        cost=final_cost,
        chain_cost=chain_cost,
        best_cost=min(best, final_cost),
        accepted=accepted,
        proposals=cfg.steps,
        admissible=admissible,
        fill_gain=chain_cost - final_cost,
        cost_trace=costs,
        status=status,
        backend=getattr(k, "BACKEND", getattr(k, "__name__", "").rsplit(".", 1)[-1]),
    )
