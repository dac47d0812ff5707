"""Replicated experiments: first-move acceptance and late-chain acceptance rates."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..tables import CostMatrix
from .chain import AnnealConfig, Schedule, draw_chunk, run_chain


@dataclass(frozen=True)
class ExperimentSpec:
    """Grid and sampling parameters of an experiment.

    Margins have i.i.d. uniform(0, 1) entries, normalized. ``tau0_by_n``
    fixes the initial temperature of each size for the acceptance-profile
    experiment; sizes without an entry get it from :func:`select_tau0`.
    """

    ns: tuple = (4, 10, 20)
    tau0_grid: tuple = tuple(10.0 ** (k / 10) for k in range(-26, 1, 2))
    B_grid: tuple = (10, 100, 1000, 10_000, 100_000)
    replicates: int = 1000
    window: int = 100
    seed: int = 20240101
    schedule: Schedule = field(default_factory=Schedule)
    tau0_by_n: dict = field(default_factory=dict)
    threshold: float = 0.95
    workers: int = 1

    def __post_init__(self):
        for name in ("ns", "tau0_grid", "B_grid"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValidationError(f"{name} must not be empty")
            object.__setattr__(self, name, vals)
        if self.replicates < 1:
            raise ValidationError("replicates must be at least 1")
        if self.window < 1:
            raise ValidationError("window must be at least 1")
        if any(n < 2 for n in self.ns):
            raise ValidationError("sizes must be at least 2")
        if isinstance(self.schedule, str):
            object.__setattr__(self, "schedule", Schedule.named(self.schedule))


def sample_margins(rng: np.random.Generator, n: int, size: int | None = None):
    """Two margins (or two stacks of ``size`` margins) with normalized uniform entries."""
    shape = (n,) if size is None else (size, n)
    mu = rng.random(shape)
    nu = rng.random(shape)
    return mu / mu.sum(axis=-1, keepdims=True), nu / nu.sum(axis=-1, keepdims=True)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def first_move_acceptance_cell(n: int, tau0: float, replicates: int, seed: int, cost=None) -> float:
    """Share of replicates whose first admissible proposal is accepted at ``tau0``.

    The chain starts at the independence coupling, which has full support,
    so the first proposal is always admissible.
    """
    c = (CostMatrix.sqrt_distance(n) if cost is None else cost).entries
    rng = _stream(seed, n, 0)
    mu, nu = sample_margins(rng, n, replicates)
    i1, i2, j1, j2, ufrac, vdraw = draw_chunk(rng, n, replicates)
    r = np.arange(replicates)
    g = lambda i, j: mu[r, i] * nu[r, j]  # noqa: E731
    alpha = np.minimum(g(i1, j2), g(i2, j1))
    u = alpha * ufrac
    dk = u * (((c[i1, j1] + c[i2, j2]) - c[i1, j2]) - c[i2, j1])
    with np.errstate(over="ignore"):
        accept = (dk <= 0) | (np.exp(-dk / tau0) > vdraw)
    return float(accept.mean())


def first_move_acceptance(spec: ExperimentSpec) -> dict:
    """``{(n, tau0): acceptance}`` over the grid.

    Each size uses one stream derived from ``(seed, n)``, so every
    temperature of a row sees the same margins and proposals.
    """
    return {
        (n, float(t)): first_move_acceptance_cell(n, float(t), spec.replicates, spec.seed)
        for n in spec.ns
        for t in spec.tau0_grid
    }


def select_tau0(acceptance: dict, threshold: float = 0.95) -> dict:
    """Smallest grid temperature per size whose first-move acceptance reaches ``threshold``."""
    out = {}
    for (n, t), p in sorted(acceptance.items()):
        if p >= threshold and n not in out:
            out[n] = t
    for n in {n for n, _ in acceptance}:
        out.setdefault(n, max(t for m, t in acceptance if m == n))
    return out


def _window_rate(args) -> float:
    n, B, tau0, window, seed, rep, schedule = args
    rng = _stream(seed, n, B, rep)
    mu, nu = sample_margins(rng, n)
    table = np.ascontiguousarray(np.outer(mu, nu))
    cost = CostMatrix.sqrt_distance(n).entries
    cfg = AnnealConfig(tau0=tau0, steps=B + window, schedule=schedule, seed=0, final_fill=False)
    _, _, _, status = run_chain(table, cost, cfg, rng, mu, nu)
    return float(np.count_nonzero(status[B:] == 1)) / window


def convergence_profile(spec: ExperimentSpec, tau0_by_n: dict | None = None) -> dict:
    """``{(n, B): share of accepted proposals in the window after B steps}``.

    Each replicate runs ``B + window`` steps with the temperature schedule
    continuing through the window; replicate streams derive from
    ``(seed, n, B, replicate)`` so results do not depend on ``workers``.
    """
    taus = dict(spec.tau0_by_n)
    if tau0_by_n:
        taus.update(tau0_by_n)
    missing = [n for n in spec.ns if n not in taus]
    if missing:
        sub = ExperimentSpec(ns=tuple(missing), tau0_grid=spec.tau0_grid, B_grid=spec.B_grid,
                             replicates=max(spec.replicates, 2000), seed=spec.seed)
        taus.update(select_tau0(first_move_acceptance(sub), spec.threshold))
    jobs = [
        (n, int(B), float(taus[n]), spec.window, spec.seed, rep, spec.schedule)
        for n in spec.ns
        for B in spec.B_grid
        for rep in range(spec.replicates)
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            rates = list(pool.map(_window_rate, jobs, chunksize=max(1, len(jobs) // (4 * spec.workers))))
    else:
        rates = [_window_rate(j) for j in jobs]
    out: dict = {}
    for (n, B, *_), rate in zip(jobs, rates):
        out.setdefault((n, B), []).append(rate)
    return {key: float(np.mean(v)) for key, v in out.items()}


def grid_rows(result: dict, header: tuple[str, str, str]) -> list[dict]:
    """Flatten a grid result into CSV-ready rows."""
    a, b, v = header
    return [{a: k[0], b: k[1], v: val} for k, val in sorted(result.items())]
