import numpy as np
import pytest

from conftest import EX_MU, EX_NU, random_margins
from tablemoves.annealing import (
    AnnealConfig,
    ExperimentSpec,
    Schedule,
    anneal,
    convergence_profile,
    first_move_acceptance,
    first_move_acceptance_cell,
    select_tau0,
)
from tablemoves.annealing.chain import draw_chunk, run_chain
from tablemoves.errors import ValidationError
from tablemoves.tables import CostMatrix, validate_coupling
from tablemoves.transport import exact_kcost


class TestSchedule:
    def test_geometric(self):
        t = Schedule().temperatures(1.0, 0, 4)
        assert t.tolist() == [1.0, 0.95, 0.95**2, 0.95**3]

    def test_continues_across_chunks(self):
        s = Schedule.named("geom99")
        assert np.array_equal(s.temperatures(0.5, 0, 10)[5:], s.temperatures(0.5, 5, 10))

    def test_harmonic_and_log(self):
        assert Schedule.named("harmonic").temperatures(2.0, 0, 3).tolist() == [2.0, 2.0, 1.0]
        assert Schedule.named("log").temperatures(1.0, 1, 2)[0] == pytest.approx(1 / np.log(2))

    def test_bad(self):
        with pytest.raises(ValidationError):
            Schedule.named("fast")
        with pytest.raises(ValidationError):
            Schedule("geometric", 1.5)


class TestConfig:
    def test_json_round_trip(self):
        cfg = AnnealConfig.from_json({"tau0": 0.1, "B": 500, "schedule": "harmonic", "seed": 3})
        assert (cfg.tau0, cfg.steps, cfg.schedule.kind, cfg.seed) == (0.1, 500, "harmonic", 3)
        again = AnnealConfig.from_json(cfg.to_json())
        assert again == cfg

    def test_rejects(self):
        with pytest.raises(ValidationError):
            AnnealConfig.from_json({"tau0": 1, "colour": "red"})
        with pytest.raises(ValidationError):
            AnnealConfig(tau0=0)
        with pytest.raises(ValidationError):
            AnnealConfig(steps=0)


def test_draws_distinct_pairs():
    rng = np.random.default_rng(0)
    i1, i2, j1, j2, uf, v = draw_chunk(rng, 4, 50_000)
    assert np.all(i1 != i2) and np.all(j1 != j2)
    assert uf.min() > 0 and uf.max() <= 1
    # ordered pairs are uniform over the 12 possibilities
    counts = np.bincount(i1 * 4 + i2, minlength=16)
    assert counts[[0, 5, 10, 15]].sum() == 0
    assert np.abs(counts[counts > 0] / 50_000 - 1 / 12).max() < 0.01


class TestChain:
    def test_margins_over_long_run(self, kernels):
        rng = np.random.default_rng(3)
        mu, nu = random_margins(rng, 6)
        table = np.outer(mu, nu)
        cost = CostMatrix.sqrt_distance(6).entries
        # no margin resync here: each step must conserve margins by itself
        accepted, admissible, costs, status = run_chain(table, cost, AnnealConfig(tau0=0.05, steps=100_000, schedule="log"), rng, kernels=kernels)
        assert accepted > 1000
        assert np.abs(table.sum(axis=1) - mu).max() <= 1e-9
        assert np.abs(table.sum(axis=0) - nu).max() <= 1e-9
        assert table.min() >= 0
        assert abs(costs[-1] - np.sum(table * cost)) <= 1e-9

    def test_accept_counts(self):
        rng = np.random.default_rng(1)
        mu, nu = random_margins(rng, 5)
        acc, adm, costs, status = run_chain(np.outer(mu, nu), CostMatrix.sqrt_distance(5).entries, AnnealConfig(steps=3000), rng)
        assert acc == np.count_nonzero(status == 1) and adm == np.count_nonzero(status)
        assert acc <= adm <= 3000

    def test_deterministic(self):
        cfg = AnnealConfig(steps=5000, seed=42)
        a, b = anneal(EX_MU, EX_NU, cfg), anneal(EX_MU, EX_NU, cfg)
        assert np.array_equal(a.coupling.table, b.coupling.table) and a.cost == b.cost
        assert np.array_equal(a.cost_trace, b.cost_trace)
        c = anneal(EX_MU, EX_NU, AnnealConfig(steps=5000, seed=43))
        assert not np.array_equal(a.coupling.table, c.coupling.table)

    def test_never_below_exact(self, rng):
        for _ in range(10):
            n = int(rng.integers(3, 9))
            mu, nu = random_margins(rng, n)
            opt = exact_kcost(mu, nu, CostMatrix.sqrt_distance(n)).value
            rep = anneal(mu, nu, AnnealConfig(steps=3000, seed=int(rng.integers(1 << 30))))
            validate_coupling(rep.coupling, mu, nu)
            assert rep.cost >= opt - 1e-12 and rep.best_cost >= opt - 1e-12
            assert rep.fill_gain >= -1e-12

    def test_improves_on_independence(self):
        c = CostMatrix.sqrt_distance(10)
        mu, nu = np.array(EX_MU) / sum(EX_MU), np.array(EX_NU) / sum(EX_NU)
        start = float(np.sum(np.outer(mu, nu) * c.entries))
        rep = anneal(EX_MU, EX_NU, AnnealConfig(steps=10_000))
        assert rep.cost < 0.6 * start

    def test_non_metric_skips_fill(self, rng):
        mu, nu = random_margins(rng, 4)
        c = CostMatrix.line(4, 2.0)
        rep = anneal(mu, nu, AnnealConfig(steps=500), cost=c)
        assert rep.fill_gain == 0 and rep.cost == rep.chain_cost


class TestExperiments:
    def test_hot_limit(self):
        assert first_move_acceptance_cell(6, 1e9, 500, 0) == 1.0

    def test_monotone_in_tau0(self):
        vals = [first_move_acceptance_cell(10, 10.0 ** k, 1000, 1) for k in (-3, -2, -1, 0)]
        assert vals == sorted(vals) and vals[0] < vals[-1]

    def test_grid_and_selection(self):
        spec = ExperimentSpec(ns=(4,), tau0_grid=(1e-3, 1e-1, 1.0), replicates=300, seed=5)
        acc = first_move_acceptance(spec)
        assert set(acc) == {(4, 1e-3), (4, 1e-1), (4, 1.0)}
        sel = select_tau0(acc, threshold=0.0)
        assert sel == {4: 1e-3}
        assert select_tau0(acc, threshold=1.1) == {4: 1.0}

    def test_profile_reproducible(self):
        spec = ExperimentSpec(ns=(4,), B_grid=(10, 50), replicates=20, seed=9, tau0_by_n={4: 0.1})
        a = convergence_profile(spec)
        assert a == convergence_profile(spec)
        assert set(a) == {(4, 10), (4, 50)} and all(0 <= v <= 1 for v in a.values())

    def test_profile_workers_independent(self):
        base = dict(ns=(4,), B_grid=(20,), replicates=8, seed=2, tau0_by_n={4: 0.1})
        assert convergence_profile(ExperimentSpec(**base)) == convergence_profile(ExperimentSpec(**base, workers=2))

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            ExperimentSpec(ns=(1,))
        with pytest.raises(ValidationError):
            ExperimentSpec(replicates=0)


def test_longer_chain_reaches_exact():
    # ten times the acceptance-criterion length closes the gap on every seed
    ex = exact_kcost(EX_MU, EX_NU, CostMatrix.sqrt_distance(10)).value
    gaps = [anneal(EX_MU, EX_NU, AnnealConfig(seed=s, steps=100_000, keep_trace=False)).cost - ex for s in range(10)]
    assert all(-1e-12 <= g <= 1e-3 for g in gaps)
