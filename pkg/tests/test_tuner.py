import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbesearch.search import FtsParams, get_searcher
from sbesearch.tuner import (
    EaConfig,
    Gene,
    Individual,
    choose_operator,
    crossover,
    decode_genome,
    ea_tune,
    evolve_step,
    fitness,
    format_params,
    genome_length,
    genome_schema,
    mutate,
    select_mate_index,
    write_tuning_log,
)

digits = st.text(alphabet="0123456789", min_size=1, max_size=16)


def test_gene_decode_spans_range():
    g = Gene("t", 4, 1, 9999)
    assert g.decode("0000") == 1
    assert g.decode("9999") == 9999
    assert Gene("c", 3, 1, 10).decode("999") == 10
    assert Gene("c", 3, 1, 10).decode("000") == 1


@pytest.mark.parametrize("algorithm", ["fts", "ils", "vns1", "vns2", "vns3", "tabu"])
def test_decode_extremes_are_valid(algorithm):
    n = genome_length(genome_schema(algorithm, 1024))
    lo = decode_genome(algorithm, "0" * n, 1024)
    hi = decode_genome(algorithm, "9" * n, 1024)
    assert all(v >= 1 for v in lo.as_dict().values())
    assert isinstance(hi, get_searcher(algorithm).params)


def test_fts_schema_bounds():
    p = decode_genome("fts", "9" * 11, 1024)
    assert p == FtsParams(9999, 1023, 10)


def test_decode_rejects_bad_genome():
    with pytest.raises(ValueError):
        decode_genome("fts", "123", 1024)
    with pytest.raises(ValueError):
        decode_genome("fts", "12345678x01", 1024)


def test_exhaustive_schema_empty():
    assert genome_schema("exhaustive", 256) == []
    assert decode_genome("exhaustive", "", 256).as_dict() == {}


def test_config_rates_must_sum():
    EaConfig()
    with pytest.raises(ValueError):
        EaConfig(clone_rate=0.1)


def test_exhaustive_fitness_near_baseline():
    f = fitness("exhaustive", "", 256, seed=3)
    assert abs(f - 32768.5) <= 0.15 * 32768.5


@pytest.mark.parametrize("algorithm", ["fts", "ils", "vns1", "vns2", "vns3", "tabu"])
def test_minimal_genome_terminates(algorithm):
    n = genome_length(genome_schema(algorithm, 64))
    f = fitness(algorithm, "0" * n, 64, seed=1, runs=5)
    assert 1 <= f < math.inf


def test_fitness_deterministic():
    g = "12345678901"
    assert fitness("fts", g, 128, seed=9, runs=10) == fitness("fts", g, 128, seed=9, runs=10)


def test_select_mate_examples():
    assert select_mate_index(None, 50, u=(0.0, 0.0)) == 0
    assert select_mate_index(None, 50, u=(0.5, 0.5)) == 12
    assert select_mate_index(None, 5, u=(1.0, 1.0)) == 4
    with pytest.raises(ValueError):
        select_mate_index(None, 0, u=(0.1, 0.1))


def test_select_mate_skews_to_best():
    rng = np.random.default_rng(0)
    counts = np.bincount([select_mate_index(rng, 50) for _ in range(1_000_000)], minlength=50)
    assert counts[0] > counts[49]
    assert np.all(np.diff(counts[:40]) < 0)


@settings(max_examples=200)
@given(a=digits, seed=st.integers(0, 2**32 - 1), data=st.data())
def test_crossover_closure(a, seed, data):
    b = data.draw(st.text(alphabet="0123456789", min_size=len(a), max_size=len(a)))
    child = crossover(a, b, np.random.default_rng(seed))
    assert len(child) == len(a)
    assert all(c in (x, y) for c, x, y in zip(child, a, b))
    assert crossover(a, a, np.random.default_rng(seed)) == a


@settings(max_examples=200)
@given(g=digits, seed=st.integers(0, 2**32 - 1))
def test_mutation_changes_one_digit(g, seed):
    m = mutate(g, np.random.default_rng(seed))
    assert len(m) == len(g)
    assert sum(x != y for x, y in zip(g, m)) == 1


def test_all_equal_population_only_mutation_changes():
    rng = np.random.default_rng(4)
    cfg = EaConfig()
    pop = [Individual("4242", 10.0) for _ in range(6)]
    for _ in range(200):
        new, op = evolve_step(pop, cfg, rng, lambda g: 10.0)
        child = next(ind for ind in new if all(ind is not p for p in pop))
        if op in ("clone", "crossover"):
            assert child.genome == "4242"
        else:
            assert child.genome != "4242"


def test_evolve_step_truncates_to_kappa():
    rng = np.random.default_rng(1)
    cfg = EaConfig(kappa=3)
    pop = [Individual(g, f) for g, f in [("11", 1.0), ("22", 2.0), ("33", 3.0)]]
    new, _ = evolve_step(pop, cfg, rng, lambda g: 0.5)
    assert len(new) == 3
    assert new[0].fitness == 0.5


def test_operator_rates():
    rng = np.random.default_rng(2)
    cfg = EaConfig()
    ops = [choose_operator(rng, cfg) for _ in range(200_000)]
    for name, rate in [("clone", 0.05), ("crossover", 0.65), ("mutate", 0.30)]:
        assert abs(ops.count(name) / len(ops) - rate) < 0.01


def test_single_individual_converges_immediately():
    res = ea_tune("fts", 64, EaConfig(initial_population=1), seed=0)
    assert res.converged and res.steps == 0


def test_exhaustive_control():
    res = ea_tune("exhaustive", 64, EaConfig(max_steps=50), seed=5)
    assert res.converged
    # 40-run mean of a uniform index over 4096 cells: sd about 187
    assert abs(res.fitness - 2048.5) < 5 * 187


def test_tune_converges_and_champion_monotone(tmp_path):
    res = ea_tune("vns2", 32, EaConfig(stall_limit=5, max_steps=400, runs_per_fitness=10), seed=3)
    assert res.converged
    best = [row[1] for row in res.history]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert len(res.run_steps) % 10 == 0
    path = tmp_path / "log.csv"
    write_tuning_log(res.history, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["generation", "best_fitness", "population_size", "converged"]
    assert len(rows) == len(res.history) + 1
    assert rows[-1][3] == "1"


def test_budget_cap_reports_not_converged():
    res = ea_tune("fts", 64, EaConfig(max_steps=3, runs_per_fitness=4), seed=1)
    assert res.steps == 3 and not res.converged


def test_tune_deterministic():
    cfg = EaConfig(max_steps=30, runs_per_fitness=5)
    a = ea_tune("fts", 64, cfg, seed=8)
    b = ea_tune("fts", 64, cfg, seed=8)
    assert (a.genome, a.fitness, a.history) == (b.genome, b.fitness, b.history)


def test_format_params():
    assert format_params(FtsParams(10, 20, 3)) == "t=10 d=20 c=3"
