"""Evolutionary parameter selection for the searchers.

Genomes are fixed-length digit strings. The best individual is cloned (5%),
crossed with a rank-skewed mate (65%) or mutated in one digit (30%); the
offspring joins the population, which is truncated to the ``kappa`` fittest.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import generate_instance
from .oracle import Oracle
from .search import get_searcher


@dataclass(frozen=True)
class Gene:
    name: str
    digits: int
    lo: int
    hi: int

    def decode(self, chunk: str) -> int:
        raw = int(chunk)
        top = 10**self.digits - 1
        return self.lo + raw * (self.hi - self.lo) // top


def genome_schema(algorithm: str, w: int, h: int | None = None) -> list[Gene]:
    """Per-parameter digit fields, with value ranges sized to a ``w`` x ``h`` grid."""
    h = w if h is None else h
    big = max(w, h)
    count = Gene("t", 4, 1, 9999)
    step = Gene("d", 4, 1, max(1, big - 1))
    radius = min(999, max(1, big // 2))
    schemas = {
        "fts": [count, step, Gene("c", 3, 1, max(1, math.ceil(math.log2(big))))],
        "ils": [count, Gene("a", 3, 1, 999)],
        "vns1": [count, Gene("m", 3, 1, radius), step],
        "vns2": [count, step],
        "tabu": [count, step],
        "vns3": [count, step, Gene("g", 3, 1, radius)],
        "exhaustive": [],
    }
    get_searcher(algorithm)
    return schemas[algorithm.lower()]


def genome_length(schema) -> int:
    return sum(g.digits for g in schema)


def decode_genome(algorithm: str, genome: str, w: int, h: int | None = None):
    schema = genome_schema(algorithm, w, h)
    if len(genome) != genome_length(schema) or not genome.isdigit() and genome:
        raise ValueError(f"genome {genome!r} does not fit the {algorithm} schema")
    values, at = {}, 0
    for g in schema:
        values[g.name] = g.decode(genome[at : at + g.digits])
        at += g.digits
    return get_searcher(algorithm).params(**values)


def random_genome(length: int, rng: np.random.Generator) -> str:
    return "".join(str(v) for v in rng.integers(0, 10, size=length))


@dataclass
class Individual:
    genome: str
    fitness: float | None = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass(frozen=True)
class EaConfig:
    kappa: int = 50
    initial_population: int = 5
    clone_rate: float = 0.05
    crossover_rate: float = 0.65
    mutation_rate: float = 0.30
    runs_per_fitness: int = 40
    stall_limit: int = 100
    max_steps: int = 5000

    def __post_init__(self):
        total = self.clone_rate + self.crossover_rate + self.mutation_rate
        if not math.isclose(total, 1.0):
            raise ValueError(f"operator rates must sum to 1, got {total}")
        if self.kappa < 1 or self.initial_population < 1:
            raise ValueError("population sizes must be positive")


def run_seed(seed: int, *key: int) -> np.random.SeedSequence:
    """Counter-mode split of a master seed: one independent stream per key tuple."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))


def sbe_oracles(s: int) -> Callable:
    def make(rng):
        return Oracle.from_instance(generate_instance(s, rng))

    return make


def fitness(
    algorithm: str,
    genome: str,
    s: int,
    seed: int,
    generation: int = 0,
    runs: int = 40,
    make_oracle: Callable | None = None,
    sink: list | None = None,
) -> float:
    """Mean step count over ``runs`` fresh instances; run i draws from (seed, generation, i).

    Individual step counts are appended to ``sink`` when given.
    """
    make_oracle = make_oracle or sbe_oracles(s)
    searcher = get_searcher(algorithm)
    steps = 0
    params = None
    for i in range(runs):
        rng = np.random.default_rng(run_seed(seed, generation, i))
        oracle = make_oracle(rng)
        if params is None:
            params = decode_genome(algorithm, genome, oracle.width, oracle.height)
        n = searcher.run(oracle, params, rng).steps
        if sink is not None:
            sink.append(n)
        steps += n
    return steps / runs


def select_mate_index(rng, population_size: int, kappa: int = 50, u=None) -> int:
    """Rank ``floor(u1 * u2 * kappa)``, capped to the population; skews toward the fittest."""
    if population_size < 1:
        raise ValueError("population is empty")
    u1, u2 = (rng.random(), rng.random()) if u is None else u
    return min(int(u1 * u2 * kappa), population_size - 1)


OPERATORS = ("clone", "crossover", "mutate")


def choose_operator(rng, config: EaConfig) -> str:
    r = rng.random()
    if r < config.clone_rate:
        return "clone"
    if r < config.clone_rate + config.crossover_rate:
        return "crossover"
    return "mutate"


def crossover(a: str, b: str, rng) -> str:
    """Uniform crossover: each digit comes from either parent with equal odds."""
    pick = rng.random(len(a)) < 0.5
    return "".join(x if p else y for x, y, p in zip(a, b, pick))


def mutate(genome: str, rng) -> str:
    """Replace one digit by a different digit."""
    if not genome:
        return genome
    i = int(rng.integers(len(genome)))
    old = int(genome[i])
    new = (old + int(rng.integers(1, 10))) % 10
    return genome[:i] + str(new) + genome[i + 1 :]


def _insert(population: list[Individual], child: Individual, kappa: int) -> list[Individual]:
    # stable: ties keep older individuals ahead
    out = population + [child]
    out.sort(key=lambda ind: ind.fitness)
    return out[:kappa]


def evolve_step(population, config: EaConfig, rng, evaluate: Callable[[str], float]):
    """One generation; ``population`` must be sorted best-first. Returns (population', operator)."""
    best = population[0]
    op = choose_operator(rng, config)
    if op == "clone":
        genome = best.genome
    elif op == "crossover":
        mate = population[select_mate_index(rng, len(population), config.kappa)]
        genome = crossover(best.genome, mate.genome, rng)
    else:
        genome = mutate(best.genome, rng)
    child = Individual(genome, evaluate(genome))
    return _insert(population, child, config.kappa), op


@dataclass
class TuneResult:
    algorithm: str
    params: object
    genome: str
    fitness: float
    converged: bool
    steps: int
    history: list = field(default_factory=list)
    run_steps: np.ndarray | None = field(default=None, repr=False)


def ea_tune(
    algorithm: str,
    s: int,
    config: EaConfig = EaConfig(),
    seed: int = 0,
    make_oracle: Callable | None = None,
    grid: tuple[int, int] | None = None,
) -> TuneResult:
    """Evolve parameters for ``algorithm`` until a stopping rule fires or ``max_steps`` pass.

    Stopping rules: every genome in the population is identical, or the champion
    has not improved for ``stall_limit`` steps and has at least two copies.
    Fitness is frozen at first evaluation and cached per genome.
    """
    w, h = grid or (s, s)
    rng = np.random.default_rng(run_seed(seed, 2**31 - 1))
    length = genome_length(genome_schema(algorithm, w, h))
    cache: dict[str, float] = {}
    sink: list[int] = []
    generation = 0

    def evaluate(genome: str) -> float:
        if genome not in cache:
            cache[genome] = fitness(
                algorithm, genome, s, seed, generation, config.runs_per_fitness, make_oracle, sink
            )
        return cache[genome]

    population = [Individual(g, evaluate(g)) for g in
                  (random_genome(length, rng) for _ in range(config.initial_population))]
    population.sort(key=lambda ind: ind.fitness)
    population = population[: config.kappa]

    history = []
    best_fitness = population[0].fitness
    stall = 0
    converged = False
    while True:
        genomes = [ind.genome for ind in population]
        if len(set(genomes)) == 1:
            converged = True
        elif stall >= config.stall_limit and genomes.count(population[0].genome) >= 2:
            converged = True
        history.append((generation, population[0].fitness, len(population), converged))
        if converged or generation >= config.max_steps:
            break
        generation += 1
        population, _ = evolve_step(population, config, rng, evaluate)
        if population[0].fitness < best_fitness:
            best_fitness = population[0].fitness
            stall = 0
        else:
            stall += 1

    best = population[0]
    return TuneResult(
        algorithm=algorithm,
        params=decode_genome(algorithm, best.genome, w, h),
        genome=best.genome,
        fitness=best.fitness,
        converged=converged,
        steps=generation,
        history=history,
        run_steps=np.array(sink, dtype=np.int64),
    )


def write_tuning_log(history, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best_fitness", "population_size", "converged"])
        for gen, fit, size, conv in history:
            w.writerow([gen, repr(float(fit)), size, int(conv)])


def format_params(params) -> str:
    return " ".join(f"{k}={v}" for k, v in params.as_dict().items())
