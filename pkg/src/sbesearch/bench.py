"""Campaign runner: many fresh instances per configuration, tuned multi-start tables."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import expected_exhaustive_visits, generate_instance
from .oracle import Oracle
from .search import get_searcher
from .tuner import EaConfig, ea_tune, run_seed

LLN_GATE = 5.0


@dataclass
class CampaignConfig:
    algorithm: str
    s: int
    n: int
    seed: int = 0
    params: dict | None = None
    restarts: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.n < 1 or self.restarts < 1:
            raise ValueError("n and restarts must be >= 1")
        get_searcher(self.algorithm)
        if self.params is not None and not isinstance(self.params, dict):
            self.params = self.params.as_dict()


@dataclass
class CampaignStats:
    n: int
    mean: float
    min: int
    max: int
    std: float
    stderr: float
    series: np.ndarray | None = field(default=None, repr=False)
    converged: bool | None = None
    suspect: bool = False

    @classmethod
    def from_series(cls, steps, converged=None, keep_series=True) -> CampaignStats:
        steps = np.asarray(steps, dtype=np.int64)
        n = len(steps)
        mean = int(steps.sum()) / n
        std = float(np.std(steps, ddof=1)) if n > 1 else 0.0
        return cls(
            n=n,
            mean=mean,
            min=int(steps.min()),
            max=int(steps.max()),
            std=std,
            stderr=std / math.sqrt(n),
            series=steps if keep_series else None,
            converged=converged,
        )


def _run_range(config: CampaignConfig, params, lo: int, hi: int, out: np.ndarray) -> None:
    searcher = get_searcher(config.algorithm)
    for i in range(lo, hi):
        rng = np.random.default_rng(run_seed(config.seed, i))
        oracle = Oracle.from_instance(generate_instance(config.s, rng))
        out[i] = searcher.run(oracle, params, rng).steps


def campaign_steps(config: CampaignConfig) -> np.ndarray:
    """Step count of every run; run i draws its instance and search stream from (seed, i)."""
    searcher = get_searcher(config.algorithm)
    params = searcher.params(**(config.params or {}))
    out = np.zeros(config.n, dtype=np.int64)
    workers = max(1, int(config.workers))
    if workers == 1:
        _run_range(config, params, 0, config.n, out)
    else:
        bounds = np.linspace(0, config.n, workers + 1).astype(int)
        with ThreadPoolExecutor(workers) as pool:
            jobs = [pool.submit(_run_range, config, params, a, b, out) for a, b in zip(bounds, bounds[1:])]
            for j in jobs:
                j.result()
    return out


def lln_suspect(stats: CampaignStats, w: int, h: int) -> bool:
    """True when an exhaustive mean sits more than LLN_GATE standard errors from (wh+1)/2."""
    expected = float(expected_exhaustive_visits(w, h))
    if stats.stderr == 0:
        return stats.n > 1 and stats.mean != expected
    return abs(stats.mean - expected) > LLN_GATE * stats.stderr


def run_campaign(config: CampaignConfig, keep_series=True) -> CampaignStats:
    stats = CampaignStats.from_series(campaign_steps(config), keep_series=keep_series)
    if config.algorithm == "exhaustive":
        stats.suspect = lln_suspect(stats, config.s, config.s)
    return stats


def write_manifest(config: CampaignConfig, path, **extra) -> None:
    with open(path, "w") as fh:
        json.dump({**asdict(config), **extra}, fh, indent=2, sort_keys=True)


def load_manifest(path) -> CampaignConfig:
    with open(path) as fh:
        data = json.load(fh)
    keys = CampaignConfig.__dataclass_fields__
    return CampaignConfig(**{k: v for k, v in data.items() if k in keys})


def export_series(stats: CampaignStats, path) -> None:
    if stats.series is None:
        raise ValueError("campaign was run without keep_series")
    steps = stats.series
    running = np.cumsum(steps) / np.arange(1, len(steps) + 1)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "steps", "running_mean"])
            for i, (s, m) in enumerate(zip(steps.tolist(), running.tolist()), start=1):
                w.writerow([i, s, repr(m)])
            fh.write(f"# mean={stats.mean!r}\n")
    except OSError as exc:
        raise OSError(f"cannot write series to {path}: {exc}") from exc


def read_series(path) -> tuple[np.ndarray, float]:
    steps, mean = [], None
    with open(path) as fh:
        for line in fh:
            if line.startswith("# mean="):
                mean = float(line.split("=", 1)[1])
            elif line[0].isdigit():
                steps.append(int(line.split(",")[1]))
    return np.array(steps, dtype=np.int64), mean


@dataclass
class ComparisonTable:
    s: int
    algorithms: list[str]
    cells: list[dict]  # one dict per restart: algorithm -> CampaignStats
    tuned: list[dict] = field(default_factory=list)  # algorithm -> TuneResult

    def column(self, algorithm: str) -> list[float]:
        return [row[algorithm].mean for row in self.cells]

    def mean_row(self) -> dict:
        return {a: float(np.mean(self.column(a))) for a in self.algorithms}

    def lowest_row(self) -> dict:
        return {a: float(np.min(self.column(a))) for a in self.algorithms}

    @staticmethod
    def _winner(row: dict) -> str:
        return min(row, key=row.get)

    def rows(self):
        """Yield (label, {algorithm: mean}, winner) for data, mean and lowest rows."""
        for i, row in enumerate(self.cells, start=1):
            vals = {a: row[a].mean for a in self.algorithms}
            yield str(i), vals, self._winner(vals)
        for label, vals in (("mean", self.mean_row()), ("lowest", self.lowest_row())):
            yield label, vals, self._winner(vals)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row", *self.algorithms, "winner"])
            for label, vals, win in self.rows():
                w.writerow([label, *(f"{vals[a]:.1f}" for a in self.algorithms), win])

    def format(self) -> str:
        lines = ["row".ljust(8) + "".join(a.rjust(14) for a in self.algorithms)]
        for label, vals, win in self.rows():
            cells = "".join((f"{vals[a]:,.0f}" + ("*" if a == win else " ")).rjust(14) for a in self.algorithms)
            lines.append(label.ljust(8) + cells)
        return "\n".join(lines)


def multi_start_table(
    algorithms,
    s: int,
    restarts: int,
    n: int,
    seed: int = 0,
    tuner: EaConfig = EaConfig(),
    workers: int = 1,
) -> ComparisonTable:
    """Tune each algorithm ``restarts`` times, then run an n-run campaign per tuned set.

    A tuner that did not converge has its tuning-phase runs folded into the
    campaign statistics; converged tuners report the campaign alone.
    """
    cells, tuned = [], []
    for r in range(restarts):
        row, tuned_row = {}, {}
        for k, algo in enumerate(algorithms):
            tune_seed = int(run_seed(seed, 1, r, k).generate_state(1)[0])
            result = ea_tune(algo, s, tuner, seed=tune_seed)
            cfg = CampaignConfig(
                algo, s, n, seed=int(run_seed(seed, 2, r, k).generate_state(1)[0]),
                params=result.params.as_dict(), workers=workers,
            )
            steps = campaign_steps(cfg)
            if not result.converged and result.run_steps is not None:
                steps = np.concatenate([result.run_steps, steps])
            row[algo] = CampaignStats.from_series(steps, converged=result.converged)
            tuned_row[algo] = result
        cells.append(row)
        tuned.append(tuned_row)
    return ComparisonTable(s, list(algorithms), cells, tuned)
