"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Tolerances are pinned here; campaign sizes are the minimums the criteria name.
Expect several minutes of runtime on one core.
"""

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from sbesearch.bench import CampaignConfig, run_campaign
from sbesearch.core import expected_exhaustive_visits, generate_instance, probability_bounds
from sbesearch.oracle import Oracle
from sbesearch.search import ALGORITHMS, get_searcher, search, triangle_growth
from sbesearch.template import make_template_oracle, speedup_report, synthetic_scene
from sbesearch.tuner import (
    EaConfig,
    Individual,
    decode_genome,
    ea_tune,
    evolve_step,
    genome_length,
    genome_schema,
    random_genome,
    run_seed,
)

EXH_1024 = float(expected_exhaustive_visits(1024, 1024))  # 524288.5
EXH_256 = float(expected_exhaustive_visits(256, 256))  # 32768.5
DESK = EaConfig()  # desk budget: default rates, 40 runs per fitness, 5000-step cap

TUNING_LOGS = {}


def report(k, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def tuned(algorithm, s, seed, **kw):
    key = (algorithm, s, seed)
    if key not in TUNING_LOGS:
        TUNING_LOGS[key] = ea_tune(algorithm, s, DESK, seed=seed, **kw)
    return TUNING_LOGS[key]


@pytest.fixture(scope="module")
def exhaustive_1024():
    return run_campaign(CampaignConfig("exhaustive", 1024, 10_000, seed=102))


@pytest.fixture(scope="module")
def fts_1024():
    res = tuned("fts", 1024, seed=31)
    stats = run_campaign(CampaignConfig("fts", 1024, 10_000, seed=103, params=res.params.as_dict()))
    return res, stats


def test_criterion_01_exhaustive_small():
    st = run_campaign(CampaignConfig("exhaustive", 256, 100_000, seed=101))
    err = abs(st.mean - EXH_256) / EXH_256
    report(1, err <= 0.005, f"s=256 n=1e5 exhaustive mean {st.mean:.1f} vs {EXH_256} (rel err {err:.4%}, tol 0.5%)")


def test_criterion_02_exhaustive_large(exhaustive_1024):
    st = exhaustive_1024
    err = abs(st.mean - EXH_1024) / EXH_1024
    report(2, err <= 0.02, f"s=1024 n=1e4 exhaustive mean {st.mean:.1f} vs {EXH_1024} (rel err {err:.4%}, tol 2%)")


def test_criterion_03_fts_beats_exhaustive(fts_1024):
    res, st = fts_1024
    ratio = st.mean / EXH_1024
    report(3, ratio <= 0.95,
           f"tuned FTS ({res.params.as_dict()}, converged={res.converged}) s=1024 n=1e4 mean {st.mean:.1f}, "
           f"ratio {ratio:.4f} (gate 0.95)")


def test_criterion_04_size_scaling(exhaustive_1024, fts_1024):
    _, st1024 = fts_1024
    r1024 = st1024.mean / exhaustive_1024.mean
    res = tuned("fts", 2048, seed=32)
    fts = run_campaign(CampaignConfig("fts", 2048, 2000, seed=104, params=res.params.as_dict()))
    exh = run_campaign(CampaignConfig("exhaustive", 2048, 2000, seed=105))
    r2048 = fts.mean / exh.mean
    report(4, r2048 <= r1024 + 0.05,
           f"FTS/exhaustive ratio s=2048 {r2048:.4f} vs s=1024 {r1024:.4f} (gate +0.05)")


def test_criterion_05_theorem_monte_carlo():
    s, n = 256, 1_000_000
    rng = np.random.default_rng(run_seed(105, 0))
    hits = 0
    delta = None
    for _ in range(n):
        inst = generate_instance(s, rng)
        delta = inst.delta
        mx, my = inst.evidence[rng.integers(len(inst.evidence))]
        dx, dy = rng.integers(-delta, delta + 1, size=2)
        hits += (mx + dx, my + dy) == inst.psi
    p = hits / n
    sigma = np.sqrt(p * (1 - p) / n)
    marginal, conditional = (float(v) for v in probability_bounds(s, delta))
    ok = p - 3 * sigma > marginal and abs(p - conditional) <= 3 * sigma
    report(5, ok, f"hit freq {p:.3e} +- {sigma:.1e} vs conditional {conditional:.3e}, marginal {marginal:.3e}")


def test_criterion_06_no_revisit():
    rng = np.random.default_rng(106)
    dupes = 0
    for _ in range(1000):
        o = Oracle(2048, 2048, (0, 0), np.zeros((1, 1), np.uint8), (0, 0), trace=True)
        x, y = (int(v) for v in rng.integers(600, 1400, size=2))
        triangle_growth(o, x, y, 6)
        cells = o.trace[:, :2]
        dupes += len(cells) - len(np.unique(cells, axis=0))
    report(6, dupes == 0, f"1000 growth sequences x 6 iterations, duplicate visits {dupes}")


def brute_mae_below(template, image, tau):
    th, tw = template.pixels.shape
    img = image.pixels.astype(np.int32)
    tpl = template.pixels.astype(np.int32)
    oh, ow = img.shape[0] - th + 1, img.shape[1] - tw + 1
    acc = np.zeros((oh, ow), dtype=np.int64)
    for i in range(th):
        for j in range(tw):
            acc += np.abs(img[i : i + oh, j : j + ow] - tpl[i, j])
    ys, xs = np.nonzero(acc / (th * tw) < tau)
    return set(zip(xs.tolist(), ys.tolist()))


def test_criterion_07_oracle_equivalence():
    rng = np.random.default_rng(107)
    mismatches = 0
    for _ in range(10_000):
        inst = generate_instance(256, rng)
        steps = search(inst, "exhaustive").steps
        mismatches += steps != np.ravel_multi_index((inst.psi.y, inst.psi.x), (256, 256)) + 1
    template_mismatches = 0
    for _ in range(100):
        sc = synthetic_scene(rng)
        o = make_template_oracle(sc.image, sc.templates)
        found = {(x, y) for x, y in [o.psi] if o.classify((x, y)) == 2}
        template_mismatches += found != brute_mae_below(sc.templates.target, sc.image, sc.templates.tau_target)
    report(7, mismatches == 0 and template_mismatches == 0,
           f"exhaustive vs row-major index mismatches {mismatches}/10000; "
           f"template Found vs brute MAE scan mismatches {template_mismatches}/100")


def test_criterion_08_determinism():
    rng = np.random.default_rng(108)
    bad = []
    for name in ALGORITHMS:
        for _ in range(100):
            s = int(rng.choice([16, 32, 48, 64, 96, 128]))
            inst = generate_instance(s, rng)
            genome = random_genome(genome_length(genome_schema(name, s)), rng)
            params = decode_genome(name, genome, s)
            seed = int(rng.integers(2**32))
            a = search(inst, name, params, rng=seed, trace=True).trace
            b = search(inst, name, params, rng=seed, trace=True).trace
            if a.tobytes() != b.tobytes():
                bad.append(name)
    report(8, not bad, f"7 algorithms x 100 (instance, params, seed) triples, non-identical traces {len(bad)}")


def test_criterion_09_tabu_bound():
    rng = np.random.default_rng(109)
    worst = 0
    violations = 0
    s = 64
    for _ in range(10_000):
        inst = generate_instance(s, rng)
        params = get_searcher("tabu").params(int(rng.integers(1, 2000)), int(rng.integers(1, s)))
        steps = search(inst, "tabu", params, rng=rng).steps
        worst = max(worst, steps)
        violations += steps > s * s
    report(9, violations == 0, f"10000 tabu runs at s={s}: max steps {worst} <= {s * s}, violations {violations}")


def test_criterion_10_template_speedup():
    rng = np.random.default_rng(110)
    pool = [make_template_oracle(sc.image, sc.templates) for sc in (synthetic_scene(rng) for _ in range(20))]
    images = [make_template_oracle(sc.image, sc.templates) for sc in (synthetic_scene(rng) for _ in range(200))]
    w, h = images[0].width, images[0].height

    def tuning_oracle(r):
        return pool[int(r.integers(len(pool)))].fresh()

    res = tuned("fts", max(w, h), seed=33, make_oracle=tuning_oracle, grid=(w, h))
    rep = speedup_report({"fts": res.params, "exhaustive": None}, images, runs=5, seed=110)
    fts, exh = rep.visits.mean(axis=0)
    report(10, fts < exh,
           f"200 synthetic 512x512 images, tuned FTS {res.params.as_dict()}: mean positions {fts:.0f} vs "
           f"exhaustive {exh:.0f} ({rep.mean_row()[0]:.2f}% faster)")


def test_criterion_11_operator_rates_and_champion():
    rng = np.random.default_rng(111)
    config = EaConfig()
    population = [Individual("0123456789", 1.0)]
    counts = {"clone": 0, "crossover": 0, "mutate": 0}
    n = 1_000_000
    for _ in range(n):
        population, op = evolve_step(population, config, rng, lambda g: 1.0)
        counts[op] += 1
    rates = {k: v / n for k, v in counts.items()}
    rates_ok = all(abs(rates[k] - r) <= 0.01 for k, r in [("clone", 0.05), ("crossover", 0.65), ("mutate", 0.30)])
    for k, algo in enumerate(a for a in ALGORITHMS if a != "exhaustive"):
        tuned(algo, 64, seed=40 + k)
    monotone = all(
        all(b <= a for a, b in zip(best, best[1:]))
        for best in ([row[1] for row in res.history] for res in TUNING_LOGS.values())
    )
    report(11, rates_ok and monotone,
           f"operator rates {', '.join(f'{k}={v:.4f}' for k, v in rates.items())} (tol 0.01); "
           f"champion non-increasing in {len(TUNING_LOGS)} tuning logs: {monotone}")
