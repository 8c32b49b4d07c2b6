"""Command-line entry point: gen, search, bench, tune, match.

Every run prints its seed so it can be replayed; the worker count can also
come from the SBESEARCH_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bench import CampaignConfig, multi_start_table, write_manifest
from .core import Instance, MIN_SIDE, generate_instance
from .oracle import Oracle
from .search import ALGORITHMS, get_searcher, search, write_trace_csv
from .template import (
    PgmError,
    load_pgm,
    load_template_manifest,
    make_template_oracle,
    speedup_report,
    synthetic_scene,
)
from .tuner import EaConfig, ea_tune, format_params, run_seed, write_tuning_log

PARAM_FLAGS = ("t", "d", "c", "m", "g", "a")
WORKERS_ENV = "SBESEARCH_WORKERS"


class CliError(Exception):
    pass


def _algos(text: str) -> list[str]:
    names = [a.strip().lower() for a in text.split(",") if a.strip()]
    for a in names:
        get_searcher(a)
    return names


def _explicit_params(args, algorithm: str, strict: bool = True) -> dict | None:
    """Parameter flags that belong to ``algorithm``; None unless all were given.

    With ``strict``, a partial set is an error rather than None.
    """
    wanted = [f for f in get_searcher(algorithm).params.__dataclass_fields__]
    given = {f: getattr(args, f) for f in wanted if getattr(args, f, None) is not None}
    if len(given) == len(wanted):
        return given
    if given and strict:
        missing = ", ".join(f"--{f}" for f in wanted if f not in given)
        raise CliError(f"{algorithm} also needs {missing}")
    return None


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"{WORKERS_ENV}={env!r} is not an integer") from None
    return 1


def _tuner(args) -> EaConfig:
    return EaConfig(max_steps=args.budget, runs_per_fitness=args.runs_per_fitness)


def cmd_gen(args, out):
    if args.s < MIN_SIDE:
        raise CliError(f"--s must be at least {MIN_SIDE}, got {args.s}")
    folder = Path(args.out or ".")
    folder.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        inst = generate_instance(args.s, np.random.default_rng(run_seed(args.seed, k)))
        path = folder / f"instance_{args.s}_{k:04d}.txt"
        inst.save(path)
        print(path, file=out)


def cmd_search(args, out):
    if (args.instance is None) == (args.random is None):
        raise CliError("give exactly one of --instance or --random")
    if args.instance is not None:
        inst = Instance.load(args.instance)
    else:
        inst = generate_instance(args.random, np.random.default_rng(run_seed(args.seed, 0)))
    params = _explicit_params(args, args.algorithm)
    if params is None and args.algorithm != "exhaustive":
        needed = " ".join(f"--{f}" for f in get_searcher(args.algorithm).params.__dataclass_fields__)
        raise CliError(f"{args.algorithm} needs {needed}")
    oracle = Oracle.from_instance(inst, trace=bool(args.trace))
    res = search(oracle, args.algorithm, params, rng=np.random.default_rng(run_seed(args.seed, 1)))
    print(
        f"algorithm={args.algorithm} found={res.found.x},{res.found.y} steps={res.steps} "
        f"total={res.total_visits} unique={res.unique_visits} evidence_hits={res.evidence_hits} "
        f"fallback={'yes' if res.fallback_used else 'no'}",
        file=out,
    )
    if args.trace:
        write_trace_csv(res.trace, args.trace)


def cmd_bench(args, out):
    algos = _algos(args.algos)
    table = multi_start_table(algos, args.s, args.restarts, args.n, seed=args.seed,
                              tuner=_tuner(args), workers=_workers(args))
    print(table.format(), file=out)
    if args.out:
        path = Path(args.out)
        table.to_csv(path)
        for r, (row, tuned) in enumerate(zip(table.cells, table.tuned), start=1):
            for k, algo in enumerate(algos):
                cfg = CampaignConfig(algo, args.s, args.n, seed=args.seed, params=tuned[algo].params.as_dict(),
                                     restarts=args.restarts, workers=_workers(args))
                stats = row[algo]
                write_manifest(cfg, path.with_name(f"{path.stem}_r{r}_{algo}.json"), restart=r,
                               mean=stats.mean, std=stats.std, min=stats.min, max=stats.max,
                               converged=stats.converged, genome=tuned[algo].genome)


def cmd_tune(args, out):
    res = ea_tune(args.algorithm, args.s, _tuner(args), seed=args.seed)
    print(f"algorithm={args.algorithm} {format_params(res.params)} fitness={res.fitness:.1f} "
          f"converged={'yes' if res.converged else 'no'} steps={res.steps}", file=out)
    if args.log:
        write_tuning_log(res.history, args.log)


def cmd_match(args, out):
    algos = _algos(args.algos)
    oracles = []
    if args.image:
        if not args.manifest:
            raise CliError("--image needs --manifest")
        templates = load_template_manifest(args.manifest)
        for path in args.image:
            oracles.append(make_template_oracle(load_pgm(path), templates))
    else:
        rng = np.random.default_rng(run_seed(args.seed, 3))
        for _ in range(args.synthetic):
            scene = synthetic_scene(rng)
            oracles.append(make_template_oracle(scene.image, scene.templates))
        print(f"# synthetic stand-in images: {args.synthetic}", file=out)

    def pool(rng):
        return oracles[int(rng.integers(len(oracles)))].fresh()

    params = {}
    for k, algo in enumerate(algos):
        if algo == "exhaustive":
            params[algo] = None
            continue
        given = _explicit_params(args, algo, strict=False)
        if given is None:
            h, w = oracles[0].height, oracles[0].width
            res = ea_tune(algo, max(w, h), _tuner(args), seed=int(run_seed(args.seed, 4, k).generate_state(1)[0]),
                          make_oracle=pool, grid=(w, h))
            params[algo] = res.params
            print(f"# tuned {algo}: {format_params(res.params)}", file=out)
        else:
            params[algo] = get_searcher(algo).params(**given)
    report = speedup_report(params, oracles, runs=args.runs, seed=args.seed)
    print(report.format(), file=out)
    if args.out:
        report.to_csv(args.out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: fresh entropy, printed)")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--workers", type=int, default=None, help=f"worker threads (env {WORKERS_ENV})")
    common.add_argument("-v", "--verbose", action="store_true")

    params = argparse.ArgumentParser(add_help=False)
    for f in PARAM_FLAGS:
        params.add_argument(f"--{f}", type=int, default=None)

    tuning = argparse.ArgumentParser(add_help=False)
    tuning.add_argument("--budget", type=int, default=EaConfig.max_steps, help="max EA generations")
    tuning.add_argument("--runs-per-fitness", type=int, default=EaConfig.runs_per_fitness)

    p = argparse.ArgumentParser(prog="sbesearch", description="Evidence-guided grid search benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write random instances")
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--count", type=int, default=1)

    s = sub.add_parser("search", parents=[common, params], help="run one search")
    s.add_argument("algorithm", type=str.lower, choices=list(ALGORITHMS))
    s.add_argument("--instance")
    s.add_argument("--random", type=int, metavar="S")
    s.add_argument("--trace", metavar="CSV")

    b = sub.add_parser("bench", parents=[common, tuning], help="tuned multi-start comparison table")
    b.add_argument("--algos", default="fts,exhaustive")
    b.add_argument("--s", type=int, required=True)
    b.add_argument("--n", type=int, default=1000)
    b.add_argument("--restarts", type=int, default=3)

    t = sub.add_parser("tune", parents=[common, tuning], help="evolve parameters for one searcher")
    t.add_argument("algorithm", type=str.lower, choices=list(ALGORITHMS))
    t.add_argument("--s", type=int, required=True)
    t.add_argument("--log", metavar="CSV")

    m = sub.add_parser("match", parents=[common, params, tuning], help="template-mode speedup report")
    m.add_argument("--image", nargs="+")
    m.add_argument("--manifest")
    m.add_argument("--synthetic", type=int, default=20, help="number of synthetic images when no --image")
    m.add_argument("--algos", default="fts,exhaustive")
    m.add_argument("--runs", type=int, default=5)
    return p


COMMANDS = {"gen": cmd_gen, "search": cmd_search, "bench": cmd_bench, "tune": cmd_tune, "match": cmd_match}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % 2**63)
    print(f"# seed={args.seed}", file=sys.stderr)
    try:
        COMMANDS[args.command](args, out)
    except (CliError, ValueError, OSError, PgmError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.verbose:
        print(json.dumps({k: v for k, v in vars(args).items() if v is not None}, sort_keys=True), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
