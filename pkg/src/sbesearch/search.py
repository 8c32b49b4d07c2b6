"""The seven searchers behind one interface, each run until psi is visited."""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np

from . import _kernels as K
from .core import Coord, Instance
from .oracle import Oracle, VisitOutcome


@dataclass(frozen=True)
class SearchOutcome:
    found: Coord
    total_visits: int
    unique_visits: int
    evidence_hits: int
    fallback_used: bool
    steps: int
    trace: np.ndarray | None = None


class _Params:
    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if int(v) != v or v < 1:
                raise ValueError(f"{type(self).__name__}.{f.name} must be an integer >= 1, got {v!r}")
            object.__setattr__(self, f.name, int(v))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class FtsParams(_Params):
    t: int
    d: int
    c: int


@dataclass(frozen=True)
class IlsParams(_Params):
    t: int
    a: int


@dataclass(frozen=True)
class Vns1Params(_Params):
    t: int
    m: int
    d: int


@dataclass(frozen=True)
class Vns2Params(_Params):
    t: int
    d: int


@dataclass(frozen=True)
class Vns3Params(_Params):
    t: int
    d: int
    g: int


@dataclass(frozen=True)
class TabuParams(Vns2Params):
    pass


@dataclass(frozen=True)
class ExhaustiveParams(_Params):
    pass


def kernel_seed(rng) -> int:
    """Reduce an int seed or a Generator to the uint32 seed the kernels expect."""
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**32))
    if rng is None:
        return int(np.random.default_rng().integers(0, 2**32))
    return int(rng) % 2**32


def pos_step(p, d: int, rng, w: int, h: int, gamma: bool | None = None) -> Coord:
    """Move ``d`` cells along x (gamma true) or y (gamma false), wrapping on the torus."""
    if d < 1:
        raise ValueError("step distance must be >= 1")
    if gamma is None:
        gamma = rng.random() < 0.5
    return Coord(*K.pos_wrap(int(p[0]), int(p[1]), int(d), bool(gamma), int(w), int(h)))


def _call(oracle: Oracle, fn: Callable, *args):
    # kernels write the trace into a preallocated buffer; a dry run on a copy sizes it exactly
    if oracle.tracing:
        dry = oracle.copy(trace=False)
        fn(*dry.state(), *args)
        oracle.reserve(dry.total - oracle.total)
    return fn(*oracle.state(), *args)


def triangle_stretch(oracle: Oracle, x: int, y: int, y_c: int, h: int, complete: bool = False) -> bool:
    """Visit an anchor cell plus ``h`` widening rows in direction ``y_c``.

    Returns True on the first evidence hit, or with ``complete`` after finishing
    every row (the mode FTS uses). Hitting psi sets ``oracle.found`` and
    returns early with False.
    """
    if y_c not in (-1, 1) or h < 0:
        raise ValueError("y_c must be -1 or +1 and h >= 0")
    return _call(oracle, K.stretch, int(x), int(y), int(y_c), int(h), bool(complete)) == K.EVIDENCE


def triangle_growth(oracle: Oracle, x: int, y: int, c: int, complete: bool = True) -> list[int]:
    """Run one fractal triangle (seed plus growth) and return the visits added per phase.

    The first entry is the seed triangle; entry k is growth iteration k.
    Growth continues past ``c`` while evidence has been seen.
    """
    start = oracle.total
    marks = np.zeros(64, dtype=np.int64)
    _call(oracle, K.triangle, int(x), int(y), int(c), marks, bool(complete))
    done = [int(m) for m in marks if m > 0]
    if not done:
        return [oracle.total - start]
    return np.diff([start] + done).tolist()


def _finish(oracle: Oracle, fallback, tabu=False) -> SearchOutcome:
    if not oracle.found:
        raise RuntimeError("search ended without visiting psi")
    return SearchOutcome(
        found=oracle.psi,
        total_visits=oracle.total,
        unique_visits=oracle.unique,
        evidence_hits=oracle.evidence_hits,
        fallback_used=bool(fallback),
        steps=oracle.unique if tabu else oracle.total,
        trace=oracle.trace,
    )


def exhaustive_search(oracle: Oracle, params=None, rng=None) -> SearchOutcome:
    _call(oracle, K.exhaustive)
    return _finish(oracle, False)


def fts_search(oracle: Oracle, params: FtsParams, rng) -> SearchOutcome:
    fb = _call(oracle, K.fts, params.t, params.d, params.c, kernel_seed(rng))
    return _finish(oracle, fb)


def ils_tiles(t: int, w: int, h: int) -> int:
    """Largest k with k*k <= t whose k x k tiling divides the grid evenly."""
    k = max(1, int(np.sqrt(t)))
    while k > 1 and not (k * k <= t and w % k == 0 and h % k == 0):
        k -= 1
    return k


def ils_search(oracle: Oracle, params: IlsParams, rng) -> SearchOutcome:
    k = ils_tiles(params.t, oracle.width, oracle.height)
    fb = _call(oracle, K.ils, k, params.a, kernel_seed(rng))
    return _finish(oracle, fb)


def vns1_search(oracle: Oracle, params: Vns1Params, rng) -> SearchOutcome:
    fb = _call(oracle, K.vns1, params.t, params.m, params.d, kernel_seed(rng))
    return _finish(oracle, fb)


def vns2_search(oracle: Oracle, params: Vns2Params, rng) -> SearchOutcome:
    fb = _call(oracle, K.vns2, params.t, params.d, kernel_seed(rng))
    return _finish(oracle, fb)


def vns3_search(oracle: Oracle, params: Vns3Params, rng) -> SearchOutcome:
    fb = _call(oracle, K.vns3, params.t, params.d, params.g, kernel_seed(rng))
    return _finish(oracle, fb)


def tabu_search(oracle: Oracle, params: TabuParams, rng) -> SearchOutcome:
    # same control flow as VNS2; the seen matrix is the tabu list, so steps = unique visits
    fb = _call(oracle, K.vns2, params.t, params.d, kernel_seed(rng))
    return _finish(oracle, fb, tabu=True)


@dataclass(frozen=True)
class Searcher:
    name: str
    params: type
    run: Callable


ALGORITHMS = {
    s.name: s
    for s in [
        Searcher("fts", FtsParams, fts_search),
        Searcher("ils", IlsParams, ils_search),
        Searcher("vns1", Vns1Params, vns1_search),
        Searcher("vns2", Vns2Params, vns2_search),
        Searcher("vns3", Vns3Params, vns3_search),
        Searcher("tabu", TabuParams, tabu_search),
        Searcher("exhaustive", ExhaustiveParams, exhaustive_search),
    ]
}


def get_searcher(name: str) -> Searcher:
    try:
        return ALGORITHMS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}") from None


def make_params(name: str, **values):
    return get_searcher(name).params(**values)


def search(target, algorithm: str, params=None, rng=None, trace=False) -> SearchOutcome:
    """Run ``algorithm`` on an Instance (fresh oracle) or an existing Oracle."""
    oracle = Oracle.from_instance(target, trace=trace) if isinstance(target, Instance) else target
    searcher = get_searcher(algorithm)
    if params is None:
        params = searcher.params()
    elif isinstance(params, dict):
        params = searcher.params(**params)
    return searcher.run(oracle, params, rng)


def write_trace_csv(trace: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "x", "y", "outcome"])
        for i, (x, y, r) in enumerate(np.asarray(trace).tolist(), start=1):
            w.writerow([i, x, y, VisitOutcome(r).letter])
