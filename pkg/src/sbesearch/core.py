"""Search-based-on-evidence problem: instances, generation and closed-form baselines."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

MIN_SIDE = 16


class Coord(NamedTuple):
    x: int
    y: int


def chebyshev(a, b) -> int:
    return max(abs(b[0] - a[0]), abs(b[1] - a[1]))


@dataclass(frozen=True, eq=False)
class Instance:
    """An s x s grid with one searched element ``psi`` and an evidence set.

    ``evidence`` is an ``(n, 2)`` integer array of ``(x, y)`` rows. No per-cell
    payload is stored, so a 2048 x 2048 instance costs O(n) memory.
    """

    width: int
    height: int
    psi: Coord
    evidence: np.ndarray
    delta: int

    def __post_init__(self):
        ev = np.asarray(self.evidence, dtype=np.int64).reshape(-1, 2)
        ev.setflags(write=False)
        object.__setattr__(self, "evidence", ev)
        object.__setattr__(self, "psi", Coord(int(self.psi[0]), int(self.psi[1])))

    @property
    def side(self) -> int:
        return self.width

    def evidence_coords(self) -> list[Coord]:
        return [Coord(int(x), int(y)) for x, y in self.evidence]

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            (self.width, self.height, self.psi, self.delta)
            == (other.width, other.height, other.psi, other.delta)
            and np.array_equal(self.evidence, other.evidence)
        )

    def to_text(self) -> str:
        lines = [f"s={self.width} delta={self.delta} psi={self.psi.x},{self.psi.y}"]
        lines += [f"mu={x},{y}" for x, y in self.evidence]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Instance:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty instance text")
        m = re.fullmatch(r"s=(\d+) delta=(\d+) psi=(\d+),(\d+)", lines[0])
        if m is None:
            raise ValueError(f"malformed instance header: {lines[0]!r}")
        s, delta, px, py = map(int, m.groups())
        evidence = []
        for ln in lines[1:]:
            mm = re.fullmatch(r"mu=(\d+),(\d+)", ln)
            if mm is None:
                raise ValueError(f"malformed evidence line: {ln!r}")
            evidence.append((int(mm.group(1)), int(mm.group(2))))
        return cls(s, s, Coord(px, py), np.array(evidence, dtype=np.int64).reshape(-1, 2), delta)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> Instance:
        with open(path) as fh:
            return cls.from_text(fh.read())


def generate_instance(s: int, rng: np.random.Generator) -> Instance:
    """Place psi uniformly, then ``s // 16`` distinct evidence cells within ``s // 10`` of it."""
    if s < MIN_SIDE:
        raise ValueError(f"side length must be at least {MIN_SIDE}, got {s}")
    n = s // 16
    delta = s // 10
    px, py = (int(v) for v in rng.integers(0, s, size=2))
    x0, x1 = max(0, px - delta), min(s - 1, px + delta)
    y0, y1 = max(0, py - delta), min(s - 1, py + delta)
    ww = x1 - x0 + 1
    area = ww * (y1 - y0 + 1)
    psi_idx = (py - y0) * ww + (px - x0)

    chosen: list[int] = []
    seen = {psi_idx}
    while len(chosen) < n:
        for idx in rng.integers(0, area, size=2 * (n - len(chosen)) + 4).tolist():
            if idx not in seen:
                seen.add(idx)
                chosen.append(idx)
                if len(chosen) == n:
                    break
    idx = np.array(chosen, dtype=np.int64)
    ev = np.column_stack((x0 + idx % ww, y0 + idx // ww))
    return Instance(s, s, Coord(px, py), ev, delta)


def validate_instance(inst: Instance) -> list[str]:
    """Return the violated conditions ("1".."4", plus "distinct"); empty when valid."""
    problems = []
    ev = inst.evidence
    px, py = inst.psi
    if len(ev) and np.any(np.maximum(np.abs(ev[:, 0] - px), np.abs(ev[:, 1] - py)) > inst.delta):
        problems.append("1")
    inside = (
        (ev[:, 0] >= 0) & (ev[:, 0] < inst.width) & (ev[:, 1] >= 0) & (ev[:, 1] < inst.height)
    )
    if not inside.all():
        problems.append("2")
    if len(ev) == 0:
        problems.append("3")
    if not min(inst.width, inst.height) > 2 * inst.delta + 1:
        problems.append("4")
    pairs = {(int(x), int(y)) for x, y in ev}
    if len(pairs) != len(ev) or (px, py) in pairs:
        problems.append("distinct")
    if not (0 <= px < inst.width and 0 <= py < inst.height):
        problems.append("psi")
    return problems


def probability_bounds(s: int, delta: int) -> tuple[Fraction, Fraction]:
    """Marginal 1/s**2 and conditional 1/(2*delta + 1)**2 probabilities of hitting psi."""
    return Fraction(1, s * s), Fraction(1, (2 * delta + 1) ** 2)


def expected_exhaustive_visits(w: int, h: int) -> Fraction:
    """Mean visits of a row-major scan over uniformly placed psi: (wh + 1) / 2."""
    n = w * h
    if n < 1:
        raise ValueError("grid must have at least one cell")
    return Fraction(n + 1, 2)
