"""The visit oracle: classifies a cell as psi / evidence / miss and counts evaluations."""

from __future__ import annotations

import enum

import numpy as np

from . import _kernels as K
from .core import Coord, Instance


class VisitOutcome(enum.IntEnum):
    MISS = K.MISS
    EVIDENCE = K.EVIDENCE
    FOUND = K.FOUND

    @property
    def letter(self) -> str:
        return "MEF"[self.value]


class Oracle:
    """Mutable visit counter bound to one grid; owned by exactly one search run.

    Classification uses a window ``mask`` (1 = evidence) anchored at ``origin``
    plus the psi coordinate, so synthetic instances never allocate a payload
    for the whole grid. ``seen`` does cover the grid: it backs the unique
    counter and doubles as the tabu matrix.
    """

    def __init__(self, width, height, psi, mask, origin=(0, 0), trace=False):
        self.width = int(width)
        self.height = int(height)
        self.psi = Coord(int(psi[0]), int(psi[1]))
        self.mask = np.ascontiguousarray(mask, dtype=np.uint8)
        self.meta = np.array(
            [self.width, self.height, self.psi.x, self.psi.y, origin[0], origin[1]],
            dtype=np.int64,
        )
        self.cnt = np.zeros(4, dtype=np.int64)
        self.seen = np.zeros((self.height, self.width), dtype=np.uint8)
        self.tracing = bool(trace)
        self._trace = np.zeros((1024 if trace else 0, 3), dtype=np.int32)

    @classmethod
    def from_instance(cls, inst: Instance, trace=False) -> Oracle:
        px, py = inst.psi
        x0, y0 = max(0, px - inst.delta), max(0, py - inst.delta)
        x1 = min(inst.width - 1, px + inst.delta)
        y1 = min(inst.height - 1, py + inst.delta)
        mask = np.zeros((y1 - y0 + 1, x1 - x0 + 1), dtype=np.uint8)
        if len(inst.evidence):
            mask[inst.evidence[:, 1] - y0, inst.evidence[:, 0] - x0] = 1
        return cls(inst.width, inst.height, inst.psi, mask, (x0, y0), trace)

    @classmethod
    def from_labels(cls, labels, trace=False) -> Oracle:
        """Build from a full label grid: 2 marks psi (exactly once), 1 marks evidence."""
        labels = np.asarray(labels)
        ys, xs = np.nonzero(labels == 2)
        if len(xs) != 1:
            raise ValueError(f"label grid must contain exactly one psi cell, found {len(xs)}")
        mask = (labels == 1).astype(np.uint8)
        return cls(labels.shape[1], labels.shape[0], (xs[0], ys[0]), mask, (0, 0), trace)

    @property
    def total(self) -> int:
        return int(self.cnt[0])

    @property
    def unique(self) -> int:
        return int(self.cnt[1])

    @property
    def evidence_hits(self) -> int:
        return int(self.cnt[2])

    @property
    def found(self) -> bool:
        return bool(self.cnt[3])

    def classify(self, p) -> VisitOutcome:
        """Outcome of ``p`` without touching any counter."""
        x, y = p
        if (x, y) == self.psi:
            return VisitOutcome.FOUND
        mx, my = x - self.meta[4], y - self.meta[5]
        if 0 <= mx < self.mask.shape[1] and 0 <= my < self.mask.shape[0] and self.mask[my, mx]:
            return VisitOutcome.EVIDENCE
        return VisitOutcome.MISS

    def visit(self, p) -> VisitOutcome:
        x, y = int(p[0]), int(p[1])
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"visit outside the {self.width}x{self.height} grid: {(x, y)}")
        if self.tracing:
            self.reserve(1)
        return VisitOutcome(K.visit(self.mask, self.meta, self.cnt, self.seen, self._trace, x, y))

    def reserve(self, extra: int) -> None:
        """Make room for ``extra`` more trace rows."""
        if not self.tracing:
            return
        need = self.total + int(extra)
        if need > len(self._trace):
            grown = np.zeros((max(need, 2 * len(self._trace)), 3), dtype=np.int32)
            grown[: self.total] = self._trace[: self.total]
            self._trace = grown

    @property
    def trace(self) -> np.ndarray | None:
        """``(total, 3)`` array of x, y, outcome; None when tracing is off."""
        if not self.tracing:
            return None
        return self._trace[: self.total].copy()

    def state(self):
        return self.mask, self.meta, self.cnt, self.seen, self._trace

    def copy(self, trace: bool | None = None) -> Oracle:
        other = Oracle.__new__(Oracle)
        other.width, other.height, other.psi = self.width, self.height, self.psi
        other.mask, other.meta = self.mask, self.meta
        other.cnt = self.cnt.copy()
        other.seen = self.seen.copy()
        other.tracing = self.tracing if trace is None else trace
        if other.tracing:
            other._trace = self._trace.copy() if self.tracing else np.zeros((self.total + 1024, 3), np.int32)
        else:
            other._trace = np.zeros((0, 3), dtype=np.int32)
        return other
