"""Evidence-template search on grayscale images.

A target template and several evidence templates are scored against an image
by mean absolute error; a score under the threshold marks the anchor as the
target (psi) or as evidence. The resulting oracle drives the same searchers
as the synthetic grids.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import ndimage

from .core import chebyshev
from .oracle import Oracle
from .search import get_searcher


class PgmError(ValueError):
    pass


class PgmFormatError(PgmError):
    """Not a binary (P5) graymap."""


class PgmHeaderError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


class PgmMaxvalError(PgmError):
    pass


class AmbiguousTargetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrayImage:
    pixels: np.ndarray  # uint8, shape (height, width)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError("pixels must be a 2-D array")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", np.ascontiguousarray(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)

    def crop(self, x, y, w, h) -> GrayImage:
        return GrayImage(self.pixels[y : y + h, x : x + w].copy())


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*")


def _header_token(data: bytes, at: int) -> tuple[bytes, int]:
    at = _TOKEN.match(data, at).end()
    end = at
    while end < len(data) and not data[end : end + 1].isspace() and data[end : end + 1] != b"#":
        end += 1
    if end == at:
        raise PgmHeaderError("unexpected end of header")
    return data[at:end], end


def parse_pgm(data: bytes) -> GrayImage:
    if data[:2] != b"P5":
        raise PgmFormatError(f"unsupported format {data[:2]!r}; only binary P5 graymaps are read")
    at = 2
    vals = []
    for _ in range(3):
        tok, at = _header_token(data, at)
        if not tok.isdigit():
            raise PgmHeaderError(f"non-numeric header field {tok!r}")
        vals.append(int(tok))
    width, height, maxval = vals
    if maxval < 1 or maxval > 255:
        raise PgmMaxvalError(f"maxval {maxval} not supported (need 1..255)")
    if at >= len(data) or not data[at : at + 1].isspace():
        raise PgmHeaderError("missing whitespace after maxval")
    at += 1
    need = width * height
    payload = data[at : at + need]
    if len(payload) < need:
        raise PgmTruncatedError(f"expected {need} pixel bytes, got {len(payload)}")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy())


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def save_pgm(image: GrayImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (image.width, image.height))
        fh.write(image.pixels.tobytes())


def mae(template: GrayImage, image: GrayImage, anchor) -> float:
    """Mean absolute error of ``template`` laid with its top-left corner at ``anchor``."""
    x, y = anchor
    if x < 0 or y < 0 or x + template.width > image.width or y + template.height > image.height:
        raise ValueError(f"template of {template.width}x{template.height} overflows the image at {tuple(anchor)}")
    region = image.pixels[y : y + template.height, x : x + template.width].astype(np.int32)
    return float(np.abs(template.pixels.astype(np.int32) - region).sum()) / template.pixels.size


def build_average_template(patches) -> GrayImage:
    """Pixelwise mean of equally sized patches, rounded half up."""
    patches = list(patches)
    if not patches:
        raise ValueError("need at least one patch")
    shape = patches[0].pixels.shape
    if any(p.pixels.shape != shape for p in patches):
        raise ValueError("patches differ in size")
    total = np.sum([p.pixels.astype(np.int64) for p in patches], axis=0)
    k = len(patches)
    return GrayImage(((2 * total + k) // (2 * k)).astype(np.uint8))


@njit(cache=True, nogil=True)
def _mae_map(template, image):
    th, tw = template.shape
    oh = image.shape[0] - th + 1
    ow = image.shape[1] - tw + 1
    out = np.empty((oh, ow), dtype=np.float64)
    area = th * tw
    for y in range(oh):
        for x in range(ow):
            acc = 0
            for i in range(th):
                for j in range(tw):
                    d = np.int32(template[i, j]) - np.int32(image[y + i, x + j])
                    acc += d if d >= 0 else -d
            out[y, x] = acc / area
    return out


def mae_map(template: GrayImage, image: GrayImage) -> np.ndarray:
    """MAE at every anchor where the template fits; shape (H - th + 1, W - tw + 1)."""
    if template.width > image.width or template.height > image.height:
        raise ValueError("template larger than image")
    return _mae_map(template.pixels, image.pixels)


@dataclass(frozen=True)
class TemplateSet:
    target: GrayImage
    evidence: tuple  # of (GrayImage, (dx, dy)) relative to the target anchor
    tau_target: float
    tau_evidence: float
    delta: int

    def __post_init__(self):
        ev = tuple((img, (int(off[0]), int(off[1]))) for img, off in self.evidence)
        object.__setattr__(self, "evidence", ev)
        for _, off in ev:
            if chebyshev((0, 0), off) > self.delta:
                raise ValueError(f"evidence offset {off} lies beyond delta={self.delta}")


def load_template_manifest(path) -> TemplateSet:
    """Read ``key=value`` lines: target=path, evidenceN=path@dx,dy, tau_target, tau_evidence, delta."""
    base = os.path.dirname(os.path.abspath(path))
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed manifest line: {line!r}")
            entries[key.strip()] = value.strip()
    evidence = []
    for key in sorted((k for k in entries if k.startswith("evidence")), key=lambda k: int(k[8:] or 0)):
        m = re.fullmatch(r"(.+)@(-?\d+),(-?\d+)", entries[key])
        if m is None:
            raise ValueError(f"{key} must look like path@dx,dy")
        evidence.append((load_pgm(os.path.join(base, m.group(1))), (int(m.group(2)), int(m.group(3)))))
    offsets = [off for _, off in evidence]
    delta = int(entries["delta"]) if "delta" in entries else max((chebyshev((0, 0), o) for o in offsets), default=0)
    return TemplateSet(
        target=load_pgm(os.path.join(base, entries["target"])),
        evidence=tuple(evidence),
        tau_target=float(entries["tau_target"]),
        tau_evidence=float(entries["tau_evidence"]),
        delta=delta,
    )


def save_template_manifest(templates: TemplateSet, path, stem="template") -> None:
    base = os.path.dirname(os.path.abspath(path))
    lines = [f"target={stem}_target.pgm"]
    save_pgm(templates.target, os.path.join(base, f"{stem}_target.pgm"))
    for k, (img, (dx, dy)) in enumerate(templates.evidence, start=1):
        name = f"{stem}_evidence{k}.pgm"
        save_pgm(img, os.path.join(base, name))
        lines.append(f"evidence{k}={name}@{dx},{dy}")
    lines += [
        f"tau_target={templates.tau_target!r}",
        f"tau_evidence={templates.tau_evidence!r}",
        f"delta={templates.delta}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class TemplateOracle(Oracle):
    """Oracle over template anchors; scores come from one MAE scan per template at build time.

    The score maps are dropped after classification unless ``keep_scores``.
    """

    def __init__(self, image: GrayImage, templates: TemplateSet, trace=False, keep_scores=False):
        target = mae_map(templates.target, image)
        hits = np.argwhere(target < templates.tau_target)
        if len(hits) != 1:
            raise AmbiguousTargetError(
                f"{len(hits)} anchors score below tau_target={templates.tau_target}; need exactly one"
            )
        h, w = target.shape
        evidence = np.zeros((h, w), dtype=bool)
        ev_maps = []
        for img, _ in templates.evidence:
            m = mae_map(img, image)
            fit = m[:h, :w] < templates.tau_evidence
            evidence[: fit.shape[0], : fit.shape[1]] |= fit
            if keep_scores:
                ev_maps.append(m)
        (py, px), = hits
        evidence[py, px] = False
        super().__init__(w, h, (px, py), evidence.astype(np.uint8), (0, 0), trace)
        self.image = image
        self.templates = templates
        self.target_scores = target if keep_scores else None
        self.evidence_scores = ev_maps if keep_scores else None

    def evidence_positions(self) -> np.ndarray:
        ys, xs = np.nonzero(self.mask)
        return np.column_stack((xs, ys))

    def conforms(self) -> bool:
        """Every evidence anchor lies within delta of the target anchor."""
        ev = self.evidence_positions()
        if len(ev) == 0:
            return False
        d = np.maximum(np.abs(ev[:, 0] - self.psi.x), np.abs(ev[:, 1] - self.psi.y))
        return bool(d.max() <= self.templates.delta)

    def fresh(self, trace=False) -> TemplateOracle:
        """Same classification, zeroed counters: one per search run."""
        other = self.copy(trace=trace)
        other.cnt[:] = 0
        other.seen[:] = 0
        if trace:
            other._trace[:] = 0
        return other

    def copy(self, trace=None):
        other = super().copy(trace)
        other.__class__ = TemplateOracle
        for name in ("image", "templates", "target_scores", "evidence_scores"):
            setattr(other, name, getattr(self, name))
        return other


def make_template_oracle(image: GrayImage, templates: TemplateSet, trace=False, keep_scores=False) -> TemplateOracle:
    return TemplateOracle(image, templates, trace, keep_scores)


@dataclass
class SyntheticScene:
    image: GrayImage
    templates: TemplateSet
    target_anchor: tuple
    evidence_anchors: list = field(default_factory=list)


def _texture(rng, shape, sigma, contrast=45.0):
    raw = ndimage.gaussian_filter(rng.normal(size=shape), sigma, mode="wrap")
    raw = (raw - raw.mean()) / raw.std()
    return np.clip(128 + contrast * raw, 0, 255)


def synthetic_scene(
    rng,
    size: int = 512,
    patch: int = 17,
    n_evidence: int = 4,
    delta: int = 51,
    sigma: float = 2.0,
    evidence_sigma: float = 6.0,
    evidence_contrast: float = 80.0,
    background_contrast: float = 25.0,
    noise: float = 6.0,
    samples: int = 10,
    tau_target: float = 12.0,
    tau_evidence: float = 30.0,
    attempts: int = 20,
) -> SyntheticScene:
    """Random-texture image with a planted target and ``n_evidence`` planted evidence patches.

    Stand-in for real scans: templates are the average of ``samples`` noisy
    copies of each planted patch. Scenes whose target is not unique, or whose
    evidence anchors stray beyond ``delta``, are redrawn.
    """
    for _ in range(attempts):
        pixels = _texture(rng, (size, size), sigma, background_contrast)
        span = size - patch + 1
        tx, ty = (int(v) for v in rng.integers(delta, span - delta, size=2))
        anchors = [(tx, ty)]
        offsets = []
        while len(offsets) < n_evidence:
            off = tuple(int(v) for v in rng.integers(-delta + 2, delta - 1, size=2))
            ex, ey = tx + off[0], ty + off[1]
            if all(chebyshev((ex, ey), a) >= patch for a in anchors):
                anchors.append((ex, ey))
                offsets.append(off)
        # smooth evidence patches score low over a small neighbourhood, not one anchor
        bases = [_texture(rng, (patch, patch), sigma) if k == 0 else
                 _texture(rng, (patch, patch), evidence_sigma, evidence_contrast)
                 for k in range(len(anchors))]
        for (ax, ay), base in zip(anchors, bases):
            planted = base + rng.normal(0, noise, base.shape)
            pixels[ay : ay + patch, ax : ax + patch] = planted
        image = GrayImage(np.clip(np.rint(pixels), 0, 255).astype(np.uint8))
        tmpl = [
            build_average_template(
                GrayImage(np.clip(np.rint(b + rng.normal(0, noise, b.shape)), 0, 255).astype(np.uint8))
                for _ in range(samples)
            )
            for b in bases
        ]
        templates = TemplateSet(tmpl[0], tuple(zip(tmpl[1:], offsets)), tau_target, tau_evidence, delta)
        try:
            oracle = TemplateOracle(image, templates)
        except AmbiguousTargetError:
            continue
        if oracle.psi == (tx, ty) and oracle.conforms():
            return SyntheticScene(image, templates, (tx, ty), anchors[1:])
    raise RuntimeError("could not draw a conforming synthetic scene")


@dataclass
class SpeedupReport:
    algorithms: list
    visits: np.ndarray  # (repetitions, algorithms): mean evaluated anchors per cell

    def percent_faster(self) -> np.ndarray:
        base = self.visits[:, self.algorithms.index("exhaustive")][:, None]
        return 100.0 * (base - self.visits) / base

    def mean_row(self) -> np.ndarray:
        return self.percent_faster().mean(axis=0)

    def format(self) -> str:
        pct = self.percent_faster()
        lines = ["run".ljust(6) + "".join(a.rjust(12) for a in self.algorithms)]
        for i, row in enumerate(pct, start=1):
            lines.append(str(i).ljust(6) + "".join(f"{v:12.2f}" for v in row))
        lines.append("mean".ljust(6) + "".join(f"{v:12.2f}" for v in self.mean_row()))
        return "\n".join(lines) + "\n(percent fewer evaluated positions than exhaustive; synthetic images)"

    def to_csv(self, path) -> None:
        import csv

        pct = self.percent_faster()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run", *self.algorithms])
            for i, row in enumerate(pct, start=1):
                w.writerow([i, *(f"{v:.4f}" for v in row)])
            w.writerow(["mean", *(f"{v:.4f}" for v in self.mean_row())])


def speedup_report(algorithms: dict, oracles, runs: int = 5, seed: int = 0) -> SpeedupReport:
    """Run every algorithm once per oracle per repetition with fresh seeds.

    ``algorithms`` maps names to parameter objects or dicts (None for exhaustive);
    ``oracles`` is a list of TemplateOracle, reused with zeroed counters.
    """
    names = list(algorithms)
    if "exhaustive" not in names:
        names.append("exhaustive")
    oracles = list(oracles)
    visits = np.zeros((runs, len(names)))
    for r in range(runs):
        for k, name in enumerate(names):
            searcher = get_searcher(name)
            params = algorithms.get(name) or searcher.params()
            if isinstance(params, dict):
                params = searcher.params(**params)
            total = 0
            for i, oracle in enumerate(oracles):
                ss = np.random.SeedSequence(entropy=seed, spawn_key=(r, k, i))
                total += searcher.run(oracle.fresh(), params, np.random.default_rng(ss)).steps
            visits[r, k] = total / len(oracles)
    return SpeedupReport(names, visits)
