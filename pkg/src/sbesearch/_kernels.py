"""Compiled inner loops shared by every searcher.

Oracle state is passed around as plain arrays so that numba can inline it:

* ``mask``  uint8 (mh, mw): 1 where a cell is evidence, windowed at ``meta[4:6]``
* ``meta``  int64: width, height, psi_x, psi_y, mask_origin_x, mask_origin_y
* ``cnt``   int64: total visits, unique visits, evidence hits, found flag
* ``seen``  uint8 (height, width): cells evaluated at least once
* ``trace`` int32 (cap, 3): x, y, outcome per visit; ``cap == 0`` disables it

Every routine returns FOUND as soon as psi is hit so callers can unwind.
"""

import numpy as np
from numba import njit

MISS = 0
EVIDENCE = 1
FOUND = 2
CAPPED = 3

_opts = dict(cache=True, nogil=True)
# helpers take arrays but never allocate; without NRT their calls skip refcounting
_leaf = dict(_opts, _nrt=False)


@njit(**_leaf)
def visit(mask, meta, cnt, seen, trace, x, y):
    t = cnt[0]
    cnt[0] = t + 1
    if seen[y, x] == 0:
        seen[y, x] = 1
        cnt[1] += 1
    if x == meta[2] and y == meta[3]:
        r = FOUND
        cnt[3] = 1
    else:
        mx = x - meta[4]
        my = y - meta[5]
        r = MISS
        if 0 <= mx < mask.shape[1] and 0 <= my < mask.shape[0]:
            if mask[my, mx] != 0:
                r = EVIDENCE
                cnt[2] += 1
    if t < trace.shape[0]:
        trace[t, 0] = x
        trace[t, 1] = y
        trace[t, 2] = r
    return r


@njit(**_opts)
def seed_rng(seed):
    np.random.seed(seed)


@njit(**_opts)
def random_start(meta):
    return np.random.randint(0, meta[0]), np.random.randint(0, meta[1])


@njit(**_leaf)
def pos_wrap(x, y, d, gamma, w, h):
    if gamma:
        return (x + d) % w, y % h
    return x % w, (y + d) % h


@njit(**_opts)
def pos(x, y, d, w, h):
    return pos_wrap(x, y, d, np.random.random() < 0.5, w, h)


@njit(**_leaf)
def exhaustive(mask, meta, cnt, seen, trace):
    for y in range(meta[1]):
        for x in range(meta[0]):
            if visit(mask, meta, cnt, seen, trace, x, y) == FOUND:
                return FOUND
    return MISS


@njit(**_leaf)
def stretch(mask, meta, cnt, seen, trace, x, y, yc, height, complete):
    """Anchor plus ``height`` rows of widths 3, 5, ... in direction ``yc``.

    Returns on the first Evidence unless ``complete``, in which case the rows
    are finished and EVIDENCE reports that any was seen.
    """
    w = meta[0]
    h = meta[1]
    res = MISS
    r = visit(mask, meta, cnt, seen, trace, x % w, y % h)
    if r == FOUND or (r == EVIDENCE and not complete):
        return r
    if r == EVIDENCE:
        res = EVIDENCE
    xa = x
    for _ in range(height):
        y += yc
        x -= 1
        xa += 1
        for col in range(x, xa + 1):
            r = visit(mask, meta, cnt, seen, trace, col % w, y % h)
            if r == FOUND:
                return FOUND
            if r == EVIDENCE:
                if not complete:
                    return EVIDENCE
                res = EVIDENCE
    return res


@njit(**_leaf)
def triangle(mask, meta, cnt, seen, trace, x, y, c, marks, complete):
    """One fractal triangle: seed stretch, then growth while count < c or evidence seen.

    ``h`` counts rows including the apex, so every stretch is called with
    ``h - 1`` and each growth tiles the previous triangle without overlap.
    Evidence seen by any of the three stretches keeps the next growth alive.
    ``marks`` (len >= 1) receives the visit total after the seed and each growth.
    Returns FOUND, CAPPED (growth would exceed the grid) or MISS.
    """
    big = max(meta[0], meta[1])
    count = 0
    yc = -1
    h = 2
    w = 3
    r = stretch(mask, meta, cnt, seen, trace, x, y, yc, h - 1, complete)
    if r == FOUND:
        return FOUND
    seen_evidence = r == EVIDENCE
    nmark = 0
    if marks.shape[0] > 0:
        marks[0] = cnt[0]
        nmark = 1
    while count < c or seen_evidence:
        if h >= big:
            return CAPPED
        yc = -yc
        count += 1
        seen_evidence = False
        half = (w + 1) // 2
        yo = y - yc * (h - 1)
        r = stretch(mask, meta, cnt, seen, trace, x - half, yo, yc, h - 1, complete)
        if r == FOUND:
            return FOUND
        seen_evidence = seen_evidence or r == EVIDENCE
        r = stretch(mask, meta, cnt, seen, trace, x + half, yo, yc, h - 1, complete)
        if r == FOUND:
            return FOUND
        seen_evidence = seen_evidence or r == EVIDENCE
        r = stretch(mask, meta, cnt, seen, trace, x, y - yc * (2 * h - 1), yc, h - 1, complete)
        if r == FOUND:
            return FOUND
        seen_evidence = seen_evidence or r == EVIDENCE
        h = 2 * h
        w = 2 * w + 1
        y = y - yc * (h - 1)
        if nmark < marks.shape[0]:
            marks[nmark] = cnt[0]
            nmark += 1
    return MISS


@njit(**_opts)
def fts(mask, meta, cnt, seen, trace, t, d, c, seed):
    seed_rng(seed)
    x, y = random_start(meta)
    marks = np.zeros(0, dtype=np.int64)
    capped = False
    for _ in range(t):
        r = triangle(mask, meta, cnt, seen, trace, x, y, c, marks, True)
        if r == FOUND:
            return 0
        if r == CAPPED:
            capped = True
            break
        x, y = pos(x, y, d, meta[0], meta[1])
    if not capped:
        # the pseudocode seeds one more triangle after the last move
        if stretch(mask, meta, cnt, seen, trace, x, y, -1, 1, True) == FOUND:
            return 0
    exhaustive(mask, meta, cnt, seen, trace)
    return 1


@njit(**_leaf)
def ring(mask, meta, cnt, seen, trace, x, y, radius):
    """Perimeter of the Chebyshev square of ``radius``, row-major from the top-left."""
    w = meta[0]
    h = meta[1]
    r_any = MISS
    for i in range(-radius, radius + 1):
        if i == -radius or i == radius:
            step = 1
        else:
            step = 2 * radius
        j = -radius
        while j <= radius:
            r = visit(mask, meta, cnt, seen, trace, (x + j) % w, (y + i) % h)
            if r == FOUND:
                return FOUND
            if r == EVIDENCE:
                r_any = EVIDENCE
            j += step
    return r_any


@njit(**_opts)
def ils(mask, meta, cnt, seen, trace, k, a, seed):
    seed_rng(seed)
    w = meta[0]
    h = meta[1]
    tw = w // k
    th = h // k
    limit = 64 * w * h
    while True:
        order = np.random.permutation(k * k)
        for q in order:
            sx = (q % k) * tw
            sy = (q // k) * th
            for _ in range(a):
                px = sx + np.random.randint(0, tw)
                py = sy + np.random.randint(0, th)
                r = visit(mask, meta, cnt, seen, trace, px, py)
                if r == FOUND:
                    return 0
                if r == EVIDENCE:
                    for yy in range(sy, sy + th):
                        for xx in range(sx, sx + tw):
                            if visit(mask, meta, cnt, seen, trace, xx, yy) == FOUND:
                                return 0
        if cnt[0] > limit:
            break
    exhaustive(mask, meta, cnt, seen, trace)
    return 1


@njit(**_opts)
def vns1(mask, meta, cnt, seen, trace, t, m, d, seed):
    seed_rng(seed)
    w = meta[0]
    h = meta[1]
    x, y = random_start(meta)
    for _ in range(t):
        r = visit(mask, meta, cnt, seen, trace, x, y)
        if r == FOUND:
            return 0
        if r == EVIDENCE:
            for yy in range(y - m, y + m + 1):
                for xx in range(x - m, x + m + 1):
                    if visit(mask, meta, cnt, seen, trace, xx % w, yy % h) == FOUND:
                        return 0
        x, y = pos(x, y, d, w, h)
    exhaustive(mask, meta, cnt, seen, trace)
    return 1


@njit(**_opts)
def vns2(mask, meta, cnt, seen, trace, t, d, seed):
    seed_rng(seed)
    w = meta[0]
    h = meta[1]
    big = max(w, h)
    x, y = random_start(meta)
    for _ in range(t):
        r = visit(mask, meta, cnt, seen, trace, x, y)
        if r == FOUND:
            return 0
        if r == EVIDENCE:
            radius = 1
            while radius < big:
                if ring(mask, meta, cnt, seen, trace, x, y, radius) == FOUND:
                    return 0
                radius += 1
            break
        x, y = pos(x, y, d, w, h)
    exhaustive(mask, meta, cnt, seen, trace)
    return 1


@njit(**_opts)
def vns3(mask, meta, cnt, seen, trace, t, d, g, seed):
    seed_rng(seed)
    w = meta[0]
    h = meta[1]
    big = max(w, h)
    x, y = random_start(meta)
    for _ in range(t):
        seen_evidence = False
        for i in range(-1, 2):
            for j in range(-1, 2):
                r = visit(mask, meta, cnt, seen, trace, (x + j) % w, (y + i) % h)
                if r == FOUND:
                    return 0
                if r == EVIDENCE:
                    seen_evidence = True
        count = 1
        capped = False
        while count < g or seen_evidence:
            count += 1
            if count >= big:
                capped = True
                break
            r = ring(mask, meta, cnt, seen, trace, x, y, count)
            if r == FOUND:
                return 0
            if r == EVIDENCE:
                seen_evidence = True
        if capped:
            break
        x, y = pos(x, y, d, w, h)
    exhaustive(mask, meta, cnt, seen, trace)
    return 1
