"""Slow, obviously-correct reference implementations used to check the fast ones."""
from __future__ import annotations

import math
from collections import deque
from fractions import Fraction


def flood_fill_partition(img) -> set[frozenset]:
    """8-connected components as a set of pixel sets, by breadth-first search."""
    h, w = len(img), len(img[0])
    seen = [[False] * w for _ in range(h)]
    parts = set()
    for y in range(h):
        for x in range(w):
            if not img[y][x] or seen[y][x]:
                continue
            comp = []
            queue = deque([(y, x)])
            seen[y][x] = True
            while queue:
                cy, cx = queue.popleft()
                comp.append((cy, cx))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and img[ny][nx] and not seen[ny][nx]:
                            seen[ny][nx] = True
                            queue.append((ny, nx))
            parts.add(frozenset(comp))
    return parts


def otsu_brute(values) -> int:
    """Try every threshold t (class 0 is <= t); first t with maximal between-class variance."""
    values = list(values)
    n = len(values)
    best, best_t = -1.0, None
    levels = sorted(set(values))
    if len(levels) == 1:
        return levels[0]
    for t in range(256):
        c0 = [v for v in values if v <= t]
        c1 = [v for v in values if v > t]
        if not c0 or not c1:
            continue
        w0, w1 = len(c0) / n, len(c1) / n
        m0, m1 = sum(c0) / len(c0), sum(c1) / len(c1)
        var = w0 * w1 * (m0 - m1) ** 2
        if var > best + 1e-9 * max(1.0, best):
            best, best_t = var, t
    return best_t


def morph_3x3(img, op) -> list[list[bool]]:
    """op=all for erosion, op=any for dilation; outside pixels are background."""
    h, w = len(img), len(img[0])
    out = [[False] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            hood = [img[y + dy][x + dx] if 0 <= y + dy < h and 0 <= x + dx < w else False
                    for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
            out[y][x] = op(hood)
    return out


def knn_scan(samples, query, k, alphabet) -> str:
    """Sort every sample by (distance, alphabet rank), vote, break ties by mean distance then rank."""
    rank = {a: i for i, a in enumerate(alphabet)}
    scored = sorted(((math.fsum((a - b) ** 2 for a, b in zip(feats, query)), rank[label], label)
                     for feats, label in samples))[:k]
    tally: dict[str, list[float]] = {}
    for d2, _, label in scored:
        tally.setdefault(label, []).append(math.sqrt(d2))
    return min(tally, key=lambda lab: (-len(tally[lab]), sum(tally[lab]) / len(tally[lab]), rank[lab]))


def sum_sq_distance(x, y) -> float:
    return math.sqrt(math.fsum((a - b) * (a - b) for a, b in zip(x, y)))


def resample_indices(h: int, w: int, rows: int = 30, cols: int = 15):
    """Center-aligned nearest-neighbor source index for each output pixel."""
    ri = [math.floor((i + Fraction(1, 2)) * h / rows) for i in range(rows)]
    ci = [math.floor((j + Fraction(1, 2)) * w / cols) for j in range(cols)]
    return ri, ci
