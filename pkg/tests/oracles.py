"""Naive reference implementations used as test oracles.

Written for obviousness, not speed: plain loops, per-pair distances, no
incremental caching, and no imports from the code paths they check (other
than k-means, whose output the minmax oracle consumes as given).
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def dist(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def cos(a, b) -> float:
    return float(np.dot(a, b))


def unit_rows(rng, n, d):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def half_up(x):
    return int(math.floor(x + 0.5 + 1e-9))


def keep_count(n, ratio):
    return min(n, max(1, half_up(n * ratio)))


TIE = 1e-12


def naive_minmax(points, centroid, count):
    """Literal greedy: recompute min distance to the selected set every step.

    Values within 1e-12 of the best are ties (lowest index wins); squared
    distances are compared.
    """
    n = len(points)
    sims = [cos(points[i], centroid) for i in range(n)]
    first = next(i for i in range(n) if sims[i] >= max(sims) - TIE)
    selected = [first]
    radii = []
    while True:
        radius = max(min(dist(points[u], points[s]) for s in selected) for u in range(n))
        radii.append(radius)
        if len(selected) == count:
            break
        gaps = {u: min(dist(points[u], points[s]) ** 2 for s in selected) for u in range(n) if u not in selected}
        far = max(gaps.values())
        selected.append(min(u for u, g in gaps.items() if g >= far - TIE))
    return selected, radii


def naive_quotas(sizes, ratio, total):
    raw = [s * ratio for s in sizes]
    q = [min(s, math.floor(r + 1e-9)) for s, r in zip(sizes, raw)]
    rem = [r - f for r, f in zip(raw, q)]
    order = sorted(range(len(sizes)), key=lambda j: (-rem[j], j))
    left = total - sum(q)
    while left > 0:
        for j in order:
            if left == 0:
                break
            if q[j] < sizes[j]:
                q[j] += 1
                left -= 1
    return q


def naive_em_select(ids, points, clustering_ratio, retention_ratio, clusters):
    """Minmax per cluster on a given k-means result; ``ids`` sorted ascending."""
    n = len(ids)
    target = keep_count(n, retention_ratio)
    if target == n:
        return sorted(ids)
    k = clusters.n_clusters
    members = [[i for i in range(n) if clusters.assignments[i] == j] for j in range(k)]
    quotas = naive_quotas([len(m) for m in members], retention_ratio, target)
    kept = []
    for j in range(k):
        if quotas[j] == 0:
            continue
        pts = [points[i] for i in members[j]]
        sel, _ = naive_minmax(pts, clusters.centroids[j], quotas[j])
        kept.extend(ids[members[j][s]] for s in sel)
    return sorted(kept)


def naive_minmax_norm(v):
    lo, hi = min(v), max(v)
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return [0.5] * len(v)
    return [(x - lo) / (hi - lo) for x in v]


def naive_ew_scores(ids, points, edges, balance):
    n = len(ids)
    col_sum = [0.0] * n
    for ent, text, w in edges:
        col_sum[ids.index(text)] += w
    imp = naive_minmax_norm(col_sum)
    sim_tot = [sum(cos(points[i], points[j]) for j in range(n) if j != i) for i in range(n)]
    div = [1.0 - x for x in naive_minmax_norm(sim_tot)]
    return [balance * a + (1 - balance) * b for a, b in zip(imp, div)]


def naive_ew_select(ids, points, edges, retention_ratio, balance):
    r = naive_ew_scores(ids, points, edges, balance)
    ranked = sorted(range(len(ids)), key=lambda i: (-r[i], ids[i]))
    return sorted(ids[i] for i in ranked[: keep_count(len(ids), retention_ratio)])


def naive_dart(ids, points, count, pivot_fraction, seed):
    n = len(ids)
    if count == n:
        return list(ids)
    n_piv = min(n, max(1, half_up(n * pivot_fraction)))
    pivots = sorted(np.random.default_rng(seed).choice(n, size=n_piv, replace=False).tolist())
    alive = set(range(n))
    if count >= n_piv:
        others = [i for i in range(n) if i not in pivots]
        tot = {i: sum(cos(points[i], points[p]) for p in pivots) for i in others}
        for i in sorted(others, key=lambda i: (-tot[i], ids[i])):
            if len(alive) == count:
                break
            alive.discard(i)
    else:
        alive = set(pivots)
        tot = {p: sum(cos(points[p], points[q]) for q in pivots if q != p) for p in pivots}
        for p in sorted(pivots, key=lambda p: (tot[p], ids[p])):
            if len(alive) == count:
                break
            alive.discard(p)
    return [ids[i] for i in sorted(alive)]


def naive_adjacent_fifo(ids, points, count, threshold):
    """Linked-list simulation: remove the earlier of two adjacent survivors, re-link, repeat."""
    alive = list(range(len(ids)))
    changed = True
    while changed:
        changed = False
        for pos in range(len(alive) - 1):
            if cos(points[alive[pos]], points[alive[pos + 1]]) > threshold:
                del alive[pos]
                changed = True
                break
    while len(alive) > count:
        alive.pop(0)
    return [ids[i] for i in alive]


def naive_capacity_evict(ids, points, capacity):
    bank = []
    for i in range(len(ids)):
        if len(bank) < capacity:
            bank.append(i)
            continue
        best, victim = -math.inf, None
        for slot, m in enumerate(bank):
            c = cos(points[m], points[i])
            if c > best:
                best, victim = c, slot
        bank.pop(victim)
        bank.append(i)
    return [ids[i] for i in sorted(bank)]


def best_two_partition(points):
    """Exhaustive spherical k-means optimum for k=2: maximize sum of cluster-sum norms."""
    n = len(points)
    best, labels = -math.inf, None
    for mask in itertools.product((0, 1), repeat=n - 1):
        lab = (0,) + mask
        if 1 not in lab:
            continue
        val = 0.0
        for j in (0, 1):
            s = sum(points[i] for i in range(n) if lab[i] == j)
            val += float(np.linalg.norm(s))
        if val > best:
            best, labels = val, lab
    return labels


def naive_allocation(decayed, sizes, k):
    """Proportional shares, largest remainder (ties to later segment), capped with spill."""
    k = min(k, sum(sizes))
    total = sum(decayed)
    shares = [e / total * k for e in decayed]
    num = [math.floor(s + 1e-9) for s in shares]
    rem = [s - f for s, f in zip(shares, num)]
    order = sorted(range(len(sizes)), key=lambda j: (-rem[j], -j))
    left = k - sum(num)
    for j in order[:left]:
        num[j] += 1
    spill = 0
    for j in range(len(sizes)):
        if num[j] > sizes[j]:
            spill += num[j] - sizes[j]
            num[j] = sizes[j]
    for j in sorted(range(len(sizes)), key=lambda j: (-decayed[j], -j)):
        take = min(spill, sizes[j] - num[j])
        num[j] += take
        spill -= take
    return shares, num
