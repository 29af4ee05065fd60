"""Pure numpy implementations of the sequential hot loops.

These mirror ``_ckernels.pyx`` one for one and are used whenever the
compiled extension is unavailable or ``MEMGC_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np

# squared distances within this of the maximum count as tied
TIE_EPS = 1e-12


def minmax_greedy(x: np.ndarray, first: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Farthest-point selection starting from ``first``.

    Returns selected row indices in selection order and, for each step, the
    covering radius (max over rows of the distance to the selected set).
    Ties go to the lowest row index.
    """
    n = x.shape[0]
    picked = np.empty(count, dtype=np.int64)
    radii = np.empty(count, dtype=np.float64)
    mind2 = np.sum((x - x[first]) ** 2, axis=1)
    mind2[first] = 0.0
    free = np.ones(n, dtype=bool)
    free[first] = False
    picked[0] = first
    for s in range(1, count):
        radii[s - 1] = np.sqrt(mind2.max())
        masked = np.where(free, mind2, -1.0)
        idx = int(np.argmax(masked >= masked.max() - TIE_EPS))
        picked[s] = idx
        free[idx] = False
        np.minimum(mind2, np.sum((x - x[idx]) ** 2, axis=1), out=mind2)
        mind2[idx] = 0.0
    radii[count - 1] = np.sqrt(mind2.max())
    return picked, radii


def adjacent_dedup(x: np.ndarray, threshold: float) -> np.ndarray:
    """Drop the earlier of two adjacent survivors whose cosine exceeds ``threshold``."""
    stack: list[int] = []
    for i in range(x.shape[0]):
        xi = x[i]
        while stack and float(x[stack[-1]] @ xi) > threshold:
            stack.pop()
        stack.append(i)
    return np.asarray(stack, dtype=np.int64)


def capacity_evict(x: np.ndarray, capacity: int) -> np.ndarray:
    """Fixed-capacity bank; each arrival evicts its most similar member (older on ties)."""
    n = x.shape[0]
    if capacity >= n:
        return np.arange(n, dtype=np.int64)
    slot_node = np.arange(capacity, dtype=np.int64)
    bank = np.array(x[:capacity], dtype=np.float64)
    for i in range(capacity, n):
        sims = bank @ x[i]
        best = sims.max()
        ties = np.flatnonzero(sims == best)
        victim = ties[np.argmin(slot_node[ties])]
        slot_node[victim] = i
        bank[victim] = x[i]
    return np.sort(slot_node)
