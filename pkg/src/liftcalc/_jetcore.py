"""Pure numpy implementation of the jet kernels (fallback for ``_jetkernel``)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _subset_pairs(size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index triples (s, t, s^t) for every t subset of s, grouped by s."""
    ss, ts, us, starts = [], [], [], []
    for s in range(size):
        starts.append(len(ss))
        t = s
        while True:
            ss.append(s)
            ts.append(t)
            us.append(s ^ t)
            if t == 0:
                break
            t = (t - 1) & s
    return np.array(ts), np.array(us), np.array(starts)


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ts, us, starts = _subset_pairs(a.shape[0])
    return np.add.reduceat(a[ts] * b[us], starts, axis=0)


def horner(coeffs: np.ndarray, nil: np.ndarray) -> np.ndarray:
    order = coeffs.shape[0] - 1
    acc = np.zeros_like(nil)
    acc[0] = coeffs[order]
    for k in range(order - 1, -1, -1):
        acc = mul(acc, nil)
        acc[0] += coeffs[k]
    return acc
