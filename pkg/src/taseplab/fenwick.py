"""Complete-binary-tree rate index for weighted event selection.

Leaves hold per-bond rates; internal nodes hold children sums, recomputed
exactly on every update so the root never drifts from the leaf fold.
Selection descends from the root in O(log L).  The numba simulation kernel
carries the same layout and arithmetic inline.
"""

from __future__ import annotations

import numpy as np


class RateTree:
    def __init__(self, size: int):
        self.size = size
        p = 1
        while p < size:
            p *= 2
        self.padded = p
        self.tree = np.zeros(2 * p, dtype=np.float64)

    @classmethod
    def from_rates(cls, rates: np.ndarray) -> "RateTree":
        t = cls(len(rates))
        p = t.padded
        t.tree[p : p + len(rates)] = rates
        for k in range(p - 1, 0, -1):
            t.tree[k] = t.tree[2 * k] + t.tree[2 * k + 1]
        return t

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def get(self, i: int) -> float:
        return float(self.tree[self.padded + i])

    def set(self, i: int, rate: float) -> None:
        k = self.padded + i
        self.tree[k] = rate
        k >>= 1
        while k >= 1:
            self.tree[k] = self.tree[2 * k] + self.tree[2 * k + 1]
            k >>= 1

    def leaves(self) -> np.ndarray:
        return self.tree[self.padded : self.padded + self.size].copy()

    def sample(self, target: float) -> int:
        """Leaf index whose cumulative range contains target in [0, total).

        Zero-rate leaves can only be hit on exact float boundaries; skip
        forward to the next positive leaf in that case.
        """
        k = 1
        while k < self.padded:
            left = self.tree[2 * k]
            if target < left:
                k = 2 * k
            else:
                target -= left
                k = 2 * k + 1
        idx = k - self.padded
        if self.tree[k] <= 0.0:
            for step in range(1, self.size + 1):
                cand = (idx + step) % self.size
                if self.tree[self.padded + cand] > 0.0:
                    return cand
        return idx
