"""Disjoint-set forest used by component extraction and merge steps."""

from __future__ import annotations

import numpy as np


class UnionFind:
    """Union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def labels(self) -> np.ndarray:
        """Component labels 0..c-1, numbered by smallest member index."""
        out = np.empty(len(self.parent), dtype=np.int64)
        order: dict[int, int] = {}
        for i in range(len(self.parent)):
            root = self.find(i)
            if root not in order:
                order[root] = len(order)
            out[i] = order[root]
        return out
