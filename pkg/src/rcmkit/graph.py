"""Minimal immutable DAG container shared by ground graphs and AGGs."""
from __future__ import annotations

from collections import deque
from functools import cached_property
from typing import Generic, Hashable, Iterable, TypeVar

import numpy as np

from . import _kernels

V = TypeVar("V", bound=Hashable)


class DirectedGraph(Generic[V]):
    def __init__(self, vertices: Iterable[V], edges: Iterable[tuple[V, V]]):
        self.vertices: tuple[V, ...] = tuple(sorted(set(vertices), key=_sort_key))
        self.edges: frozenset[tuple[V, V]] = frozenset(edges)
        vset = set(self.vertices)
        for a, b in self.edges:
            if a not in vset or b not in vset:
                raise ValueError(f"edge {a!r} -> {b!r} uses an unknown vertex")

    @cached_property
    def index(self) -> dict[V, int]:
        return {v: k for k, v in enumerate(self.vertices)}

    @cached_property
    def parent_csr(self) -> tuple[np.ndarray, np.ndarray]:
        idx = self.index
        return _kernels.to_csr(len(self.vertices), sorted((idx[b], idx[a]) for a, b in self.edges))

    @cached_property
    def child_csr(self) -> tuple[np.ndarray, np.ndarray]:
        idx = self.index
        return _kernels.to_csr(len(self.vertices), sorted((idx[a], idx[b]) for a, b in self.edges))

    def parents(self, v: V) -> tuple[V, ...]:
        ptr, ind = self.parent_csr
        k = self.index[v]
        return tuple(self.vertices[j] for j in ind[ptr[k] : ptr[k + 1]])

    def children(self, v: V) -> tuple[V, ...]:
        ptr, ind = self.child_csr
        k = self.index[v]
        return tuple(self.vertices[j] for j in ind[ptr[k] : ptr[k + 1]])

    def adjacent(self, a: V, b: V) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def find_cycle(self) -> list[V] | None:
        """A directed cycle if one exists (Kahn's algorithm, then a walk over the rest)."""
        indeg = {v: 0 for v in self.vertices}
        for _, b in self.edges:
            indeg[b] += 1
        queue = deque(v for v in self.vertices if indeg[v] == 0)
        removed = 0
        while queue:
            v = queue.popleft()
            removed += 1
            for c in self.children(v):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if removed == len(self.vertices):
            return None
        left = {v for v, d in indeg.items() if d > 0}
        v = min(left, key=_sort_key)
        path, seen = [], {}
        while v not in seen:
            seen[v] = len(path)
            path.append(v)
            v = next(c for c in self.children(v) if c in left)
        return path[seen[v] :] + [v]

    def __len__(self) -> int:
        return len(self.vertices)


def _sort_key(v) -> str:
    return repr(v)
