"""Compare the numba kernels with their plain Python versions.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]

Each row times one kernel on the same inputs both ways and checks that the
outputs agree. The jitted timings exclude compilation (one warm-up call).
"""
from __future__ import annotations

import argparse
import itertools
import random
import time

import numpy as np

from rcmkit import _kernels
from rcmkit.fixtures import fixture_counterexample_41
from rcmkit.graph import DirectedGraph
from rcmkit.schema import enumerate_paths
from rcmkit.skeleton import enumerate_skeletons


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def terminal_set_workload():
    fx = fixture_counterexample_41()
    schema = fx.model.schema
    cls_idx = {c: k for k, c in enumerate(schema.item_classes)}
    jobs = []
    for sk in itertools.islice(enumerate_skeletons(schema, 2), 0, None, 3):
        indptr, indices = sk.csr
        for b in sk.of_class("E1"):
            for path in enumerate_paths(schema, "E1", 9):
                classes = np.array([cls_idx[c] for c in path], dtype=np.int64)
                jobs.append((indptr, indices, sk.item_class, classes, sk.index[b]))

    def run(fn):
        return lambda: [fn(*job).tolist() for job in jobs]

    return f"terminal_set ({len(jobs)} calls)", run(_kernels.terminal_set), run(_kernels._terminal_set_py)


def batch_workload(n=60, k=400, seed=0):
    rng = random.Random(seed)
    g = DirectedGraph(range(n), [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.08])
    masks = np.zeros((3, k, n), dtype=np.bool_)
    for q in range(k):
        nodes = rng.sample(range(n), 2 + rng.randint(0, 6))
        masks[0, q, nodes[0]] = masks[1, q, nodes[1]] = True
        masks[2, q, nodes[2:]] = True
    par, ch = g.parent_csr, g.child_csr
    args = (par[0], par[1], ch[0], ch[1], *masks)

    def run(fn):
        return lambda: fn(*args).tolist()

    return f"separated_batch ({k} queries, {n} nodes)", run(_kernels.separated_batch), run(_kernels._separated_batch_py)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        print("numba unavailable or disabled (RCMKIT_DISABLE_NUMBA); both columns run plain Python")
    print(f"{'kernel':<42} {'numba s':>10} {'python s':>10} {'speedup':>8}")
    for label, jit, py in (terminal_set_workload(), batch_workload(seed=args.seed)):
        jit()  # compile
        tj, a = _best(jit, args.repeat)
        tp, b = _best(py, args.repeat)
        if a != b:
            raise SystemExit(f"{label}: outputs differ")
        print(f"{label:<42} {tj:>10.4f} {tp:>10.4f} {tp / tj:>7.1f}x")


if __name__ == "__main__":
    main()
