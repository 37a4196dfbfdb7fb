"""Inner loops over array-encoded graphs.

Each kernel is written once in the numba nopython subset. With numba
available (and ``RCMKIT_DISABLE_NUMBA`` unset) the module exports the jitted
versions; otherwise the plain Python functions are used as-is. The raw Python
versions stay reachable as ``<name>_py`` for benchmarking and cross-checks.

Graphs are passed in CSR form: ``indptr`` (n+1,) and ``indices``.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("RCMKIT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by RCMKIT_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised by the fallback test run
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def _terminal_set(indptr, indices, item_class, path_classes, base):
    """Items reached from ``base`` along ``path_classes`` without revisiting.

    ``path_classes[0]`` must be the class of ``base``. Items that belong to an
    earlier level are excluded from every later level.
    """
    n = item_class.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    frontier[0] = base
    size = 1
    visited[base] = True
    for level in range(1, path_classes.shape[0]):
        want = path_classes[level]
        nsize = 0
        for f in range(size):
            u = frontier[f]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if not visited[v] and item_class[v] == want:
                    visited[v] = True
                    nxt[nsize] = v
                    nsize += 1
        for f in range(nsize):
            frontier[f] = nxt[f]
        size = nsize
        if size == 0:
            break
    out = frontier[:size].copy()
    out.sort()
    return out


def _reachable(par_ptr, par_idx, ch_ptr, ch_idx, src, cond):
    """Nodes with an active trail from some ``src`` node given ``cond``.

    Reachability over (node, direction) states; direction 0 means the trail
    arrived from a child (moving up), 1 from a parent (moving down).
    """
    n = src.shape[0]
    # ancestors of the conditioning set (inclusive)
    anc = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        if cond[i]:
            anc[i] = True
            stack[top] = i
            top += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for k in range(par_ptr[u], par_ptr[u + 1]):
            p = par_idx[k]
            if not anc[p]:
                anc[p] = True
                stack[top] = p
                top += 1

    seen = np.zeros((n, 2), dtype=np.bool_)
    reach = np.zeros(n, dtype=np.bool_)
    qn = np.empty(2 * n, dtype=np.int64)
    qd = np.empty(2 * n, dtype=np.int64)
    top = 0
    for i in range(n):
        if src[i]:
            qn[top] = i
            qd[top] = 0
            top += 1
            seen[i, 0] = True
    while top > 0:
        top -= 1
        u = qn[top]
        d = qd[top]
        if not cond[u]:
            reach[u] = True
        if d == 0:
            if not cond[u]:
                for k in range(par_ptr[u], par_ptr[u + 1]):
                    p = par_idx[k]
                    if not seen[p, 0]:
                        seen[p, 0] = True
                        qn[top] = p
                        qd[top] = 0
                        top += 1
                for k in range(ch_ptr[u], ch_ptr[u + 1]):
                    c = ch_idx[k]
                    if not seen[c, 1]:
                        seen[c, 1] = True
                        qn[top] = c
                        qd[top] = 1
                        top += 1
        else:
            if not cond[u]:
                for k in range(ch_ptr[u], ch_ptr[u + 1]):
                    c = ch_idx[k]
                    if not seen[c, 1]:
                        seen[c, 1] = True
                        qn[top] = c
                        qd[top] = 1
                        top += 1
            if anc[u]:
                for k in range(par_ptr[u], par_ptr[u + 1]):
                    p = par_idx[k]
                    if not seen[p, 0]:
                        seen[p, 0] = True
                        qn[top] = p
                        qd[top] = 0
                        top += 1
    return reach


def _make_separated_batch(reachable_fn):
    def _separated_batch(par_ptr, par_idx, ch_ptr, ch_idx, us, vs, ws):
        """Row-wise d-separation verdicts for boolean query masks of shape (k, n)."""
        k = us.shape[0]
        out = np.empty(k, dtype=np.bool_)
        for q in range(k):
            reach = reachable_fn(par_ptr, par_idx, ch_ptr, ch_idx, us[q], ws[q])
            sep = True
            for i in range(us.shape[1]):
                if vs[q, i] and reach[i]:
                    sep = False
                    break
            out[q] = sep
        return out

    return _separated_batch


_terminal_set_py = _terminal_set
_reachable_py = _reachable
_separated_batch_py = _make_separated_batch(_reachable_py)

terminal_set = njit(cache=True)(_terminal_set)
reachable = njit(cache=True)(_reachable)
separated_batch = njit(_make_separated_batch(reachable)) if HAS_NUMBA else _separated_batch_py


def to_csr(n: int, pairs) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays for ``pairs`` of (row, col) node indices."""
    counts = np.zeros(n + 1, dtype=np.int64)
    rows = [a for a, _ in pairs]
    cols = [b for _, b in pairs]
    for a in rows:
        counts[a + 1] += 1
    indptr = np.cumsum(counts)
    indices = np.empty(len(rows), dtype=np.int64)
    fill = indptr[:-1].copy()
    for a, b in zip(rows, cols):
        indices[fill[a]] = b
        fill[a] += 1
    return indptr, indices
