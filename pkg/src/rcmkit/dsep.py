"""d-separation on DAGs, relational d-separation queries, and faithfulness checks."""
from __future__ import annotations

import itertools
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import _kernels
from .agg import AbstractGroundGraph, bar
from .errors import BoundError, DomainError
from .graph import DirectedGraph
from .rcm import GroundGraph, Rcm, ground_graph, require_valid
from .schema import RelationalVariable, intersectable
from .skeleton import RelationalSkeleton, enumerate_skeletons, terminal_set
from .witness import minimal_skeleton


def _mask(graph: DirectedGraph, nodes: Iterable[Hashable]) -> np.ndarray:
    m = np.zeros(len(graph.vertices), dtype=np.bool_)
    for n in nodes:
        try:
            m[graph.index[n]] = True
        except KeyError:
            raise DomainError(f"{n!r} is not a vertex of the graph") from None
    return m


def _check_disjoint(u, v, w) -> None:
    if u & v or u & w or v & w:
        raise DomainError("u, v and w must be pairwise disjoint")


def d_separated(graph: DirectedGraph, u: Iterable, v: Iterable, w: Iterable = ()) -> bool:
    """Whether every trail between ``u`` and ``v`` is blocked by ``w``."""
    u, v, w = set(u), set(v), set(w)
    _check_disjoint(u, v, w)
    if not u or not v:
        return True
    par, ch = graph.parent_csr, graph.child_csr
    reach = _kernels.reachable(par[0], par[1], ch[0], ch[1], _mask(graph, u), _mask(graph, w))
    return not bool(np.any(reach & _mask(graph, v)))


def d_separated_batch(graph: DirectedGraph, queries: Sequence[tuple[Iterable, Iterable, Iterable]]) -> list[bool]:
    """:func:`d_separated` for many ``(u, v, w)`` triples on one graph, in one kernel call."""
    rows = []
    for u, v, w in queries:
        u, v, w = set(u), set(v), set(w)
        _check_disjoint(u, v, w)
        rows.append((_mask(graph, u), _mask(graph, v), _mask(graph, w)))
    if not rows:
        return []
    us, vs, ws = (np.stack(col) for col in zip(*rows))
    par, ch = graph.parent_csr, graph.child_csr
    return [bool(x) for x in _kernels.separated_batch(par[0], par[1], ch[0], ch[1], us, vs, ws)]


def d_connecting_path(graph: DirectedGraph, u: Iterable, v: Iterable, w: Iterable = ()) -> list | None:
    """One active trail from ``u`` to ``v`` given ``w`` (as a vertex list), or None."""
    u, v, w = set(u), set(v), set(w)
    _check_disjoint(u, v, w)
    anc = set(w)
    stack = list(w)
    while stack:
        for p in graph.parents(stack.pop()):
            if p not in anc:
                anc.add(p)
                stack.append(p)
    start = sorted(((x, 0) for x in u), key=repr)
    prev: dict = {s: None for s in start}
    queue = deque(start)
    while queue:
        state = queue.popleft()
        node, d = state
        if node in v and node not in w:
            trail = []
            while state is not None:
                trail.append(state[0])
                state = prev[state]
            return trail[::-1]
        nxt = []
        if d == 0 and node not in w:
            nxt += [(p, 0) for p in graph.parents(node)] + [(c, 1) for c in graph.children(node)]
        elif d == 1:
            if node not in w:
                nxt += [(c, 1) for c in graph.children(node)]
            if node in anc:
                nxt += [(p, 0) for p in graph.parents(node)]
        for s in nxt:
            if s not in prev:
                prev[s] = state
                queue.append(s)
    return None


# ---------------------------------------------------------------------------
# relational queries


@dataclass(frozen=True)
class CiQuery:
    perspective: str
    u: frozenset[RelationalVariable]
    v: frozenset[RelationalVariable]
    w: frozenset[RelationalVariable] = frozenset()

    def __post_init__(self) -> None:
        for name in ("u", "v", "w"):
            object.__setattr__(self, name, frozenset(RelationalVariable(tuple(x.path), x.attr) for x in getattr(self, name)))
        _check_disjoint(self.u, self.v, self.w)
        for rv in self.u | self.v | self.w:
            if rv.path[0] != self.perspective:
                raise DomainError(f"{rv} does not have perspective {self.perspective}")

    @property
    def variables(self) -> frozenset[RelationalVariable]:
        return self.u | self.v | self.w


def agg_d_separated(agg: AbstractGroundGraph, query: CiQuery) -> bool:
    """Barred d-separation on an AGG.

    An IV that lands in the barred conditioning set is conditioned on; if it
    also lands in a barred endpoint set it is dropped from that endpoint set.
    Barred endpoint sets that share an IV are reported as connected.
    """
    if query.perspective != agg.perspective:
        raise DomainError(f"query perspective {query.perspective} differs from AGG perspective {agg.perspective}")
    for rv in query.variables:
        if rv not in agg.index:
            if len(rv.path) > agg.hop_bound:
                raise BoundError(f"{rv} exceeds hop bound {agg.hop_bound}; rebuild the AGG with more hops")
            raise DomainError(f"{rv} is not a relational variable of the schema")
    ub, vb, wb = bar(agg, query.u), bar(agg, query.v), bar(agg, query.w)
    ub, vb = ub - wb, vb - wb
    if ub & vb:
        return False
    return d_separated(agg, ub, vb, wb)


def ground_vertices(skeleton: RelationalSkeleton, variables: Iterable[RelationalVariable], base: str) -> set[tuple[str, str]]:
    """``V|_b`` as item-attribute vertices."""
    out = set()
    for rv in variables:
        out.update((i, rv.attr) for i in terminal_set(skeleton, rv.path, base))
    return out


@dataclass
class OracleWitness:
    skeleton: RelationalSkeleton
    base: str
    trail: list
    index: int


@dataclass
class OracleVerdict:
    separated_within_bound: bool
    witness: OracleWitness | None
    skeletons_checked: int
    bound: int

    def summary(self) -> str:
        if self.separated_within_bound:
            return f"separated within bound ({self.skeletons_checked} skeletons, at most {self.bound} items per class)"
        return f"connected: witness at skeleton #{self.witness.index} base {self.witness.base}"


def _check_skeleton(model: Rcm, query: CiQuery, skeleton: RelationalSkeleton):
    gg = None
    for b in skeleton.of_class(query.perspective):
        u = ground_vertices(skeleton, query.u, b)
        v = ground_vertices(skeleton, query.v, b)
        if not u or not v:
            continue
        w = ground_vertices(skeleton, query.w, b)
        u, v = u - w, v - w
        if u & v:
            x = min(u & v)
            return b, [x]
        if not u or not v:
            continue
        if gg is None:
            gg = ground_graph(model, skeleton)
        if not d_separated(gg, u, v, w):
            return b, d_connecting_path(gg, u, v, w)
    return None


def _check_chunk(args):
    model, query, chunk = args
    for idx, sk in chunk:
        hit = _check_skeleton(model, query, sk)
        if hit is not None:
            return idx, sk, hit
    return None


def _chunks(stream, size):
    it = iter(stream)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def relational_dsep_oracle(model: Rcm, query: CiQuery, max_items_per_class: int, workers: int | None = None) -> OracleVerdict:
    """Check the query on every ground graph of every skeleton within the bound.

    Reports the first d-connection in enumeration order; the result does not
    depend on ``workers``.
    """
    require_valid(model)
    if max_items_per_class < 1:
        raise DomainError("max_items_per_class must be >= 1")
    workers = workers or int(os.environ.get("RCMKIT_WORKERS", "1") or 1)
    stream = enumerate(enumerate_skeletons(model.schema, max_items_per_class))
    if workers <= 1:
        checked = 0
        for idx, sk in stream:
            checked += 1
            hit = _check_skeleton(model, query, sk)
            if hit is not None:
                return OracleVerdict(False, OracleWitness(sk, hit[0], hit[1], idx), checked, max_items_per_class)
        return OracleVerdict(True, None, checked, max_items_per_class)

    chunks = list(_chunks(stream, 64))
    checked = sum(len(c) for c in chunks)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_check_chunk, (model, query, c)) for c in chunks]
        for fut, chunk in zip(futures, chunks):
            res = fut.result()
            if res is not None:
                for f in futures:
                    f.cancel()
                idx, sk, (b, trail) = res
                return OracleVerdict(False, OracleWitness(sk, b, trail, idx), idx + 1, max_items_per_class)
    return OracleVerdict(True, None, checked, max_items_per_class)


# ---------------------------------------------------------------------------
# faithfulness


@dataclass
class FaithfulnessReport:
    applicable: bool
    holds: bool = False
    reason: str = ""
    skeleton: RelationalSkeleton | None = None
    base: str | None = None
    items: dict = field(default_factory=dict)
    singletons: bool = False
    disjoint: bool = False
    subsets_checked: int = 0


def _edge_between(agg: AbstractGroundGraph, a: RelationalVariable, b: RelationalVariable):
    if (a, b) in agg.edges:
        return a, b
    if (b, a) in agg.edges:
        return b, a
    return None


def _rv_intersectable(schema, a: RelationalVariable, b: RelationalVariable) -> bool:
    return a.attr == b.attr and intersectable(schema, a.path, b.path)


def _dependency_path(agg: AbstractGroundGraph, cause, effect):
    provs = agg.provenance[(cause, effect)]
    return provs[0].dependency.path


def _isolation_check(agg: AbstractGroundGraph, members: Sequence[RelationalVariable]):
    """Predicate: no other RV of the AGG reaches a member's terminal vertex."""
    others = [rv for rv in agg.rvs if rv not in members]

    def extra(wit, base, ends):
        s = wit.skeleton
        targets = {(ends[m.path], m.attr) for m in members}
        for rv in others:
            if any((i, rv.attr) in targets for i in terminal_set(s, rv.path, base)):
                return False
        return True

    return extra


def _conditioning_pool(agg, skeleton, base, exclude):
    pool = set()
    for rv in agg.rvs:
        pool |= ground_vertices(skeleton, [rv], base)
    return sorted(pool - set(exclude))


_MAX_POOL = 14


def _subsets(pool, fixed_in=(), limit=_MAX_POOL):
    if len(pool) > limit:
        raise DomainError(f"{len(pool)} conditioning candidates exceed the enumeration limit of {limit}")
    for k in range(len(pool) + 1):
        for combo in itertools.combinations(pool, k):
            yield set(combo) | set(fixed_in)


def check_adjacency_faithfulness(model: Rcm, agg: AbstractGroundGraph, u: RelationalVariable, v: RelationalVariable, max_items_per_class: int | None = None) -> FaithfulnessReport:
    """Dependence of adjacent ``u``, ``v`` under every conditioning set, on a minimal skeleton."""
    schema = model.schema
    if _rv_intersectable(schema, u, v):
        raise DomainError(f"{u} and {v} are intersectable; they cannot be adjacent")
    edge = _edge_between(agg, u, v)
    if edge is None:
        return FaithfulnessReport(False, reason="not adjacent; check not applicable")
    cause, effect = edge
    dep_path = _dependency_path(agg, cause, effect)
    members = [cause, effect]
    sk, b = minimal_skeleton(
        schema, [cause.path, effect.path], edges=[(0, dep_path, 1)], extra=_isolation_check(agg, members)
    )
    return _assess(model, agg, sk, b, members, [(cause, effect)], collider=None, bound=max_items_per_class)


def check_orientation_faithfulness(model: Rcm, agg: AbstractGroundGraph, u: RelationalVariable, v: RelationalVariable, w: RelationalVariable, max_items_per_class: int | None = None) -> FaithfulnessReport:
    """O1/O2 on the minimal skeleton for an unshielded triple ``u - v - w``."""
    schema = model.schema
    e1, e2 = _edge_between(agg, u, v), _edge_between(agg, v, w)
    if e1 is None or e2 is None:
        raise DomainError("u-v and v-w must both be adjacent")
    if _edge_between(agg, u, w) is not None:
        raise DomainError("triple is shielded (u and w are adjacent)")
    if _rv_intersectable(schema, u, v) or _rv_intersectable(schema, v, w):
        raise DomainError("v must not be intersectable with u or w")
    members = [u, v, w]
    paths = [m.path for m in members]
    pos = {m: k for k, m in enumerate(members)}
    edges = [(pos[c], _dependency_path(agg, c, e), pos[e]) for c, e in (e1, e2)]
    sk, b = minimal_skeleton(schema, paths, edges=edges, extra=_isolation_check(agg, members))
    collider = e1[1] == v and e2[1] == v
    return _assess(model, agg, sk, b, members, [e1, e2], collider=collider, bound=max_items_per_class)


def _assess(model, agg, sk, b, members, edges, collider, bound) -> FaithfulnessReport:
    rep = FaithfulnessReport(True, skeleton=sk, base=b)
    vertex = {}
    singletons = True
    for m in members:
        ts = terminal_set(sk, m.path, b)
        singletons &= len(ts) == 1
        if ts:
            vertex[m] = (min(ts), m.attr)
    rep.items = {str(m): vertex.get(m) for m in members}
    rep.singletons = singletons
    others = [rv for rv in agg.rvs if rv not in members]
    hit = set().union(*(ground_vertices(sk, [rv], b) for rv in others)) if others else set()
    rep.disjoint = not (hit & set(vertex.values()))
    if bound is not None and any(len(ids) > bound for ids in sk.items.values()):
        rep.reason = f"minimal skeleton exceeds {bound} items per class"
        return rep
    if not (rep.singletons and rep.disjoint):
        rep.reason = "minimal skeleton postconditions fail"
        return rep
    gg = ground_graph(model, sk)
    for c, e in edges:
        if (vertex[c], vertex[e]) not in gg.edges:
            rep.reason = f"ground edge {vertex[c]} -> {vertex[e]} missing"
            return rep
    if collider is None:
        a, z = vertex[members[0]], vertex[members[1]]
        pool = _conditioning_pool(agg, sk, b, [a, z])
        sets = _subsets(pool)
    else:
        a, y, z = (vertex[m] for m in members)
        pool = _conditioning_pool(agg, sk, b, [a, y, z])
        sets = _subsets(pool, fixed_in=[y] if collider else ())
    count = 0
    for cond in sets:
        count += 1
        if d_separated(gg, {a}, {z}, cond):
            rep.subsets_checked = count
            rep.reason = f"blocked by {sorted(cond)}"
            return rep
    rep.subsets_checked = count
    rep.holds = True
    rep.reason = "collider (O1)" if collider else ("chain/fork (O2)" if collider is False else "adjacent")
    return rep


def adjacent_pairs(agg: AbstractGroundGraph) -> list[tuple[RelationalVariable, RelationalVariable]]:
    return sorted(agg.rves)


def unshielded_triples(agg: AbstractGroundGraph) -> list[tuple[RelationalVariable, RelationalVariable, RelationalVariable]]:
    """RV triples ``u - v - w`` with ``u``, ``w`` non-adjacent (``u < w`` to avoid mirrors)."""
    nbrs: dict = {}
    for a, c in agg.rves:
        nbrs.setdefault(a, set()).add(c)
        nbrs.setdefault(c, set()).add(a)
    out = []
    for v, ns in nbrs.items():
        for u, w in itertools.combinations(sorted(ns), 2):
            if w not in nbrs.get(u, ()):
                out.append((u, v, w))
    return sorted(out)
