"""Witness skeletons built by identifying the items along a few walks.

A query such as "is there a skeleton and base where these paths meet" is
encoded as walks (class sequences) with some endpoints tied together. Every
walk position is a slot; the solver assigns each slot an item, either one
already placed or a fresh one, by backtracking. Local constraints are
checked as soon as both ends of a link are placed:

* a relationship item has at most one entity item per role,
* an entity with a ``one`` cardinality joins at most one item of that
  relationship class,
* items on one walk are pairwise distinct (bridge burning makes prefix
  terminal sets disjoint, so a walk never revisits an item).

Complete assignments are turned into skeletons (missing roles get fresh
entities, which never change terminal sets of the other items) and handed
to a predicate that evaluates the exact terminal sets.

The search only considers skeletons made of walk items, so a ``None`` answer
means "no witness of this size". Witness sizes are bounded by the total walk
length, which is what the intersectability lemma's constructive argument uses.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ConstructionError, DomainError
from .schema import (
    ONE,
    Path,
    RelationalSchema,
    extend,
    format_path,
    intersectable,
    is_valid_path,
    llrsp,
)
from .skeleton import RelationalSkeleton, terminal_set

Slot = tuple[int, int]  # (walk index, 0-based position)


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass
class Witness:
    skeleton: RelationalSkeleton
    assignment: dict[Slot, str]
    walks: tuple[Path, ...]

    def item(self, walk: int, pos: int) -> str:
        return self.assignment[(walk, pos if pos >= 0 else len(self.walks[walk]) + pos)]


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[Slot, Slot] = {}

    def find(self, x: Slot) -> Slot:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: Slot, b: Slot) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class _State:
    schema: RelationalSchema
    item_cls: list[str] = field(default_factory=list)
    # rel item -> {role: entity item}
    roles: dict[int, dict[int, int]] = field(default_factory=dict)
    # (entity item, rel class) -> set of rel items
    joined: dict[tuple[int, str], set[int]] = field(default_factory=dict)
    link_count: dict[tuple[int, int], int] = field(default_factory=dict)

    def try_link(self, a: int, b: int) -> bool:
        """Add link a~b (one entity, one relationship); False if it breaks a constraint."""
        ca, cb = self.item_cls[a], self.item_cls[b]
        if self.schema.is_entity(ca):
            e, r, ce, cr = a, b, ca, cb
        else:
            e, r, ce, cr = b, a, cb, ca
        key = (r, e)
        if self.link_count.get(key, 0):
            self.link_count[key] += 1
            return True
        role = self.schema.role(cr, ce)
        slot = self.roles.setdefault(r, {})
        if role in slot and slot[role] != e:
            return False
        jset = self.joined.setdefault((e, cr), set())
        if self.schema.card(cr, ce) == ONE and jset and r not in jset:
            return False
        slot[role] = e
        jset.add(r)
        self.link_count[key] = 1
        return True

    def unlink(self, a: int, b: int) -> None:
        if self.schema.is_entity(self.item_cls[a]):
            e, r = a, b
        else:
            e, r = b, a
        key = (r, e)
        self.link_count[key] -= 1
        if self.link_count[key]:
            return
        del self.link_count[key]
        cr, ce = self.item_cls[r], self.item_cls[e]
        del self.roles[r][self.schema.role(cr, ce)]
        self.joined[(e, cr)].discard(r)


def search_walks(
    schema: RelationalSchema,
    walks: Sequence[Sequence[str]],
    ties: Iterable[tuple[Slot, Slot]],
    predicate: Callable[[Witness], bool],
    *,
    prefer_fresh: bool = False,
    budget: int | None = 2_000_000,
) -> Witness | None:
    """Return the first witness (in search order) accepted by ``predicate``.

    ``ties`` use 0-based positions; negative positions count from the end.
    ``budget`` caps the number of partial assignments explored.
    """
    walks = tuple(tuple(w) for w in walks)
    for w in walks:
        if not is_valid_path(schema, w):
            raise DomainError(f"walk {format_path(w)} is not a valid path")
    uf = _UnionFind()
    for wi, w in enumerate(walks):
        for pos in range(len(w)):
            uf.find((wi, pos))
    for a, b in ties:
        a = (a[0], a[1] % len(walks[a[0]]))
        b = (b[0], b[1] % len(walks[b[0]]))
        if walks[a[0]][a[1]] != walks[b[0]][b[1]]:
            raise DomainError(f"tied slots {a} and {b} have different classes")
        uf.union(a, b)

    groups: dict[Slot, list[Slot]] = {}
    order: list[Slot] = []
    for wi, w in enumerate(walks):
        for pos in range(len(w)):
            root = uf.find((wi, pos))
            if root not in groups:
                groups[root] = []
                order.append(root)
            groups[root].append((wi, pos))
    # a tie that forces one walk to revisit an item is unsatisfiable
    for members in groups.values():
        ws = [m[0] for m in members]
        if len(ws) != len(set(ws)):
            return None

    state = _State(schema)
    assign: dict[Slot, int] = {}
    walk_items: list[set[int]] = [set() for _ in walks]
    by_class: dict[str, list[int]] = {}
    explored = 0

    def neighbours_placed(slot: Slot):
        wi, pos = slot
        for q in (pos - 1, pos + 1):
            if 0 <= q < len(walks[wi]) and (wi, q) in assign:
                yield assign[(wi, q)]

    def place(gi: int) -> Witness | None:
        nonlocal explored
        if gi == len(order):
            wit = _materialize(schema, walks, assign, state.item_cls)
            return wit if predicate(wit) else None
        explored += 1
        if budget is not None and explored > budget:
            raise SearchBudgetExceeded(f"walk search exceeded {budget} nodes")
        root = order[gi]
        members = groups[root]
        cls = walks[root[0]][root[1]]
        member_walks = {m[0] for m in members}
        existing = [i for i in by_class.get(cls, []) if not any(i in walk_items[w] for w in member_walks)]
        fresh = len(state.item_cls)
        candidates = ([fresh] + existing) if prefer_fresh else (existing + [fresh])
        for item in candidates:
            if item == fresh:
                state.item_cls.append(cls)
                by_class.setdefault(cls, []).append(item)
            done: list[tuple[int, int]] = []
            ok = True
            for m in members:
                for other in neighbours_placed(m):
                    if state.try_link(item, other):
                        done.append((item, other))
                    else:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                for m in members:
                    assign[m] = item
                    walk_items[m[0]].add(item)
                found = place(gi + 1)
                if found is not None:
                    return found
                for m in members:
                    del assign[m]
                    walk_items[m[0]].discard(item)
            for a, b in reversed(done):
                state.unlink(a, b)
            if item == fresh:
                state.item_cls.pop()
                by_class[cls].pop()
        return None

    return place(0)


def _materialize(schema, walks, assign, item_cls) -> Witness:
    counters: dict[str, int] = {}
    names: list[str] = []
    for cls in item_cls:
        k = counters.get(cls, 0)
        counters[cls] = k + 1
        names.append(f"{cls}:{k}")
    roles: dict[int, dict[int, int]] = {}
    for (wi, pos), item in assign.items():
        if pos + 1 < len(walks[wi]):
            other = assign[(wi, pos + 1)]
            e, r = (item, other) if schema.is_entity(item_cls[item]) else (other, item)
            roles.setdefault(r, {})[schema.role(item_cls[r], item_cls[e])] = e
    items: dict[str, list[str]] = {}
    for k, cls in enumerate(item_cls):
        items.setdefault(cls, []).append(names[k])
    relations: dict[str, list[str]] = {}
    for k, cls in enumerate(item_cls):
        if not schema.is_relationship(cls):
            continue
        members = schema.relationships[cls]
        filled = roles.get(k, {})
        row = []
        for role, ecls in enumerate(members):
            if role in filled:
                row.append(names[filled[role]])
            else:
                c = counters.get(ecls, 0)
                counters[ecls] = c + 1
                pad = f"{ecls}:{c}"
                items.setdefault(ecls, []).append(pad)
                row.append(pad)
        relations[names[k]] = row
    skel = RelationalSkeleton.from_relations(schema, items, relations)
    return Witness(skel, {slot: names[i] for slot, i in assign.items()}, tuple(walks))


# ---------------------------------------------------------------------------
# queries


def intersection_witness(schema: RelationalSchema, p: Sequence[str], q: Sequence[str], **kw) -> Witness | None:
    """Skeleton and base where ``p`` and ``q`` share a terminal item, by direct search."""
    p, q = tuple(p), tuple(q)
    if p[0] != q[0] or p[-1] != q[-1]:
        return None

    def ok(w: Witness) -> bool:
        b, c = w.item(0, 0), w.item(0, -1)
        return c in terminal_set(w.skeleton, p, b) and c in terminal_set(w.skeleton, q, b)

    kw.setdefault("prefer_fresh", True)
    return search_walks(schema, [p, q], [((0, 0), (1, 0)), ((0, -1), (1, -1))], ok, **kw)


def _check_cointer_pre(schema, q, r, p, p2, need_extend: bool) -> None:
    for path in (q, r, p, p2):
        if not is_valid_path(schema, path):
            raise DomainError(f"{format_path(path)} is not a valid path")
    if not (q[0] == p[0] == p2[0]):
        raise DomainError("q, p, p' must share a perspective")
    if q[-1] != r[0] or r[-1] != p[-1]:
        raise DomainError("r must run from q's terminal class to p's terminal class")
    if need_extend and p not in {path for _, path in extend(schema, q, r)}:
        raise DomainError(f"{format_path(p)} is not in extend({format_path(q)}, {format_path(r)})")
    if not intersectable(schema, p, p2):
        raise DomainError(f"{format_path(p)} and {format_path(p2)} are not intersectable")


def co_intersection_witness(
    schema: RelationalSchema,
    q: Sequence[str],
    r: Sequence[str],
    p: Sequence[str],
    p2: Sequence[str],
    *,
    check_pre: bool = True,
    **kw,
) -> Witness | None:
    """Witness for: some base b, some i in Q|b, with R|i ∩ P|b ∩ P'|b non-empty."""
    q, r, p, p2 = (tuple(x) for x in (q, r, p, p2))
    if check_pre:
        _check_cointer_pre(schema, q, r, p, p2, need_extend=True)

    def ok(w: Witness) -> bool:
        s = w.skeleton
        b, i, c = w.item(0, 0), w.item(0, -1), w.item(2, -1)
        return (
            i in terminal_set(s, q, b)
            and c in terminal_set(s, r, i)
            and c in terminal_set(s, p, b)
            and c in terminal_set(s, p2, b)
        )

    ties = [((0, 0), (2, 0)), ((0, 0), (3, 0)), ((1, 0), (0, -1)), ((1, -1), (2, -1)), ((1, -1), (3, -1))]
    return search_walks(schema, [q, r, p, p2], ties, ok, **kw)


def effect_co_intersection_witness(
    schema: RelationalSchema,
    p: Sequence[str],
    r: Sequence[str],
    q: Sequence[str],
    q2: Sequence[str],
    **kw,
) -> Witness | None:
    """Witness for an edge into an intersection: some b, some i in Q|b ∩ Q'|b with R|i ∩ P|b non-empty.

    ``r`` is the dependency's cause path, so the grounded edge runs from the
    P-item to the shared Q-item.
    """
    p, r, q, q2 = (tuple(x) for x in (p, r, q, q2))

    def ok(w: Witness) -> bool:
        s = w.skeleton
        b, i, c = w.item(0, 0), w.item(0, -1), w.item(2, -1)
        return (
            i in terminal_set(s, q, b)
            and i in terminal_set(s, q2, b)
            and c in terminal_set(s, r, i)
            and c in terminal_set(s, p, b)
        )

    # walks: 0=q, 1=r (from q's terminal), 2=p, 3=q'
    ties = [((0, 0), (2, 0)), ((0, 0), (3, 0)), ((1, 0), (0, -1)), ((3, -1), (0, -1)), ((1, -1), (2, -1))]
    return search_walks(schema, [q, r, p, q2], ties, ok, **kw)


def minimal_skeleton(
    schema: RelationalSchema,
    paths: Iterable[Sequence[str]],
    *,
    edges: Iterable[tuple[int, Sequence[str], int]] = (),
    extra: Callable[[Witness, str, Mapping[Path, str]], bool] | None = None,
    budget: int | None = 200_000,
) -> tuple[RelationalSkeleton, str]:
    """Small skeleton and base where each path's terminal set is one distinct item.

    Items are shared along common prefixes as far as the constraints allow;
    the search tries merges before fresh items, so the first prefix that is
    forced to be shared (``llrsp``) is always merged and longer shared
    prefixes are preferred when they keep every terminal set a singleton.

    ``edges`` holds ``(cause_index, cause_path, effect_index)`` triples: the
    terminal item of ``paths[cause_index]`` must lie in ``cause_path``'s
    terminal set from the terminal item of ``paths[effect_index]``, i.e. the
    skeleton must ground that dependency between the two items. ``extra`` is
    an optional further acceptance test.
    """
    plist: list[Path] = []
    remap: list[int] = []
    for path in paths:
        t = tuple(path)
        if t not in plist:
            plist.append(t)
        remap.append(plist.index(t))
    if not plist:
        raise DomainError("minimal_skeleton needs at least one path")
    base_cls = plist[0][0]
    for t in plist:
        if t[0] != base_cls:
            raise DomainError("all paths must share a perspective")
        if not is_valid_path(schema, t):
            raise DomainError(f"{format_path(t)} is not a valid path")
    edge_list = [(remap[a], tuple(r), remap[b]) for a, r, b in edges]
    walks: list[Path] = list(plist)
    ties: list[tuple[Slot, Slot]] = [((0, 0), (k, 0)) for k in range(1, len(plist))]
    for a, r, b in edge_list:
        if r[0] != plist[b][-1] or r[-1] != plist[a][-1]:
            raise DomainError(f"edge path {format_path(r)} does not connect the requested terminals")
        k = len(walks)
        walks.append(r)
        ties += [((k, 0), (b, -1)), ((k, -1), (a, -1))]

    def ok(w: Witness) -> bool:
        s = w.skeleton
        b = w.item(0, 0)
        ends = {}
        for k, t in enumerate(plist):
            end = w.item(k, -1)
            if terminal_set(s, t, b) != {end}:
                return False
            ends[t] = end
        by_cls: dict[str, set[str]] = {}
        for t, end in ends.items():
            if end in by_cls.setdefault(t[-1], set()):
                return False
            by_cls[t[-1]].add(end)
        for k, (a, r, bidx) in enumerate(edge_list):
            if ends[plist[a]] not in terminal_set(s, r, ends[plist[bidx]]):
                return False
        return extra is None or extra(w, b, ends)

    try:
        found = search_walks(schema, walks, ties, ok, prefer_fresh=False, budget=budget)
    except SearchBudgetExceeded as exc:
        raise ConstructionError(f"minimal skeleton search gave up: {exc}") from None
    if found is None:
        pair = _conflicting_pair(schema, plist)
        raise ConstructionError(f"no skeleton realises {', '.join(map(format_path, plist))}{pair}")
    return found.skeleton, found.item(0, 0)


def _conflicting_pair(schema, plist) -> str:
    for i, a in enumerate(plist):
        for b in plist[i + 1 :]:
            if a[-1] == b[-1] and llrsp(schema, a, b) + llrsp(schema, a[::-1], b[::-1]) > min(len(a), len(b)):
                return f" (first conflicting pair: {format_path(a)} / {format_path(b)})"
    return ""
