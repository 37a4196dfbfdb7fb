"""Relational skeletons, terminal sets, and bounded skeleton enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, SchemaMismatchError
from .schema import ONE, RelationalSchema


@dataclass(frozen=True, eq=False)
class RelationalSkeleton:
    """Items per class plus ``(relationship item, entity item, role)`` links."""

    schema: RelationalSchema
    items: Mapping[str, tuple[str, ...]]
    links: frozenset[tuple[str, str, int]]

    def __post_init__(self) -> None:
        items = {c: tuple(sorted(ids)) for c, ids in self.items.items() if ids}
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "links", frozenset(self.links))
        self._check()

    @classmethod
    def from_relations(
        cls,
        schema: RelationalSchema,
        items: Mapping[str, Iterable[str]],
        relations: Mapping[str, Sequence[str]],
    ) -> "RelationalSkeleton":
        """Build from ``{relationship item: [entity item per role]}``."""
        return cls(
            schema,
            {c: tuple(v) for c, v in items.items()},
            frozenset((r, e, k) for r, es in relations.items() for k, e in enumerate(es)),
        )

    def _check(self) -> None:
        owner: dict[str, str] = {}
        for c, ids in self.items.items():
            self.schema.require(c)
            for i in ids:
                if i in owner:
                    raise SchemaMismatchError(f"item {i} listed under {owner[i]} and {c}")
                owner[i] = c
        roles: dict[str, dict[int, str]] = {}
        for r, e, k in self.links:
            rc, ec = owner.get(r), owner.get(e)
            if rc is None or ec is None:
                raise SchemaMismatchError(f"link ({r}, {e}) references an unknown item")
            if not self.schema.is_relationship(rc):
                raise SchemaMismatchError(f"{r} is not a relationship item")
            members = self.schema.relationships[rc]
            if not 0 <= k < len(members) or members[k] != ec:
                raise SchemaMismatchError(f"link ({r}, {e}) does not match role {k} of {rc}")
            slot = roles.setdefault(r, {})
            if k in slot and slot[k] != e:
                raise SchemaMismatchError(f"{r} has two entities in role {k}")
            slot[k] = e
        for rc in self.schema.relationships:
            arity = len(self.schema.relationships[rc])
            for r in self.items.get(rc, ()):
                if len(roles.get(r, {})) != arity:
                    raise SchemaMismatchError(f"{r} must link one entity per role of {rc}")
        used: dict[tuple[str, str], str] = {}
        for r, e, k in self.links:
            rc = owner[r]
            if self.schema.card(rc, owner[e]) == ONE:
                prev = used.setdefault((rc, e), r)
                if prev != r:
                    raise SchemaMismatchError(f"{e} takes part in two {rc} items under cardinality one")
        object.__setattr__(self, "_owner", owner)

    # -- lookup -----------------------------------------------------------

    def class_of(self, item: str) -> str:
        try:
            return self._owner[item]  # type: ignore[attr-defined]
        except KeyError:
            raise DomainError(f"unknown item {item!r}") from None

    def of_class(self, cls: str) -> tuple[str, ...]:
        return self.items.get(cls, ())

    @property
    def n_items(self) -> int:
        return len(self._owner)  # type: ignore[attr-defined]

    @cached_property
    def order(self) -> tuple[str, ...]:
        return tuple(i for c in sorted(self.items) for i in self.items[c])

    @cached_property
    def index(self) -> dict[str, int]:
        return {item: k for k, item in enumerate(self.order)}

    @cached_property
    def item_class(self) -> np.ndarray:
        cls_idx = {c: k for k, c in enumerate(self.schema.item_classes)}
        return np.array([cls_idx[self.class_of(i)] for i in self.order], dtype=np.int64)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = []
        idx = self.index
        for r, e, _ in self.links:
            pairs.append((idx[r], idx[e]))
            pairs.append((idx[e], idx[r]))
        pairs.sort()
        return _kernels.to_csr(len(self.order), pairs)

    def neighbors(self, item: str) -> frozenset[str]:
        indptr, indices = self.csr
        k = self.index[item]
        return frozenset(self.order[j] for j in indices[indptr[k] : indptr[k + 1]])

    def relations(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str | None]] = {}
        for r, e, k in self.links:
            slots = out.setdefault(r, [None] * len(self.schema.relationships[self.class_of(r)]))
            slots[k] = e
        return {r: tuple(v) for r, v in sorted(out.items())}  # type: ignore[arg-type]

    def __repr__(self) -> str:
        return f"RelationalSkeleton(items={dict(self.items)!r}, relations={self.relations()!r})"


# ---------------------------------------------------------------------------
# terminal sets


def _check_base(skeleton: RelationalSkeleton, path: Sequence[str], base: str) -> None:
    if not path:
        raise DomainError("empty path")
    if skeleton.class_of(base) != path[0]:
        raise DomainError(f"base {base} is not of class {path[0]}")


def terminal_set(skeleton: RelationalSkeleton, path: Sequence[str], base: str) -> frozenset[str]:
    """Items of the path's terminal class reached from ``base`` under bridge burning."""
    _check_base(skeleton, path, base)
    cls_idx = {c: k for k, c in enumerate(skeleton.schema.item_classes)}
    try:
        classes = np.array([cls_idx[c] for c in path], dtype=np.int64)
    except KeyError as exc:
        raise SchemaMismatchError(f"unknown class {exc.args[0]!r}") from None
    indptr, indices = skeleton.csr
    found = _kernels.terminal_set(indptr, indices, skeleton.item_class, classes, skeleton.index[base])
    return frozenset(skeleton.order[k] for k in found)


def terminal_levels(skeleton: RelationalSkeleton, path: Sequence[str], base: str) -> list[frozenset[str]]:
    """Terminal sets of every prefix ``P^{1:l}``, l = 1..|P|."""
    _check_base(skeleton, path, base)
    levels = [frozenset([base])]
    burned = {base}
    for cls in path[1:]:
        nxt = {
            i
            for j in levels[-1]
            for i in skeleton.neighbors(j)
            if i not in burned and skeleton.class_of(i) == cls
        }
        burned |= nxt
        levels.append(frozenset(nxt))
    return levels


# ---------------------------------------------------------------------------
# enumeration


def _relation_choices(schema: RelationalSchema, rel: str, counts: Mapping[str, int], bound: int):
    """All multisets (sorted tuples) of <= bound entity tuples for ``rel``."""
    members = schema.relationships[rel]
    tuples = list(itertools.product(*(range(counts[e]) for e in members)))
    one_roles = [k for k, e in enumerate(members) if schema.card(rel, e) == ONE]
    out = []
    for size in range(bound + 1):
        for combo in itertools.combinations_with_replacement(tuples, size):
            ok = True
            for k in one_roles:
                col = [t[k] for t in combo]
                if len(col) != len(set(col)):
                    ok = False
                    break
            if ok:
                out.append(combo)
    return out


def _canonical_key(entity_classes, counts, rels, choice):
    """Lexicographically least relabelling of entity items within each class."""
    perm_sets = [list(itertools.permutations(range(counts[e]))) for e in entity_classes]
    pos = {e: k for k, e in enumerate(entity_classes)}
    best = None
    for perms in itertools.product(*perm_sets):
        key = []
        for rel_members, combo in zip(rels, choice):
            maps = [perms[pos[e]] for e in rel_members]
            key.append(tuple(sorted(tuple(m[x] for m, x in zip(maps, t)) for t in combo)))
        key = tuple(key)
        if best is None or key < best:
            best = key
    return best


def _make_skeleton(schema, entity_classes, counts, rel_names, choice) -> RelationalSkeleton:
    items = {e: tuple(f"{e}:{j}" for j in range(counts[e])) for e in entity_classes}
    links = set()
    for rel, combo in zip(rel_names, choice):
        members = schema.relationships[rel]
        ids = []
        for j, t in enumerate(combo):
            rid = f"{rel}:{j}"
            ids.append(rid)
            for k, (e, x) in enumerate(zip(members, t)):
                links.add((rid, f"{e}:{x}", k))
        items[rel] = tuple(ids)
    return RelationalSkeleton(schema, items, frozenset(links))


def enumerate_skeletons(schema: RelationalSchema, max_items_per_class: int) -> Iterator[RelationalSkeleton]:
    """Every skeleton with at most ``max_items_per_class`` items per class, up to isomorphism.

    Isomorphism here means renaming items within their class. Emission order
    is deterministic: by entity counts, then by relationship choices.
    """
    if max_items_per_class < 1:
        raise DomainError("max_items_per_class must be >= 1")
    entity_classes = sorted(schema.entities)
    rel_names = sorted(schema.relationships)
    rels = [schema.relationships[r] for r in rel_names]
    for count_vec in itertools.product(range(max_items_per_class + 1), repeat=len(entity_classes)):
        counts = dict(zip(entity_classes, count_vec))
        options = [_relation_choices(schema, r, counts, max_items_per_class) for r in rel_names]
        seen: set = set()
        for choice in itertools.product(*options):
            key = _canonical_key(entity_classes, counts, rels, choice)
            if key in seen:
                continue
            seen.add(key)
            yield _make_skeleton(schema, entity_classes, counts, rel_names, key)


def count_skeletons(schema: RelationalSchema, max_items_per_class: int) -> int:
    return sum(1 for _ in enumerate_skeletons(schema, max_items_per_class))


def minimal_skeleton(schema: RelationalSchema, paths, **kwargs):
    """See :func:`rcmkit.witness.minimal_skeleton`."""
    from .witness import minimal_skeleton as _impl

    return _impl(schema, paths, **kwargs)
