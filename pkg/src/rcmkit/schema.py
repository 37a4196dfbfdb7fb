"""Relational schemas and relational path algebra.

Paths are plain tuples of class identifiers. All positions in the public API
are 1-based to match the usual ``P^{i:j}`` notation, so ``subpath(p, 1, 1)``
is the base class alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import DomainError, SchemaMismatchError

ONE = "one"
MANY = "many"

Path = tuple[str, ...]


class RelationalVariable(NamedTuple):
    path: Path
    attr: str

    @property
    def is_canonical(self) -> bool:
        return len(self.path) == 1

    @property
    def base(self) -> str:
        return self.path[0]

    def __str__(self) -> str:
        return f"{format_path(self.path)}.{self.attr}"


@dataclass(frozen=True, eq=False)
class RelationalSchema:
    """Entity classes, relationship classes, attributes and cardinalities.

    ``relationships`` maps each relationship class to its ordered tuple of
    participating entity classes; ``cards`` maps ``(relationship, entity)`` to
    ``"one"`` or ``"many"``.
    """

    entities: frozenset[str]
    relationships: Mapping[str, tuple[str, ...]]
    attributes: Mapping[str, frozenset[str]] = field(default_factory=dict)
    cards: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", frozenset(self.entities))
        object.__setattr__(
            self, "relationships", {r: tuple(es) for r, es in self.relationships.items()}
        )
        object.__setattr__(
            self, "attributes", {c: frozenset(a) for c, a in self.attributes.items()}
        )
        object.__setattr__(self, "cards", dict(self.cards))
        self._check()

    @classmethod
    def build(
        cls,
        entities: Iterable[str],
        relationships: Mapping[str, Sequence[str]],
        attributes: Mapping[str, Iterable[str]] | None = None,
        cards: Mapping[tuple[str, str], str] | None = None,
        default_card: str = MANY,
    ) -> "RelationalSchema":
        """Convenience constructor filling unspecified cardinalities with ``default_card``."""
        full = {(r, e): default_card for r, es in relationships.items() for e in es}
        full.update(cards or {})
        return cls(
            frozenset(entities),
            {r: tuple(es) for r, es in relationships.items()},
            {c: frozenset(a) for c, a in (attributes or {}).items()},
            full,
        )

    def _check(self) -> None:
        overlap = self.entities & set(self.relationships)
        if overlap:
            raise SchemaMismatchError(f"classes declared as both entity and relationship: {sorted(overlap)}")
        for r, es in self.relationships.items():
            if len(es) < 2:
                raise SchemaMismatchError(f"relationship {r} needs at least two entity classes")
            if len(set(es)) != len(es):
                raise SchemaMismatchError(f"relationship {r} repeats an entity class")
            for e in es:
                if e not in self.entities:
                    raise SchemaMismatchError(f"relationship {r} references undeclared entity {e}")
        expected = {(r, e) for r, es in self.relationships.items() for e in es}
        if set(self.cards) != expected:
            missing = sorted(expected - set(self.cards))
            extra = sorted(set(self.cards) - expected)
            raise SchemaMismatchError(f"cardinalities mismatch: missing {missing}, extra {extra}")
        for key, value in self.cards.items():
            if value not in (ONE, MANY):
                raise SchemaMismatchError(f"cardinality for {key} must be 'one' or 'many', got {value!r}")
        seen: dict[str, str] = {}
        for c, attrs in self.attributes.items():
            if c not in self.entities and c not in self.relationships:
                raise SchemaMismatchError(f"attributes declared for unknown class {c}")
            for a in attrs:
                if a in seen:
                    raise SchemaMismatchError(f"attribute {a} declared on both {seen[a]} and {c}")
                seen[a] = c

    @cached_property
    def item_classes(self) -> tuple[str, ...]:
        return tuple(sorted(self.entities | set(self.relationships)))

    @cached_property
    def attribute_owner(self) -> dict[str, str]:
        return {a: c for c, attrs in self.attributes.items() for a in attrs}

    @cached_property
    def _neighbors(self) -> dict[str, tuple[str, ...]]:
        nbrs: dict[str, list[str]] = {e: [] for e in self.entities}
        for r, es in self.relationships.items():
            nbrs[r] = sorted(es)
            for e in es:
                nbrs[e].append(r)
        return {c: tuple(sorted(v)) for c, v in nbrs.items()}

    def is_entity(self, cls: str) -> bool:
        return cls in self.entities

    def is_relationship(self, cls: str) -> bool:
        return cls in self.relationships

    def require(self, cls: str) -> None:
        if cls not in self.entities and cls not in self.relationships:
            raise SchemaMismatchError(f"unknown item class {cls!r}")

    def card(self, relationship: str, entity: str) -> str:
        try:
            return self.cards[(relationship, entity)]
        except KeyError:
            raise SchemaMismatchError(f"{entity} does not participate in {relationship}") from None

    def attrs(self, cls: str) -> frozenset[str]:
        return self.attributes.get(cls, frozenset())

    def neighbors(self, cls: str) -> tuple[str, ...]:
        """Classes that may follow ``cls`` in a path, ignoring rules 2 and 3."""
        return self._neighbors[cls]

    def role(self, relationship: str, entity: str) -> int:
        return self.relationships[relationship].index(entity)


# ---------------------------------------------------------------------------
# path text form


def format_path(path: Sequence[str]) -> str:
    return "[" + ", ".join(path) + "]"


def parse_path(text: str | Sequence[str]) -> Path:
    """Parse ``"[E1, R1, E2]"`` (or accept an already split sequence)."""
    if not isinstance(text, str):
        return tuple(text)
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = tuple(p.strip() for p in body.split(",") if p.strip())
    if not parts:
        raise DomainError(f"empty path: {text!r}")
    return parts


# ---------------------------------------------------------------------------
# validity


def validate_path(schema: RelationalSchema, classes: Sequence[str]) -> str | None:
    """Return ``None`` for a valid path, otherwise the first violated rule.

    Rule ids: ``"empty"``, ``"alternation"``, ``"rule1"`` (participation),
    ``"rule2"`` (``[E,R,E]`` backtrack), ``"rule3"`` (``[R,E,R]`` through a
    ``one`` cardinality).
    """
    if not classes:
        return "empty"
    for c in classes:
        schema.require(c)
    for a, b in zip(classes, classes[1:]):
        if schema.is_entity(a) == schema.is_entity(b):
            return "alternation"
    for a, b in zip(classes, classes[1:]):
        e, r = (a, b) if schema.is_entity(a) else (b, a)
        if e not in schema.relationships[r]:
            return "rule1"
    for a, mid, b in zip(classes, classes[1:], classes[2:]):
        if a != b:
            continue
        if schema.is_entity(a):
            return "rule2"
        if schema.card(a, mid) != MANY:
            return "rule3"
    return None


def is_valid_path(schema: RelationalSchema, classes: Sequence[str]) -> bool:
    return validate_path(schema, classes) is None


def _can_follow(schema: RelationalSchema, path: Sequence[str], nxt: str) -> bool:
    # incremental form of the three rules, assuming ``path`` is already valid
    if len(path) >= 2 and path[-2] == nxt:
        if schema.is_entity(nxt):
            return False
        return schema.card(nxt, path[-1]) == MANY
    return True


def enumerate_paths(schema: RelationalSchema, perspective: str, max_length: int) -> list[Path]:
    """All valid paths starting at ``perspective`` with at most ``max_length`` classes.

    Returned in lexicographic order of their class sequences.
    """
    schema.require(perspective)
    if max_length < 1:
        raise DomainError("max_length must be >= 1")
    out: list[Path] = []

    def grow(path: Path) -> None:
        out.append(path)
        if len(path) == max_length:
            return
        for nxt in schema.neighbors(path[-1]):
            if _can_follow(schema, path, nxt):
                grow(path + (nxt,))

    grow((perspective,))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# path algebra


def reverse(path: Sequence[str]) -> Path:
    return tuple(reversed(path))


def subpath(path: Sequence[str], i: int, j: int | None = None) -> Path:
    """``P^{i:j}`` with 1-based inclusive bounds; ``j=None`` means to the end."""
    j = len(path) if j is None else j
    if not 1 <= i <= j <= len(path):
        raise DomainError(f"invalid subpath bounds {i}:{j} for length {len(path)}")
    return tuple(path[i - 1 : j])


def is_prefix(p: Sequence[str], q: Sequence[str]) -> bool:
    return len(p) <= len(q) and tuple(q[: len(p)]) == tuple(p)


def pivots(s: Sequence[str], t: Sequence[str]) -> list[int]:
    """Indices ``i`` for which the length-``i`` prefixes of ``s`` and ``t`` agree."""
    out = []
    for i in range(1, min(len(s), len(t)) + 1):
        if s[i - 1] != t[i - 1]:
            break
        out.append(i)
    return out


def join(q: Sequence[str], r: Sequence[str], i: int) -> Path:
    """``Q ⋈_i R = Q^{1:|Q|-i} + R^{i:}`` (no validity filtering)."""
    return tuple(q[: len(q) - i]) + tuple(r[i - 1 :])


def extend(schema: RelationalSchema, q: Sequence[str], r: Sequence[str]) -> list[tuple[int, Path]]:
    """Valid joins of ``q`` with ``r`` as ``(pivot, path)`` pairs.

    Identical paths reached through several pivots are reported once, under
    the smallest pivot.
    """
    if not q or not r or q[-1] != r[0]:
        raise DomainError(f"cannot extend {format_path(q)} with {format_path(r)}: terminal/base mismatch")
    seen: set[Path] = set()
    out = []
    for i in pivots(reverse(q), r):
        p = join(q, r, i)
        if p in seen or not is_valid_path(schema, p):
            continue
        seen.add(p)
        out.append((i, p))
    return out


def llrsp(schema: RelationalSchema, p: Sequence[str], q: Sequence[str]) -> int:
    """Length of the longest prefix that every skeleton grounds to one item.

    Grows while the next classes agree and the current class cannot branch:
    a relationship item has one entity per role, and an entity with a ``one``
    cardinality toward the next relationship class has at most one such item.
    """
    if not p or not q or p[0] != q[0]:
        raise DomainError("llrsp requires paths with a common perspective")
    n = min(len(p), len(q))
    ell = 1
    while ell < n and p[ell] == q[ell]:
        cur, nxt = p[ell - 1], p[ell]
        if schema.is_entity(cur) and schema.card(nxt, cur) != ONE:
            break
        ell += 1
    return ell


def intersectable(schema: RelationalSchema, p: Sequence[str], q: Sequence[str]) -> bool:
    """Whether some skeleton and base give ``p`` and ``q`` a common terminal item."""
    p, q = tuple(p), tuple(q)
    if p == q or p[0] != q[0] or p[-1] != q[-1]:
        return False
    if is_prefix(p, q) or is_prefix(q, p):
        return False
    m = llrsp(schema, p, q)
    n = llrsp(schema, reverse(p), reverse(q))
    return m + n <= min(len(p), len(q))


def classic_intersectable(p: Sequence[str], q: Sequence[str]) -> bool:
    """The three structural criteria alone (same base, same terminal, no prefix)."""
    p, q = tuple(p), tuple(q)
    return p != q and p[0] == q[0] and p[-1] == q[-1] and not is_prefix(p, q) and not is_prefix(q, p)


def relational_variables(schema: RelationalSchema, perspective: str, hop_bound: int) -> Iterator[RelationalVariable]:
    for path in enumerate_paths(schema, perspective, hop_bound):
        for attr in sorted(schema.attrs(path[-1])):
            yield RelationalVariable(path, attr)
