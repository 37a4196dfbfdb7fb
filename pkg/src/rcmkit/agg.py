"""Abstract ground graphs (AGGs) for one perspective.

Nodes are relational variables (RVs) and intersection variables (IVs,
unordered pairs of intersectable RVs with the same attribute). Two variants
are supported:

``original``
    an IV inherits every edge of its members.
``revised``
    an IV edge needs a co-intersection witness: a skeleton in which the
    dependency's grounding and the intersection happen at the same item.

For the effect side (``P.X -> Q.Y ∩ Q'.Y``) the witness requires the
intersection item ``i`` of ``Q`` and ``Q'`` to be the effect item of a
grounded edge, i.e. ``R|_i ∩ P|_b`` non-empty, which is how ground edges are
oriented (cause path evaluated from the effect item).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import DomainError, ModelInstantiationError
from .graph import DirectedGraph
from .rcm import Rcm, RelationalDependency, require_valid
from .schema import (
    Path,
    RelationalSchema,
    RelationalVariable,
    enumerate_paths,
    extend,
    format_path,
    intersectable,
    relational_variables,
)
from .witness import Witness, co_intersection_witness, effect_co_intersection_witness


class Variant(str, enum.Enum):
    ORIGINAL = "original"
    REVISED = "revised"


class IntersectionVariable(NamedTuple):
    first: RelationalVariable
    second: RelationalVariable

    @classmethod
    def of(cls, a: RelationalVariable, b: RelationalVariable) -> "IntersectionVariable":
        a, b = sorted((a, b))
        return cls(a, b)

    def __contains__(self, rv) -> bool:  # type: ignore[override]
        return rv == self.first or rv == self.second

    def other(self, rv: RelationalVariable) -> RelationalVariable:
        return self.second if rv == self.first else self.first

    def __str__(self) -> str:
        return f"{self.first} ∩ {self.second}"


AggNode = Union[RelationalVariable, IntersectionVariable]


@dataclass(frozen=True)
class RveProvenance:
    dependency: RelationalDependency
    pivot: int


@dataclass(frozen=True)
class IveProvenance:
    dependency: RelationalDependency
    rve: tuple[RelationalVariable, RelationalVariable]
    witness: Witness | None = None


class AbstractGroundGraph(DirectedGraph[AggNode]):
    def __init__(self, model: Rcm, perspective: str, hop_bound: int, variant: Variant, nodes, edges, provenance):
        super().__init__(nodes, edges)
        self.model = model
        self.perspective = perspective
        self.hop_bound = hop_bound
        self.variant = Variant(variant)
        self.provenance: dict[tuple[AggNode, AggNode], list] = provenance

    @property
    def rvs(self) -> list[RelationalVariable]:
        return [n for n in self.vertices if isinstance(n, RelationalVariable)]

    @property
    def ivs(self) -> list[IntersectionVariable]:
        return [n for n in self.vertices if isinstance(n, IntersectionVariable)]

    @property
    def rves(self) -> set[tuple[AggNode, AggNode]]:
        return {e for e in self.edges if isinstance(e[0], RelationalVariable) and isinstance(e[1], RelationalVariable)}

    @property
    def ives(self) -> set[tuple[AggNode, AggNode]]:
        return set(self.edges) - self.rves

    def ivs_of(self, rv: RelationalVariable) -> list[IntersectionVariable]:
        return [iv for iv in self.ivs if rv in iv]

    def has_variable(self, rv: RelationalVariable) -> bool:
        return rv in self.index


# ---------------------------------------------------------------------------
# construction


def build_rvs(schema: RelationalSchema, perspective: str, hop_bound: int) -> list[RelationalVariable]:
    return list(relational_variables(schema, perspective, hop_bound))


def build_ivs(schema: RelationalSchema, rvs: Sequence[RelationalVariable]) -> list[IntersectionVariable]:
    by_attr: dict[str, list[RelationalVariable]] = {}
    for rv in rvs:
        by_attr.setdefault(rv.attr, []).append(rv)
    out = []
    for group in by_attr.values():
        for a, b in combinations(group, 2):
            if intersectable(schema, a.path, b.path):
                out.append(IntersectionVariable.of(a, b))
    return sorted(out)


def build_rves(model: Rcm, perspective: str, hop_bound: int) -> dict[tuple[RelationalVariable, RelationalVariable], list[RveProvenance]]:
    """``P.X -> Q.Y`` for every ``Q.Y``, dependency ``R.X -> [I_Y].Y`` and ``P`` in extend(Q, R)."""
    if hop_bound < model.max_dependency_length:
        raise DomainError(f"hop bound {hop_bound} is shorter than the longest dependency ({model.max_dependency_length})")
    schema = model.schema
    out: dict[tuple[RelationalVariable, RelationalVariable], list[RveProvenance]] = {}
    for q in relational_variables(schema, perspective, hop_bound):
        for dep in model.causes_of(q.attr):
            if dep.path[0] != q.path[-1]:
                continue
            for pivot, p in extend(schema, q.path, dep.path):
                if len(p) > hop_bound:
                    continue
                key = (RelationalVariable(p, dep.cause.attr), q)
                out.setdefault(key, []).append(RveProvenance(dep, pivot))
    return out


_CO_CACHE: dict = {}


def co_intersectable(schema: RelationalSchema, q: Sequence[str], r: Sequence[str], p: Sequence[str], p2: Sequence[str]) -> bool:
    """Whether some skeleton grounds ``R`` from a ``Q`` item onto a shared ``P``/``P'`` item."""
    return co_intersectable_witness(schema, q, r, p, p2) is not None


def co_intersectable_witness(schema, q, r, p, p2) -> Witness | None:
    key = (id(schema), tuple(q), tuple(r), tuple(p), tuple(p2), "cause")
    if key not in _CO_CACHE:
        _CO_CACHE[key] = (schema, co_intersection_witness(schema, q, r, p, p2))
    return _CO_CACHE[key][1]


def _effect_witness(schema, p, r, q, q2) -> Witness | None:
    key = (id(schema), tuple(p), tuple(r), tuple(q), tuple(q2), "effect")
    if key not in _CO_CACHE:
        _CO_CACHE[key] = (schema, effect_co_intersection_witness(schema, p, r, q, q2))
    return _CO_CACHE[key][1]


def build_ives(model: Rcm, rves, ivs: Sequence[IntersectionVariable], variant: Variant | str):
    """IV edges as a mapping edge -> list of provenance records."""
    variant = Variant(variant)
    schema = model.schema
    members: dict[RelationalVariable, list[IntersectionVariable]] = {}
    for iv in ivs:
        members.setdefault(iv.first, []).append(iv)
        members.setdefault(iv.second, []).append(iv)
    out: dict[tuple[AggNode, AggNode], list[IveProvenance]] = {}
    for (p, q), provs in sorted(rves.items()):
        deps = sorted({pr.dependency for pr in provs})
        for iv in members.get(p, []):
            other = iv.other(p)
            for dep in deps:
                wit = None
                if variant is Variant.REVISED:
                    wit = co_intersectable_witness(schema, q.path, dep.path, p.path, other.path)
                    if wit is None:
                        continue
                out.setdefault((iv, q), []).append(IveProvenance(dep, (p, q), wit))
                break
        for iv in members.get(q, []):
            other = iv.other(q)
            for dep in deps:
                wit = None
                if variant is Variant.REVISED:
                    wit = _effect_witness(schema, p.path, dep.path, q.path, other.path)
                    if wit is None:
                        continue
                out.setdefault((p, iv), []).append(IveProvenance(dep, (p, q), wit))
                break
    return out


def build_agg(model: Rcm, perspective: str, hop_bound: int, variant: Variant | str = Variant.REVISED) -> AbstractGroundGraph:
    require_valid(model)
    model.schema.require(perspective)
    variant = Variant(variant)
    rvs = build_rvs(model.schema, perspective, hop_bound)
    ivs = build_ivs(model.schema, rvs)
    rves = build_rves(model, perspective, hop_bound)
    ives = build_ives(model, rves, ivs, variant)
    provenance: dict = {}
    provenance.update(rves)
    provenance.update(ives)
    agg = AbstractGroundGraph(model, perspective, hop_bound, variant, list(rvs) + list(ivs), provenance.keys(), provenance)
    cycle = agg.find_cycle()
    if cycle:
        raise ModelInstantiationError("abstract ground graph has a cycle: " + " -> ".join(map(str, cycle)))
    return agg


def build_all_aggs(model: Rcm, hop_bound: int, variant: Variant | str = Variant.REVISED) -> dict[str, AbstractGroundGraph]:
    """One AGG per item class; components never share nodes."""
    return {b: build_agg(model, b, hop_bound, variant) for b in model.schema.item_classes}


def bar(agg: AbstractGroundGraph, variables: Iterable[RelationalVariable]) -> set[AggNode]:
    """The variables plus every IV with a member among them."""
    out: set[AggNode] = set()
    for v in variables:
        if not isinstance(v, RelationalVariable) or v not in agg.index:
            raise DomainError(f"{v} is not a relational variable of this AGG")
        out.add(v)
        out.update(agg.ivs_of(v))
    return out


# ---------------------------------------------------------------------------
# export


def node_label(n: AggNode) -> str:
    return str(n)


def _node_json(n: AggNode):
    if isinstance(n, RelationalVariable):
        return {"path": list(n.path), "attr": n.attr}
    return {"iv": [_node_json(n.first), _node_json(n.second)]}


def to_dict(agg: AbstractGroundGraph) -> dict:
    from .io import skeleton_to_dict

    edges = []
    for a, b in sorted(agg.edges, key=lambda e: (node_label(e[0]), node_label(e[1]))):
        rec = {"from": _node_json(a), "to": _node_json(b)}
        prov = agg.provenance.get((a, b), [])
        if isinstance(a, RelationalVariable) and isinstance(b, RelationalVariable):
            rec["kind"] = "RVE"
            rec["provenance"] = [
                {"dependency": str(pr.dependency), "pivot": pr.pivot} for pr in prov
            ]
        else:
            rec["kind"] = "IVE"
            rec["provenance"] = [
                {
                    "dependency": str(pr.dependency),
                    "rve": [str(pr.rve[0]), str(pr.rve[1])],
                    **({"witness": skeleton_to_dict(pr.witness.skeleton)} if pr.witness else {}),
                }
                for pr in prov
            ]
        edges.append(rec)
    return {
        "perspective": agg.perspective,
        "hop_bound": agg.hop_bound,
        "variant": agg.variant.value,
        "nodes": [_node_json(n) for n in sorted(agg.vertices, key=node_label)],
        "edges": edges,
    }


def to_json(agg: AbstractGroundGraph) -> str:
    return json.dumps(to_dict(agg), indent=2, ensure_ascii=False)


def to_dot(agg: AbstractGroundGraph) -> str:
    names = {n: f"n{k}" for k, n in enumerate(sorted(agg.vertices, key=node_label))}
    lines = [f'digraph "AGG_{agg.perspective}" {{', "  rankdir=LR;"]
    for n, name in names.items():
        shape = "box" if isinstance(n, RelationalVariable) else "ellipse"
        label = node_label(n).replace('"', '\\"')
        lines.append(f'  {name} [shape={shape}, label="{label}"];')
    for a, b in sorted(agg.edges, key=lambda e: (names[e[0]], names[e[1]])):
        style = "" if isinstance(a, RelationalVariable) and isinstance(b, RelationalVariable) else " [style=dashed]"
        lines.append(f"  {names[a]} -> {names[b]}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "AbstractGroundGraph",
    "AggNode",
    "IntersectionVariable",
    "Variant",
    "bar",
    "build_agg",
    "build_all_aggs",
    "build_ives",
    "build_rves",
    "build_ivs",
    "co_intersectable",
    "co_intersectable_witness",
    "to_dict",
    "to_dot",
    "to_json",
]
