"""Relational causal model structure and ground-graph instantiation.

Edge orientation: a dependency ``R.X -> [I].Y`` grounds to ``c.X -> e.Y`` for
every effect item ``e`` of class ``I`` and every ``c`` in ``R|_e``. The cause
path is always evaluated from the effect item.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import DomainError, ModelInstantiationError, SchemaMismatchError
from .graph import DirectedGraph
from .schema import RelationalSchema, RelationalVariable, format_path, validate_path
from .skeleton import RelationalSkeleton, terminal_set


class RelationalDependency(NamedTuple):
    cause: RelationalVariable
    effect: RelationalVariable

    @classmethod
    def of(cls, cause_path: Sequence[str], cause_attr: str, effect_attr: str) -> "RelationalDependency":
        path = tuple(cause_path)
        return cls(RelationalVariable(path, cause_attr), RelationalVariable((path[0],), effect_attr))

    @property
    def path(self):
        return self.cause.path

    def __str__(self) -> str:
        return f"{self.cause} -> {self.effect}"


@dataclass(frozen=True, eq=False)
class Rcm:
    schema: RelationalSchema
    dependencies: tuple[RelationalDependency, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dependencies", tuple(sorted(set(self.dependencies))))

    def causes_of(self, effect_attr: str) -> list[RelationalDependency]:
        return [d for d in self.dependencies if d.effect.attr == effect_attr]

    @property
    def max_dependency_length(self) -> int:
        return max((len(d.path) for d in self.dependencies), default=1)


def validate_model(model: Rcm) -> list[str]:
    """Human-readable violations; an empty list means the model is well formed."""
    schema = model.schema
    problems = []
    for d in model.dependencies:
        label = str(d)
        if not d.effect.is_canonical:
            problems.append(f"{label}: effect is not canonical")
        if d.effect.path[0] != d.cause.path[0]:
            problems.append(f"{label}: cause and effect have different base classes")
        try:
            rule = validate_path(schema, d.cause.path)
        except SchemaMismatchError as exc:
            rule = str(exc)
        if rule is not None:
            problems.append(f"{label}: invalid cause path ({rule})")
            continue
        if d.cause.attr not in schema.attrs(d.cause.path[-1]):
            problems.append(f"{label}: {d.cause.attr} is not an attribute of {d.cause.path[-1]}")
        if d.effect.attr not in schema.attrs(d.effect.path[0]):
            problems.append(f"{label}: {d.effect.attr} is not an attribute of {d.effect.path[0]}")
    attrs = sorted(schema.attribute_owner)
    g = DirectedGraph(attrs, {(d.cause.attr, d.effect.attr) for d in model.dependencies if d.cause.attr in schema.attribute_owner and d.effect.attr in schema.attribute_owner})
    cycle = g.find_cycle()
    if cycle:
        problems.append("attribute classes form a cycle: " + " -> ".join(cycle))
    return problems


def require_valid(model: Rcm) -> None:
    problems = validate_model(model)
    if problems:
        raise DomainError("invalid model: " + "; ".join(problems))


class GroundGraph(DirectedGraph[tuple[str, str]]):
    """DAG over ``(item, attribute)`` vertices."""

    def __init__(self, skeleton: RelationalSkeleton, vertices, edges):
        super().__init__(vertices, edges)
        self.skeleton = skeleton


def ground_graph(model: Rcm, skeleton: RelationalSkeleton) -> GroundGraph:
    if skeleton.schema is not model.schema:
        raise DomainError("skeleton and model use different schema objects")
    schema = model.schema
    vertices = [(i, a) for cls, ids in skeleton.items.items() for i in ids for a in schema.attrs(cls)]
    edges = set()
    for d in model.dependencies:
        path, x, y = d.cause.path, d.cause.attr, d.effect.attr
        for e in skeleton.of_class(path[0]):
            for c in terminal_set(skeleton, path, e):
                edges.add(((c, x), (e, y)))
    gg = GroundGraph(skeleton, vertices, edges)
    cycle = gg.find_cycle()
    if cycle:
        raise ModelInstantiationError("ground graph has a cycle: " + " -> ".join(f"{i}.{a}" for i, a in cycle))
    return gg


def model_from_dependencies(schema: RelationalSchema, deps: Iterable[tuple[Sequence[str], str, str]]) -> Rcm:
    """Shorthand: ``[(cause_path, cause_attr, effect_attr), ...]``."""
    return Rcm(schema, tuple(RelationalDependency.of(p, x, y) for p, x, y in deps))


def describe_dependency(d: RelationalDependency) -> str:
    return f"{format_path(d.cause.path)}.{d.cause.attr} -> [{d.effect.path[0]}].{d.effect.attr}"
