from __future__ import annotations

import itertools
import random

import pytest

from conftest import P
from oracles import bfs_terminal_set, random_schema
from rcmkit.errors import DomainError, ModelInstantiationError
from rcmkit.rcm import (
    Rcm,
    RelationalDependency,
    describe_dependency,
    ground_graph,
    model_from_dependencies,
    require_valid,
    validate_model,
)
from rcmkit.schema import RelationalSchema, RelationalVariable, enumerate_paths
from rcmkit.skeleton import RelationalSkeleton, enumerate_skeletons


def _quinn_roger(schema):
    return RelationalSkeleton.from_relations(
        schema,
        {"Emp": ["quinn", "roger"], "Prod": ["laptop"], "Dev": ["d1", "d2"]},
        {"d1": ["quinn", "laptop"], "d2": ["roger", "laptop"]},
    )


class TestModel:
    def test_dependency_shorthand(self):
        d = RelationalDependency.of(P("Prod Dev Emp"), "competence", "success")
        assert d.effect == RelationalVariable(("Prod",), "success")
        assert d.path == P("Prod Dev Emp")
        assert describe_dependency(d) == "[Prod, Dev, Emp].competence -> [Prod].success"

    def test_dependencies_deduplicated_and_sorted(self, fig1):
        doubled = Rcm(fig1.schema, fig1.dependencies + fig1.dependencies[::-1])
        assert doubled.dependencies == fig1.dependencies
        assert list(doubled.dependencies) == sorted(doubled.dependencies)

    def test_max_dependency_length(self, fig1, c41):
        assert fig1.max_dependency_length == 3
        assert c41.model.max_dependency_length == 9
        assert Rcm(fig1.schema, ()).max_dependency_length == 1

    def test_causes_of(self, fig1):
        assert [d.cause.attr for d in fig1.causes_of("success")] == ["competence"]
        assert fig1.causes_of("competence") == []


class TestValidateModel:
    def test_fixtures_are_valid(self, fig1, fig4, c41, ex1):
        for m in (fig1, fig4, c41.model, ex1.model):
            assert validate_model(m) == []
            require_valid(m)

    def test_invalid_cause_path(self, fig1):
        m = model_from_dependencies(fig1.schema, [(P("Prod Dev Prod"), "success", "success")])
        assert any("invalid cause path" in p for p in validate_model(m))

    def test_wrong_attribute_owner(self, fig1):
        m = model_from_dependencies(fig1.schema, [(P("Prod Dev Emp"), "success", "competence")])
        problems = validate_model(m)
        assert any("success is not an attribute of Emp" in p for p in problems)
        assert any("competence is not an attribute of Prod" in p for p in problems)

    def test_attribute_cycle(self, fig1):
        m = model_from_dependencies(
            fig1.schema, [(("Emp",), "competence", "salary"), (("Emp",), "salary", "competence")]
        )
        assert any("cycle" in p for p in validate_model(m))
        with pytest.raises(DomainError):
            require_valid(m)

    def test_noncanonical_effect(self, fig1):
        d = RelationalDependency(RelationalVariable(P("Emp Dev Prod"), "success"), RelationalVariable(P("Emp Dev"), "salary"))
        assert any("not canonical" in p for p in validate_model(Rcm(fig1.schema, (d,))))


class TestGroundGraph:
    def test_employee_product_edges(self, fig1):
        gg = ground_graph(fig1, _quinn_roger(fig1.schema))
        assert set(gg.edges) == {
            (("quinn", "competence"), ("laptop", "success")),
            (("roger", "competence"), ("laptop", "success")),
            (("quinn", "competence"), ("quinn", "salary")),
            (("roger", "competence"), ("roger", "salary")),
        }
        assert gg.parents(("laptop", "success")) == (("quinn", "competence"), ("roger", "competence"))
        assert len(gg) == 5

    def test_vertices_only_for_owned_attributes(self, fig1):
        gg = ground_graph(fig1, _quinn_roger(fig1.schema))
        assert {a for _, a in gg.vertices} == {"competence", "salary", "success"}
        assert not any(i.startswith("d") for i, _ in gg.vertices)

    def test_schema_identity_required(self, fig1):
        other = RelationalSchema.build(["Emp", "Prod"], {"Dev": ["Emp", "Prod"]}, {"Emp": ["competence", "salary"], "Prod": ["success"]}, {})
        sk = RelationalSkeleton.from_relations(other, {"Emp": ["e"]}, {})
        with pytest.raises(DomainError):
            ground_graph(fig1, sk)

    def test_cycle_in_ground_graph(self):
        # the attribute graph is acyclic only if self-loops through paths are ignored
        s = RelationalSchema.build(["A", "B"], {"R": ["A", "B"]}, {"A": ["x"]}, {})
        m = model_from_dependencies(s, [(P("A R B R A"), "x", "x")])
        sk = RelationalSkeleton.from_relations(s, {"A": ["a1", "a2"], "B": ["b"], "R": ["r1", "r2"]}, {"r1": ["a1", "b"], "r2": ["a2", "b"]})
        with pytest.raises(ModelInstantiationError):
            ground_graph(m, sk)

    def test_edges_follow_breadth_first_terminal_sets(self):
        rng = random.Random(8)
        total = 0
        for _ in range(10):
            s = random_schema(rng, n_entities=(2, 3), n_rels=(1, 2), arity=(2, 2))
            classes = sorted(s.item_classes)
            deps = []
            for k, eff in enumerate(classes):
                for path in enumerate_paths(s, eff, 4)[1:]:
                    # attributes ordered by class keep the attribute graph acyclic
                    if classes.index(path[-1]) < k:
                        deps.append((path, min(s.attrs(path[-1])), min(s.attrs(eff))))
            m = model_from_dependencies(s, deps[:6])
            require_valid(m)
            for sk in itertools.islice(enumerate_skeletons(s, 2), 0, None, 9):
                expected = {
                    ((c, d.cause.attr), (e, d.effect.attr))
                    for d in m.dependencies
                    for e in sk.of_class(d.path[0])
                    for c in bfs_terminal_set(sk, d.path, e)
                }
                assert set(ground_graph(m, sk).edges) == expected
                total += len(expected)
        assert total > 100
