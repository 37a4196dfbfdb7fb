from __future__ import annotations

import itertools
import json
import random

import networkx as nx
import pytest

from conftest import P
from oracles import enumeration_co_intersectable, ive_witness_replays, random_model, uncovered_ground_edges
from rcmkit.agg import (
    IntersectionVariable,
    Variant,
    bar,
    build_agg,
    build_all_aggs,
    build_ivs,
    build_rvs,
    co_intersectable,
    co_intersectable_witness,
    to_dict,
    to_dot,
    to_json,
)
from rcmkit.errors import DomainError, SchemaMismatchError
from rcmkit.fixtures import fig4_variables
from rcmkit.rcm import model_from_dependencies
from rcmkit.schema import RelationalSchema, RelationalVariable, enumerate_paths, intersectable
from rcmkit.skeleton import enumerate_skeletons


def _forest_schema(schema) -> bool:
    g = nx.Graph([(r, e) for r, es in schema.relationships.items() for e in es])
    g.add_nodes_from(schema.entities)
    return nx.is_forest(g)


@pytest.fixture(scope="module")
def c41_aggs(c41):
    return {v: build_agg(c41.model, c41.perspective, c41.hops, v) for v in Variant}


@pytest.fixture(scope="module")
def fig4_agg(fig4):
    return build_agg(fig4, "Emp", 7)


@pytest.fixture(scope="module")
def random_models():
    rng = random.Random(17)
    return [random_model(rng) for _ in range(40)]


class TestNodes:
    def test_rvs_are_all_paths_times_attributes(self, fig4):
        rvs = build_rvs(fig4.schema, "Emp", 5)
        expected = {RelationalVariable(p, a) for p in enumerate_paths(fig4.schema, "Emp", 5) for a in fig4.schema.attrs(p[-1])}
        assert set(rvs) == expected

    def test_ivs_share_attribute_and_intersect(self, fig4):
        rvs = build_rvs(fig4.schema, "Emp", 7)
        ivs = build_ivs(fig4.schema, rvs)
        assert ivs
        for iv in ivs:
            assert iv.first.attr == iv.second.attr
            assert intersectable(fig4.schema, iv.first.path, iv.second.path)

    def test_no_intersectable_pairs_means_no_ivs(self, two_entity):
        m = model_from_dependencies(two_entity, [(P("E1 R E2"), "y", "x")])
        for v in Variant:
            agg = build_agg(m, "E1", 3, v)
            assert agg.ivs == [] and agg.ives == set()

    def test_iv_is_unordered(self, fig4):
        v = fig4_variables()
        assert IntersectionVariable.of(v["Z"], v["U"]) == IntersectionVariable.of(v["U"], v["Z"])
        iv = IntersectionVariable.of(v["Z"], v["U"])
        assert v["Z"] in iv and iv.other(v["Z"]) == v["U"]


class TestEdges:
    def test_fig4_rves(self, fig4_agg):
        v = fig4_variables()
        assert (v["E"], v["V"]) in fig4_agg.rves
        assert (v["V"], v["W"]) in fig4_agg.rves
        assert (v["U"], v["W"]) in fig4_agg.rves
        (prov,) = fig4_agg.provenance[(v["E"], v["V"])]
        assert prov.dependency.path == P("Prod Dev Emp")

    def test_example1_variants(self, ex1):
        x = ex1.extras
        iv = IntersectionVariable.of(RelationalVariable(x["P"], "X"), RelationalVariable(x["P'"], "X"))
        q = RelationalVariable(x["Q"], "Y")
        original = build_agg(ex1.model, ex1.perspective, ex1.hops, Variant.ORIGINAL)
        revised = build_agg(ex1.model, ex1.perspective, ex1.hops, Variant.REVISED)
        assert (iv, q) in original.ives
        assert (iv, q) not in revised.ives
        assert revised.rves == original.rves

    def test_counterexample_ive_survives_revision(self, c41, c41_aggs):
        x = c41.extras
        iv = IntersectionVariable.of(RelationalVariable(x["S"], "Z"), RelationalVariable(x["S'"], "Z"))
        q = RelationalVariable(x["Q"], "Y")
        assert (iv, q) in c41_aggs[Variant.REVISED].ives
        assert bar(c41_aggs[Variant.REVISED], [RelationalVariable(x["S'"], "Z")]) == {RelationalVariable(x["S'"], "Z"), iv}

    def test_revised_is_subset_of_original(self, random_models):
        for m in random_models:
            hops = m.max_dependency_length + 2
            for b in sorted(m.schema.item_classes):
                o = build_agg(m, b, hops, Variant.ORIGINAL)
                r = build_agg(m, b, hops, Variant.REVISED)
                assert r.rves == o.rves
                assert r.ives <= o.ives
                assert r.find_cycle() is None

    def test_all_perspectives(self, fig4):
        aggs = build_all_aggs(fig4, 7)
        assert sorted(aggs) == sorted(fig4.schema.item_classes)
        assert all(a.perspective == b for b, a in aggs.items())


class TestCoIntersectability:
    def test_example1_negative_and_counterexample_positive(self, ex1, c41):
        x = ex1.extras
        assert not co_intersectable(ex1.model.schema, x["Q"], x["R"], x["P"], x["P'"])
        y = c41.extras
        assert co_intersectable(c41.model.schema, y["Q"], y["D2"], y["S"], y["S'"])

    def test_preconditions(self, ex1):
        x, s = ex1.extras, ex1.model.schema
        with pytest.raises(DomainError):
            co_intersectable(s, x["Q"], x["R"], x["P'"], x["P"])  # P' is not in extend(Q, R)
        with pytest.raises(DomainError):
            co_intersectable(s, x["Q"], x["R"], x["P"], x["Q"])  # terminal classes differ

    def test_witness_search_finds_every_enumerated_witness(self, random_models):
        checked = found = 0
        for m in random_models[:25]:
            s = m.schema
            hops = m.max_dependency_length + 1
            for b in sorted(s.item_classes):
                agg = build_agg(m, b, hops, Variant.ORIGINAL)
                for (p, q), provs in sorted(agg.provenance.items(), key=str):
                    if not isinstance(p, RelationalVariable) or not isinstance(q, RelationalVariable):
                        continue
                    for iv, dep in itertools.product(agg.ivs_of(p), {pr.dependency for pr in provs}):
                        p2 = iv.other(p).path
                        wit = co_intersectable_witness(s, q.path, dep.path, p.path, p2) is not None
                        if enumeration_co_intersectable(s, q.path, dep.path, p.path, p2, 2):
                            assert wit
                            found += 1
                        checked += 1
        assert checked > 30 and found > 0


class TestSoundness:
    def test_ive_witnesses_replay(self, random_models, c41_aggs):
        aggs = [c41_aggs[Variant.REVISED]]
        for m in random_models:
            aggs += build_all_aggs(m, m.max_dependency_length + 2).values()
        n = 0
        for agg in aggs:
            for e in agg.ives:
                assert ive_witness_replays(agg, e), e
                n += 1
        assert n > 50

    def test_ground_edges_covered_on_forest_schemas(self, random_models):
        checked = 0
        for m in random_models:
            if not _forest_schema(m.schema):
                continue
            hops = m.max_dependency_length + 2
            for b in sorted(m.schema.item_classes):
                agg = build_agg(m, b, hops)
                for sk in itertools.islice(enumerate_skeletons(m.schema, 2), 0, None, 7):
                    assert uncovered_ground_edges(m, agg, sk) == []
                    checked += 1
        assert checked > 200

    def test_cyclic_schema_edge_missing_from_extend(self):
        # the dependency walks back to the base along a second relationship, extend never yields [E1]
        s = RelationalSchema.build(["E1", "E2"], {"R1": ["E2", "E1"], "R2": ["E2", "E1"]}, {"E1": ["x"], "E2": ["y"]}, {})
        m = model_from_dependencies(s, [(P("E2 R2 E1"), "x", "y")])
        agg = build_agg(m, "E1", 5)
        sk = next(
            sk for sk in enumerate_skeletons(s, 1) if sk.relations() and len(sk.relations()) == 2
        )
        missing = uncovered_ground_edges(m, agg, sk)
        assert missing
        assert {(cause, effect.path) for _, effect, (cause, _), _ in missing} == {("E1:0", P("E1 R1 E2"))}


class TestBarAndErrors:
    def test_bar(self, fig4_agg):
        v = fig4_variables()
        assert bar(fig4_agg, [v["W"]]) == {v["W"]} | set(fig4_agg.ivs_of(v["W"]))
        assert bar(fig4_agg, []) == set()

    def test_bar_unknown_variable(self, fig4_agg):
        with pytest.raises(DomainError):
            bar(fig4_agg, [RelationalVariable(P("Emp Dev Prod"), "revenue")])

    def test_hop_bound_below_dependency_length(self, c41):
        with pytest.raises(DomainError):
            build_agg(c41.model, c41.perspective, 7)

    def test_unknown_perspective(self, fig4):
        with pytest.raises(SchemaMismatchError):
            build_agg(fig4, "Nope", 7)

    def test_invalid_model(self, fig1):
        m = model_from_dependencies(fig1.schema, [(("Emp",), "competence", "salary"), (("Emp",), "salary", "competence")])
        with pytest.raises(DomainError):
            build_agg(m, "Emp", 3)

    def test_bad_variant(self, fig4):
        with pytest.raises(ValueError):
            build_agg(fig4, "Emp", 7, "sideways")


class TestExport:
    def test_json_is_deterministic(self, fig4):
        a = to_json(build_agg(fig4, "Emp", 7))
        b = to_json(build_agg(fig4, "Emp", 7))
        assert a == b
        doc = json.loads(a)
        assert doc["variant"] == "revised" and doc["hop_bound"] == 7

    def test_json_counts_and_witnesses(self, c41_aggs):
        agg = c41_aggs[Variant.REVISED]
        doc = to_dict(agg)
        kinds = [e["kind"] for e in doc["edges"]]
        assert kinds.count("RVE") == len(agg.rves) and kinds.count("IVE") == len(agg.ives)
        assert len(doc["nodes"]) == len(agg)
        assert all("witness" in pr for e in doc["edges"] if e["kind"] == "IVE" for pr in e["provenance"])

    def test_dot(self, c41_aggs):
        agg = c41_aggs[Variant.ORIGINAL]
        dot = to_dot(agg)
        assert dot.startswith('digraph "AGG_E1"')
        assert dot.count("style=dashed") == len(agg.ives)
        assert dot.count("->") == len(agg.edges)
        assert dot == to_dot(agg)
