from __future__ import annotations

import json

import pytest

from conftest import P
from rcmkit import fixtures
from rcmkit.errors import DomainError, SchemaMismatchError
from rcmkit.io import (
    dump_json,
    load_document,
    load_model,
    load_query,
    model_from_dict,
    model_to_dict,
    query_from_dict,
    query_to_dict,
    schema_from_dict,
    schema_to_dict,
    skeleton_from_dict,
    skeleton_to_dict,
)
from rcmkit.skeleton import enumerate_skeletons


@pytest.mark.parametrize("name", sorted(fixtures.REGISTRY))
def test_model_roundtrip(name):
    m = fixtures.get(name).model
    back = model_from_dict(json.loads(dump_json(model_to_dict(m))))
    assert schema_to_dict(back.schema) == schema_to_dict(m.schema)
    assert back.dependencies == m.dependencies


def test_schema_cards_survive(c41):
    s = c41.model.schema
    back = schema_from_dict(schema_to_dict(s))
    assert back.cards == s.cards and back.relationships == s.relationships


def test_skeleton_roundtrip(c41):
    s = c41.model.schema
    for sk in list(enumerate_skeletons(s, 2))[::97]:
        back = skeleton_from_dict(s, json.loads(dump_json(skeleton_to_dict(sk))))
        assert back.relations() == sk.relations()
        assert back.items == sk.items


def test_query_roundtrip(c41):
    q = c41.queries["claim"]
    assert query_from_dict(query_to_dict(q)) == q


def test_yaml_with_string_paths(tmp_path):
    doc = tmp_path / "m.yaml"
    doc.write_text(
        "entities: [Emp, Prod]\n"
        "relationships:\n"
        "  Dev: {classes: [Emp, Prod], cards: [many, one]}\n"
        "attributes: {Emp: [competence], Prod: [success]}\n"
        "dependencies:\n"
        "  - {cause_path: '[Prod, Dev, Emp]', cause_attr: competence, effect_attr: success}\n",
        encoding="utf-8",
    )
    m = load_model(doc)
    assert m.schema.card("Dev", "Prod") == "one"
    assert m.dependencies[0].path == P("Prod Dev Emp")


def test_default_cards_are_many():
    s = schema_from_dict({"entities": ["A", "B"], "relationships": {"R": {"classes": ["A", "B"]}}})
    assert s.card("R", "A") == s.card("R", "B") == "many"


def test_exported_fixture_files_load_back(tmp_path):
    fx = fixtures.get("counterexample41")
    paths = fixtures.export_fixture(fx, tmp_path)
    assert [p.name for p in paths] == ["model.json", "query_claim.json"]
    assert load_model(paths[0]).dependencies == fx.model.dependencies
    assert load_query(paths[1]) == fx.queries["claim"]


class TestErrors:
    def test_not_a_mapping(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(DomainError):
            load_document(p)

    def test_unparseable(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{entities: [", encoding="utf-8")
        with pytest.raises(DomainError):
            load_document(p)

    def test_missing_fields(self):
        with pytest.raises(DomainError):
            schema_from_dict({"relationships": {}})
        with pytest.raises(DomainError):
            model_from_dict({"entities": ["A"], "dependencies": [{"cause_path": ["A"], "cause_attr": "x"}]})
        with pytest.raises(DomainError):
            query_from_dict({"u": []})
        with pytest.raises(DomainError):
            query_from_dict({"perspective": "A", "u": [{"path": ["A"]}]})

    def test_misaligned_cards(self):
        with pytest.raises(SchemaMismatchError):
            schema_from_dict({"entities": ["A", "B"], "relationships": {"R": {"classes": ["A", "B"], "cards": ["one"]}}})
