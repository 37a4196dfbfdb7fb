"""File formats: schema, model, skeleton and query documents.

Documents are JSON or YAML objects (YAML is read as a superset of JSON).
Paths may be written either as lists or as ``"[E1, R1, E2]"`` strings.
"""
from __future__ import annotations

import json
from pathlib import Path as FsPath
from typing import Any, Mapping

import yaml

from .errors import DomainError, SchemaMismatchError
from .rcm import Rcm, RelationalDependency
from .schema import RelationalSchema, RelationalVariable, parse_path
from .skeleton import RelationalSkeleton


def load_document(path: str | FsPath) -> dict:
    text = FsPath(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DomainError(f"{path}: cannot parse: {exc}") from None
    if not isinstance(doc, dict):
        raise DomainError(f"{path}: expected a mapping at top level")
    return doc


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False)


# -- schema -----------------------------------------------------------------


def schema_from_dict(doc: Mapping) -> RelationalSchema:
    try:
        entities = list(doc["entities"])
        rel_doc = doc.get("relationships") or {}
    except (KeyError, TypeError):
        raise DomainError("schema document needs 'entities' and 'relationships'") from None
    relationships, cards = {}, {}
    for name, spec in rel_doc.items():
        classes = list(spec["classes"])
        card_list = list(spec.get("cards") or ["many"] * len(classes))
        if len(card_list) != len(classes):
            raise SchemaMismatchError(f"relationship {name}: cards must align with classes")
        relationships[name] = classes
        for e, c in zip(classes, card_list):
            cards[(name, e)] = str(c).lower()
    attributes = {c: list(a) for c, a in (doc.get("attributes") or {}).items()}
    return RelationalSchema.build(entities, relationships, attributes, cards)


def schema_to_dict(schema: RelationalSchema) -> dict:
    return {
        "entities": sorted(schema.entities),
        "relationships": {
            r: {"classes": list(es), "cards": [schema.card(r, e) for e in es]}
            for r, es in sorted(schema.relationships.items())
        },
        "attributes": {c: sorted(a) for c, a in sorted(schema.attributes.items())},
    }


# -- model ------------------------------------------------------------------


def model_from_dict(doc: Mapping) -> Rcm:
    schema = schema_from_dict(doc)
    deps = []
    for d in doc.get("dependencies") or []:
        try:
            deps.append(RelationalDependency.of(parse_path(d["cause_path"]), d["cause_attr"], d["effect_attr"]))
        except KeyError as exc:
            raise DomainError(f"dependency missing field {exc.args[0]!r}") from None
    return Rcm(schema, tuple(deps))


def model_to_dict(model: Rcm) -> dict:
    doc = schema_to_dict(model.schema)
    doc["dependencies"] = [
        {"cause_path": list(d.cause.path), "cause_attr": d.cause.attr, "effect_attr": d.effect.attr}
        for d in model.dependencies
    ]
    return doc


def load_model(path: str | FsPath) -> Rcm:
    return model_from_dict(load_document(path))


# -- skeleton ---------------------------------------------------------------


def skeleton_from_dict(schema: RelationalSchema, doc: Mapping) -> RelationalSkeleton:
    items = {c: list(ids) for c, ids in (doc.get("items") or {}).items()}
    relations = {}
    for link in doc.get("links") or []:
        relations[link["rel"]] = list(link["entities"])
    return RelationalSkeleton.from_relations(schema, items, relations)


def skeleton_to_dict(skeleton: RelationalSkeleton) -> dict:
    return {
        "items": {c: list(ids) for c, ids in sorted(skeleton.items.items())},
        "links": [{"rel": r, "entities": list(es)} for r, es in skeleton.relations().items()],
    }


# -- queries ----------------------------------------------------------------


def variable_from_dict(doc: Mapping) -> RelationalVariable:
    try:
        return RelationalVariable(parse_path(doc["path"]), doc["attr"])
    except (KeyError, TypeError):
        raise DomainError(f"variable needs 'path' and 'attr': {doc!r}") from None


def variable_to_dict(rv: RelationalVariable) -> dict:
    return {"path": list(rv.path), "attr": rv.attr}


def query_from_dict(doc: Mapping):
    from .dsep import CiQuery

    try:
        perspective = doc["perspective"]
    except KeyError:
        raise DomainError("query needs a 'perspective'") from None
    sets = [frozenset(variable_from_dict(v) for v in doc.get(k) or []) for k in ("u", "v", "w")]
    return CiQuery(perspective, *sets)


def query_to_dict(query) -> dict:
    return {
        "perspective": query.perspective,
        **{k: [variable_to_dict(v) for v in sorted(getattr(query, k))] for k in ("u", "v", "w")},
    }


def load_query(path: str | FsPath):
    return query_from_dict(load_document(path))
