from __future__ import annotations

import random

import pytest

from conftest import P
from oracles import enumeration_intersection_oracle, random_path_pair, random_schema
from rcmkit.errors import DomainError
from rcmkit.schema import RelationalSchema
from rcmkit.skeleton import terminal_set
from rcmkit.witness import SearchBudgetExceeded, intersection_witness, search_walks


def test_single_walk_chain(fig1):
    w = search_walks(fig1.schema, [P("Emp Dev Prod Dev Emp")], [], lambda w: True)
    assert w is not None
    items = [w.item(0, k) for k in range(5)]
    assert len(set(items)) == 5
    assert w.item(0, -1) == items[-1]


def test_tie_between_different_classes(fig1):
    with pytest.raises(DomainError):
        search_walks(fig1.schema, [P("Emp Dev Prod")], [((0, 0), (0, 2))], lambda w: True)


def test_invalid_walk(fig1):
    with pytest.raises(DomainError):
        search_walks(fig1.schema, [P("Emp Dev Emp")], [], lambda w: True)


def test_tie_forcing_a_revisit_is_unsatisfiable(fig1):
    # position 0 and 4 are both Emp on one walk; bridge burning forbids reusing an item
    assert search_walks(fig1.schema, [P("Emp Dev Prod Dev Emp")], [((0, 0), (0, 4))], lambda w: True) is None


def test_predicate_rejects_everything(fig1):
    assert search_walks(fig1.schema, [P("Emp Dev Prod")], [], lambda w: False) is None


def test_budget(fig1):
    walk = P("Emp Dev Prod Dev Emp Dev Prod")
    with pytest.raises(SearchBudgetExceeded):
        search_walks(fig1.schema, [walk, walk], [((0, 0), (1, 0))], lambda w: False, budget=50)


def test_one_cardinality_respected():
    s = RelationalSchema.build(["A", "B"], {"R": ["A", "B"]}, {}, {("R", "A"): "one"})
    # a single A can join only one R item, so A-R-B-R-A needs two distinct A's
    w = search_walks(s, [P("A R B R A")], [], lambda w: True)
    assert w.item(0, 0) != w.item(0, 4)
    assert search_walks(s, [P("A R B"), P("A R B")], [((0, 0), (1, 0))], lambda w: w.item(0, 1) != w.item(1, 1)) is None


def test_intersection_witness_is_exact():
    p, q = P("E3 R1 E4 R1 E2"), P("E3 R1 E2")
    s = RelationalSchema.build(["E2", "E3", "E4"], {"R1": ["E3", "E4", "E2"]}, {}, {("R1", "E2"): "one"})
    assert intersection_witness(s, p, q) is None
    assert not enumeration_intersection_oracle(s, p, q, 3)


def test_intersection_witness_matches_enumeration():
    rng = random.Random(23)
    n = 0
    while n < 40:
        s = random_schema(rng, n_entities=(2, 3), n_rels=(1, 2), arity=(2, 3), attrs=False)
        pair = random_path_pair(rng, s, max_length=5)
        if pair is None:
            continue
        p, q = pair
        wit = intersection_witness(s, p, q)
        if wit is not None:
            b, t = wit.item(0, 0), wit.item(0, -1)
            assert t in terminal_set(wit.skeleton, p, b) & terminal_set(wit.skeleton, q, b)
        if enumeration_intersection_oracle(s, p, q, 2):
            assert wit is not None
        n += 1
