from __future__ import annotations

import pytest

from rcmkit import fixtures


@pytest.mark.parametrize("name", sorted(fixtures.REGISTRY))
def test_replay_is_green(name):
    outcomes = fixtures.replay(fixtures.get(name))
    assert outcomes
    for o in outcomes:
        assert o.passed, o.line()
        assert o.line().startswith("[PASS] ")


def test_registry_names():
    assert sorted(fixtures.REGISTRY) == ["counterexample41", "example1", "fig1_fig4"]
    with pytest.raises(KeyError):
        fixtures.get("nope")


def test_caveats_are_stated():
    assert "at most 2 items per class" in fixtures.get("counterexample41").caveat
    assert fixtures.get("fig1_fig4").caveat == fixtures.FIG4_CAVEAT


def test_outcome_line_reports_mismatch():
    fx = fixtures.get("example1")
    flipped = fixtures.Expectation("flipped", True, fx.expectations[3].compute, "test")
    (o,) = fixtures.replay(fixtures.Fixture("t", fx.model, fx.perspective, fx.hops, {}, [flipped]))
    assert not o.passed
    assert o.line().startswith("[FAIL] flipped: expected True, got False")


def test_counterexample_oracle_bound_is_configurable():
    fx = fixtures.fixture_counterexample_41(oracle_bound=1)
    assert all(o.passed for o in fixtures.replay(fx))
