"""Worked examples encoded as replayable fixtures.

Each fixture holds a model, named queries and a list of expectations. An
expectation pairs an expected value with a thunk that recomputes it, plus a
provenance tag saying where the expected value comes from. ``replay`` runs
every thunk and reports the outcome, so the same records drive the tests and
``rcmkit fixtures run``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any, Callable

from .agg import IntersectionVariable, Variant, bar, build_agg, co_intersectable
from .dsep import CiQuery, agg_d_separated, relational_dsep_oracle
from .io import dump_json, model_to_dict, query_to_dict
from .rcm import Rcm, ground_graph, model_from_dependencies
from .schema import MANY, ONE, RelationalSchema, RelationalVariable, extend, intersectable, is_prefix, is_valid_path
from .skeleton import RelationalSkeleton


@dataclass(frozen=True)
class Expectation:
    label: str
    expected: Any
    compute: Callable[[], Any]
    provenance: str


@dataclass
class Outcome:
    label: str
    expected: Any
    actual: Any
    provenance: str
    seconds: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.actual == self.expected

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        got = self.error or self.actual
        return f"[{status}] {self.label}: expected {self.expected}, got {got} ({self.provenance}; {self.seconds:.2f}s)"


@dataclass
class Fixture:
    name: str
    model: Rcm
    perspective: str
    hops: int
    queries: dict[str, CiQuery] = field(default_factory=dict)
    expectations: list[Expectation] = field(default_factory=list)
    caveat: str = ""
    extras: dict[str, Any] = field(default_factory=dict)


def replay(fixture: Fixture) -> list[Outcome]:
    out = []
    for exp in fixture.expectations:
        t0 = time.perf_counter()
        try:
            actual, err = exp.compute(), None
        except Exception as exc:  # a crashing check is a failed check
            actual, err = None, f"{type(exc).__name__}: {exc}"
        out.append(Outcome(exp.label, exp.expected, actual, exp.provenance, time.perf_counter() - t0, err))
    return out


def export_fixture(fixture: Fixture, directory: str | FsPath) -> list[FsPath]:
    """Write ``model.json`` and one ``query_<name>.json`` per query."""
    d = FsPath(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = [d / "model.json"]
    written[0].write_text(dump_json(model_to_dict(fixture.model)) + "\n", encoding="utf-8")
    for name, q in sorted(fixture.queries.items()):
        p = d / f"query_{name}.json"
        p.write_text(dump_json(query_to_dict(q)) + "\n", encoding="utf-8")
        written.append(p)
    return written


def _p(text: str) -> tuple[str, ...]:
    return tuple(text.split())


def _all_one(relationships: dict[str, list[str]]) -> dict[tuple[str, str], str]:
    return {(r, e): ONE for r, es in relationships.items() for e in es}


def _connected(agg_thunk, query) -> Callable[[], str]:
    return lambda: "separated" if agg_d_separated(agg_thunk(), query) else "connected"


def _lazy(fn):
    cache = []

    def get():
        if not cache:
            cache.append(fn())
        return cache[0]

    return get


# ---------------------------------------------------------------------------
# co-intersectability counterexample (all-ONE schema, B .. I_j)


def fixture_example1() -> Fixture:
    rels = {
        "R1": ["B", "E1"],
        "R2": ["E1", "E3"],
        "R3": ["E1", "E2"],
        "R4": ["E2", "E3", "Ik"],
        "R5": ["Ik", "Ij"],
    }
    # attributes are not named in the example; X on I_k and Y on I_j make R a dependency path
    schema = RelationalSchema.build(["Ij", "Ik", "B", "E1", "E2", "E3"], rels, {"Ik": ["X"], "Ij": ["Y"]}, _all_one(rels))
    q = _p("B R1 E1 R2 E3 R4 Ik R5 Ij")
    r = _p("Ij R5 Ik R4 E3 R2 E1 R3 E2 R4 Ik")
    p = _p("B R1 E1 R3 E2 R4 Ik")
    p2 = _p("B R1 E1 R2 E3 R4 Ik")
    model = model_from_dependencies(schema, [(r, "X", "Y")])
    hops = len(r)
    ive = (IntersectionVariable.of(RelationalVariable(p, "X"), RelationalVariable(p2, "X")), RelationalVariable(q, "Y"))
    original = _lazy(lambda: build_agg(model, "B", hops, Variant.ORIGINAL))
    revised = _lazy(lambda: build_agg(model, "B", hops, Variant.REVISED))
    src = "worked example of a co-intersectability failure"
    return Fixture(
        name="example1",
        model=model,
        perspective="B",
        hops=hops,
        expectations=[
            Expectation("P in extend(Q, R) at pivot 7", True, lambda: (7, p) in extend(schema, q, r), src),
            Expectation("P and P' intersectable", True, lambda: intersectable(schema, p, p2), src),
            Expectation("P' is a prefix of Q", True, lambda: is_prefix(p2, q), src),
            Expectation("co_intersectable(Q, R, P, P')", False, lambda: co_intersectable(schema, q, r, p, p2), src),
            Expectation("ORIGINAL AGG has IVE P.X ∩ P'.X -> Q.Y", True, lambda: ive in original().edges, src),
            Expectation("REVISED AGG has IVE P.X ∩ P'.X -> Q.Y", False, lambda: ive in revised().edges, src),
        ],
        extras={"Q": q, "R": r, "P": p, "P'": p2},
    )


# ---------------------------------------------------------------------------
# incompleteness counterexample


def fixture_counterexample_41(oracle_bound: int = 2) -> Fixture:
    rels = {"R1": ["E1", "E2", "E4"], "R2": ["E2", "E3"], "R3": ["E3", "E4", "E5"]}
    schema = RelationalSchema.build(
        ["E1", "E2", "E3", "E4", "E5"], rels, {"E2": ["Y"], "E3": ["X"], "E5": ["Z"]}, _all_one(rels)
    )
    d1 = _p("E2 R2 E3 R3 E4 R1 E2 R2 E3")
    d2 = _p("E2 R2 E3 R3 E5")
    model = model_from_dependencies(schema, [(d1, "X", "Y"), (d2, "Z", "Y")])
    p = _p("E1 R1 E2 R2 E3")
    q = _p("E1 R1 E4 R3 E3 R2 E2")
    s = _p("E1 R1 E4 R3 E5")
    s2 = _p("E1 R1 E2 R2 E3 R3 E5")
    px, qy, s2z = RelationalVariable(p, "X"), RelationalVariable(q, "Y"), RelationalVariable(s2, "Z")
    claim = CiQuery("E1", frozenset({px}), frozenset({s2z}), frozenset({qy}))
    hops = len(d1)  # at least 7 and no shorter than the longest dependency
    revised = _lazy(lambda: build_agg(model, "E1", hops, Variant.REVISED))

    def oracle():
        v = relational_dsep_oracle(model, claim, oracle_bound)
        return "separated within bound" if v.separated_within_bound else "connected"

    src = "incompleteness counterexample"
    return Fixture(
        name="counterexample41",
        model=model,
        perspective="E1",
        hops=hops,
        queries={"claim": claim},
        expectations=[
            Expectation("P, Q, S, S' are distinct valid paths", True, lambda: len({p, q, s, s2}) == 4 and all(is_valid_path(schema, x) for x in (p, q, s, s2)), src),
            Expectation("co_intersectable(Q, D2, S, S')", True, lambda: co_intersectable(schema, q, d2, s, s2), src),
            Expectation("REVISED AGG: P.X vs S'.Z given Q.Y", "connected", _connected(revised, claim), src + ", first claim"),
            Expectation(
                f"oracle, all skeletons with <= {oracle_bound} items per class",
                "separated within bound",
                oracle,
                src + ", second claim (bounded; the unbounded statement rests on the analytic proof)",
            ),
        ],
        caveat=(
            "The oracle only covers skeletons with at most "
            f"{oracle_bound} items per class; no machine check covers every skeleton."
        ),
        extras={"P": p, "Q": q, "S": s, "S'": s2, "D1": d1, "D2": d2},
    )


# ---------------------------------------------------------------------------
# employees, products and business units


def fig1_model() -> Rcm:
    schema = RelationalSchema.build(
        ["Emp", "Prod"],
        {"Dev": ["Emp", "Prod"]},
        {"Emp": ["competence", "salary"], "Prod": ["success"]},
        {("Dev", "Emp"): MANY, ("Dev", "Prod"): MANY},
    )
    return model_from_dependencies(
        schema, [(_p("Prod Dev Emp"), "competence", "success"), (("Emp",), "competence", "salary")]
    )


def fig4_model() -> Rcm:
    # Reconstruction: the business-unit extension is only drawn as an AGG
    # excerpt. Fund = <Prod, Biz> with one funding unit per product and many
    # products per unit; revenue depends on the success of funded products.
    schema = RelationalSchema.build(
        ["Emp", "Prod", "Biz"],
        {"Dev": ["Emp", "Prod"], "Fund": ["Prod", "Biz"]},
        {"Emp": ["competence", "salary"], "Prod": ["success"], "Biz": ["revenue"]},
        {("Dev", "Emp"): MANY, ("Dev", "Prod"): MANY, ("Fund", "Prod"): ONE, ("Fund", "Biz"): MANY},
    )
    return model_from_dependencies(
        schema,
        [
            (_p("Prod Dev Emp"), "competence", "success"),
            (("Emp",), "competence", "salary"),
            (_p("Biz Fund Prod"), "success", "revenue"),
        ],
    )


FIG4_CAVEAT = (
    "Reconstructed fixture: the business-unit schema (Fund = <Prod, Biz>, "
    "card(Fund, Prod) = one, card(Fund, Biz) = many, dependency "
    "[Biz, Fund, Prod].success -> [Biz].revenue) is inferred from the drawn "
    "AGG excerpt; only the separations stated in its caption are asserted. "
    "The AGG uses hop bound 7; from hop bound 9 on, longer co-worker paths "
    "add trails and the two separations no longer hold."
)


def fig4_variables() -> dict[str, RelationalVariable]:
    return {
        "V": RelationalVariable(_p("Emp Dev Prod"), "success"),
        "W": RelationalVariable(_p("Emp Dev Prod Fund Biz"), "revenue"),
        "X": RelationalVariable(_p("Emp Dev Prod Dev Emp"), "competence"),
        "Z": RelationalVariable(_p("Emp Dev Prod Dev Emp Dev Prod"), "success"),
        "U": RelationalVariable(_p("Emp Dev Prod Fund Biz Fund Prod"), "success"),
        "E": RelationalVariable(("Emp",), "competence"),
    }


def fixture_fig1_fig4() -> Fixture:
    m1 = fig1_model()
    sk = RelationalSkeleton.from_relations(
        m1.schema,
        {"Emp": ["quinn", "roger"], "Prod": ["laptop"], "Dev": ["d1", "d2"]},
        {"d1": ["quinn", "laptop"], "d2": ["roger", "laptop"]},
    )
    fig1_edges = {
        (("quinn", "competence"), ("laptop", "success")),
        (("roger", "competence"), ("laptop", "success")),
        (("quinn", "competence"), ("quinn", "salary")),
        (("roger", "competence"), ("roger", "salary")),
    }
    m4 = fig4_model()
    hops = 7
    v = fig4_variables()
    fs = frozenset
    queries = {
        "w_x_given_v_u": CiQuery("Emp", fs({v["W"]}), fs({v["X"]}), fs({v["V"], v["U"]})),
        "w_x_given_v_z": CiQuery("Emp", fs({v["W"]}), fs({v["X"]}), fs({v["V"], v["Z"]})),
        "w_x": CiQuery("Emp", fs({v["W"]}), fs({v["X"]}), fs()),
    }
    agg = _lazy(lambda: build_agg(m4, "Emp", hops, Variant.REVISED))
    y = IntersectionVariable.of(v["Z"], v["U"])
    fig1 = "two-dependency employee/product model"
    fig4 = "AGG excerpt with business units (reconstructed)"
    return Fixture(
        name="fig1_fig4",
        model=m4,
        perspective="Emp",
        hops=hops,
        queries=queries,
        expectations=[
            Expectation("employee/product ground graph edges", True, lambda: set(ground_graph(m1, sk).edges) == fig1_edges, fig1),
            Expectation("AGG edge [Emp].comp -> V", True, lambda: (v["E"], v["V"]) in agg().edges, fig4),
            Expectation("IV Y = Z ∩ U is in bar(U) and bar(Z)", True, lambda: y in bar(agg(), [v["U"]]) and y in bar(agg(), [v["Z"]]), fig4),
            Expectation("W vs X given {V, U}", "separated", _connected(agg, queries["w_x_given_v_u"]), fig4),
            Expectation("W vs X given {V, Z}", "separated", _connected(agg, queries["w_x_given_v_z"]), fig4),
            Expectation("W vs X given nothing", "connected", _connected(agg, queries["w_x"]), fig4),
        ],
        caveat=FIG4_CAVEAT,
        extras={"fig1_model": m1, "fig1_skeleton": sk},
    )


REGISTRY: dict[str, Callable[[], Fixture]] = {
    "example1": fixture_example1,
    "counterexample41": fixture_counterexample_41,
    "fig1_fig4": fixture_fig1_fig4,
}


def get(name: str) -> Fixture:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(REGISTRY)}") from None
