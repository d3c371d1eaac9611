import json

import pytest

from kgcube import (
    AggValueCountCost,
    RandomCost,
    UserDefinedCost,
    ValidationError,
    WorkloadSpec,
    build_lattice,
    evaluate,
    generate_workload,
    observed_bindings,
    run_bench,
    synthesize_star,
)

from .conftest import EX


def test_empty_workload(fixpop, fixpop_facet):
    assert generate_workload(fixpop_facet, fixpop, WorkloadSpec(count=0, seed=1)) == []


def test_workload_queries_are_valid(fixpop, fixpop_facet):
    queries = generate_workload(fixpop_facet, fixpop, WorkloadSpec(count=100, seed=7))
    assert len(queries) == 100
    for q in queries:
        assert q.group_vars
        assert set(q.group_vars) < {"c", "l", "y"}  # proper subsets: roll-ups only
        assert q.agg is fixpop_facet.agg
        assert q.pattern == fixpop_facet.pattern


def test_workload_filters_use_observed_values(fixpop, fixpop_facet):
    queries = generate_workload(
        fixpop_facet, fixpop, WorkloadSpec(count=200, seed=11, filter_probability=1.0)
    )
    observed = observed_bindings(fixpop_facet, fixpop)
    allowed = {t.lexical for values in observed.values() for t in values}
    assert allowed == {
        EX + "FR", EX + "BE", EX + "French", EX + "Dutch", "2020", "2021",
    }
    filtered = [q for q in queries if q.filters]
    assert filtered, "p=1 must add filters whenever values exist"
    for q in filtered:
        (flt,) = q.filters
        assert flt.op == "="
        assert flt.var in q.group_vars
        assert flt.constant.lexical in allowed


def test_workload_reproducible(fixpop, fixpop_facet):
    spec = WorkloadSpec(count=50, seed=123, filter_probability=0.5)
    a = generate_workload(fixpop_facet, fixpop, spec)
    b = generate_workload(fixpop_facet, fixpop, spec)
    assert [q.to_text() for q in a] == [q.to_text() for q in b]


def test_workload_requires_non_empty_graph(fixpop_facet):
    from kgcube import Graph

    with pytest.raises(ValidationError):
        generate_workload(fixpop_facet, Graph().freeze(), WorkloadSpec(count=1, seed=1))


# -- run_bench -------------------------------------------------------------------


def test_bench_base_only(fixpop, fixpop_lattice, fixpop_facet):
    workload = generate_workload(fixpop_facet, fixpop, WorkloadSpec(count=5, seed=3))
    report = run_bench(fixpop, fixpop_lattice, workload, [], repetitions=1, warmup=0)
    assert len(report.configurations) == 1
    base = report.base
    assert base.label == "base"
    assert len(base.per_query) == 5
    assert all(q.source == "base" for q in base.per_query)


def test_bench_full_materialization_answers_everything_from_views(
    fixpop, fixpop_lattice, fixpop_facet
):
    workload = generate_workload(
        fixpop_facet, fixpop, WorkloadSpec(count=40, seed=5, filter_probability=0.5)
    )
    report = run_bench(
        fixpop,
        fixpop_lattice,
        workload,
        [(AggValueCountCost(), 7)],
        verify=True,
        repetitions=1,
        warmup=0,
    )
    config = report.configurations[1]
    assert len(config.plan.chosen) == 7
    assert config.view_answered == len(workload)
    assert all(q.source != "base" for q in config.per_query)


def test_bench_report_complete_and_deterministic(fixpop, fixpop_lattice, fixpop_facet):
    workload = generate_workload(fixpop_facet, fixpop, WorkloadSpec(count=10, seed=9))
    configs = lambda: [(AggValueCountCost(), 2), (RandomCost(seed=4), 2)]
    r1 = run_bench(fixpop, fixpop_lattice, workload, configs(), repetitions=1, warmup=0)
    r2 = run_bench(fixpop, fixpop_lattice, workload, configs(), repetitions=1, warmup=0)
    assert len(r1.configurations) == 3
    for c1, c2 in zip(r1.configurations, r2.configurations):
        assert len(c1.per_query) == len(workload)
        assert [q.source for q in c1.per_query] == [q.source for q in c2.per_query]
        assert [q.rows for q in c1.per_query] == [q.rows for q in c2.per_query]
        if c1.plan is not None:
            assert c1.plan == c2.plan
    data = r1.to_json()
    assert data["schemaVersion"] == 1
    assert len(data["configurations"]) == 3
    json.dumps(data)  # must be serializable


def test_bench_user_config(fixpop, fixpop_lattice, fixpop_facet):
    workload = generate_workload(fixpop_facet, fixpop, WorkloadSpec(count=6, seed=2))
    report = run_bench(
        fixpop,
        fixpop_lattice,
        workload,
        [(UserDefinedCost(["c", "l"]), 2)],
        verify=True,
        repetitions=1,
        warmup=0,
    )
    config = report.configurations[1]
    assert config.plan.chosen == ("c", "l")
    assert config.storage_amplification > 0


def test_bench_csv_summary(fixpop, fixpop_lattice, fixpop_facet):
    workload = generate_workload(fixpop_facet, fixpop, WorkloadSpec(count=3, seed=2))
    report = run_bench(fixpop, fixpop_lattice, workload, [(AggValueCountCost(), 2)],
                       repetitions=1, warmup=0)
    csv_text = report.to_csv()
    lines = csv_text.strip().splitlines()
    assert len(lines) == 3  # header + base + one config
    assert lines[0].startswith("label,model,k,")


def test_bench_rejects_empty_workload(fixpop, fixpop_lattice):
    with pytest.raises(ValidationError):
        run_bench(fixpop, fixpop_lattice, [], [])


# -- synthesize_star ----------------------------------------------------------------


def test_star_shape_matches_fixture_schema():
    g, facet = synthesize_star(4, [("c", 2), ("l", 2), ("y", 2)], seed=1)
    assert g.n_triples == 16
    assert facet.group_vars == ("c", "l", "y")
    lattice = build_lattice(facet)
    assert len(lattice) == 8


def test_star_rejects_bad_params():
    with pytest.raises(ValidationError):
        synthesize_star(0, [("a", 2)])
    with pytest.raises(ValidationError):
        synthesize_star(3, [])
    with pytest.raises(ValidationError):
        synthesize_star(3, [("a", 0)])
    with pytest.raises(ValidationError):
        synthesize_star(3, [("a", 2), ("a", 3)])


def test_star_seeded_reproducible():
    a, _ = synthesize_star(30, [("x", 4), ("y", 3)], seed=77)
    b, _ = synthesize_star(30, [("x", 4), ("y", 3)], seed=77)
    assert a.serialize() == b.serialize()
    c, _ = synthesize_star(30, [("x", 4), ("y", 3)], seed=78)
    assert c.serialize() != a.serialize()


def test_star_cyclic_daily_year_reduction_is_exactly_365():
    g, facet = synthesize_star(
        3650, [("day", 365), ("year", 10)], seed=0, assignment="cyclic"
    )
    lattice = build_lattice(facet)
    daily = len(evaluate(g, lattice.node("day_year").query).rows)
    yearly = len(evaluate(g, lattice.node("year").query).rows)
    assert daily == 3650
    assert yearly == 10
    assert daily / yearly == 365
