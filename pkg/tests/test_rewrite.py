import random

import pytest

from kgcube import (
    Agg,
    AggValueCountCost,
    AnalyticalQuery,
    Facet,
    FacetMismatchError,
    FilterExpr,
    RandomCost,
    ValidationError,
    build_lattice,
    choose_view,
    evaluate,
    expand,
    generate_workload,
    greedy_select,
    iri,
    parse_query,
    rewrite_and_execute,
    synthesize_star,
    WorkloadSpec,
)
from kgcube.materialize import ExpandedGraph
from kgcube.rewrite import BASE_SOURCE, answer
from kgcube.select import SelectionPlan

from .conftest import EX
from .oracles import oracle_evaluate, tables_equal


def _plan(*ids):
    return SelectionPlan(tuple(ids), len(ids), "user", (), 0.0)


def _rows(table):
    return {tuple(t.lexical for t in key): value for key, value in table.rows.items()}


def test_no_views_means_base(fixpop, fixpop_lattice, fixpop_facet):
    eg = ExpandedGraph(fixpop, {})
    q = fixpop_facet.query.with_group_vars(("l",))
    plan = choose_view(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == BASE_SOURCE
    table = rewrite_and_execute(eg, plan, q)
    assert table == evaluate(fixpop, q)


def test_single_usable_view_chosen(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    q = fixpop_facet.query.with_group_vars(("l",))
    plan = choose_view(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "c_l"


def test_cheapest_usable_view_wins(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l", "l"))
    q = fixpop_facet.query.with_group_vars(("l",))
    plan = choose_view(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "l"  # 2 groups beat 3


def test_unusable_views_fall_back_to_base(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    q = fixpop_facet.query.with_group_vars(("y",))
    plan = choose_view(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == BASE_SOURCE


def test_rewritten_sum_rolls_up(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    q = fixpop_facet.query.with_group_vars(("l",))
    plan, table = answer(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "c_l"
    assert _rows(table) == {(EX + "French",): 26, (EX + "Dutch",): 6}


def test_rewritten_avg_uses_partials(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    base = fixpop_facet.query.with_group_vars(("l",))
    q = AnalyticalQuery(base.group_vars, base.pattern, base.filters, Agg.AVG, base.agg_var)
    plan, table = answer(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "c_l"
    assert table.rows[(iri(EX + "French"),)] == pytest.approx(26 / 3, rel=1e-12)
    assert table.rows[(iri(EX + "Dutch"),)] == 6.0


def test_rewritten_filter_on_retained_dimension(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    q = fixpop_facet.query.with_group_vars(("l",)).with_filters(
        (FilterExpr("c", "=", iri(EX + "BE")),)
    )
    plan, table = answer(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "c_l"
    assert _rows(table) == {(EX + "French",): 4, (EX + "Dutch",): 6}
    assert table == evaluate(fixpop, q)


def test_plan_query_mismatch_rejected(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    q1 = fixpop_facet.query.with_group_vars(("l",))
    q2 = fixpop_facet.query.with_group_vars(("c",))
    plan = choose_view(eg, fixpop_lattice, AggValueCountCost(), q1)
    with pytest.raises(ValidationError):
        rewrite_and_execute(eg, plan, q2)


def test_foreign_query_rejected(fixpop, fixpop_lattice):
    eg = ExpandedGraph(fixpop, {})
    q = parse_query(
        "SELECT ?a (SUM(?u) AS ?t) WHERE { ?s <urn:other> ?a . ?s <urn:m> ?u } GROUP BY ?a"
    )
    with pytest.raises(FacetMismatchError):
        choose_view(eg, fixpop_lattice, AggValueCountCost(), q)


def test_renamed_query_answered_from_view(fixpop, fixpop_lattice):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    q = parse_query(
        """
        PREFIX ex: <http://example.org/>
        SELECT ?tongue (SUM(?people) AS ?t)
        WHERE { ?row ex:country ?nation . ?row ex:lang ?tongue .
                ?row ex:year ?when . ?row ex:pop ?people }
        GROUP BY ?tongue
        """
    )
    plan, table = answer(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "c_l"
    assert _rows(table) == {(EX + "French",): 26, (EX + "Dutch",): 6}


def test_non_composable_aggregate_goes_to_base(fixpop, fixpop_lattice, fixpop_facet):
    ids = [n.id for n in fixpop_lattice.candidates()]
    eg = expand(fixpop, fixpop_lattice, _plan(*ids))
    base = fixpop_facet.query.with_group_vars(("l",))
    q = AnalyticalQuery(base.group_vars, base.pattern, base.filters, Agg.MAX, base.agg_var)
    plan, table = answer(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == BASE_SOURCE
    assert _rows(table) == {(EX + "French",): 12, (EX + "Dutch",): 6}


def test_count_query_rolls_up_from_sum_facet_views(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("c_l"))
    base = fixpop_facet.query.with_group_vars(("l",))
    q = AnalyticalQuery(base.group_vars, base.pattern, base.filters, Agg.COUNT, base.agg_var)
    plan, table = answer(eg, fixpop_lattice, AggValueCountCost(), q)
    assert plan.source == "c_l"
    assert _rows(table) == {(EX + "French",): 3, (EX + "Dutch",): 1}


def test_rewrite_plan_json(fixpop, fixpop_lattice, fixpop_facet):
    eg = expand(fixpop, fixpop_lattice, _plan("l"))
    q = fixpop_facet.query.with_group_vars(("l",))
    plan = choose_view(eg, fixpop_lattice, AggValueCountCost(), q)
    data = plan.to_json()
    assert data["source"] == "l"
    assert "urn:sofos:inView" in data["rewrittenPattern"]
    assert "urn:sofos:dim:l" in data["rewrittenPattern"]
    assert data["rollup"] == "sum-of-sums"


def test_choose_view_deterministic_tie_break(fixpop, fixpop_lattice, fixpop_facet):
    # under the constant model every view costs 1: lexicographic id wins
    eg = expand(fixpop, fixpop_lattice, _plan("l_y", "c_l"))
    q = fixpop_facet.query.with_group_vars(("l",))
    plan = choose_view(eg, fixpop_lattice, RandomCost(0), q)
    assert plan.source == "c_l"


def test_rewrite_soundness_randomized():
    rng = random.Random(1618)
    checked = 0
    while checked < 200:
        dims = [(f"d{i}", rng.randint(1, 4)) for i in range(rng.randint(1, 3))]
        g, facet = synthesize_star(rng.randint(1, 60), dims, seed=rng.randrange(10_000))
        agg = rng.choice(list(Agg))
        q0 = facet.query
        facet = Facet(AnalyticalQuery(q0.group_vars, q0.pattern, q0.filters, agg, q0.agg_var))
        lattice = build_lattice(facet)
        model = AggValueCountCost()
        plan = greedy_select(lattice, RandomCost(rng.randrange(1000)), g, rng.randint(0, 4))
        eg = expand(g, lattice, plan)
        for q in generate_workload(
            facet, g, WorkloadSpec(count=5, seed=rng.randrange(10_000), filter_probability=0.4)
        ):
            rplan, table = answer(eg, lattice, model, q)
            expected = oracle_evaluate(g, q)
            assert tables_equal(expected, table.rows, q.agg), (rplan.source, q)
            checked += 1
