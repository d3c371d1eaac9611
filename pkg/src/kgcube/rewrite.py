"""Answering facet queries from materialized views.

`choose_view` picks the cheapest usable materialized view under a cost model
(base-graph evaluation is the fallback when no view retains the query's
grouping and filter variables).  `rewrite_and_execute` translates the query
onto the view's blank-node encoding: one pattern anchors the group nodes via
the provenance predicate, one dimension pattern per needed variable rebinds
the original variable names, and the stored partials are combined per
aggregate kind (sums add, counts add, min/min and max/max, AVG divides summed
sums by summed counts once).
"""

from __future__ import annotations

from dataclasses import dataclass

from .costs import CostModel
from .errors import ValidationError
from .lattice import Lattice, aggregate_composable, require_conformant
from .materialize import AGG_COUNT, AGG_MAX, AGG_MIN, AGG_SUM, DIM_PREFIX, IN_VIEW, ExpandedGraph
from .query import (
    Agg,
    AnalyticalQuery,
    GroupPartials,
    ResultTable,
    TriplePattern,
    Variable,
    evaluate,
    evaluate_bgp_ids,
    finalize,
)
from .store import iri, numeric_value

BASE_SOURCE = "base"

# internal variable names use '#', which the query grammar cannot produce
_GROUP = Variable("#group")
_SUM = Variable("#sum")
_COUNT = Variable("#count")
_MINMAX = Variable("#minmax")

_ROLLUP = {
    Agg.SUM: "sum-of-sums",
    Agg.COUNT: "sum-of-counts",
    Agg.AVG: "sum-of-sums / sum-of-counts",
    Agg.MIN: "min-of-mins",
    Agg.MAX: "max-of-maxes",
}


@dataclass(frozen=True)
class RewritePlan:
    """How one query will be answered: from the base graph or one view."""

    source: str
    query: AnalyticalQuery
    rewritten: tuple[TriplePattern, ...]
    rollup: str

    @property
    def uses_view(self) -> bool:
        return self.source != BASE_SOURCE

    def rewritten_text(self) -> str | None:
        if not self.uses_view:
            return None
        parts = " . ".join(str(tp) for tp in self.rewritten)
        filters = "".join(f" {f}" for f in self.query.filters)
        return f"{{ {parts}{filters} }}"

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "rollup": self.rollup,
            "rewrittenPattern": self.rewritten_text(),
        }


def _view_patterns(
    q: AnalyticalQuery,
    mapping: dict[str, str],
    view_iri_str: str,
    agg: Agg,
) -> tuple[TriplePattern, ...]:
    patterns = [TriplePattern(_GROUP, iri(IN_VIEW), iri(view_iri_str))]
    needed = list(q.group_vars) + sorted(q.filter_vars() - set(q.group_vars))
    for var in needed:
        patterns.append(TriplePattern(_GROUP, iri(DIM_PREFIX + mapping[var]), Variable(var)))
    if agg in (Agg.SUM, Agg.AVG):
        patterns.append(TriplePattern(_GROUP, iri(AGG_SUM), _SUM))
    if agg in (Agg.COUNT, Agg.AVG):
        patterns.append(TriplePattern(_GROUP, iri(AGG_COUNT), _COUNT))
    if agg is Agg.MIN:
        patterns.append(TriplePattern(_GROUP, iri(AGG_MIN), _MINMAX))
    if agg is Agg.MAX:
        patterns.append(TriplePattern(_GROUP, iri(AGG_MAX), _MINMAX))
    return tuple(patterns)


def choose_view(
    eg: ExpandedGraph, lattice: Lattice, model: CostModel, q: AnalyticalQuery
) -> RewritePlan:
    """Cheapest materialized view that can answer q, else the base graph."""
    mapping = require_conformant(lattice.facet.query, q)
    composable = aggregate_composable(q.agg, lattice.facet.agg)
    best_id: str | None = None
    best_key: tuple | None = None
    for view_id in sorted(eg.views) if composable else ():
        node = lattice.node(view_id)
        retained = set(node.group_vars)
        if any(mapping[x] not in retained for x in q.group_vars):
            continue
        if any(mapping[f.var] not in retained for f in q.filters):
            continue
        key = (model.cost(eg.base, node), view_id)
        if best_key is None or key < best_key:
            best_id, best_key = view_id, key
    if best_id is None:
        return RewritePlan(BASE_SOURCE, q, (), "none")
    view = eg.views[best_id]
    patterns = _view_patterns(q, mapping, view.iri, q.agg)
    return RewritePlan(best_id, q, patterns, _ROLLUP[q.agg])


def rewrite_and_execute(eg: ExpandedGraph, plan: RewritePlan, q: AnalyticalQuery) -> ResultTable:
    """Execute q through the plan; results match base-graph evaluation."""
    if plan.query != q:
        raise ValidationError("rewrite plan was built for a different query")
    if not plan.uses_view:
        return evaluate(eg.base, q)
    view = eg.views.get(plan.source)
    if view is None:
        raise ValidationError(f"view {plan.source!r} is not materialized")
    vg = view.graph
    groups: dict[tuple, GroupPartials] = {}
    for binding in evaluate_bgp_ids(vg, plan.rewritten, q.filters):
        key = tuple(vg.term(binding[v]) for v in q.group_vars)
        partial = groups.get(key)
        if partial is None:
            partial = groups[key] = GroupPartials()
        if q.agg in (Agg.SUM, Agg.AVG):
            value = numeric_value(vg.term(binding[_SUM.name]))
            assert value is not None
            partial.sum += value
        if q.agg in (Agg.COUNT, Agg.AVG):
            count = numeric_value(vg.term(binding[_COUNT.name]))
            assert count is not None
            partial.count += int(count)
        if q.agg in (Agg.MIN, Agg.MAX):
            value = numeric_value(vg.term(binding[_MINMAX.name]))
            assert value is not None
            if q.agg is Agg.MIN:
                partial.min = value if partial.min is None else min(partial.min, value)
            else:
                partial.max = value if partial.max is None else max(partial.max, value)
    rows = {key: finalize(q.agg, partial) for key, partial in groups.items()}
    return ResultTable(q.group_vars, rows)


def answer(
    eg: ExpandedGraph, lattice: Lattice, model: CostModel, q: AnalyticalQuery
) -> tuple[RewritePlan, ResultTable]:
    """Convenience: choose a source and execute in one call."""
    plan = choose_view(eg, lattice, model, q)
    return plan, rewrite_and_execute(eg, plan, q)
