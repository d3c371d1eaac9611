"""View materialization into blank-node group encodings.

Each materialized view is a small RDF graph of its own: one blank node per
group carrying the group's dimension bindings, decomposable aggregate
partials (always sum and count; min/max only when the facet aggregate needs
them) and a provenance triple linking it to the view IRI.  The base graph is
never touched; the union of base and view graphs is the expanded graph.

Blank-node labels are `v_<viewId>_<groupIndex>` with groups numbered in
sorted-key order, which makes the N-Triples serialization of a view
reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import ValidationError
from .lattice import Lattice, ViewNode
from .query import Agg, GroupPartials, group_partials
from .store import Graph, Term, bnode, iri, literal_for_number

if TYPE_CHECKING:
    from .select import SelectionPlan

VIEW_IRI_PREFIX = "urn:sofos:view:"
DIM_PREFIX = "urn:sofos:dim:"
AGG_SUM = "urn:sofos:agg:sum"
AGG_COUNT = "urn:sofos:agg:count"
AGG_MIN = "urn:sofos:agg:min"
AGG_MAX = "urn:sofos:agg:max"
IN_VIEW = "urn:sofos:inView"


def view_iri(node_id: str) -> str:
    return VIEW_IRI_PREFIX + node_id


def partials_needed(agg: Agg) -> frozenset[str]:
    """Partials stored per group: sum and count always (AVG needs both and
    COUNT is free), plus min or max when the facet aggregate asks for it."""
    need = {"sum", "count"}
    if agg is Agg.MIN:
        need.add("min")
    elif agg is Agg.MAX:
        need.add("max")
    return frozenset(need)


def extra_partials(agg: Agg) -> int:
    return 1 if agg in (Agg.MIN, Agg.MAX) else 0


def sorted_group_rows(g: Graph, node: ViewNode) -> list[tuple[tuple[Term, ...], GroupPartials]]:
    """The view query's groups with partials, sorted by group key."""
    groups = group_partials(g, node.query, partials_needed(node.query.agg))
    resolved = [(tuple(g.term(tid) for tid in key), p) for key, p in groups.items()]
    resolved.sort(key=lambda kv: tuple(t.sort_key() for t in kv[0]))
    return resolved


@dataclass
class MaterializedView:
    """Blank-node encoding of one view's pre-aggregated groups."""

    node_id: str
    group_vars: tuple[str, ...]
    agg: Agg
    groups: list[tuple[tuple[Term, ...], GroupPartials]]
    triples: list[tuple[Term, Term, Term]]
    graph: Graph

    @property
    def iri(self) -> str:
        return view_iri(self.node_id)

    @property
    def group_count(self) -> int:
        return len(self.groups)

    @property
    def triple_count(self) -> int:
        return len(self.triples)

    @property
    def term_count(self) -> int:
        """Distinct non-predicate terms in the encoding (measured, not derived)."""
        terms = set()
        for s, _, o in self.triples:
            terms.add(s)
            terms.add(o)
        return len(terms)

    def to_ntriples(self) -> str:
        return "".join(
            f"{s.to_ntriples()} {p.to_ntriples()} {o.to_ntriples()} .\n" for s, p, o in self.triples
        )

    def sample_groups(self, limit: int | None = None) -> list[dict]:
        out = []
        for key, partial in self.groups[: limit if limit is not None else len(self.groups)]:
            record: dict = {
                "key": {var: term.to_json() for var, term in zip(self.group_vars, key)},
                "sum": partial.sum,
                "count": partial.count,
            }
            if partial.min is not None:
                record["min"] = partial.min
            if partial.max is not None:
                record["max"] = partial.max
            out.append(record)
        return out

    def to_json(self) -> dict:
        return {
            "id": self.node_id,
            "iri": self.iri,
            "groupVars": list(self.group_vars),
            "groups": self.group_count,
            "tripleCount": self.triple_count,
            "termCount": self.term_count,
        }


def materialize(g: Graph, node: ViewNode) -> MaterializedView:
    """Evaluate the view query and encode its groups as blank-node triples."""
    if node.is_root:
        raise ValidationError("the root view stands for the base graph and is never materialized")
    rows = sorted_group_rows(g, node)
    agg = node.query.agg
    view_term = iri(view_iri(node.id))
    triples: list[tuple[Term, Term, Term]] = []
    for index, (key, partial) in enumerate(rows):
        group_node = bnode(f"v_{node.id}_{index}")
        for var, value in zip(node.group_vars, key):
            triples.append((group_node, iri(DIM_PREFIX + var), value))
        triples.append((group_node, iri(AGG_SUM), literal_for_number(partial.sum)))
        triples.append((group_node, iri(AGG_COUNT), literal_for_number(partial.count)))
        if agg is Agg.MIN:
            assert partial.min is not None
            triples.append((group_node, iri(AGG_MIN), literal_for_number(partial.min)))
        elif agg is Agg.MAX:
            assert partial.max is not None
            triples.append((group_node, iri(AGG_MAX), literal_for_number(partial.max)))
        triples.append((group_node, iri(IN_VIEW), view_term))
    return MaterializedView(
        node_id=node.id,
        group_vars=node.group_vars,
        agg=agg,
        groups=rows,
        triples=triples,
        graph=Graph.from_triples(triples),
    )


class ExpandedGraph:
    """Base graph plus the blank-node encodings of the chosen views."""

    def __init__(self, base: Graph, views: dict[str, MaterializedView]):
        self.base = base
        self.views = views

    @property
    def total_view_triples(self) -> int:
        return sum(v.triple_count for v in self.views.values())

    def storage_amplification(self) -> float:
        if self.base.n_triples == 0:
            raise ValidationError("storage amplification is undefined for an empty base graph")
        if not self.views:
            return 0.0
        return self.total_view_triples / self.base.n_triples

    def to_json(self) -> dict:
        return {
            "baseTriples": self.base.n_triples,
            "totalViewTriples": self.total_view_triples,
            "storageAmplification": self.storage_amplification() if self.base.n_triples else None,
            "views": [self.views[k].to_json() for k in sorted(self.views)],
        }


def expand(g: Graph, lattice: Lattice, plan: SelectionPlan) -> ExpandedGraph:
    """Materialize every view chosen by the plan over the (shared) base graph."""
    if len(set(plan.chosen)) != len(plan.chosen):
        raise ValidationError("selection plan contains duplicate view ids")
    views: dict[str, MaterializedView] = {}
    for node_id in plan.chosen:
        node = lattice.node(node_id)
        views[node_id] = materialize(g, node)
    return ExpandedGraph(g, views)


def storage_amplification(eg: ExpandedGraph) -> float:
    return eg.storage_amplification()
