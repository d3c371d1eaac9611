"""Facets and their induced view lattice.

A facet is an analytical query designated as the root of a lattice; every
subset of its grouping variables yields one view node, ordered by set
inclusion.  Node ids are the sorted variable names joined by underscores
("apex" for the empty set), so they are stable across runs and usable as
bookmarkable keys.

The root node (the full grouping set) stands for base-graph evaluation: it is
always usable to answer queries but never a materialization candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .errors import CapacityError, FacetMismatchError, ValidationError
from .query import AnalyticalQuery, TriplePattern, Variable

MAX_FACET_VARS = 20

APEX_ID = "apex"


def node_id_for(group_vars: Iterable[str]) -> str:
    names = sorted(group_vars)
    return "_".join(names) if names else APEX_ID


@dataclass(frozen=True)
class Facet:
    """Root analytical query: grouping set X, pattern P and agg(u)."""

    query: AnalyticalQuery

    def __post_init__(self):
        if not self.query.group_vars:
            raise ValidationError("a facet needs at least one grouping variable")

    @property
    def group_vars(self) -> tuple[str, ...]:
        return self.query.group_vars

    @property
    def pattern(self) -> tuple[TriplePattern, ...]:
        return self.query.pattern

    @property
    def agg(self):
        return self.query.agg

    @property
    def agg_var(self) -> str:
        return self.query.agg_var

    @classmethod
    def from_text(cls, text: str) -> "Facet":
        from .sparql import parse_query

        return cls(parse_query(text))

    def to_json(self) -> dict:
        return {
            "groupVars": list(self.group_vars),
            "aggregate": self.query.agg.value,
            "aggregateVar": self.agg_var,
            "patternSize": len(self.pattern),
            "text": self.query.to_text(),
        }


@dataclass(frozen=True)
class ViewNode:
    """One lattice node: the facet query re-grouped by a subset of X."""

    id: str
    group_vars: tuple[str, ...]  # sorted
    query: AnalyticalQuery
    is_root: bool

    @property
    def level(self) -> int:
        return len(self.group_vars)

    def covers(self, other: "ViewNode") -> bool:
        """True iff `other` rolls up from this node (other.X' subset of ours)."""
        return set(other.group_vars) <= set(self.group_vars)


class Lattice:
    """All 2^|X| views of a facet, ordered by grouping-set inclusion."""

    def __init__(self, facet: Facet, nodes: dict[str, ViewNode]):
        self.facet = facet
        self.nodes = nodes
        self.root_id = node_id_for(facet.group_vars)

    @property
    def root(self) -> ViewNode:
        return self.nodes[self.root_id]

    @property
    def apex(self) -> ViewNode:
        return self.nodes[APEX_ID]

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def node(self, node_id: str) -> ViewNode:
        node = self.nodes.get(node_id)
        if node is None:
            raise ValidationError(f"unknown view id {node_id!r}")
        return node

    def sorted_nodes(self) -> list[ViewNode]:
        return sorted(self.nodes.values(), key=lambda n: (n.level, n.id))

    def candidates(self) -> list[ViewNode]:
        """Materialization candidates: every node except the root."""
        return [n for n in self.sorted_nodes() if not n.is_root]

    def precedes(self, w: ViewNode, v: ViewNode) -> bool:
        """The usability partial order: w precedes v iff w.X' is a subset of v.X'."""
        return v.covers(w)

    def descendants(self, v: ViewNode) -> list[ViewNode]:
        """Every node answerable from v (subset grouping sets), v included."""
        if v.id not in self.nodes:
            raise ValidationError(f"node {v.id!r} not in lattice")
        return [w for w in self.sorted_nodes() if v.covers(w)]

    def hasse_ancestors(self, v: ViewNode) -> list[str]:
        """Ids of immediate finer nodes (one grouping variable added)."""
        extra = [x for x in self.facet.group_vars if x not in v.group_vars]
        return sorted(node_id_for(list(v.group_vars) + [x]) for x in extra)

    def to_json(self) -> dict:
        return {
            "facet": self.facet.to_json(),
            "nodes": [
                {
                    "id": n.id,
                    "groupVars": list(n.group_vars),
                    "level": n.level,
                    "isRoot": n.is_root,
                    "ancestors": self.hasse_ancestors(n),
                }
                for n in self.sorted_nodes()
            ],
        }


def build_lattice(facet: Facet) -> Lattice:
    """One node per subset of the facet's grouping variables."""
    xs = facet.group_vars
    if len(xs) > MAX_FACET_VARS:
        raise CapacityError(f"facet has {len(xs)} grouping variables (limit {MAX_FACET_VARS})")
    nodes: dict[str, ViewNode] = {}
    for size in range(len(xs) + 1):
        for subset in combinations(sorted(xs), size):
            nid = node_id_for(subset)
            if nid in nodes:
                raise ValidationError(f"node id collision at {nid!r} (rename facet variables)")
            query = facet.query.with_group_vars(subset)
            nodes[nid] = ViewNode(nid, subset, query, is_root=len(subset) == len(xs))
    return Lattice(facet, nodes)


# -- facet conformance ---------------------------------------------------------


def match_query_shape(reference: AnalyticalQuery, q: AnalyticalQuery) -> dict[str, str] | None:
    """Variable mapping (q name -> reference name) if q has the reference's
    pattern modulo renaming and the same measure variable; else None.

    The aggregate kind is deliberately not compared: a facet's views store
    decomposable partials, so queries may aggregate the same measure
    differently (e.g. AVG over a SUM facet); composability is checked by
    can_answer.
    """
    if len(q.pattern) != len(reference.pattern):
        return None
    if q.pattern == reference.pattern and q.agg_var == reference.agg_var:
        return {v: v for v in q.pattern_vars()}

    ref_patterns = list(reference.pattern)

    def compatible(part, ref_part, mapping, used_ref_vars) -> dict | None:
        if isinstance(part, Variable) != isinstance(ref_part, Variable):
            return None
        if not isinstance(part, Variable):
            return mapping if part == ref_part else None
        bound = mapping.get(part.name)
        if bound is not None:
            return mapping if bound == ref_part.name else None
        if ref_part.name in used_ref_vars:
            return None
        new = dict(mapping)
        new[part.name] = ref_part.name
        return new

    def backtrack(idx: int, mapping: dict[str, str], used: set[int]) -> dict[str, str] | None:
        if idx == len(q.pattern):
            return mapping
        tp = q.pattern[idx]
        for j, ref_tp in enumerate(ref_patterns):
            if j in used:
                continue
            m = mapping
            for part, ref_part in zip((tp.s, tp.p, tp.o), (ref_tp.s, ref_tp.p, ref_tp.o)):
                m = compatible(part, ref_part, m, set(m.values()))
                if m is None:
                    break
            if m is None:
                continue
            result = backtrack(idx + 1, m, used | {j})
            if result is not None:
                return result
        return None

    mapping = backtrack(0, {q.agg_var: reference.agg_var}, set())
    if mapping is None:
        return None
    return mapping


def require_conformant(facet_query: AnalyticalQuery, q: AnalyticalQuery) -> dict[str, str]:
    mapping = match_query_shape(facet_query, q)
    if mapping is None:
        raise FacetMismatchError("query does not target this facet")
    return mapping


def aggregate_composable(query_agg, facet_agg) -> bool:
    """SUM/AVG/COUNT always roll up from the stored sum/count partials;
    MIN/MAX need the matching extra partial, stored only for MIN/MAX facets."""
    from .query import Agg

    if query_agg in (Agg.SUM, Agg.AVG, Agg.COUNT):
        return True
    return query_agg is facet_agg


def can_answer(v: ViewNode, q: AnalyticalQuery) -> bool:
    """True iff the view retains every grouping and filter variable of q and
    q's aggregate rolls up from the view's stored partials.

    Raises FacetMismatchError when q does not target the view's facet.
    """
    mapping = require_conformant(v.query, q)
    if not aggregate_composable(q.agg, v.query.agg):
        return False
    retained = set(v.group_vars)
    if any(mapping[x] not in retained for x in q.group_vars):
        return False
    return all(mapping[f.var] in retained for f in q.filters)
