"""Analytical query model and evaluator.

Supports the analytical subset: a connected basic graph pattern, equality /
comparison FILTERs against constants, GROUP BY over a subset of the pattern
variables and a single aggregate (SUM, AVG, COUNT, MAX, MIN) over one
variable.  Joins run smallest-estimated-cardinality-first over the store's
indexes; correctness never depends on the chosen order.

AVG is never computed directly: every grouping carries an exact integer (or
float) sum and a count, divided once at the end.  The materializer stores the
same partials, which is what makes view roll-ups lossless.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import EvaluationError, PlanningError, QuerySemanticError
from .store import Graph, Term, numeric_value

ORDERING_OPS = {"<", "<=", ">", ">="}
COMPARATORS = {"=", "!="} | ORDERING_OPS


class Agg(Enum):
    SUM = "SUM"
    AVG = "AVG"
    COUNT = "COUNT"
    MAX = "MAX"
    MIN = "MIN"


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be non-empty")

    def __str__(self) -> str:
        return f"?{self.name}"


PatternPart = Union[Term, Variable]


@dataclass(frozen=True, slots=True)
class TriplePattern:
    s: PatternPart
    p: PatternPart
    o: PatternPart

    def __post_init__(self):
        if isinstance(self.p, Term) and self.p.kind.value != "iri":
            raise ValueError("constant predicate must be an IRI")

    def variables(self) -> frozenset[str]:
        return frozenset(t.name for t in (self.s, self.p, self.o) if isinstance(t, Variable))

    def __str__(self) -> str:
        def part(t: PatternPart) -> str:
            return str(t) if isinstance(t, Variable) else t.to_ntriples()

        return f"{part(self.s)} {part(self.p)} {part(self.o)}"


@dataclass(frozen=True, slots=True)
class FilterExpr:
    var: str
    op: str
    constant: Term

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")
        if self.op in ORDERING_OPS and numeric_value(self.constant) is None:
            raise ValueError(f"comparator {self.op} requires a numeric constant")

    def accepts(self, term: Term) -> bool:
        if self.op in ORDERING_OPS:
            left = numeric_value(term)
            if left is None:
                return False  # type mismatch: the binding fails the filter
            right = numeric_value(self.constant)
            assert right is not None
            if self.op == "<":
                return left < right
            if self.op == "<=":
                return left <= right
            if self.op == ">":
                return left > right
            return left >= right
        left_num = numeric_value(term)
        right_num = numeric_value(self.constant)
        if left_num is not None and right_num is not None:
            equal = left_num == right_num
        else:
            equal = term == self.constant
        return equal if self.op == "=" else not equal

    def __str__(self) -> str:
        return f"FILTER(?{self.var} {self.op} {self.constant.to_ntriples()})"


@dataclass(frozen=True)
class AnalyticalQuery:
    """SELECT X (agg(u) AS ?v) WHERE { P, filters } GROUP BY X."""

    group_vars: tuple[str, ...]
    pattern: tuple[TriplePattern, ...]
    filters: tuple[FilterExpr, ...]
    agg: Agg
    agg_var: str

    def __post_init__(self):
        pattern_vars = self.pattern_vars()
        if len(set(self.group_vars)) != len(self.group_vars):
            raise QuerySemanticError("duplicate GROUP BY variable")
        missing = [v for v in self.group_vars if v not in pattern_vars]
        if missing:
            raise QuerySemanticError(f"GROUP BY variable ?{missing[0]} not in WHERE clause")
        if self.agg_var not in pattern_vars:
            raise QuerySemanticError(f"aggregate variable ?{self.agg_var} not in WHERE clause")
        if self.agg_var in self.group_vars:
            raise QuerySemanticError(f"aggregate variable ?{self.agg_var} may not be grouped")
        for f in self.filters:
            if f.var not in pattern_vars:
                raise QuerySemanticError(f"FILTER variable ?{f.var} not in WHERE clause")

    def pattern_vars(self) -> frozenset[str]:
        out: set[str] = set()
        for tp in self.pattern:
            out |= tp.variables()
        return frozenset(out)

    def filter_vars(self) -> frozenset[str]:
        return frozenset(f.var for f in self.filters)

    def with_group_vars(self, group_vars: Iterable[str]) -> "AnalyticalQuery":
        return AnalyticalQuery(tuple(group_vars), self.pattern, self.filters, self.agg, self.agg_var)

    def with_filters(self, filters: Iterable[FilterExpr]) -> "AnalyticalQuery":
        return AnalyticalQuery(self.group_vars, self.pattern, tuple(filters), self.agg, self.agg_var)

    def to_text(self) -> str:
        from .sparql import query_to_text

        return query_to_text(self)


class ResultTable:
    """Grouped aggregate rows keyed by tuples of terms aligned to group_vars."""

    def __init__(self, group_vars: tuple[str, ...], rows: dict[tuple[Term, ...], int | float]):
        self.group_vars = group_vars
        self.rows = rows

    def __eq__(self, other) -> bool:
        return isinstance(other, ResultTable) and self.rows == other.rows

    def __len__(self) -> int:
        return len(self.rows)

    def sorted_rows(self) -> list[tuple[tuple[Term, ...], int | float]]:
        return sorted(self.rows.items(), key=lambda kv: tuple(t.sort_key() for t in kv[0]))

    def to_json(self) -> dict:
        return {
            "groupVars": list(self.group_vars),
            "rows": [
                {"key": [t.to_json() for t in key], "value": value}
                for key, value in self.sorted_rows()
            ],
        }

    def __repr__(self) -> str:
        cells = ", ".join(
            "(" + ", ".join(t.lexical for t in key) + f"): {value}" for key, value in self.sorted_rows()
        )
        return f"ResultTable[{cells}]"


# -- BGP evaluation -----------------------------------------------------------


def _check_connected(pattern: tuple[TriplePattern, ...]) -> None:
    if not pattern:
        raise PlanningError("empty pattern")
    # constant-only patterns are boolean gates, not cross products: exempt
    var_sets = [tp.variables() for tp in pattern if tp.variables()]
    if len(var_sets) <= 1:
        return
    remaining = list(range(1, len(var_sets)))
    reached = set(var_sets[0])
    progress = True
    while remaining and progress:
        progress = False
        for idx in list(remaining):
            if var_sets[idx] & reached:
                reached |= var_sets[idx]
                remaining.remove(idx)
                progress = True
    if remaining:
        raise PlanningError("disconnected graph pattern (no shared variables)")


def _pattern_ids(g: Graph, tp: TriplePattern, binding: dict[str, int]) -> tuple[int | None, ...] | None:
    """Constant/bound positions as term ids; None = free. Returns None if a
    constant is absent from the dictionary (pattern cannot match)."""
    out: list[int | None] = []
    for part in (tp.s, tp.p, tp.o):
        if isinstance(part, Variable):
            out.append(binding.get(part.name))
        else:
            tid = g.term_id(part)
            if tid is None:
                return None
            out.append(tid)
    return tuple(out)


def _plan_order(g: Graph, pattern: tuple[TriplePattern, ...]) -> list[TriplePattern]:
    """Greedy join order: cheapest constant-only estimate first, then always a
    pattern sharing a variable with what is already bound."""
    estimates: dict[int, int] = {}
    for idx, tp in enumerate(pattern):
        ids = _pattern_ids(g, tp, {})
        estimates[idx] = 0 if ids is None else g.count_pattern(*ids)
    remaining = set(range(len(pattern)))
    order: list[int] = []
    bound: set[str] = set()
    while remaining:
        candidates = [i for i in remaining if not order or pattern[i].variables() & bound]
        if not candidates:  # connectivity was validated: only constant-only patterns remain
            candidates = list(remaining)
        best = min(
            candidates,
            key=lambda i: (-len([1 for v in pattern[i].variables() if v in bound]), estimates[i], i),
        )
        order.append(best)
        remaining.remove(best)
        bound |= pattern[best].variables()
    return [pattern[i] for i in order]


def evaluate_bgp_ids(
    g: Graph,
    pattern: tuple[TriplePattern, ...],
    filters: tuple[FilterExpr, ...] = (),
) -> Iterator[dict[str, int]]:
    """Yield every solution mapping (variable -> term id) for the pattern.

    Filters are applied as soon as their variable binds; semantics match
    filtering complete bindings.
    """
    _check_connected(pattern)
    ordered = _plan_order(g, pattern)
    pattern_vars: set[str] = set()
    for tp in pattern:
        pattern_vars |= tp.variables()
    filters_by_var: dict[str, list[FilterExpr]] = {}
    for f in filters:
        if f.var not in pattern_vars:
            raise PlanningError(f"filter variable ?{f.var} is not bound by the pattern")
        filters_by_var.setdefault(f.var, []).append(f)

    def extend(binding: dict[str, int], depth: int) -> Iterator[dict[str, int]]:
        if depth == len(ordered):
            yield binding
            return
        tp = ordered[depth]
        ids = _pattern_ids(g, tp, binding)
        if ids is None:
            return
        positions = (tp.s, tp.p, tp.o)
        for match in g.match_ids(*ids):
            new_binding = binding
            ok = True
            for part, tid in zip(positions, match):
                if not isinstance(part, Variable):
                    continue
                existing = new_binding.get(part.name)
                if existing is not None:
                    if existing != tid:  # same variable twice in one pattern
                        ok = False
                        break
                    continue
                if part.name in filters_by_var:
                    term = g.term(tid)
                    if not all(f.accepts(term) for f in filters_by_var[part.name]):
                        ok = False
                        break
                if new_binding is binding:
                    new_binding = dict(binding)
                new_binding[part.name] = tid
            if ok:
                yield from extend(new_binding, depth + 1)

    yield from extend({}, 0)


def evaluate_bgp(
    g: Graph,
    pattern: Iterable[TriplePattern],
    filters: Iterable[FilterExpr] = (),
) -> Iterator[dict[str, Term]]:
    """Like evaluate_bgp_ids but with bindings resolved to terms."""
    for binding in evaluate_bgp_ids(g, tuple(pattern), tuple(filters)):
        yield {name: g.term(tid) for name, tid in binding.items()}


# -- grouping and aggregation ---------------------------------------------------


@dataclass
class GroupPartials:
    """Decomposable per-group partial aggregates."""

    count: int = 0
    sum: int | float = 0
    min: int | float | None = None
    max: int | float | None = None


def group_partials(
    g: Graph,
    q: AnalyticalQuery,
    need: frozenset[str] = frozenset({"count"}),
) -> dict[tuple[int, ...], GroupPartials]:
    """Group the query's bindings and accumulate the requested partials.

    `need` is a subset of {"count", "sum", "min", "max"}; count is always
    kept.  Numeric partials raise EvaluationError on non-numeric measures.
    """
    want_numeric = bool(need & {"sum", "min", "max"})
    groups: dict[tuple[int, ...], GroupPartials] = {}
    for binding in evaluate_bgp_ids(g, q.pattern, q.filters):
        key = tuple(binding[v] for v in q.group_vars)
        partial = groups.get(key)
        if partial is None:
            partial = groups[key] = GroupPartials()
        partial.count += 1
        if want_numeric:
            term = g.term(binding[q.agg_var])
            value = numeric_value(term)
            if value is None:
                raise EvaluationError(
                    f"non-numeric value {term.to_ntriples()} for aggregate variable ?{q.agg_var}"
                )
            if "sum" in need:
                partial.sum += value
            if "min" in need:
                partial.min = value if partial.min is None else min(partial.min, value)
            if "max" in need:
                partial.max = value if partial.max is None else max(partial.max, value)
    return groups


_NEED_FOR_AGG = {
    Agg.SUM: frozenset({"sum"}),
    Agg.AVG: frozenset({"sum", "count"}),
    Agg.COUNT: frozenset({"count"}),
    Agg.MIN: frozenset({"min"}),
    Agg.MAX: frozenset({"max"}),
}


def finalize(agg: Agg, partial: GroupPartials) -> int | float:
    if agg is Agg.COUNT:
        return partial.count
    if agg is Agg.SUM:
        return partial.sum
    if agg is Agg.AVG:
        return partial.sum / partial.count
    if agg is Agg.MIN:
        assert partial.min is not None
        return partial.min
    assert partial.max is not None
    return partial.max


def evaluate(g: Graph, q: AnalyticalQuery) -> ResultTable:
    """Full query evaluation: BGP + filters, grouped, aggregated.

    Zero matching bindings yield an empty table (no NULL row).
    """
    groups = group_partials(g, q, _NEED_FOR_AGG[q.agg])
    rows = {
        tuple(g.term(tid) for tid in key): finalize(q.agg, partial)
        for key, partial in groups.items()
    }
    return ResultTable(q.group_vars, rows)
