"""Workload generation, star-schema synthesis and the timing harness.

Workloads are random facet-conformant queries: a uniform non-empty proper
subset of the grouping variables, optionally one equality filter on one of
them with a value drawn from that variable's observed bindings.  A fixed seed
reproduces the workload byte for byte.

The harness runs every query under every configuration (cost model + budget)
plus a views-free baseline, timing each query on the monotonic clock as the
median of three repetitions after a warm-up run, and reports latency
aggregates against storage amplification.  Queries are timed strictly one at
a time.
"""

from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass, field

from .costs import AggValueCountCost, CostModel
from .errors import KgCubeError, ValidationError
from .lattice import Facet, Lattice
from .materialize import ExpandedGraph, expand
from .query import Agg, AnalyticalQuery, FilterExpr, TriplePattern, Variable, evaluate, evaluate_bgp_ids
from .rewrite import BASE_SOURCE, choose_view, rewrite_and_execute
from .select import SelectionPlan, greedy_select
from .store import Graph, Term, iri, literal

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class WorkloadSpec:
    count: int
    seed: int
    filter_probability: float = 0.3


def observed_bindings(facet: Facet, g: Graph) -> dict[str, list[Term]]:
    """Distinct observed terms per grouping variable, sorted for determinism."""
    distinct: dict[str, set[int]] = {var: set() for var in facet.group_vars}
    for binding in evaluate_bgp_ids(g, facet.query.pattern, facet.query.filters):
        for var in facet.group_vars:
            distinct[var].add(binding[var])
    return {
        var: sorted((g.term(tid) for tid in tids), key=lambda t: t.sort_key())
        for var, tids in distinct.items()
    }


def generate_workload(facet: Facet, g: Graph, spec: WorkloadSpec) -> list[AnalyticalQuery]:
    """Random facet-targeting queries; seeded, hence reproducible.

    Grouping sets are uniform over the non-empty proper subsets of X (the
    full set is the facet itself, which the base graph answers natively), so
    with every non-root view materialized no generated query needs the base
    graph.  A single-variable facet has no proper subset and keeps X.
    """
    if g.n_triples == 0:
        raise ValidationError("cannot generate a workload over an empty graph")
    if spec.count < 0:
        raise ValidationError("workload count must be nonnegative")
    rng = random.Random(spec.seed)
    xs = facet.group_vars
    observed = observed_bindings(facet, g)
    queries: list[AnalyticalQuery] = []
    full = 1 << len(xs)
    for _ in range(spec.count):
        mask = rng.randrange(1, full - 1) if len(xs) > 1 else 1
        subset = tuple(x for i, x in enumerate(xs) if mask >> i & 1)
        q = facet.query.with_group_vars(subset)
        if rng.random() < spec.filter_probability:
            var = rng.choice(subset)
            values = observed[var]
            if values:  # a variable with no observed values gets no filter
                constant = rng.choice(values)
                q = q.with_filters(q.filters + (FilterExpr(var, "=", constant),))
        queries.append(q)
    return queries


# -- reports ------------------------------------------------------------------


@dataclass
class QueryOutcome:
    index: int
    time_ns: int
    source: str
    rows: int

    def to_json(self) -> dict:
        return {"index": self.index, "timeNs": self.time_ns, "source": self.source, "rows": self.rows}


@dataclass
class ConfigResult:
    label: str
    model_kind: str | None
    k: int | None
    plan: SelectionPlan | None
    selection_ns: int
    materialization_ns: int
    storage_amplification: float
    per_query: list[QueryOutcome] = field(default_factory=list)
    mean_ns: float = 0.0
    median_ns: float = 0.0
    p95_ns: float = 0.0
    speedup_vs_base: float = 1.0

    @property
    def view_answered(self) -> int:
        return sum(1 for q in self.per_query if q.source != BASE_SOURCE)

    def finish(self, base_mean: float | None) -> None:
        times = [q.time_ns for q in self.per_query]
        self.mean_ns = statistics.fmean(times) if times else 0.0
        self.median_ns = statistics.median(times) if times else 0.0
        self.p95_ns = _percentile(times, 0.95)
        if base_mean is not None and self.mean_ns > 0:
            self.speedup_vs_base = base_mean / self.mean_ns

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "model": self.model_kind,
            "k": self.k,
            "plan": self.plan.to_json() if self.plan else None,
            "selectionNs": self.selection_ns,
            "materializationNs": self.materialization_ns,
            "storageAmplification": self.storage_amplification,
            "meanNs": self.mean_ns,
            "medianNs": self.median_ns,
            "p95Ns": self.p95_ns,
            "speedupVsBase": self.speedup_vs_base,
            "viewAnswered": self.view_answered,
            "perQuery": [q.to_json() for q in self.per_query],
        }


def _percentile(times: list[int], q: float) -> float:
    if not times:
        return 0.0
    ordered = sorted(times)
    rank = min(len(ordered) - 1, max(0, math.ceil(q * len(ordered)) - 1))
    return float(ordered[rank])


def _peak_rss_kb() -> int | None:
    """Process peak RSS, informational only (triple/term counts are the
    memory proxy the reports compare on)."""
    try:
        import resource

        return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)
    except Exception:
        return None


@dataclass
class BenchReport:
    workload_size: int
    verified: bool
    configurations: list[ConfigResult]

    @property
    def base(self) -> ConfigResult:
        return self.configurations[0]

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "workloadSize": self.workload_size,
            "verified": self.verified,
            "processPeakRssKb": _peak_rss_kb(),
            "configurations": [c.to_json() for c in self.configurations],
        }

    def to_csv(self) -> str:
        header = (
            "label,model,k,meanNs,medianNs,p95Ns,speedupVsBase,"
            "storageAmplification,selectionNs,materializationNs,viewAnswered"
        )
        lines = [header]
        for c in self.configurations:
            lines.append(
                f"{c.label},{c.model_kind or ''},{'' if c.k is None else c.k},"
                f"{c.mean_ns},{c.median_ns},{c.p95_ns},{c.speedup_vs_base},"
                f"{c.storage_amplification},{c.selection_ns},{c.materialization_ns},{c.view_answered}"
            )
        return "\n".join(lines) + "\n"


def _values_match(expected: float | int, actual: float | int, agg: Agg) -> bool:
    if agg is Agg.AVG:
        scale = max(abs(expected), abs(actual), 1e-30)
        return abs(expected - actual) <= 1e-9 * scale
    return expected == actual


def verify_against_base(g: Graph, q: AnalyticalQuery, actual) -> str | None:
    """None when the rewritten result equals base evaluation, else a reason."""
    expected = evaluate(g, q)
    if set(expected.rows) != set(actual.rows):
        return f"group keys differ: {len(expected.rows)} vs {len(actual.rows)} rows"
    for key, value in expected.rows.items():
        if not _values_match(value, actual.rows[key], q.agg):
            return f"value mismatch for key {key}: {value} vs {actual.rows[key]}"
    return None


def run_bench(
    g: Graph,
    l: Lattice,
    workload: list[AnalyticalQuery],
    configs: list[tuple[CostModel, int]],
    *,
    verify: bool = False,
    repetitions: int = 3,
    warmup: int = 1,
) -> BenchReport:
    """Time the workload under the baseline and every configuration."""
    if not workload:
        raise ValidationError("workload must be non-empty")
    if repetitions < 1:
        raise ValidationError("need at least one timed repetition")

    results: list[ConfigResult] = []
    labels: set[str] = set()

    def run_config(model: CostModel, eg: ExpandedGraph, result: ConfigResult) -> None:
        for index, q in enumerate(workload):
            plan = None
            times = []
            table = None
            for rep in range(warmup + repetitions):
                start = time.perf_counter_ns()
                plan = choose_view(eg, l, model, q)
                table = rewrite_and_execute(eg, plan, q)
                elapsed = time.perf_counter_ns() - start
                if rep >= warmup:
                    times.append(elapsed)
            assert table is not None and plan is not None
            result.per_query.append(
                QueryOutcome(index, int(statistics.median(times)), plan.source, len(table.rows))
            )
            if verify and plan.source != BASE_SOURCE:
                reason = verify_against_base(g, q, table)
                if reason is not None:
                    raise KgCubeError(
                        f"verification failed for query {index} on view {plan.source}: {reason}"
                    )

    base_model = AggValueCountCost()
    base_result = ConfigResult(
        label="base",
        model_kind=None,
        k=None,
        plan=None,
        selection_ns=0,
        materialization_ns=0,
        storage_amplification=0.0,
    )
    run_config(base_model, ExpandedGraph(g, {}), base_result)
    base_result.finish(None)
    results.append(base_result)
    labels.add("base")

    for model, k in configs:
        label = f"{model.kind}-k{k}"
        suffix = 2
        while label in labels:
            label = f"{model.kind}-k{k}-{suffix}"
            suffix += 1
        labels.add(label)

        start = time.perf_counter_ns()
        plan = greedy_select(l, model, g, k)
        selection_ns = time.perf_counter_ns() - start
        start = time.perf_counter_ns()
        eg = expand(g, l, plan)
        materialization_ns = time.perf_counter_ns() - start
        result = ConfigResult(
            label=label,
            model_kind=model.kind,
            k=k,
            plan=plan,
            selection_ns=selection_ns,
            materialization_ns=materialization_ns,
            storage_amplification=eg.storage_amplification(),
        )
        run_config(model, eg, result)
        result.finish(base_result.mean_ns)
        results.append(result)

    return BenchReport(len(workload), verify, results)


# -- synthetic star graphs -------------------------------------------------------

OBS_PREFIX = "urn:star:obs:"
DIM_PRED_PREFIX = "urn:star:dim:"
VALUE_PREFIX = "urn:star:val:"
MEASURE_PRED = "urn:star:measure"
MEASURE_VAR = "m"
OBS_VAR = "obs"


def synthesize_star(
    n: int,
    dims: list[tuple[str, int]],
    measure_range: tuple[int, int] = (1, 100),
    seed: int = 0,
    assignment: str = "uniform",
) -> tuple[Graph, Facet]:
    """n observation nodes, one triple per dimension plus one integer measure.

    `assignment="uniform"` draws each dimension value uniformly (seeded);
    `"cyclic"` sweeps the dimension cross product so every combination occurs
    once per `prod(cardinalities)` observations.
    """
    if n < 1:
        raise ValidationError("need at least one observation")
    if not dims:
        raise ValidationError("need at least one dimension")
    names = [name for name, _ in dims]
    if len(set(names)) != len(names):
        raise ValidationError("dimension names must be distinct")
    for name, card in dims:
        if not name or name in (MEASURE_VAR, OBS_VAR):
            raise ValidationError(f"invalid dimension name {name!r}")
        if card < 1:
            raise ValidationError(f"dimension {name} needs cardinality >= 1")
    if assignment not in ("uniform", "cyclic"):
        raise ValidationError("assignment must be 'uniform' or 'cyclic'")

    rng = random.Random(seed)
    lo, hi = measure_range
    g = Graph()
    strides: list[int] = []
    stride = 1
    for _, card in dims:
        strides.append(stride)
        stride *= card
    for i in range(n):
        subject = iri(f"{OBS_PREFIX}{i}")
        for d, (name, card) in enumerate(dims):
            if assignment == "uniform":
                j = rng.randrange(card)
            else:
                j = (i // strides[d]) % card
            g.add(subject, iri(DIM_PRED_PREFIX + name), iri(f"{VALUE_PREFIX}{name}:{j}"))
        g.add(subject, iri(MEASURE_PRED), literal(str(rng.randint(lo, hi))))
    g.freeze()

    obs = Variable(OBS_VAR)
    pattern = tuple(
        TriplePattern(obs, iri(DIM_PRED_PREFIX + name), Variable(name)) for name in names
    ) + (TriplePattern(obs, iri(MEASURE_PRED), Variable(MEASURE_VAR)),)
    facet = Facet(AnalyticalQuery(tuple(names), pattern, (), Agg.SUM, MEASURE_VAR))
    return g, facet
