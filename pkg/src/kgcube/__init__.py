"""Materialized aggregate-view selection and rewriting for knowledge graphs.

Pipeline: load an N-Triples graph, declare a facet (a grouped aggregate query
template), build the lattice of its 2^|X| views, score them under a pluggable
cost model, pick k views greedily, materialize them as blank-node encodings,
and answer incoming facet queries from the cheapest usable view with a
lossless roll-up, falling back to the base graph.  A bench harness measures
the query-time / storage-amplification trade-off per cost model, and a small
HTTP service plus CLI expose the whole flow.
"""

from .bench import (
    BenchReport,
    WorkloadSpec,
    generate_workload,
    observed_bindings,
    run_bench,
    synthesize_star,
)
from .costs import (
    AggValueCountCost,
    CostModel,
    FeatureVector,
    LearnedCost,
    LearnedRegressor,
    NodeCountCost,
    RandomCost,
    TripleCountCost,
    UserDefinedCost,
    features,
    make_model,
)
from .errors import (
    CapacityError,
    EvaluationError,
    FacetMismatchError,
    KgCubeError,
    NTriplesError,
    PlanningError,
    QuerySemanticError,
    QuerySyntaxError,
    StateError,
    StructuralError,
    TrainingError,
    ValidationError,
)
from .lattice import Facet, Lattice, ViewNode, build_lattice, can_answer
from .materialize import ExpandedGraph, MaterializedView, expand, materialize, storage_amplification
from .query import (
    Agg,
    AnalyticalQuery,
    FilterExpr,
    ResultTable,
    TriplePattern,
    Variable,
    evaluate,
    evaluate_bgp,
)
from .rewrite import RewritePlan, answer, choose_view, rewrite_and_execute
from .select import SelectionPlan, answer_cost, exhaustive_select, greedy_select
from .sparql import parse_query, query_to_text
from .store import Graph, GraphStats, Term, TermKind, bnode, iri, literal, load_ntriples

__version__ = "0.1.0"

__all__ = [
    "Agg",
    "AggValueCountCost",
    "AnalyticalQuery",
    "BenchReport",
    "CapacityError",
    "CostModel",
    "EvaluationError",
    "ExpandedGraph",
    "Facet",
    "FacetMismatchError",
    "FeatureVector",
    "FilterExpr",
    "Graph",
    "GraphStats",
    "KgCubeError",
    "Lattice",
    "LearnedCost",
    "LearnedRegressor",
    "MaterializedView",
    "NTriplesError",
    "NodeCountCost",
    "PlanningError",
    "QuerySemanticError",
    "QuerySyntaxError",
    "RandomCost",
    "ResultTable",
    "RewritePlan",
    "SelectionPlan",
    "StateError",
    "StructuralError",
    "Term",
    "TermKind",
    "TrainingError",
    "TriplePattern",
    "TripleCountCost",
    "UserDefinedCost",
    "ValidationError",
    "Variable",
    "ViewNode",
    "WorkloadSpec",
    "answer",
    "answer_cost",
    "bnode",
    "build_lattice",
    "can_answer",
    "choose_view",
    "evaluate",
    "evaluate_bgp",
    "exhaustive_select",
    "expand",
    "features",
    "generate_workload",
    "greedy_select",
    "iri",
    "literal",
    "load_ntriples",
    "make_model",
    "materialize",
    "observed_bindings",
    "parse_query",
    "query_to_text",
    "rewrite_and_execute",
    "run_bench",
    "storage_amplification",
    "synthesize_star",
]
