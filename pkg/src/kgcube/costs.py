"""Pluggable per-view cost functions.

Six models behind one interface: a constant baseline (random selection comes
from seeded tie-breaking in the selector), triple count and node count of the
view's blank-node encoding, the view's group count, a trainable runtime
regressor over query/graph features, and a user-defined pick list.

The three analytic models derive their numbers from the grouped partials
without building the encoding; tests cross-check them against counts measured
on actually materialized views.  Group tables are cached per (graph, view)
behind a lock, since computing them means evaluating the view query.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence
from weakref import WeakKeyDictionary

import numpy as np

from .errors import EvaluationError, StateError, TrainingError, ValidationError
from .lattice import ViewNode
from .materialize import VIEW_IRI_PREFIX
from .query import Agg, GroupPartials, Variable, group_partials
from .store import Graph, Term, iri, literal_for_number

CLAMP_EPSILON = 1e-9

KINDS = ("random", "triples", "aggvalues", "nodes", "learned", "user")

_AGG_ORDER = (Agg.SUM, Agg.AVG, Agg.COUNT, Agg.MAX, Agg.MIN)


# -- shared cached group tables --------------------------------------------------

_tables_lock = threading.Lock()
_tables: "WeakKeyDictionary[Graph, dict[ViewNode, list[tuple[tuple[Term, ...], GroupPartials]]]]" = (
    WeakKeyDictionary()
)


def _need_for(agg: Agg) -> frozenset[str]:
    need = {"sum", "count"}
    if agg is Agg.MIN:
        need.add("min")
    elif agg is Agg.MAX:
        need.add("max")
    return frozenset(need)


def view_group_table(g: Graph, v: ViewNode) -> list[tuple[tuple[Term, ...], GroupPartials]]:
    """Grouped partials of the view query, resolved to terms; write-once cached."""
    with _tables_lock:
        per_graph = _tables.setdefault(g, {})
        cached = per_graph.get(v)
    if cached is not None:
        return cached
    groups = group_partials(g, v.query, _need_for(v.query.agg))
    table = [(tuple(g.term(tid) for tid in key), p) for key, p in groups.items()]
    with _tables_lock:
        return _tables.setdefault(g, {}).setdefault(v, table)


class CostModel:
    """A function from lattice nodes to nonnegative estimated query cost."""

    kind: str = "abstract"

    def cost(self, g: Graph, v: ViewNode) -> float:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


def cost(model: CostModel, g: Graph, v: ViewNode) -> float:
    return model.cost(g, v)


class RandomCost(CostModel):
    """Constant cost 1 for every view; the seed drives the selector's
    tie-breaking, which is what makes the chosen subset random."""

    kind = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def cost(self, g: Graph, v: ViewNode) -> float:
        return 1.0

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed}


class TripleCountCost(CostModel):
    """Triple count of the view's encoding, derived without materializing:
    groups x (dims + sum + count + provenance [+ min/max])."""

    kind = "triples"

    def cost(self, g: Graph, v: ViewNode) -> float:
        table = view_group_table(g, v)
        extra = 1 if v.query.agg in (Agg.MIN, Agg.MAX) else 0
        return float(len(table) * (len(v.group_vars) + 2 + 1 + extra))


class AggValueCountCost(CostModel):
    """Number of rows of the query representing the view."""

    kind = "aggvalues"

    def cost(self, g: Graph, v: ViewNode) -> float:
        try:
            return float(len(view_group_table(g, v)))
        except EvaluationError:
            # non-numeric measure: the result count still exists (COUNT facet),
            # only the sum partial does not
            return float(len(group_partials(g, v.query, frozenset({"count"}))))


class NodeCountCost(CostModel):
    """Distinct non-predicate terms in the view's encoding, derived without
    materializing: one blank node per group plus the distinct dimension
    values, partial-aggregate literals and the view IRI."""

    kind = "nodes"

    def cost(self, g: Graph, v: ViewNode) -> float:
        table = view_group_table(g, v)
        if not table:
            return 0.0
        agg = v.query.agg
        others: set[Term] = {iri(VIEW_IRI_PREFIX + v.id)}
        for key, partial in table:
            others.update(key)
            others.add(literal_for_number(partial.sum))
            others.add(literal_for_number(partial.count))
            if agg is Agg.MIN:
                assert partial.min is not None
                others.add(literal_for_number(partial.min))
            elif agg is Agg.MAX:
                assert partial.max is not None
                others.add(literal_for_number(partial.max))
        return float(len(table) + len(others))


class UserDefinedCost(CostModel):
    """The user's pick list as a cost function: chosen views are free, all
    others unusable.  The root is always free so fallback stays finite."""

    kind = "user"

    def __init__(self, chosen: Iterable[str]):
        self.chosen = tuple(chosen)
        if len(set(self.chosen)) != len(self.chosen):
            raise ValidationError("duplicate view ids in user selection")

    def cost(self, g: Graph, v: ViewNode) -> float:
        if v.is_root or v.id in self.chosen:
            return 0.0
        return math.inf

    def describe(self) -> dict:
        return {"kind": self.kind, "views": list(self.chosen)}


# -- features ---------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValidationError("feature names/values length mismatch")
        if not all(math.isfinite(x) for x in self.values):
            raise ValidationError("non-finite feature value")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


_profiles_lock = threading.Lock()
_profiles: "WeakKeyDictionary[Graph, dict]" = WeakKeyDictionary()


def _bgp_profile(g: Graph, v: ViewNode) -> tuple[int, dict[str, int]]:
    """Binding count and per-variable distinct-value counts for the view's
    pattern+filters (shared by every node of the facet; cached)."""
    key = (v.query.pattern, v.query.filters)
    with _profiles_lock:
        per_graph = _profiles.setdefault(g, {})
        cached = per_graph.get(key)
    if cached is not None:
        return cached
    from .query import evaluate_bgp_ids

    bindings = 0
    distinct: dict[str, set[int]] = {}
    for binding in evaluate_bgp_ids(g, v.query.pattern, v.query.filters):
        bindings += 1
        for name, tid in binding.items():
            distinct.setdefault(name, set()).add(tid)
    profile = (bindings, {name: len(vals) for name, vals in distinct.items()})
    with _profiles_lock:
        return _profiles.setdefault(g, {}).setdefault(key, profile)


def features(g: Graph, v: ViewNode, exact_group_limit: int = 10_000) -> FeatureVector:
    """Deterministic fixed-order feature encoding of a view over a graph.

    Slots: per constant predicate of the pattern its presence and graph
    frequency, the grouping-variable count, a one-hot of the aggregate kind,
    per pattern variable its distinct-value count (0 when not grouped by it),
    and the group count (exact up to `exact_group_limit` graph triples, else
    the capped distinct-value product).
    """
    stats = g.stats()
    names: list[str] = []
    values: list[float] = []
    predicates = sorted(
        {tp.p.lexical for tp in v.query.pattern if not isinstance(tp.p, Variable)}
    )
    for pred in predicates:
        names.append(f"pred_present:{pred}")
        values.append(1.0)
        names.append(f"pred_freq:{pred}")
        values.append(float(stats.predicate_counts.get(pred, 0)))
    names.append("group_var_count")
    values.append(float(len(v.group_vars)))
    for agg in _AGG_ORDER:
        names.append(f"agg_is_{agg.value.lower()}")
        values.append(1.0 if v.query.agg is agg else 0.0)
    bindings, distinct = _bgp_profile(g, v)
    grouped = set(v.group_vars)
    for var in sorted(v.query.pattern_vars() - {v.query.agg_var}):
        names.append(f"distinct:{var}")
        values.append(float(distinct.get(var, 0)) if var in grouped else 0.0)
    if g.n_triples <= exact_group_limit:
        group_count = float(len(view_group_table(g, v)))
    else:
        product = 1.0
        for var in v.group_vars:
            product *= max(1.0, float(distinct.get(var, 0)))
        group_count = min(product, float(bindings))
    names.append("group_count")
    values.append(group_count)
    return FeatureVector(tuple(names), tuple(values))


# -- learned regressor --------------------------------------------------------------


@dataclass
class TrainingLog:
    epochs: int
    initial_mse: float
    final_mse: float


class LearnedRegressor:
    """Linear runtime model over z-score-normalized features, fit by
    full-batch gradient descent on MSE."""

    def __init__(
        self,
        feature_names: tuple[str, ...],
        weights: np.ndarray,
        bias: float,
        mean: np.ndarray,
        std: np.ndarray,
        log: TrainingLog | None = None,
    ):
        self.feature_names = feature_names
        self.weights = weights
        self.bias = bias
        self.mean = mean
        self.std = std
        self.log = log

    def predict(self, fv: FeatureVector) -> float:
        if fv.names != self.feature_names:
            raise ValidationError("feature vector does not match the trained model")
        z = (fv.as_array() - self.mean) / self.std
        return float(z @ self.weights + self.bias)

    @classmethod
    def train(
        cls,
        samples: Sequence[tuple[FeatureVector, float]],
        learning_rate: float = 0.01,
        epochs: int = 500,
    ) -> "LearnedRegressor":
        if not samples:
            raise TrainingError("no training samples")
        names = samples[0][0].names
        if any(fv.names != names for fv, _ in samples):
            raise TrainingError("inconsistent feature vectors")
        dim = len(names)
        if len(samples) < dim + 1:
            raise TrainingError(f"need at least {dim + 1} samples for {dim} features")
        if any(target <= 0 for _, target in samples):
            raise TrainingError("targets must be positive running times")
        x = np.stack([fv.as_array() for fv, _ in samples])
        y = np.asarray([target for _, target in samples], dtype=np.float64)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0.0] = 1.0
        z = (x - mean) / std
        n = len(samples)
        weights = np.zeros(dim)
        bias = 0.0
        initial_mse = float(np.mean(y**2))
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(epochs):
                residual = z @ weights + bias - y
                weights -= learning_rate * (2.0 / n) * (z.T @ residual)
                bias -= learning_rate * (2.0 / n) * float(residual.sum())
                if not np.isfinite(weights).all() or not math.isfinite(bias):
                    raise TrainingError("training diverged; try a smaller learning rate")
            final_mse = float(np.mean((z @ weights + bias - y) ** 2))
        if not math.isfinite(final_mse):
            raise TrainingError("training diverged; try a smaller learning rate")
        return cls(names, weights, bias, mean, std, TrainingLog(epochs, initial_mse, final_mse))

    def to_json(self) -> dict:
        return {
            "featureNames": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "normalization": {
                "mean": [float(m) for m in self.mean],
                "std": [float(s) for s in self.std],
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "LearnedRegressor":
        return cls(
            tuple(data["featureNames"]),
            np.asarray(data["weights"], dtype=np.float64),
            float(data["bias"]),
            np.asarray(data["normalization"]["mean"], dtype=np.float64),
            np.asarray(data["normalization"]["std"], dtype=np.float64),
        )


class LearnedCost(CostModel):
    """Estimated runtime from the trained regressor, clamped to stay positive."""

    kind = "learned"

    def __init__(self, regressor: LearnedRegressor | None = None, clamp: float = CLAMP_EPSILON):
        self.regressor = regressor
        self.clamp = clamp

    def cost(self, g: Graph, v: ViewNode) -> float:
        if self.regressor is None:
            raise StateError("learned cost model has not been trained")
        return max(self.clamp, self.regressor.predict(features(g, v)))


def make_model(
    kind: str,
    *,
    seed: int = 0,
    views: Iterable[str] | None = None,
    regressor: LearnedRegressor | None = None,
) -> CostModel:
    """Factory used by the CLI and the HTTP service."""
    kind = kind.lower()
    if kind == "random":
        return RandomCost(seed)
    if kind == "triples":
        return TripleCountCost()
    if kind == "aggvalues":
        return AggValueCountCost()
    if kind == "nodes":
        return NodeCountCost()
    if kind == "learned":
        return LearnedCost(regressor)
    if kind == "user":
        if views is None:
            raise ValidationError("user-defined model needs a list of view ids")
        return UserDefinedCost(views)
    raise ValidationError(f"unknown cost model {kind!r} (expected one of {', '.join(KINDS)})")
