"""Budget-k view selection.

Greedy selection follows the classic benefit heuristic: each step adds the
candidate view whose adoption most reduces the summed cheapest-usable-view
cost across the whole lattice, with every node weighted equally.  Ties break
by lower own cost, then lexicographic id; under the constant random model all
benefits are zero and the tie-break becomes a seeded shuffle, which is what
produces a uniform random k-subset.

An exhaustive oracle (guarded by a combination-count limit) finds the true
optimum for small lattices so tests can bound greedy's regret.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable

from .costs import CostModel, RandomCost, TripleCountCost, UserDefinedCost
from .errors import CapacityError, ValidationError
from .lattice import Lattice, ViewNode
from .store import Graph

EXHAUSTIVE_LIMIT = 100_000


@dataclass(frozen=True)
class SelectionStep:
    chosen: str
    benefit: float


@dataclass(frozen=True)
class SelectionPlan:
    chosen: tuple[str, ...]
    budget: int
    model_kind: str
    per_step: tuple[SelectionStep, ...]
    total_estimated_cost: float

    def to_json(self) -> dict:
        return {
            "chosen": list(self.chosen),
            "budget": self.budget,
            "model": self.model_kind,
            "perStep": [{"chosen": s.chosen, "benefit": s.benefit} for s in self.per_step],
            "totalEstimatedCost": self.total_estimated_cost,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _selected_ids(selected: Iterable[str] | Iterable[ViewNode]) -> list[str]:
    return [s.id if isinstance(s, ViewNode) else s for s in selected]


def answer_cost(
    l: Lattice,
    model: CostModel,
    g: Graph,
    selected: Iterable[str] | Iterable[ViewNode],
    target: ViewNode,
) -> float:
    """Cheapest usable source for the target: the root is always usable."""
    if target.id not in l.nodes:
        raise ValidationError(f"target {target.id!r} not in lattice")
    best = model.cost(g, l.root)
    for node_id in _selected_ids(selected):
        node = l.node(node_id)
        if node.covers(target):
            best = min(best, model.cost(g, node))
    return best


def _user_plan(l: Lattice, model: UserDefinedCost, g: Graph, k: int) -> SelectionPlan:
    for node_id in model.chosen:
        node = l.node(node_id)
        if node.is_root:
            raise ValidationError("the root view cannot be selected for materialization")
    if len(model.chosen) > k:
        raise ValidationError(f"{len(model.chosen)} views exceed the budget k={k}")
    total = sum(answer_cost(l, model, g, model.chosen, w) for w in l.sorted_nodes())
    steps = tuple(SelectionStep(node_id, 0.0) for node_id in model.chosen)
    return SelectionPlan(tuple(model.chosen), k, model.kind, steps, total)


def greedy_select(
    l: Lattice,
    model: CostModel,
    g: Graph,
    k: int,
    *,
    triple_budget: int | None = None,
) -> SelectionPlan:
    """Pick up to k views by maximum benefit per step.

    With `triple_budget` set, selection also stops before the cumulative
    encoding triple count of the chosen views would exceed the cap.
    """
    if k < 0:
        raise ValidationError("budget k must be nonnegative")
    if isinstance(model, UserDefinedCost):
        return _user_plan(l, model, g, k)

    nodes = l.sorted_nodes()
    costs = {n.id: model.cost(g, n) for n in nodes}
    descendant_ids = {n.id: [w.id for w in l.descendants(n)] for n in nodes}
    current = {n.id: costs[l.root_id] for n in nodes}
    candidates = sorted(n.id for n in l.candidates())

    if isinstance(model, RandomCost):
        shuffled = list(candidates)
        random.Random(model.seed).shuffle(shuffled)
        tie_rank = {node_id: i for i, node_id in enumerate(shuffled)}
        random_model = True
    else:
        tie_rank = {node_id: i for i, node_id in enumerate(candidates)}
        random_model = False

    triple_counter = TripleCountCost() if triple_budget is not None else None
    spent_triples = 0.0
    chosen: list[str] = []
    steps: list[SelectionStep] = []
    remaining = list(candidates)
    for _ in range(k):
        if not remaining:
            break
        best_id = None
        best_benefit = -1.0
        best_key: tuple = ()
        for cand in remaining:
            benefit = sum(
                max(0.0, current[w] - costs[cand])
                for w in descendant_ids[cand]
                if current[w] > costs[cand]
            )
            key = (-benefit, costs[cand], tie_rank[cand])
            if best_id is None or key < best_key:
                best_id, best_benefit, best_key = cand, benefit, key
        assert best_id is not None
        if best_benefit <= 0.0 and not random_model:
            break
        if triple_counter is not None:
            cand_triples = triple_counter.cost(g, l.node(best_id))
            if spent_triples + cand_triples > triple_budget:
                break
            spent_triples += cand_triples
        chosen.append(best_id)
        remaining.remove(best_id)
        steps.append(SelectionStep(best_id, best_benefit))
        for w in descendant_ids[best_id]:
            if costs[best_id] < current[w]:
                current[w] = costs[best_id]
    total = sum(current.values())
    return SelectionPlan(tuple(chosen), k, model.kind, tuple(steps), total)


def exhaustive_select(l: Lattice, model: CostModel, g: Graph, k: int) -> SelectionPlan:
    """The k-subset minimizing the summed cheapest-usable-view cost.

    Guarded by a combination-count limit; ties resolve to the
    lexicographically first subset.
    """
    if k < 0:
        raise ValidationError("budget k must be nonnegative")
    candidates = sorted(n.id for n in l.candidates())
    size = min(k, len(candidates))
    n_subsets = comb(len(candidates), size)
    if n_subsets > EXHAUSTIVE_LIMIT:
        raise CapacityError(
            f"{n_subsets} candidate subsets exceed the exhaustive limit {EXHAUSTIVE_LIMIT}"
        )
    nodes = l.sorted_nodes()
    costs = {node.id: model.cost(g, node) for node in nodes}
    covers = {
        node.id: frozenset(w.id for w in l.descendants(node)) for node in nodes
    }
    root_cost = costs[l.root_id]
    best_subset: tuple[str, ...] | None = None
    best_total = float("inf")
    for subset in combinations(candidates, size):
        total = 0.0
        for w in nodes:
            cheapest = root_cost
            for v in subset:
                if w.id in covers[v] and costs[v] < cheapest:
                    cheapest = costs[v]
            total += cheapest
        if total < best_total:
            best_subset, best_total = subset, total
    assert best_subset is not None
    return SelectionPlan(best_subset, k, model.kind, (), best_total)
