#!/usr/bin/env python3
# Build a facet's view lattice and score every node under the cost models.

from kgcube import (
    AggValueCountCost,
    NodeCountCost,
    RandomCost,
    TripleCountCost,
    build_lattice,
    synthesize_star,
)

# a synthetic sales cube: 500 observations over region x product x quarter
g, facet = synthesize_star(
    500, [("region", 6), ("product", 10), ("quarter", 4)], measure_range=(1, 500), seed=42
)
print(f"graph: {g.n_triples} triples; facet groups by {facet.group_vars}")

lattice = build_lattice(facet)
print(f"lattice: {len(lattice)} views (2^{len(facet.group_vars)})")

models = [RandomCost(seed=1), TripleCountCost(), AggValueCountCost(), NodeCountCost()]
header = f"{'view':22}" + "".join(f"{m.kind:>12}" for m in models)
print(header)
for node in lattice.sorted_nodes():
    marker = " (root)" if node.is_root else ""
    row = f"{node.id + marker:22}"
    for model in models:
        row += f"{model.cost(g, node):12.0f}"
    print(row)

# coarser views always have at most as many groups as finer ones
agg_model = AggValueCountCost()
for v in lattice.sorted_nodes():
    for w in lattice.descendants(v):
        assert agg_model.cost(g, w) <= agg_model.cost(g, v)
print("group-count monotonicity holds along the roll-up order")
