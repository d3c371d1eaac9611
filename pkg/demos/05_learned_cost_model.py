#!/usr/bin/env python3
# Train the runtime regressor on measured view evaluations and use it to drive
# selection.

import time

from kgcube import (
    LearnedCost,
    LearnedRegressor,
    build_lattice,
    evaluate,
    features,
    greedy_select,
    synthesize_star,
)

SHAPE = [("region", 8), ("product", 15), ("quarter", 4), ("channel", 3)]

# training graphs share the facet shape, so feature vectors line up
samples = []
for seed in range(3):
    g, facet = synthesize_star(1500, SHAPE, seed=seed)
    lattice = build_lattice(facet)
    for node in lattice.sorted_nodes():
        fv = features(g, node)
        start = time.perf_counter()
        evaluate(g, node.query)
        samples.append((fv, max(time.perf_counter() - start, 1e-9)))

regressor = LearnedRegressor.train(samples, learning_rate=0.05, epochs=2000)
log = regressor.log
print(f"trained on {len(samples)} measured view runtimes")
print(f"MSE {log.initial_mse:.3e} -> {log.final_mse:.3e} over {log.epochs} epochs")

# predictions drive greedy selection on a fresh graph of the same shape
g, facet = synthesize_star(3000, SHAPE, seed=11)
lattice = build_lattice(facet)
model = LearnedCost(regressor)
print(f"{'view':30} {'predicted s':>12}")
for node in lattice.sorted_nodes()[:8]:
    print(f"{node.id:30} {model.cost(g, node):12.6f}")

plan = greedy_select(lattice, model, g, k=3)
print("learned-cost greedy selection:", list(plan.chosen))

persisted = regressor.to_json()
print("persisted model keys:", sorted(persisted))
