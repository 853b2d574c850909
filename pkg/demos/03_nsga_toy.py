"""
NSGA-II on a toy objective
==========================

Swap the expensive trainer for a cheap synthetic evaluator so the selection
machinery can be watched generation by generation.
"""
from hqnas.evolution import SearchConfig, run_search


def toy(g):
    # bigger circuits are "more accurate" but cost more; RZ-heavy circuits do worse
    size = g.n_qubits * g.n_layers
    err = 1 / (1 + size) + 0.05 * sum(t.value == "RZ" for t in g.gate_types[:g.n_layers])
    return (size, round(err, 4), g.n_qubits)


res = run_search(SearchConfig(pop_size=16, generations=8, seed=1), toy)

# %%
for log in res.generations:
    print(f"gen {log.generation}: {len(log.front)} on the front, stagnation {log.stagnation}")
print("stopped early:", res.stopped_early)

# %% the final front, cheapest first
for ind in sorted(res.front, key=lambda i: i.objectives):
    print(ind.objectives, ind.genome)
print("compromise:", res.compromise.objectives)
