"""
Cooperative engine vs random search on a cheap benchmark
========================================================

The quadratic chain pulls every block toward a hidden target and couples
neighboring block means, so blocks cannot be optimized independently.
Both methods get the same budget of 60 full-evaluation units; the engine
spends it in fractional segment evaluations, random search in whole-chain
draws.
"""

import numpy as np

from chaincoop.coevolution import VARIANTS, run_random_search, run_shcho
from chaincoop.problems import QuadraticChain

problem = QuadraticChain()  # 15 blocks x 2 dims, optimum exactly 0
BUDGET = 60.0

engine_finals = []
for seed in range(5):
    h, ledger = run_shcho(
        problem, VARIANTS["shcho"], epsilon=10, budget_cap=BUDGET, outer_iters=5, seed=seed
    )
    fitness, _ = problem.full_evaluate(h)
    engine_finals.append(fitness)
    print(f"engine seed {seed}: final {fitness:9.3f} after {len(ledger.log)} evaluations")

random_finals = []
for seed in range(11):
    h, _ = run_random_search(problem, BUDGET, seed)
    random_finals.append(problem.full_evaluate(h)[0])

print(f"\nengine median over 5 seeds:  {np.median(engine_finals):9.3f}")
print(f"random median over 11 seeds: {np.median(random_finals):9.3f}")
print(f"gap: {np.median(engine_finals) - np.median(random_finals):.3f} fitness units")
