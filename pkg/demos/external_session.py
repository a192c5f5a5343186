"""
Driving an out-of-process evaluator
===================================

The engine can optimize chains it cannot evaluate itself: a child process
owns the data and the training loop, and the two sides exchange one JSON
object per line over stdin/stdout. This demo drives the bundled
TypeScript evaluator (a 4-block chain of tiny trainable dense stages);
build it first with `npm install && npm run build` in evaluator-ts/.
"""

import sys
from pathlib import Path

from chaincoop.coevolution import VARIANTS, run_shcho
from chaincoop.external import external_connect
from chaincoop.space import layout_from_json

MAIN_JS = Path(__file__).resolve().parent.parent / "evaluator-ts" / "dist" / "main.js"
if not MAIN_JS.exists():
    sys.exit("evaluator not built yet: run `npm install && npm run build` in evaluator-ts/")

# the engine-side layout must match what the child declares in its
# handshake: 4 blocks of (hidden units, activation, learning rate)
layout = layout_from_json(
    {
        "blocks": [
            [
                {"name": "units", "kind": "integer_range", "lo": 0, "hi": 28},
                {
                    "name": "act",
                    "kind": "categorical",
                    "lo": 0,
                    "hi": 2,
                    "labels": ["relu", "tanh", "sigmoid"],
                },
                {"name": "lr", "kind": "integer_range", "lo": 0, "hi": 10},
            ]
        ]
        * 4
    }
)

problem = external_connect(["node", str(MAIN_JS)], layout)
try:
    h, ledger = run_shcho(
        problem, VARIANTS["shcho"], epsilon=6, budget_cap=10.0, outer_iters=2, seed=7, inner_evals=4
    )
    fitness, _ = problem.full_evaluate(h)
finally:
    problem.close()

print(f"spent {ledger.spent} units over {len(ledger.log)} segment evaluations")
print(f"best configuration codes: {h.codes.tolist()}")
print(f"validation accuracy of the full trained chain: {fitness:.3f}")
