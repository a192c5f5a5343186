"""Experiment runner and cross-run comparison.

`chaincoop run` executes one seeded run of one method and writes three
artifacts into the output directory: results.csv (the evaluation log),
summary.json (final solution and bookkeeping), and solution.json (just
enough to re-evaluate the returned solution). `chaincoop compare` folds
several run directories into one method-by-method table.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .coevolution import (
    VARIANTS,
    run_random_search,
    run_sacc_baseline,
    run_shcho,
)
from .errors import EngineError, EvaluatorIOError, InvalidParameterError
from .external import external_connect
from .problems import BudgetLedger, ChainProblem, make_benchmark
from .space import SolutionVector, layout_from_json

VARIANT_NAMES = tuple(VARIANTS) + ("sacc", "random")
PROBLEM_NAMES = ("bench_quadratic", "bench_pipeline", "external")


@dataclass
class RunConfig:
    problem: str = "bench_quadratic"
    problem_params: dict = field(default_factory=dict)
    variant: str = "shcho"
    epsilon: int = 30
    outer_iters: int = 5
    inner_evals: int = 10
    budget: float | None = None
    seed: int = 0
    out: str = "chaincoop-out"
    external_cmd: str | None = None
    layout: dict | None = None

    def validate(self) -> None:
        if self.problem not in PROBLEM_NAMES:
            raise InvalidParameterError(f"unknown problem {self.problem!r}")
        if self.variant not in VARIANT_NAMES:
            raise InvalidParameterError(f"unknown variant {self.variant!r}")
        if self.budget is None or self.budget <= 0:
            raise InvalidParameterError("a positive --budget is required")
        if self.epsilon < 1 or self.outer_iters < 1 or self.inner_evals < 1:
            raise InvalidParameterError(
                "epsilon, outer_iters and inner_evals must be >= 1"
            )
        if self.problem == "external":
            if not self.external_cmd:
                raise InvalidParameterError("external problem needs --external-cmd")
            if not self.layout:
                raise InvalidParameterError(
                    "external problem needs a 'layout' entry in the config file"
                )


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from exc
    known = set(RunConfig.__dataclass_fields__)
    stray = set(data) - known
    if stray:
        raise InvalidParameterError(f"unknown config keys: {sorted(stray)}")
    return RunConfig(**data)


def build_problem(config: RunConfig) -> ChainProblem:
    if config.problem == "external":
        return external_connect(config.external_cmd, layout_from_json(config.layout))
    return make_benchmark(config.problem, **config.problem_params)


def execute(config: RunConfig, problem: ChainProblem) -> tuple[SolutionVector, BudgetLedger]:
    if config.variant == "random":
        return run_random_search(problem, config.budget, config.seed)
    if config.variant == "sacc":
        return run_sacc_baseline(
            problem, config.epsilon, config.budget, config.seed, config.inner_evals
        )
    return run_shcho(
        problem,
        VARIANTS[config.variant],
        config.epsilon,
        config.budget,
        config.outer_iters,
        config.seed,
        config.inner_evals,
    )


def write_results_csv(path: Path, ledger: BudgetLedger) -> None:
    lines = ["eval_index,segment,cost,cumulative_cost,fitness,best_full_fitness"]
    best_full = ""
    for r in ledger.log:
        if r.segment == 0:
            best_full = repr(r.best_so_far)
        lines.append(
            f"{r.index},{r.segment},{r.cost!r},{r.cumulative!r},{r.fitness!r},{best_full}"
        )
    path.write_text("\n".join(lines) + "\n")


def run(config: RunConfig) -> int:
    config.validate()
    started = time.perf_counter()
    problem = build_problem(config)
    try:
        h_star, ledger = execute(config, problem)
        final_fitness, _ = problem.full_evaluate(h_star)
    finally:
        problem.close()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(out / "results.csv", ledger)
    summary = {
        "h_star": h_star.codes.tolist(),
        "final_fitness": final_fitness,
        "total_cost": ledger.spent,
        "n_evaluations": len(ledger.log),
        "wall_time_sec": time.perf_counter() - started,
        "config": asdict(config),
        "engine_version": __version__,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    solution = {
        "codes": h_star.codes.tolist(),
        "fitness": final_fitness,
        "problem": config.problem,
        "problem_params": config.problem_params,
    }
    (out / "solution.json").write_text(json.dumps(solution, indent=2) + "\n")
    return 0


def compare(run_dirs: list[str], out_path: str | None = None) -> int:
    """Aggregate run summaries into a per-method fitness/cost table."""
    if len(run_dirs) < 2:
        print("compare needs at least two run directories", file=sys.stderr)
        return 2
    by_method: dict[str, list[dict]] = {}
    for d in run_dirs:
        summary_path = Path(d) / "summary.json"
        if not summary_path.exists():
            print(f"missing run output: {summary_path}", file=sys.stderr)
            return 2
        summary = json.loads(summary_path.read_text())
        by_method.setdefault(summary["config"]["variant"], []).append(summary)
    header = (
        "method,n_runs,fitness_median,fitness_min,fitness_max,cost_median,cost_total"
    )
    rows = [header]
    for method in sorted(by_method):
        fits = [s["final_fitness"] for s in by_method[method]]
        costs = [s["total_cost"] for s in by_method[method]]
        rows.append(
            f"{method},{len(fits)},{statistics.median(fits)!r},{min(fits)!r},"
            f"{max(fits)!r},{statistics.median(costs)!r},{sum(costs)!r}"
        )
    table = "\n".join(rows) + "\n"
    if out_path:
        Path(out_path).write_text(table)
    print(f"{'method':<10} {'runs':>4} {'median':>12} {'min':>12} {'max':>12} {'cost':>8}")
    for method in sorted(by_method):
        fits = [s["final_fitness"] for s in by_method[method]]
        costs = [s["total_cost"] for s in by_method[method]]
        print(
            f"{method:<10} {len(fits):>4} {statistics.median(fits):>12.4f} "
            f"{min(fits):>12.4f} {max(fits):>12.4f} {statistics.median(costs):>8.2f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaincoop",
        description="cooperative surrogate optimization over chain-structured spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute one seeded run")
    p_run.add_argument("--config", help="JSON config file; flags override its values")
    p_run.add_argument("--problem", choices=PROBLEM_NAMES)
    p_run.add_argument("--variant", choices=VARIANT_NAMES)
    p_run.add_argument("--epsilon", type=int)
    p_run.add_argument("--budget", type=float)
    p_run.add_argument("--outer-iters", type=int, dest="outer_iters")
    p_run.add_argument("--inner-evals", type=int, dest="inner_evals")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out")
    p_run.add_argument("--external-cmd", dest="external_cmd")
    p_cmp = sub.add_parser("compare", help="tabulate several run outputs")
    p_cmp.add_argument("runs", nargs="+", help="run output directories")
    p_cmp.add_argument("--out", help="also write the table as CSV here")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    for key in (
        "problem",
        "variant",
        "epsilon",
        "budget",
        "outer_iters",
        "inner_evals",
        "seed",
        "out",
        "external_cmd",
    ):
        value = getattr(args, key)
        if value is not None:
            setattr(config, key, value)
    return config


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            status = run(resolve_config(args))
        else:
            status = compare(args.runs, args.out)
    except InvalidParameterError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        status = 2
    except EvaluatorIOError as exc:
        print(f"evaluator failure: {exc}", file=sys.stderr)
        status = 3
    except EngineError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        status = 1
    sys.exit(status)


if __name__ == "__main__":
    main()
