"""Command-line interface: validate, run, generate, benchmark, and serve.

Scenario arguments accept either a path to a scenario JSON file or the name
of a shipped scenario (``case1``, ``case1_ordering``, ``case2``, ``case3``).
Trace files are JSON-lines: one record per applied action with at least
``seq``, ``actor``, ``kind``, ``payload``, and ``elapsed_ms`` fields (ask
records add ``askee``, answers add ``answered``).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import constraints as cn
from . import planlib as pl
from .errors import EpikeError
from .harness import (
    AGENT_KIND_BASELINE,
    AGENT_KIND_ENGINE,
    RandomTaskParams,
    Scenario,
    builtin_scenario_path,
    generate_random_task,
    load_scenario,
    run_pair,
    run_suite,
    scenario_to_json,
    write_suite_csv,
)


def _resolve_scenario(ref: str) -> Scenario:
    path = Path(ref)
    if path.exists():
        return load_scenario(path)
    return load_scenario(builtin_scenario_path(ref))


def _trace_record(record: dict) -> str:
    ordered = {k: record[k] for k in ("seq", "actor", "kind", "payload") if k in record}
    for key in ("askee", "answered"):
        if key in record:
            ordered[key] = record[key]
    ordered["elapsed_ms"] = record.get("elapsed_ms", 0.0)
    return json.dumps(ordered)


@click.group()
def main() -> None:
    """Epistemic plan-execution engine."""


@main.command()
@click.argument("scenario")
def check(scenario: str) -> None:
    """Validate a scenario and print a model report."""
    try:
        sc = _resolve_scenario(scenario)
    except EpikeError as err:
        raise click.ClickException(str(err))
    lib = sc.lib
    click.echo(f"scenario: {sc.name}")
    click.echo(f"agents:   {', '.join(sc.agents)}")
    click.echo(
        f"library:  {len(lib.variables)} variables, {len(lib.timepoints)} time points, "
        f"{len(lib.orderings)} orderings"
    )
    click.echo(f"ground:   {sc.ground}")
    for world in sc.model.worlds:
        marks = []
        if world.id == sc.ground:
            marks.append("ground")
        for agent in sc.agents:
            if world.id in sc.designated[agent]:
                marks.append(f"designated[{agent}]")
        texts = sorted(cn.print_constraint(c) for c in world.kb.constraints)
        suffix = f"  ({', '.join(marks)})" if marks else ""
        click.echo(f"world {world.id}:{suffix}")
        for text in texts:
            click.echo(f"    {text}")
    subplans = pl.feasible_subplans(sc.ground_kb(), lib)
    click.echo(f"feasible subplans at ground: {len(subplans)}")
    for sp in subplans:
        click.echo("    " + ", ".join(f"{var}={val}" for var, val in sp.assigns))
    for agent, script in sc.scripts.items():
        click.echo(f"script[{agent}]: {len(script)} actions")
    click.echo("OK")


@main.command()
@click.argument("scenario")
@click.option("--agents", default="epike,epike", show_default=True, help="Comma-separated agent kinds in scenario listing order (epike, pike, or scripted).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--timeout-ms", default=300_000.0, show_default=True, type=float)
@click.option("--iterations", default=1000, show_default=True, type=int, help="Search iteration cap per decision.")
@click.option("--time-budget-ms", default=None, type=float, help="Optional per-decision wall-clock budget.")
@click.option("--horizon", default=3, show_default=True, type=int)
@click.option("--max-rounds", default=200, show_default=True, type=int)
@click.option("--latency-randomized", is_flag=True, help="Shuffle polling order each round (seeded).")
@click.option("--hang-mitigation", is_flag=True, help="Re-poll engines with waiting forbidden when the run would stall.")
@click.option("--trace", "trace_path", default=None, type=click.Path(dir_okay=False), help="Write the action trace as JSON lines.")
def run(
    scenario: str,
    agents: str,
    seed: int,
    timeout_ms: float,
    iterations: int,
    time_budget_ms: float | None,
    horizon: int,
    max_rounds: int,
    latency_randomized: bool,
    hang_mitigation: bool,
    trace_path: str | None,
) -> None:
    """Execute a scenario with one session per agent and print the outcome."""
    kinds = [k.strip() for k in agents.split(",") if k.strip()]
    try:
        sc = _resolve_scenario(scenario)
        outcome = run_pair(
            sc,
            kinds,
            seed=seed,
            iteration_cap=iterations,
            time_budget_ms=time_budget_ms,
            horizon=horizon,
            timeout_ms=timeout_ms,
            max_rounds=max_rounds,
            latency_randomized=latency_randomized,
            hang_mitigation=hang_mitigation,
        )
    except EpikeError as err:
        raise click.ClickException(str(err))
    for record in outcome.trace:
        askee = f" -> {record['askee']}" if "askee" in record else ""
        answered = f" [{record['answered']}]" if "answered" in record else ""
        click.echo(
            f"{record['seq']:3d}  {record['actor']:>8s}  {record['kind']:<8s}"
            f"{record['payload']}{askee}{answered}"
        )
    click.echo(f"verdict: {outcome.verdict}  ({outcome.rounds} rounds, {outcome.wall_ms:.0f} ms)")
    if any(outcome.surprised.values()):
        surprised = ", ".join(a for a, flag in outcome.surprised.items() if flag)
        click.echo(f"surprised: {surprised}")
    if trace_path:
        with open(trace_path, "w", encoding="utf-8") as fh:
            for record in outcome.trace:
                fh.write(_trace_record(record) + "\n")
        click.echo(f"trace written to {trace_path}")
    if outcome.verdict == "failure":
        sys.exit(2)


@main.command()
@click.option("--num-variables", required=True, type=int)
@click.option("--num-orders", required=True, type=int)
@click.option("--num-constraints", required=True, type=int)
@click.option("--diff", required=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--domain-size", default=2, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Write the scenario JSON to a file instead of stdout.")
def generate(
    num_variables: int,
    num_orders: int,
    num_constraints: int,
    diff: int,
    seed: int,
    domain_size: int,
    out_path: str | None,
) -> None:
    """Generate a random task scenario and print it as JSON."""
    try:
        params = RandomTaskParams(
            num_variables=num_variables,
            num_orders=num_orders,
            num_constraints=num_constraints,
            diff=diff,
            domain_size=domain_size,
            seed=seed,
        )
        scenario = generate_random_task(params)
    except EpikeError as err:
        raise click.ClickException(str(err))
    blob = json.dumps(scenario_to_json(scenario), indent=2)
    if out_path:
        Path(out_path).write_text(blob + "\n", encoding="utf-8")
        click.echo(f"scenario written to {out_path}")
    else:
        click.echo(blob)


@main.command()
@click.option("--grid", "grid_path", required=True, type=click.Path(exists=True, dir_okay=False), help="JSON file: a list of task-parameter conditions, or an object with 'conditions' and optional 'budgets'/'cases'/'pairings'.")
@click.option("--reps", default=2, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Also write the metrics as CSV.")
def suite(grid_path: str, reps: int, out_path: str | None) -> None:
    """Run the benchmark grid and print per-condition metrics."""
    with open(grid_path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    if isinstance(spec, dict):
        conditions = spec.get("conditions", [])
        budgets = spec.get("budgets")
        cases = int(spec.get("cases", 10))
        pairings = [tuple(p) for p in spec.get("pairings", [])] or (
            (AGENT_KIND_ENGINE, AGENT_KIND_ENGINE),
            (AGENT_KIND_BASELINE, AGENT_KIND_BASELINE),
        )
    else:
        conditions, budgets, cases = spec, None, 10
        pairings = (
            (AGENT_KIND_ENGINE, AGENT_KIND_ENGINE),
            (AGENT_KIND_BASELINE, AGENT_KIND_BASELINE),
        )
    try:
        rows = run_suite(conditions, reps, cases=cases, budgets=budgets, pairings=pairings)
    except EpikeError as err:
        raise click.ClickException(str(err))
    if not rows:
        click.echo("empty grid, nothing to run")
        return
    fields = list(rows[0].keys())
    widths = {
        f: max(len(f), *(len(_cell(row[f])) for row in rows)) for f in fields
    }
    click.echo("  ".join(f.ljust(widths[f]) for f in fields))
    for row in rows:
        click.echo("  ".join(_cell(row[f]).ljust(widths[f]) for f in fields))
    if out_path:
        write_suite_csv(rows, out_path)
        click.echo(f"csv written to {out_path}")


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port: int, host: str) -> None:
    """Start the interactive session service."""
    from .service import serve as run_service

    click.echo(f"session service on http://{host}:{port}")
    run_service(port=port, host=host)


if __name__ == "__main__":
    main()
