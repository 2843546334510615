"""Command-line entry point: ``heisenflow --scenario FILE`` or ``heisenflow --suite DIR``."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .errors import ScenarioError
from .runner import emit_report, run_suite
from .scenario import parse_scenario

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def _load(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError([f"{path}: cannot read ({exc.strerror})"]) from None
    try:
        return parse_scenario(text, default_name=path.stem)
    except ScenarioError as exc:
        raise ScenarioError([f"{path.name}: {e}" for e in exc.errors]) from None


def _collect(scenario, suite) -> list:
    paths = []
    if scenario is not None:
        paths.append(Path(scenario))
    if suite is not None:
        directory = Path(suite)
        if not directory.is_dir():
            raise ScenarioError([f"{directory}: not a directory"])
        paths += sorted(directory.glob("*.json"))
        if suite is not None and not paths:
            raise ScenarioError([f"{directory}: no *.json scenarios found"])
    if not paths:
        raise ScenarioError(["give --scenario FILE or --suite DIR"])
    errors, loaded = [], []
    for p in paths:
        try:
            loaded.append(_load(p))
        except ScenarioError as exc:
            errors += exc.errors
    if errors:
        raise ScenarioError(errors)
    names = [s.name for s in loaded]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ScenarioError([f"duplicate scenario names: {', '.join(dupes)}"])
    return loaded


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--scenario", type=click.Path(dir_okay=False), help="Run a single scenario file.")
@click.option("--suite", type=click.Path(file_okay=False), help="Run every *.json scenario in a directory.")
@click.option("--tolerance", type=float, default=None, help="Override every scenario's pass tolerance.")
@click.option("--seed", type=int, default=None, help="Override every scenario's random seed.")
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")
@click.option("--timing/--no-timing", default=False, show_default=True,
              help="Include wall-clock time per scenario (makes reports non-reproducible).")
def main(scenario, suite, tolerance, seed, fmt, out, timing):
    """Run Heisenberg-picture verification scenarios and report every check.

    Exit status is 0 when every check passes, 1 when any check fails and 2
    for unreadable or invalid input.
    """
    if tolerance is not None and not tolerance > 0:
        click.echo("error: --tolerance must be positive", err=True)
        sys.exit(EXIT_INPUT)
    try:
        scenarios = _collect(scenario, suite)
        reports = run_suite(scenarios, tolerance=tolerance, seed=seed, timing=timing)
    except ScenarioError as exc:
        for e in exc.errors:
            click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    text = emit_report(reports, fmt)
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    sys.exit(EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED)


if __name__ == "__main__":  # pragma: no cover
    main()
