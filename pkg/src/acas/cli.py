"""Command line entry point: ``acas run``, ``acas serve``, ``acas validate``."""

from __future__ import annotations

import sys

import click

from acas.mtourism.runtime import data_path


@click.group()
def main() -> None:
    """Context-aware service adaptation middleware."""


@main.command()
@click.option("--strategies", required=True, type=click.Path(exists=True, dir_okay=False), help="CAS XML document.")
@click.option("--scenario", required=True, type=click.Path(exists=True, dir_okay=False), help="Scenario script.")
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False), help="restaurants.json")
@click.option("--trace", is_flag=True, help="Print weave traces after each call.")
@click.option("--mode", type=click.Choice(["sync", "async"]), default="sync", show_default=True)
@click.option("--server", default=None, metavar="URL", help="Run against a running `acas serve` instead of in-process.")
def run(strategies: str, scenario: str, data: str, trace: bool, mode: str, server: str | None) -> None:
    """Execute a scenario script and print its transcript."""
    from acas.mtourism.scenario import run_scenario

    sys.exit(run_scenario(scenario, strategies, data, trace=trace, mode=mode, server=server))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--strategies", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--data", type=click.Path(exists=True, dir_okay=False), default=None)
def serve(host: str, port: int, strategies: str | None, data: str | None) -> None:
    """Start the HTTP service."""
    import uvicorn

    from acas.api import create_app
    from acas.mtourism.runtime import DemoRuntime

    uvicorn.run(create_app(DemoRuntime.from_files(strategies, data)), host=host, port=port)


@main.command()
@click.option("--strategies", required=True, type=click.Path(exists=True, dir_okay=False))
def validate(strategies: str) -> None:
    """Check a strategy document against the M-tourism context model."""
    from acas.cas import validate_cas
    from acas.documents import parse_strategy_document
    from acas.errors import DocumentParseError
    from acas.mtourism.adaptations import register_demo_adaptations
    from acas.mtourism.runtime import load_demo_model

    try:
        cas = parse_strategy_document(open(strategies, "rb").read())
    except DocumentParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(2)
    diagnostics = validate_cas(cas, load_demo_model(), register_demo_adaptations())
    for d in diagnostics:
        click.echo(str(d))
    if diagnostics:
        sys.exit(2)
    click.echo(f"ok: {cas.service_id} with {len(cas.cvs_strategies)} strategies")


@main.command("paths")
def paths() -> None:
    """Print the locations of the shipped demo files."""
    for name in ("restaurants-cas.xml", "empty-cas.xml", "restaurants.json", "mtourism-context.xml"):
        click.echo(data_path(name))
    for path in sorted(data_path("scenarios").iterdir()):
        click.echo(path)


if __name__ == "__main__":
    main()
