"""
dy-verify — CLI Entry Point

Typer-based CLI for running the verification suites and inspecting inputs.

Usage:
    dy-verify --help
    dy-verify run
    dy-verify run --gcm A2 --level 3/2 --hbar-order 3 --suite fock --report md --out report.md
    dy-verify run --list-suites
    dy-verify suites
    dy-verify catalog log_two_terms --param m=2
    dy-verify gcm my_matrix.json

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or engine error.
"""

from __future__ import annotations

import json
import logging
import os
from typing import Optional

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from src.errors import PASS, VerifierError
from src.fock.gcm import load_gcm
from src.kernels.catalog import CATALOG, identity_catalog
from src.suites.config import load_config
from src.suites.registry import REGISTRY
from src.suites.runner import run as run_suites

load_dotenv()

app = typer.Typer(
    name="dy-verify",
    help="Exact ħ-adic series verification of current presentations, Fock models and kernel identities.",
    add_completion=False,
)
console = Console(stderr=True)

STATUS_STYLE = {"pass": "green", "fail": "red", "precondition-failed": "yellow", "out-of-window": "magenta"}


def _setup_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else os.getenv("DYV_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _fail(message: str, code: int = 2) -> None:
    console.print(f"[red]{message}[/]")
    raise typer.Exit(code)


def _suites_table() -> Table:
    table = Table(title="Registered suites")
    table.add_column("Suite", style="bold")
    table.add_column("Default")
    table.add_column("Description")
    for s in REGISTRY.values():
        table.add_row(s.name, "yes" if s.default else "no", s.description)
    return table


# ── Run ──────────────────────────────────────────────────────

@app.command()
def run(
    config_path: Optional[str] = typer.Option(None, "--config", help="JSON run configuration"),
    gcm: Optional[str] = typer.Option(None, "--gcm", help="Preset name (A1, A2, A1xA1, D4) or GCM JSON file"),
    level: Optional[str] = typer.Option(None, "--level", help="Level ℓ as a rational 'p/q'"),
    hbar_order: Optional[int] = typer.Option(None, "--hbar-order", help="Work modulo ħ^N"),
    window: Optional[int] = typer.Option(None, "--window", help="Degree window half-width"),
    depth: Optional[int] = typer.Option(None, "--depth", help="Fock / vacuum module depth D"),
    suite: Optional[list[str]] = typer.Option(None, "--suite", help="Suite to run (repeatable)"),
    report: Optional[str] = typer.Option(None, "--report", help="Report format: json or md"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Write the report to a file"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for randomized cases and strategies"),
    no_cache: bool = typer.Option(False, "--no-cache", help="Do not read or write the expansion cache"),
    cache_dir: Optional[str] = typer.Option(None, "--cache-dir", help="Expansion cache directory"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
    list_suites: bool = typer.Option(False, "--list-suites", help="List the registered suites and exit"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
):
    """Run the selected suites and emit a report."""
    _setup_logging(verbose)
    if list_suites:
        console.print(_suites_table())
        return

    try:
        config = load_config(
            config_path, gcm=gcm, level=level, hbar_order=hbar_order, window=window, depth=depth,
            suites=tuple(suite) if suite else None, report=report, out=out, seed=seed,
            cache=False if no_cache else None, cache_dir=cache_dir, workers=workers,
        )
        with console.status("Running suites..."):
            result = run_suites(config)
    except VerifierError as exc:
        _fail(f"Error: {exc}")

    counts = result.counts
    console.print(Panel(
        "  ".join(f"[{STATUS_STYLE[s]}]{s}: {n}[/]" for s, n in counts.items()),
        title="✅ All checks pass" if result.passed else "❌ Checks failed",
    ))
    for entry in result.failures():
        console.print(f"  [{STATUS_STYLE[entry['status']]}]{entry['suite']}/{entry['check']}[/]: "
                      f"{entry['message']}")

    if config.out:
        path = result.write(config.out, config.report)
        console.print(f"\n📄 Report saved to {path}")
    else:
        typer.echo(result.render(config.report), nl=False)
    raise typer.Exit(result.exit_code)


# ── Inspection ───────────────────────────────────────────────

@app.command()
def suites():
    """List the registered suites (same as run --list-suites)."""
    console.print(_suites_table())


@app.command()
def catalog(
    name: str = typer.Argument(..., help=f"Catalog entry: {', '.join(sorted(CATALOG))}"),
    param: Optional[list[str]] = typer.Option(None, "--param", "-p", help="Parameter as key=value (repeatable)"),
):
    """Evaluate one identity-catalog entry (see the catalog for names and parameters)."""
    _setup_logging(False)
    params = {}
    for item in param or []:
        key, sep, value = item.partition("=")
        if not sep:
            _fail(f"Error: --param expects key=value, got {item!r}")
        value = value.strip()
        params[key.strip()] = int(value) if value.lstrip("-").isdigit() else value
    try:
        result = identity_catalog(name, **params)
    except VerifierError as exc:
        _fail(f"Error: {exc}")

    style = STATUS_STYLE.get(result["status"], "white")
    console.print(Panel(f"[{style}]{result['status']}[/]: {result['message']}", title=f"🔎 {name}"))
    typer.echo(json.dumps(result, indent=2, sort_keys=True, default=str, ensure_ascii=False))
    raise typer.Exit(0 if result["status"] == PASS else 1)


@app.command("gcm")
def gcm_command(
    source: str = typer.Argument(..., help="GCM JSON file or preset name"),
):
    """Validate a generalized Cartan matrix and report its type."""
    try:
        matrix = load_gcm(source)
    except VerifierError as exc:
        _fail(f"Error: {exc}")

    table = Table(title=f"GCM {matrix.name}")
    table.add_column("")
    for label in matrix.labels:
        table.add_column(label, justify="right")
    for label, row in zip(matrix.labels, matrix.matrix):
        table.add_row(label, *(str(x) for x in row))
    console.print(table)
    kind = "finite type" if matrix.is_finite_type() else "not of finite type"
    console.print(f"  Nodes: {matrix.size}   Simply-laced, symmetric: yes   {kind}")
    typer.echo(json.dumps(matrix.to_json(), sort_keys=True))


if __name__ == "__main__":
    app()
