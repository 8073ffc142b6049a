"""Command-line entry point: ``cqec simulate|compare|verify|sweep``.

Exit codes: 0 ok, 1 invalid code, 2 config error, 3 integration failure,
4 tolerance breach.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click

from .codes import load_code, verify_code
from .config import ConfigFile, bundled_config, load_config
from .engines import RunReport, run_scenario
from .errors import ConfigError, IntegrationError, NumericalConsistencyError

EXIT_OK = 0
EXIT_CODE_INVALID = 1
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_TOLERANCE = 4


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _resolve_config(text: str) -> Path:
    path = Path(text)
    if path.exists():
        return path
    if path.suffix or "/" in text:
        raise ConfigError(f"no such file {text}")
    return bundled_config(text)


def _load(config: str, engines: str | None, seed: int | None, dt: float | None,
          tmax: float | None) -> ConfigFile:
    cfg = load_config(_resolve_config(config))
    changes = {}
    if engines is not None:
        changes["engines"] = tuple(e.strip() for e in engines.split(",") if e.strip())
    if seed is not None:
        changes["seed"] = seed
    if dt is not None:
        changes["dt"] = dt
    if tmax is not None:
        changes["t_max"] = tmax
    if changes:
        cfg.scenarios = [s.replace(**changes) for s in cfg.scenarios]
    return cfg


def _out_dir(option: str | None, cfg: ConfigFile) -> Path:
    return Path(option or cfg.out_dir or "out")


def _check_codes(cfg: ConfigFile) -> None:
    for name in sorted({s.code for s in cfg.scenarios}):
        report = verify_code(load_code(name))
        if not report.passed:
            raise _Exit(EXIT_CODE_INVALID, f"code {name!r} is invalid: failed {', '.join(report.failed())}\n"
                        + report.format())


def _format_report(name: str, report: RunReport) -> str:
    lines = [f"scenario {name}"]
    for engine, path in report.outputs.items():
        lines.append(f"  {engine:<9} {path}")
    if report.comparisons:
        lines.append(f"  {'engines':<17} {'observable':<10} {'max dev':>11} {'at t':>8} {'tol':>8}  status")
    for c in report.comparisons:
        tol = "-" if c.tolerance is None else f"{c.tolerance:.1e}"
        unit = " se" if c.kind == "sigma" else ""
        status = "ok" if c.passed else "BREACH"
        if c.tolerance is None:
            status = "info"
        lines.append(f"  {'/'.join(c.engines):<17} {c.observable:<10} {c.max_deviation:>11.3e} "
                     f"{c.time:>8.4g} {tol:>8}{unit}  {status}")
    return "\n".join(lines)


def _run_all(cfg: ConfigFile, out: Path) -> list[tuple[str, RunReport]]:
    nested = len(cfg.scenarios) > 1
    reports = []
    for scenario in cfg.scenarios:
        target = out / scenario.name if nested else out
        _, report = run_scenario(scenario, target)
        reports.append((scenario.name, report))
        click.echo(_format_report(scenario.name, report))
    return reports


def _guard(fn):
    """Run ``fn`` and translate failures into the documented exit codes."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: click.echo(f"warning: {msg}", err=True)
            fn()
    except _Exit as exc:
        click.echo(str(exc), err=True)
        sys.exit(exc.code)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (IntegrationError, NumericalConsistencyError) as exc:
        click.echo(f"integration failure: {exc}", err=True)
        sys.exit(EXIT_INTEGRATION)
    sys.exit(EXIT_OK)


_config_option = click.option("--config", "config", required=True,
                              help="Config file path or bundled config name.")
_common = [
    _config_option,
    click.option("--out", "out", default=None, help="Output directory."),
    click.option("--engines", default=None, help="Comma-separated engines (dense,block,analytic,mc)."),
    click.option("--seed", type=int, default=None, help="Monte Carlo seed."),
    click.option("--dt", type=float, default=None, help="Integration step."),
    click.option("--tmax", type=float, default=None, help="Final time."),
]


def _with_common(fn):
    for option in reversed(_common):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Continuous quantum error correction simulator."""


@main.command()
@_with_common
def simulate(config, out, engines, seed, dt, tmax):
    """Run every scenario in CONFIG and write one CSV per engine."""
    def body():
        cfg = _load(config, engines, seed, dt, tmax)
        _check_codes(cfg)
        _run_all(cfg, _out_dir(out, cfg))

    _guard(body)


@main.command()
@_with_common
def compare(config, out, engines, seed, dt, tmax):
    """Run the engines and fail (exit 4) if any pair disagrees beyond tolerance."""
    def body():
        cfg = _load(config, engines, seed, dt, tmax)
        for s in cfg.scenarios:
            if len(s.engines) < 2:
                raise ConfigError("compare needs at least two engines", "scenario.engines")
        _check_codes(cfg)
        breaches = []
        for name, report in _run_all(cfg, _out_dir(out, cfg)):
            breaches += [(name, c) for c in report.breaches()]
        if breaches:
            lines = [f"{name}: {c.observable} {'/'.join(c.engines)} deviates by {c.max_deviation:.3e}"
                     f"{' se' if c.kind == 'sigma' else ''} at t={c.time:.6g} (tolerance {c.tolerance:.1e})"
                     for name, c in breaches]
            raise _Exit(EXIT_TOLERANCE, "tolerance breach\n" + "\n".join(lines))

    _guard(body)


@main.command()
@click.argument("code", default="phase3")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
def verify(code, as_json):
    """Check the consistency of a built-in code or a code definition file."""
    def body():
        report = verify_code(load_code(code))
        click.echo(json.dumps(report.as_dict(), indent=2) if as_json else report.format())
        if not report.passed:
            raise _Exit(EXIT_CODE_INVALID, f"failed: {', '.join(report.failed())}")

    _guard(body)


@main.command()
@_with_common
def sweep(config, out, engines, seed, dt, tmax):
    """Run a grid over (gamma, gamma') or epsilon and write sweep.csv."""
    from .sweep import SWEEP_COLUMNS, run_sweep

    def body():
        cfg = _load(config, engines, seed, dt, tmax)
        _check_codes(cfg)
        target = _out_dir(out, cfg)
        rows = run_sweep(cfg, target)
        click.echo("  ".join(f"{c:>13}" for c in SWEEP_COLUMNS[1:]))
        for row in rows:
            click.echo("  ".join(f"{row[c]:>13.6g}" for c in SWEEP_COLUMNS[1:]))
        click.echo(f"wrote {target / 'sweep.csv'}")

    _guard(body)


if __name__ == "__main__":
    main()
