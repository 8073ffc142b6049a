"""Parameter sweeps over correction and error rates."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic
from .codes import load_code
from .config import ConfigFile, ScenarioConfig
from .engines import EngineResult, atomic_write, run_scenario
from .errors import ConfigError

SWEEP_COLUMNS = ["index", "gamma", "gamma_prime", "epsilon", "p0_final", "p0_stationary",
                 "slow_rate_fit", "lambda_plus", "strong_rate"]


def fit_decay_rate(times: np.ndarray, values: np.ndarray, t_start: float = 0.0) -> float:
    """Least-squares slope of -log|values| for t >= t_start (NaN if nothing to fit)."""
    times = np.asarray(times, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    keep = (times >= t_start) & (values > 0)
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(times[keep], np.log(values[keep]), 1)[0]
    return float(-slope)


@dataclass
class SweepSpec:
    points: list[tuple[float, float]]  # (gamma, gamma_prime)
    fit_start: float
    workers: int = 1


def parse_sweep(table: dict | None) -> SweepSpec:
    if not table:
        raise ConfigError("missing section", "sweep")
    unknown = set(table) - {"gamma", "gamma_prime", "epsilon", "fit_start", "workers"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "sweep")
    gammas = [float(g) for g in table.get("gamma", [])]
    if not gammas:
        raise ConfigError("needs a non-empty list", "sweep.gamma")
    if ("epsilon" in table) == ("gamma_prime" in table):
        raise ConfigError("give exactly one of gamma_prime or epsilon", "sweep")
    points = []
    for g in gammas:
        if "epsilon" in table:
            if g <= 0:
                raise ConfigError("epsilon grids need gamma > 0", "sweep.gamma")
            points += [(g, float(e) * g) for e in table["epsilon"]]
        else:
            points += [(g, float(gp)) for gp in table["gamma_prime"]]
    return SweepSpec(points, float(table.get("fit_start", 0.0)), int(table.get("workers", 1)))


def _transverse_column(config: ScenarioConfig) -> str | None:
    x0, y0, _ = config.initial_bloch
    if x0 == 0 and y0 == 0:
        return None
    return "r0y" if abs(y0) >= abs(x0) else "r0x"


def _summary(index: int, config: ScenarioConfig, result: EngineResult, fit_start: float,
             n_syndromes: int = 3) -> dict:
    g, gp = config.gamma, config.gamma_prime
    column = _transverse_column(config)
    rate = fit_decay_rate(result.times, result.column(column), fit_start) if column else float("nan")
    rates = analytic.decay_rates(g, gp)
    return {
        "index": index,
        "gamma": g,
        "gamma_prime": gp,
        "epsilon": gp / g if g > 0 else float("nan"),
        "p0_final": float(result.column("p0")[-1]),
        "p0_stationary": float(analytic.p0_exact(np.inf, g, gp, n_syndromes)),
        "slow_rate_fit": rate,
        "lambda_plus": rates.lambda_plus,
        "strong_rate": 12 * gp**2 / g if g > 0 else float("nan"),
    }


def run_sweep(config_file: ConfigFile, out_dir: Path) -> list[dict]:
    """Run every grid point (concurrently if requested) and write ``sweep.csv``.

    Per-point engine outputs land in ``points/<index>``, in the same layout
    as a simulation run. Rows are ordered by grid index regardless of which
    point finishes first.
    """
    spec = parse_sweep(config_file.sweep)
    if len(config_file.scenarios) != 1:
        raise ConfigError("sweeps take a single scenario, not variants", "variant")
    base = config_file.scenarios[0]
    code = load_code(base.code)
    configs = [base.replace(name=f"{base.name}-{i}", gamma=g, gamma_prime=gp)
               for i, (g, gp) in enumerate(spec.points)]
    primary = next((e for e in ("block", "dense", "analytic") if e in base.engines), base.engines[0])

    def one(item):
        i, cfg = item
        results, _ = run_scenario(cfg, Path(out_dir) / "points" / f"{i:03d}", code)
        return _summary(i, cfg, results[primary], spec.fit_start, code.n_syndromes)

    items = list(enumerate(configs))
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(one, items))
    else:
        rows = [one(item) for item in items]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([row["index"]] + ["" if np.isnan(row[c]) else format(row[c], ".17g")
                                          for c in SWEEP_COLUMNS[1:]])
    atomic_write(Path(out_dir) / "sweep.csv", buf.getvalue())
    return rows
