"""Run scenarios through the four engines and compare their records.

Every engine produces the same per-time record: ``t``, syndrome
probabilities ``p0..pN``, block Bloch vectors ``r0x..rNz`` and ``fidelity``.
The analytic engine leaves the columns it has no closed form for empty; the
Monte Carlo engine adds ``<column>_se`` standard-error columns.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic
from .blocks import (SyndromeBlockState, block_parameters, fidelity_from_blocks, ideal_bloch,
                     integrate_blocks)
from .codes import StabilizerCode, load_code
from .config import ScenarioConfig
from .errors import ConfigError
from .lindblad import build_spec, embed_initial_state, fidelity, ideal_states, integrate, syndrome_blocks
from .trajectories import TrajectoryConfig, ensemble_average, observable_names

# Observables with a statistical band in MC comparisons; the rest are reported only.
MC_BANDED = ("p0", "fidelity")


@dataclass
class EngineResult:
    engine: str
    times: np.ndarray
    columns: list[str]
    values: np.ndarray  # (T, len(columns)); NaN where the engine has no value
    stderr: np.ndarray | None = None
    n_samples: int | None = None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]


def record_columns(n_syndromes: int) -> list[str]:
    return observable_names(n_syndromes)


def run_dense(config: ScenarioConfig, code: StabilizerCode) -> EngineResult:
    spec = build_spec(config, code)
    rho0 = embed_initial_state(code, config.initial_bloch)
    traj = integrate(rho0, spec, config.t_max, config.dt, config.record_every)
    ideal = ideal_states(rho0, spec.hamiltonian, traj.times)
    rows = []
    for rho, rho_id in zip(traj.states, ideal):
        view = syndrome_blocks(rho, code)
        rows.append(np.concatenate([view.probabilities, view.bloch.ravel(),
                                    [fidelity(rho, rho_id, code)]]))
    return EngineResult("dense", traj.times, record_columns(code.n_syndromes), np.array(rows))


def run_block(config: ScenarioConfig, code: StabilizerCode) -> EngineResult:
    params = block_parameters(config, code)
    state0 = SyndromeBlockState.initial(config.initial_bloch, code.n_syndromes)
    traj = integrate_blocks(state0, params, config.t_max, config.dt, config.record_every)
    rows = []
    for i, t in enumerate(traj.times):
        state = traj.state(i)
        r_id = ideal_bloch(config.initial_bloch, params.omegas[0], t)
        rows.append(np.concatenate([state.probabilities, state.bloch.ravel(),
                                    [fidelity_from_blocks(state, r_id, params.lambdas)]]))
    return EngineResult("block", traj.times, record_columns(code.n_syndromes), np.array(rows))


def run_analytic(config: ScenarioConfig, code: StabilizerCode) -> EngineResult:
    if code.name != "phase3" or config.omega != 0:
        raise ConfigError("the analytic engine needs the phase3 code with omega = 0",
                          "scenario.engines")
    times = np.arange(config.n_steps // config.record_every + 1) * (config.record_every * config.dt)
    columns = record_columns(code.n_syndromes)
    values = np.full((times.size, len(columns)), np.nan)
    g, gp, r0 = config.gamma, config.gamma_prime, config.initial_bloch
    p0 = analytic.p0_exact(times, g, gp)
    values[:, 0] = p0
    # Starting from syndrome 0 the three nontrivial syndromes stay equally populated.
    values[:, 1:4] = ((1 - p0) / 3)[:, None]
    values[:, 4:7] = analytic.bloch_exact(times, g, gp, r0)
    values[:, -1] = analytic.fidelity_exact(times, g, gp, r0)
    return EngineResult("analytic", times, columns, values)


def run_mc(config: ScenarioConfig, code: StabilizerCode, workers: int = 1) -> EngineResult:
    result = ensemble_average(TrajectoryConfig.from_scenario(config), code, workers=workers)
    return EngineResult("mc", result.times, result.names, result.mean, result.stderr,
                        result.n_trajectories)


RUNNERS = {"dense": run_dense, "block": run_block, "analytic": run_analytic, "mc": run_mc}


def run_engines(config: ScenarioConfig, code: StabilizerCode | None = None) -> dict[str, EngineResult]:
    code = code or load_code(config.code)
    return {name: RUNNERS[name](config, code) for name in config.engines}


# -- CSV output ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "" if np.isnan(x) else format(float(x), ".17g")


def csv_text(result: EngineResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["t"] + result.columns
    if result.stderr is not None:
        header += [f"{c}_se" for c in result.columns]
    writer.writerow(header)
    for i, t in enumerate(result.times):
        row = [_fmt(t)] + [_fmt(v) for v in result.values[i]]
        if result.stderr is not None:
            row += [_fmt(v) for v in result.stderr[i]]
        writer.writerow(row)
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: np.array([float(r[j]) if r[j] else np.nan for r in body])
            for j, name in enumerate(header)}


# -- comparisons -----------------------------------------------------------------


@dataclass
class Comparison:
    engines: tuple[str, str]
    observable: str
    max_deviation: float
    time: float
    tolerance: float | None
    passed: bool
    kind: str = "absolute"  # or "sigma": deviation measured in standard errors

    def as_dict(self) -> dict:
        return {"engines": list(self.engines), "observable": self.observable,
                "max_deviation": self.max_deviation, "time": self.time,
                "tolerance": self.tolerance, "passed": self.passed, "kind": self.kind}


def _shared_rows(a: EngineResult, b: EngineResult):
    keys_a = {round(t, 9): i for i, t in enumerate(a.times)}
    pairs = [(keys_a[round(t, 9)], j) for j, t in enumerate(b.times) if round(t, 9) in keys_a]
    ia = np.array([p[0] for p in pairs], dtype=int)
    ib = np.array([p[1] for p in pairs], dtype=int)
    return ia, ib


def _pair_tolerance(a: str, b: str, tolerances: dict) -> float:
    if "analytic" in (a, b):
        return tolerances["analytic"]
    return tolerances["dense_block"]


def compare_results(results: dict[str, EngineResult], tolerances: dict) -> list[Comparison]:
    """Pairwise maximum deviations over shared observables and shared times."""
    out = []
    names = list(results)
    for i, a_name in enumerate(names):
        for b_name in names[i + 1:]:
            a, b = results[a_name], results[b_name]
            if a.stderr is not None:
                a, b = b, a
            ia, ib = _shared_rows(a, b)
            if not ia.size:
                continue
            stochastic = b.stderr is not None
            for col in a.columns:
                if col not in b.columns:
                    continue
                va, vb = a.column(col)[ia], b.column(col)[ib]
                ok = ~(np.isnan(va) | np.isnan(vb))
                if not ok.any():
                    continue
                dev = np.abs(va - vb)
                if stochastic:
                    se = b.stderr[ib, b.columns.index(col)]
                    # A finite ensemble cannot resolve less than one sample in n: without this
                    # term a sample with no rare events reports a zero error bar.
                    if b.n_samples:
                        se = np.sqrt(se**2 + b.n_samples**-2.0)
                    score = np.where(ok, dev / (se + tolerances["mc_floor"]), 0.0)
                    k = int(score.argmax())
                    banded = col in MC_BANDED
                    tol = tolerances["mc_sigma"] if banded else None
                    passed = (not banded) or bool(score[k] <= tol)
                    out.append(Comparison((a.engine, b.engine), col, float(score[k]),
                                          float(a.times[ia[k]]), tol, passed, "sigma"))
                else:
                    dev = np.where(ok, dev, 0.0)
                    k = int(dev.argmax())
                    tol = _pair_tolerance(a.engine, b.engine, tolerances)
                    out.append(Comparison((a.engine, b.engine), col, float(dev[k]),
                                          float(a.times[ia[k]]), tol, bool(dev[k] <= tol)))
    return out


@dataclass
class RunReport:
    scenario: dict
    outputs: dict[str, str] = field(default_factory=dict)
    comparisons: list[Comparison] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    def breaches(self) -> list[Comparison]:
        return [c for c in self.comparisons if not c.passed]

    def as_dict(self) -> dict:
        return {"scenario": self.scenario, "outputs": self.outputs,
                "comparisons": [c.as_dict() for c in self.comparisons], "passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def run_scenario(config: ScenarioConfig, out_dir: Path | None, code: StabilizerCode | None = None
                 ) -> tuple[dict[str, EngineResult], RunReport]:
    """Run all configured engines, write one CSV per engine and a JSON report."""
    results = run_engines(config, code)
    report = RunReport(config.as_dict(), comparisons=compare_results(results, config.tolerances))
    if out_dir is not None:
        for name, result in results.items():
            path = Path(out_dir) / f"{name}.csv"
            atomic_write(path, csv_text(result))
            report.outputs[name] = str(path)
        atomic_write(Path(out_dir) / "report.json", report.to_json())
    return results, report
