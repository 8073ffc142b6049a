"""Scenario configuration and the TOML config-file format.

A config file has a ``[scenario]`` table with the physical parameters and
time grid, optional ``[mc]``, ``[tolerances]`` and ``[output]`` tables, an
optional ``[[variant]]`` array whose entries override scenario keys (one run
per variant) and, for sweeps, a ``[sweep]`` table with the parameter grid.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ENGINES = ("dense", "block", "analytic", "mc")

DEFAULT_TOLERANCES = {
    "dense_block": 1e-7,
    "analytic": 1e-6,
    "mc_sigma": 3.0,
    "mc_floor": 1e-9,
}


def read_toml(path: str | Path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario through the engines.

    Rates are in inverse time units, ``omega`` is an angular frequency and
    ``drive`` is the Pauli string whose matrix, times omega/2, is the
    Hamiltonian. ``record_every`` and ``mc_sample_every`` count integration
    steps.
    """

    name: str = "scenario"
    code: str = "phase3"
    gamma: float = 0.0
    gamma_prime: float = 0.0
    omega: float = 0.0
    drive: str | None = None
    initial_bloch: tuple[float, float, float] = (0.0, 0.0, 1.0)
    t_max: float = 5.0
    dt: float = 1e-3
    record_every: int = 10
    engines: tuple[str, ...] = ("dense", "block")
    seed: int = 0
    n_trajectories: int = 1000
    mc_sample_every: int = 100
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        for key in ("gamma", "gamma_prime", "omega", "t_max", "dt"):
            value = getattr(self, key)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ConfigError("must be a finite number", f"scenario.{key}")
        if self.gamma < 0 or self.gamma_prime < 0:
            raise ConfigError("rates must be non-negative",
                              "scenario.gamma" if self.gamma < 0 else "scenario.gamma_prime")
        if self.dt <= 0:
            raise ConfigError("must be positive", "scenario.dt")
        if self.t_max < self.dt:
            raise ConfigError("must be at least dt", "scenario.t_max")
        bloch = tuple(float(v) for v in self.initial_bloch)
        if len(bloch) != 3:
            raise ConfigError("must have three components", "scenario.initial_bloch")
        if math.sqrt(sum(v * v for v in bloch)) > 1 + 1e-12:
            raise ConfigError("Bloch vector norm exceeds 1", "scenario.initial_bloch")
        object.__setattr__(self, "initial_bloch", bloch)
        engines = tuple(self.engines)
        unknown = [e for e in engines if e not in ENGINES]
        if unknown or not engines:
            raise ConfigError(f"unknown engines {unknown}; choose from {ENGINES}", "scenario.engines")
        if len(set(engines)) != len(engines):
            raise ConfigError("engines listed twice", "scenario.engines")
        object.__setattr__(self, "engines", engines)
        for key in ("record_every", "mc_sample_every", "n_trajectories"):
            if int(getattr(self, key)) < 1:
                raise ConfigError("must be a positive integer", f"{key}")
        if self.mc_sample_every % self.record_every:
            raise ConfigError("must be a multiple of scenario.record_every", "mc.sample_every")
        n = round(self.t_max / self.dt)
        if abs(n * self.dt - self.t_max) > 1e-9 * max(1.0, self.t_max):
            raise ConfigError("must be a whole multiple of dt", "scenario.t_max")
        if n % self.record_every:
            raise ConfigError("t_max/dt must be a multiple of record_every", "scenario.record_every")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        object.__setattr__(self, "tolerances", tol)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_SCENARIO_KEYS = {"name", "code", "gamma", "gamma_prime", "omega", "drive", "initial_bloch",
                  "t_max", "dt", "record_every", "engines", "units"}
_MC_KEYS = {"seed", "n_trajectories", "sample_every"}


def _scenario_kwargs(table: dict, where: str) -> dict:
    unknown = set(table) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", where)
    kwargs = {k: v for k, v in table.items() if k != "units"}
    units = table.get("units", "absolute")
    if units not in ("absolute", "error_time"):
        raise ConfigError("must be 'absolute' or 'error_time'", f"{where}.units")
    if units == "error_time":
        rate = kwargs.get("gamma_prime", 0.0)
        if not rate:
            raise ConfigError("error_time units need gamma_prime > 0", f"{where}.units")
        for key in ("t_max", "dt"):
            if key in kwargs:
                kwargs[key] = kwargs[key] / rate
    if "engines" in kwargs:
        kwargs["engines"] = tuple(kwargs["engines"])
    if "initial_bloch" in kwargs:
        kwargs["initial_bloch"] = tuple(kwargs["initial_bloch"])
    return kwargs


@dataclass
class ConfigFile:
    """Parsed config file: one scenario per variant, plus optional sweep grid."""

    scenarios: list[ScenarioConfig]
    out_dir: str | None = None
    sweep: dict | None = None
    path: Path | None = None


def parse_config(data: dict, path: Path | None = None) -> ConfigFile:
    unknown = set(data) - {"scenario", "mc", "tolerances", "output", "variant", "sweep"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    if "scenario" not in data:
        raise ConfigError("missing section", "scenario")
    base_table = dict(data["scenario"])
    mc = dict(data.get("mc", {}))
    if set(mc) - _MC_KEYS:
        raise ConfigError(f"unknown keys {sorted(set(mc) - _MC_KEYS)}", "mc")
    extra = {}
    if "seed" in mc:
        extra["seed"] = int(mc["seed"])
    if "n_trajectories" in mc:
        extra["n_trajectories"] = int(mc["n_trajectories"])
    if "sample_every" in mc:
        extra["mc_sample_every"] = int(mc["sample_every"])
    tolerances = dict(data.get("tolerances", {}))
    if set(tolerances) - set(DEFAULT_TOLERANCES):
        raise ConfigError(f"unknown keys {sorted(set(tolerances) - set(DEFAULT_TOLERANCES))}",
                          "tolerances")

    variants = data.get("variant") or [{}]
    scenarios = []
    for i, variant in enumerate(variants):
        table = {**base_table, **variant}
        kwargs = _scenario_kwargs(table, "scenario" if not data.get("variant") else f"variant[{i}]")
        try:
            scenarios.append(ScenarioConfig(**kwargs, **extra, tolerances=tolerances))
        except TypeError as exc:
            raise ConfigError(str(exc), "scenario") from None
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("variant names must be unique", "variant")
    out_dir = data.get("output", {}).get("dir")
    return ConfigFile(scenarios, out_dir, data.get("sweep"), path)


def load_config(path: str | Path) -> ConfigFile:
    path = Path(path)
    return parse_config(read_toml(path), path)


def bundled_config(name: str) -> Path:
    """Path of a golden config shipped with the package (e.g. ``"free-decay"``)."""
    path = Path(__file__).parent / "configs" / f"{name}.toml"
    if not path.exists():
        raise ConfigError(f"no bundled config {name!r}")
    return path
