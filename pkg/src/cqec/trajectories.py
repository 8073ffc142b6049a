"""Quantum-jump unraveling of the master equation.

Each trajectory evolves an unnormalized pure state under the effective
generator H_eff = H0 - (i/2) sum_k J_k^dagger J_k with jump operators
J_k = sqrt(rate_k) * op_k. A jump happens when the squared norm falls to a
uniform threshold; the jump time is located inside the step by bisection on
the exact no-jump propagator, and channel k is chosen with probability
proportional to ||J_k psi||^2.

Every trajectory draws from its own counter-based Philox stream keyed by
(seed, trajectory index), and all batched linear algebra is done with
row-independent elementwise reductions, so a trajectory's path does not
depend on which batch or worker computed it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blocks import block_parameters, ideal_bloch
from .codes import StabilizerCode, load_code
from .config import ScenarioConfig
from .errors import IntegrationError
from .lindblad import PAULI_VECTOR, LindbladSpec, build_spec, embed_initial_state

_BISECTION_STEPS = 60
_NORM_FLOOR = 1e-250


@dataclass(frozen=True)
class TrajectoryConfig:
    scenario: ScenarioConfig
    n_trajectories: int
    seed: int
    sample_times: tuple[float, ...]

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be positive")
        times = tuple(float(t) for t in self.sample_times)
        if not times or times[0] != 0.0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample_times must start at 0 and increase strictly")
        if times[-1] > self.scenario.t_max + 1e-12:
            raise ValueError("sample_times extend beyond t_max")
        object.__setattr__(self, "sample_times", times)

    @classmethod
    def from_scenario(cls, scenario: ScenarioConfig) -> TrajectoryConfig:
        step = scenario.mc_sample_every * scenario.dt
        n = scenario.n_steps // scenario.mc_sample_every
        return cls(scenario, scenario.n_trajectories, scenario.seed,
                   tuple(i * step for i in range(n + 1)))


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    key = (int(seed) % 2**64) | (int(index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def _apply(matrix: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    # (n, d) -> (n, d); per-row result independent of n.
    return (vecs[:, None, :] * matrix[None, :, :]).sum(axis=-1)


class JumpModel:
    """Jump operators and no-jump propagator derived from a master equation."""

    def __init__(self, spec: LindbladSpec, labels: list[str] | None = None):
        ops, names = [], []
        labels = labels or [f"J{i}" for i in range(len(spec.channels))]
        for (op, rate), name in zip(spec.channels, labels):
            if rate > 0:
                ops.append(np.sqrt(rate) * op)
                names.append(name)
        d = spec.dim
        self.dim = d
        self.labels = names
        self.jumps = np.array(ops) if ops else np.zeros((0, d, d), dtype=complex)
        decay = sum((j.conj().T @ j for j in self.jumps), np.zeros((d, d), dtype=complex))
        self.h_eff = spec.hamiltonian - 0.5j * decay
        w, v = np.linalg.eig(self.h_eff)
        vinv = np.linalg.inv(v)
        if np.linalg.norm(v @ np.diag(w) @ vinv - self.h_eff) > 1e-10 * max(1.0, np.abs(w).max()):
            raise ValueError("effective Hamiltonian is not diagonalizable")
        self.eigvals, self.modes, self.modes_inv = w, v, vinv

    @classmethod
    def from_scenario(cls, scenario: ScenarioConfig, code: StabilizerCode) -> JumpModel:
        labels = [f"R{m}" for m in range(code.n_syndromes + 1)]
        labels += [f"E{a}" for a in range(1, len(code.errors) + 1)]
        return cls(build_spec(scenario, code), labels)

    def _norm2(self, coeffs: np.ndarray) -> np.ndarray:
        return (np.abs(_apply(self.modes, coeffs)) ** 2).sum(axis=-1)

    def _evolve(self, coeffs: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return coeffs * np.exp(-1j * self.eigvals[None, :] * tau[:, None])

    def run(self, psi0: np.ndarray, rngs: list[np.random.Generator], thresholds: np.ndarray,
            sample_times, on_sample, on_jump=None):
        """Advance a batch of trajectories through ``sample_times``.

        ``on_sample(k, psi)`` receives the normalized states at sample k;
        ``on_jump(rows, times, channels)`` receives each round of jumps.
        """
        coeffs = _apply(self.modes_inv, psi0)
        thresholds = thresholds.copy()
        n = psi0.shape[0]
        on_sample(0, psi0)
        for k in range(1, len(sample_times)):
            start, span = sample_times[k - 1], sample_times[k] - sample_times[k - 1]
            remaining = np.full(n, span)
            active = np.arange(n)
            while active.size:
                ends = self._evolve(coeffs[active], remaining[active])
                norms = self._norm2(ends)
                if norms.min(initial=1.0) < _NORM_FLOOR:
                    raise IntegrationError("trajectory norm underflow between jumps", k)
                jumped = norms <= thresholds[active]
                settled = active[~jumped]
                coeffs[settled] = ends[~jumped]
                remaining[settled] = 0.0
                active = active[jumped]
                if not active.size or not self.labels:
                    break
                tau = self._locate(coeffs[active], thresholds[active], remaining[active])
                psi = _apply(self.modes, self._evolve(coeffs[active], tau))
                branches = np.einsum("kij,nj->nki", self.jumps, psi, optimize=False)
                weights = (np.abs(branches) ** 2).sum(axis=-1)
                cumulative = np.cumsum(weights, axis=1)
                draws = np.array([rngs[i].random() for i in active])
                channel = (cumulative < draws[:, None] * cumulative[:, -1:]).sum(axis=1)
                channel = np.minimum(channel, len(self.labels) - 1)
                new = branches[np.arange(active.size), channel]
                new /= np.sqrt((np.abs(new) ** 2).sum(axis=-1))[:, None]
                coeffs[active] = _apply(self.modes_inv, new)
                thresholds[active] = [1.0 - rngs[i].random() for i in active]
                if on_jump is not None:
                    on_jump(active, start + span - remaining[active] + tau, channel)
                remaining[active] -= tau
            # The unnormalized norm encodes the time since the last jump; only copies are normalized.
            psi = _apply(self.modes, coeffs)
            on_sample(k, psi / np.sqrt((np.abs(psi) ** 2).sum(axis=-1))[:, None])

    def _locate(self, coeffs: np.ndarray, thresholds: np.ndarray, upper: np.ndarray) -> np.ndarray:
        lo = np.zeros_like(upper)
        hi = upper.copy()
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            above = self._norm2(self._evolve(coeffs, mid)) > thresholds
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return hi


# -- sampling and ensembles -------------------------------------------------------


def _initial_states(rho0: np.ndarray, rngs) -> np.ndarray:
    """Draw one eigenvector of rho0 per trajectory, weighted by its eigenvalue."""
    w, v = np.linalg.eigh(rho0)
    w = np.clip(w, 0.0, None)
    cumulative = np.cumsum(w) / w.sum()
    picks = [min(int(np.searchsorted(cumulative, rng.random(), side="right")), len(w) - 1)
             for rng in rngs]
    return v[:, picks].T.copy()


def _prepare(config: TrajectoryConfig, code: StabilizerCode | None, indices):
    code = code or load_code(config.scenario.code)
    model = JumpModel.from_scenario(config.scenario, code)
    rho0 = embed_initial_state(code, config.scenario.initial_bloch)
    rngs = [trajectory_rng(config.seed, i) for i in indices]
    psi0 = _initial_states(rho0, rngs)
    thresholds = np.array([1.0 - rng.random() for rng in rngs])
    return code, model, psi0, rngs, thresholds


@dataclass
class TrajectoryPath:
    times: np.ndarray
    states: np.ndarray  # (T, d) normalized
    jump_times: list[float] = field(default_factory=list)
    jump_channels: list[str] = field(default_factory=list)


def sample_trajectory(config: TrajectoryConfig, index: int,
                      code: StabilizerCode | None = None) -> TrajectoryPath:
    """Pure-state path of trajectory ``index``; a deterministic function of (seed, index)."""
    code, model, psi0, rngs, thresholds = _prepare(config, code, [index])
    times = np.array(config.sample_times)
    states = np.empty((len(times), model.dim), dtype=complex)
    path = TrajectoryPath(times, states)

    def on_sample(k, psi):
        states[k] = psi[0]

    def on_jump(rows, when, channel):
        path.jump_times.append(float(when[0]))
        path.jump_channels.append(model.labels[int(channel[0])])

    model.run(psi0, rngs, thresholds, times, on_sample, on_jump)
    return path


def observable_names(n_syndromes: int) -> list[str]:
    names = [f"p{m}" for m in range(n_syndromes + 1)]
    names += [f"r{m}{c}" for m in range(n_syndromes + 1) for c in "xyz"]
    return names + ["fidelity"]


class _Observer:
    """Per-trajectory syndrome probabilities, Bloch vectors and fidelity from pure states."""

    def __init__(self, config: TrajectoryConfig, code: StabilizerCode):
        params = block_parameters(config.scenario, code)
        self.lambdas_t = [lam.T for lam in params.lambdas]
        self.basis_inv = code.logical_basis.conj().T
        self.nb = code.n_syndromes + 1
        r0 = np.asarray(config.scenario.initial_bloch, dtype=float)
        self.ideal = [ideal_bloch(r0, params.omegas[0], t) for t in config.sample_times]

    def __call__(self, k: int, psi: np.ndarray) -> np.ndarray:
        phi = _apply(self.basis_inv, psi).reshape(psi.shape[0], self.nb, 2)
        p = (np.abs(phi) ** 2).sum(axis=-1)
        r = np.einsum("nmi,aij,nmj->nma", phi.conj(), PAULI_VECTOR, phi, optimize=False).real
        corrected = r[:, 0, :].copy()
        for a, lam_t in enumerate(self.lambdas_t, start=1):
            corrected += r[:, a, :] @ lam_t.T
        fid = 0.5 * (p.sum(axis=1) + corrected @ self.ideal[k])
        return np.concatenate([p, r.reshape(psi.shape[0], -1), fid[:, None]], axis=1)


@dataclass
class EnsembleResult:
    times: np.ndarray
    rho: np.ndarray  # (T, d, d)
    n_trajectories: int
    names: list[str]
    mean: np.ndarray  # (T, n_observables)
    stderr: np.ndarray  # (T, n_observables)
    jumps: list[list[tuple[float, str]]] | None = None

    def observable(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        j = self.names.index(name)
        return self.mean[:, j], self.stderr[:, j]


def _run_chunk(config: TrajectoryConfig, code: StabilizerCode, indices: np.ndarray,
               record_jumps: bool):
    _, model, psi0, rngs, thresholds = _prepare(config, code, indices)
    observe = _Observer(config, code)
    n_t = len(config.sample_times)
    d = model.dim
    rho_sum = np.zeros((n_t, d, d), dtype=complex)
    obs_sum = np.zeros((n_t, len(observable_names(code.n_syndromes))))
    obs_sq = np.zeros_like(obs_sum)
    jumps = [[] for _ in indices] if record_jumps else None

    def on_sample(k, psi):
        rho_sum[k] = np.einsum("ni,nj->ij", psi, psi.conj(), optimize=False)
        values = observe(k, psi)
        obs_sum[k] = values.sum(axis=0)
        obs_sq[k] = (values**2).sum(axis=0)

    def on_jump(rows, when, channel):
        if jumps is not None:
            for row, t, c in zip(rows, when, channel):
                jumps[row].append((float(t), model.labels[int(c)]))

    model.run(psi0, rngs, thresholds, config.sample_times, on_sample, on_jump)
    return rho_sum, obs_sum, obs_sq, jumps


def ensemble_average(config: TrajectoryConfig, code: StabilizerCode | None = None, *,
                     chunk_size: int = 1000, workers: int = 1,
                     record_jumps: bool = False) -> EnsembleResult:
    """Average |psi><psi| and the record observables over all trajectories.

    Chunks may run concurrently; partial sums are always reduced in chunk
    order, so the result depends on ``chunk_size`` but not on ``workers``.
    """
    code = code or load_code(config.scenario.code)
    n = config.n_trajectories
    chunks = [np.arange(i, min(i + chunk_size, n)) for i in range(0, n, chunk_size)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _run_chunk(config, code, idx, record_jumps), chunks))
    else:
        parts = [_run_chunk(config, code, idx, record_jumps) for idx in chunks]
    rho = sum((p[0] for p in parts[1:]), parts[0][0].copy())
    total = sum((p[1] for p in parts[1:]), parts[0][1].copy())
    total_sq = sum((p[2] for p in parts[1:]), parts[0][2].copy())
    mean = total / n
    if n > 1:
        var = np.clip((total_sq - n * mean**2) / (n - 1), 0.0, None)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.zeros_like(mean)
    jumps = [j for p in parts for j in p[3]] if record_jumps else None
    rho = rho / n
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    return EnsembleResult(np.array(config.sample_times), rho, n,
                          observable_names(code.n_syndromes), mean, stderr, jumps)
