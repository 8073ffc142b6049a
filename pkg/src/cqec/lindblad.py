"""Dense master-equation engine on the full 2**n dimensional Hilbert space.

The generator is

    d rho/dt = -i[H0, rho] + sum_m g_m D[R_m] rho + sum_a g'_a D[E_a] rho,
    D[J] rho = J rho J^dagger - {J^dagger J, rho}/2,

with corrective jumps R_m and error jumps E_a. Integration is fixed-step RK4
on the vectorized density matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .codes import StabilizerCode, check_density_matrix
from .config import ScenarioConfig
from .errors import (ConfigError, InvalidDensityMatrixError, IntegrationError,
                     NumericalConsistencyError, SizeMismatchError)
from .pauli import dense_matrix, parse_pauli
from .rk4 import linear_generator, rk4_linear, step_count

PAULI_VECTOR = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

TRACE_DRIFT_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8
STABILITY_LIMIT = 0.1


@dataclass
class LindbladSpec:
    hamiltonian: np.ndarray
    corrective_channels: list[tuple[np.ndarray, float]] = field(default_factory=list)
    error_channels: list[tuple[np.ndarray, float]] = field(default_factory=list)

    def __post_init__(self):
        self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
        h = self.hamiltonian
        if np.linalg.norm(h - h.conj().T) > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        for op, rate in self.channels:
            if op.shape != h.shape:
                raise SizeMismatchError(f"jump operator shape {op.shape} vs {h.shape}")
            if not np.isfinite(rate) or rate < 0:
                raise ValueError(f"rate {rate} must be finite and non-negative")
        if self.corrective_channels:
            total = sum(r.conj().T @ r for r, _ in self.corrective_channels)
            if np.linalg.norm(total - np.eye(self.dim)) > 1e-12:
                raise ValueError("corrective jump operators do not resolve the identity")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def channels(self) -> list[tuple[np.ndarray, float]]:
        return list(self.corrective_channels) + list(self.error_channels)

    def rate_scale(self) -> float:
        """Rough inverse timescale of the fastest process (used by the step-size guard)."""
        corrective = max((rate for _, rate in self.corrective_channels), default=0.0)
        errors = sum(rate for _, rate in self.error_channels)
        eig = np.linalg.eigvalsh(self.hamiltonian)
        return corrective + errors + float(eig[-1] - eig[0])


def default_drive(code: StabilizerCode) -> str | None:
    # X on the encoded carrier is a transversal logical X for the phase code.
    return "IIX" if code.name == "phase3" else None


def drive_hamiltonian(config: ScenarioConfig, code: StabilizerCode) -> np.ndarray:
    """H0 = omega/2 * P for the configured drive Pauli P; rejected if it mixes syndromes."""
    if config.omega == 0:
        return np.zeros((code.dim, code.dim), dtype=complex)
    text = config.drive or default_drive(code)
    if text is None:
        raise ConfigError("a drive Pauli string is required when omega != 0", "scenario.drive")
    try:
        pauli = parse_pauli(text, code.n)
    except ValueError as exc:
        raise ConfigError(str(exc), "scenario.drive") from None
    if not pauli.is_hermitian:
        raise ConfigError("drive must be Hermitian", "scenario.drive")
    h0 = 0.5 * config.omega * dense_matrix(pauli)
    blocks = _blocks(code.to_logical(h0), code)
    off = off_diagonal_norm(blocks)
    if off > 1e-12:
        raise ConfigError(f"drive couples different syndromes (norm {off:.3e})", "scenario.drive")
    return h0


def build_spec(config: ScenarioConfig, code: StabilizerCode) -> LindbladSpec:
    h0 = drive_hamiltonian(config, code)
    corrective = [(r, float(config.gamma)) for r in code.recovery_operators]
    errors = [(dense_matrix(e), float(config.gamma_prime)) for e in code.errors]
    return LindbladSpec(h0, corrective, errors)


def lindblad_rhs(rho: np.ndarray, spec: LindbladSpec) -> np.ndarray:
    if rho.shape != (spec.dim, spec.dim):
        raise SizeMismatchError(f"density matrix shape {rho.shape}, generator dim {spec.dim}")
    h = spec.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for op, rate in spec.channels:
        if rate == 0:
            continue
        op_dag = op.conj().T
        decay = op_dag @ op
        out += rate * (op @ rho @ op_dag - 0.5 * (decay @ rho + rho @ decay))
    return out


def liouvillian(spec: LindbladSpec) -> np.ndarray:
    """Matrix of :func:`lindblad_rhs` acting on row-major vectorized density matrices."""
    d = spec.dim
    return linear_generator(lambda v: lindblad_rhs(v.reshape(d, d), spec).ravel(), d * d)


def embed_initial_state(code: StabilizerCode, bloch) -> np.ndarray:
    """rho(0) = C (|0><0| (x) (I + r.sigma)/2) C^dagger for a k = 1 code."""
    if code.k != 1:
        raise ValueError("Bloch-vector initial states need a code with k = 1")
    r = np.asarray(bloch, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if np.linalg.norm(r) > 1 + 1e-12:
        raise InvalidDensityMatrixError(f"Bloch vector norm {np.linalg.norm(r):.6g} exceeds 1")
    logical = 0.5 * (np.eye(2) + np.einsum("i,ijk->jk", r, PAULI_VECTOR))
    sector = np.zeros((code.n_syndromes + 1,) * 2)
    sector[0, 0] = 1.0
    return code.to_physical(np.kron(sector, logical))


@dataclass
class DenseTrajectory:
    times: np.ndarray
    states: np.ndarray  # (T, d, d)


def _state_check(dim: int, trace0: float):
    def check(step: int, vec: np.ndarray):
        rho = vec.reshape(dim, dim)
        drift = abs(np.trace(rho) - trace0)
        if drift > TRACE_DRIFT_TOL:
            raise IntegrationError(f"trace drifted by {drift:.3e}", step)
        herm = np.linalg.norm(rho - rho.conj().T)
        if herm > HERMITICITY_TOL:
            raise IntegrationError(f"Hermiticity lost (residual {herm:.3e})", step)
        low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if low < -POSITIVITY_TOL:
            raise IntegrationError(f"negative eigenvalue {low:.3e}", step)
    return check


def integrate(rho0: np.ndarray, spec: LindbladSpec, t_max: float, dt: float,
              record_every: int = 1) -> DenseTrajectory:
    """RK4-integrate the master equation, checking state invariants at every recorded step."""
    rho0 = check_density_matrix(rho0, spec.dim)
    n_steps = step_count(t_max, dt)
    if dt * spec.rate_scale() > STABILITY_LIMIT:
        warnings.warn(f"dt={dt} is large for rate scale {spec.rate_scale():.3g}; "
                      f"results may be inaccurate", RuntimeWarning, stacklevel=2)
    gen = liouvillian(spec)
    d = spec.dim
    vecs = rk4_linear(gen, rho0.ravel(), dt, n_steps, record_every,
                      check=_state_check(d, np.trace(rho0).real))
    times = np.arange(vecs.shape[0]) * (record_every * dt)
    return DenseTrajectory(times, vecs.reshape(-1, d, d))


def ideal_states(rho0: np.ndarray, hamiltonian: np.ndarray, times) -> np.ndarray:
    """exp(-i H0 t) rho0 exp(i H0 t) for each t."""
    w, v = np.linalg.eigh(hamiltonian)
    local = v.conj().T @ rho0 @ v
    out = []
    for t in np.atleast_1d(times):
        phase = np.exp(-1j * w * t)
        out.append(v @ (np.outer(phase, phase.conj()) * local) @ v.conj().T)
    return np.array(out)


# -- syndrome blocks --------------------------------------------------------


def _blocks(logical: np.ndarray, code: StabilizerCode) -> np.ndarray:
    nb, d = code.n_syndromes + 1, code.logical_dim
    return logical.reshape(nb, d, nb, d).transpose(0, 2, 1, 3)


def off_diagonal_norm(blocks: np.ndarray) -> float:
    nb = blocks.shape[0]
    mask = ~np.eye(nb, dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.linalg.norm(blocks[mask], axis=(-2, -1)).max())


@dataclass
class BlockView:
    """rho expressed as sum_{m,m'} |m><m'| (x) rho_{mm'} in the logical basis."""

    blocks: np.ndarray  # (N+1, N+1, 2**k, 2**k)
    probabilities: np.ndarray
    bloch: np.ndarray | None  # (N+1, 3) for k = 1
    max_offdiagonal_norm: float


def syndrome_blocks(rho: np.ndarray, code: StabilizerCode) -> BlockView:
    blocks = _blocks(code.to_logical(rho), code)
    diag = blocks[np.arange(blocks.shape[0]), np.arange(blocks.shape[0])]
    probs = np.trace(diag, axis1=1, axis2=2).real
    bloch = None
    if code.k == 1:
        bloch = np.einsum("ajk,mkj->ma", PAULI_VECTOR, diag).real
    return BlockView(blocks, probs, bloch, off_diagonal_norm(blocks))


def fidelity(rho: np.ndarray, rho_id: np.ndarray, code: StabilizerCode, tol: float = 1e-10) -> float:
    """Tr(rho_id sum_m R_m rho R_m^dagger): overlap after one final recovery event."""
    corrected = sum(r @ rho @ r.conj().T for r in code.recovery_operators)
    value = np.trace(rho_id @ corrected)
    if abs(value.imag) > tol:
        raise NumericalConsistencyError(f"fidelity has imaginary part {value.imag:.3e}")
    f = value.real
    if not -1e-9 <= f <= 1 + 1e-9:
        raise NumericalConsistencyError(f"fidelity {f:.12g} outside [0, 1]")
    return min(max(f, 0.0), 1.0)
