"""Reduced dynamics of the syndrome-diagonal blocks for codes with one logical qubit.

Each diagonal block is rho_m = (p_m I + r_m . sigma) / 2 with unnormalized
Bloch vector r_m. Off-diagonal blocks decouple from the diagonal ones, so the
state (p_m, r_m) for m = 0..N evolves autonomously:

    dr_m/dt = w_m x r_m - (g (1 - delta_m0) + N g') r_m
              + sum_a [g delta_m0 L_a^T r_a + g' L_a r_(m^a)]

where L_a is the Bloch rotation of conjugation by U_a and w_m is the
rotation vector of the syndrome-m Hamiltonian block. The probabilities obey
the same equation with the rotations dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import StabilizerCode
from .config import ScenarioConfig
from .errors import IntegrationError
from .lindblad import PAULI_VECTOR, _blocks, drive_hamiltonian
from .rk4 import linear_generator, rk4_linear, step_count


@dataclass
class SyndromeBlockState:
    probabilities: np.ndarray  # (N+1,)
    bloch: np.ndarray  # (N+1, 3)

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        self.bloch = np.asarray(self.bloch, dtype=float).reshape(-1, 3)
        if self.bloch.shape[0] != self.probabilities.shape[0]:
            raise ValueError("need one Bloch vector per syndrome")

    @property
    def n_syndromes(self) -> int:
        return self.probabilities.shape[0] - 1

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.probabilities[:, None], self.bloch], axis=1).ravel()

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> SyndromeBlockState:
        table = np.asarray(vec, dtype=float).reshape(-1, 4)
        return cls(table[:, 0].copy(), table[:, 1:].copy())

    @classmethod
    def initial(cls, bloch, n_syndromes: int) -> SyndromeBlockState:
        """All weight in syndrome 0 with logical Bloch vector ``bloch``."""
        p = np.zeros(n_syndromes + 1)
        p[0] = 1.0
        r = np.zeros((n_syndromes + 1, 3))
        r[0] = bloch
        return cls(p, r)

    def violations(self, prob_tol: float = 1e-10, bloch_tol: float = 1e-9) -> list[str]:
        problems = []
        total = self.probabilities.sum()
        if abs(total - 1) > prob_tol:
            problems.append(f"probabilities sum to {total:.15g}")
        if self.probabilities.min() < -bloch_tol:
            problems.append(f"negative probability {self.probabilities.min():.3e}")
        excess = np.linalg.norm(self.bloch, axis=1) - self.probabilities
        if excess.max() > bloch_tol:
            problems.append(f"|r_{int(excess.argmax())}| exceeds p by {excess.max():.3e}")
        return problems


def lambda_matrix(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Bloch rotation of rho -> U rho U^dagger: Lambda_ij = Tr(s_i U s_j U^dagger) / 2."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.linalg.norm(u.conj().T @ u - np.eye(2)) > tol:
        raise ValueError("expected a 2x2 unitary")
    conj = u @ PAULI_VECTOR @ u.conj().T
    return 0.5 * np.einsum("ikl,jlk->ij", PAULI_VECTOR, conj).real


@dataclass
class BlockParameters:
    gamma: float
    gamma_prime: float
    omegas: np.ndarray  # (N+1, 3) rotation vectors per syndrome
    lambdas: list[np.ndarray]  # Lambda_a for a = 1..N

    @property
    def n_syndromes(self) -> int:
        return len(self.lambdas)


def block_parameters(config: ScenarioConfig, code: StabilizerCode) -> BlockParameters:
    """Rotation vectors and Lambda matrices of a k = 1 code for the given scenario."""
    if code.k != 1:
        raise ValueError("block dynamics needs a code with k = 1")
    hblocks = _blocks(code.to_logical(drive_hamiltonian(config, code)), code)
    nb = code.n_syndromes + 1
    # h_m = (w_m . sigma)/2 + const  =>  w_m = Tr(sigma h_m)
    omegas = np.array([np.einsum("ajk,kj->a", PAULI_VECTOR, hblocks[m, m]).real for m in range(nb)])
    lambdas = [lambda_matrix(code.recovery_unitary(a)) for a in range(1, nb)]
    return BlockParameters(config.gamma, config.gamma_prime, omegas, lambdas)


def probability_rhs(p: np.ndarray, gamma: float, gamma_prime: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = p.shape[0] - 1
    idx = np.arange(n + 1)
    out = -(gamma * (idx != 0) + n * gamma_prime) * p
    for a in range(1, n + 1):
        out[0] += gamma * p[a]
        out += gamma_prime * p[idx ^ a]
    return out


def bloch_rhs(state: SyndromeBlockState, gamma: float, gamma_prime: float,
              omegas: np.ndarray, lambdas: list[np.ndarray]) -> SyndromeBlockState:
    """Time derivative of the block state (probabilities and Bloch vectors together)."""
    r = state.bloch
    n = state.n_syndromes
    if len(lambdas) != n:
        raise ValueError(f"need {n} Lambda matrices, got {len(lambdas)}")
    idx = np.arange(n + 1)
    damping = gamma * (idx != 0) + n * gamma_prime
    dr = np.cross(np.asarray(omegas, dtype=float), r) - damping[:, None] * r
    for a, lam in enumerate(lambdas, start=1):
        dr[0] += gamma * (lam.T @ r[a])
        dr += gamma_prime * (r[idx ^ a] @ lam.T)
    dp = probability_rhs(state.probabilities, gamma, gamma_prime)
    return SyndromeBlockState(dp, dr)


def reduced_free_rhs(r: np.ndarray, v: np.ndarray, gamma: float, gamma_prime: float):
    """Undriven phase-code dynamics of r = r_0 and v = sum_a Lambda_a r_a."""
    lam3 = np.diag([-1.0, -1.0, 1.0])
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    dr = -3 * gamma_prime * r + (gamma + gamma_prime) * v
    dv = -(gamma + 3 * gamma_prime) * v + 3 * gamma_prime * r + 2 * gamma_prime * (lam3 @ v)
    return dr, dv


@dataclass
class BlockTrajectory:
    times: np.ndarray
    probabilities: np.ndarray  # (T, N+1)
    bloch: np.ndarray  # (T, N+1, 3)

    def state(self, i: int) -> SyndromeBlockState:
        return SyndromeBlockState(self.probabilities[i], self.bloch[i])


def block_generator(params: BlockParameters) -> np.ndarray:
    size = 4 * (params.n_syndromes + 1)

    def rhs(vec):
        s = SyndromeBlockState.from_vector(vec)
        return bloch_rhs(s, params.gamma, params.gamma_prime, params.omegas, params.lambdas).as_vector()

    return linear_generator(rhs, size, dtype=float)


def integrate_blocks(state0: SyndromeBlockState, params: BlockParameters, t_max: float,
                     dt: float, record_every: int = 1) -> BlockTrajectory:
    n_steps = step_count(t_max, dt)

    def check(step, vec):
        problems = SyndromeBlockState.from_vector(vec).violations()
        if problems:
            raise IntegrationError("; ".join(problems), step)

    vecs = rk4_linear(block_generator(params), state0.as_vector(), dt, n_steps, record_every, check)
    table = vecs.reshape(vecs.shape[0], -1, 4)
    times = np.arange(vecs.shape[0]) * (record_every * dt)
    return BlockTrajectory(times, table[:, :, 0], table[:, :, 1:])


def corrected_bloch(state: SyndromeBlockState, lambdas: list[np.ndarray]) -> np.ndarray:
    """Bloch vector of the logical state after one recovery event, r_0 + sum_a Lambda_a^T r_a."""
    out = state.bloch[0].copy()
    for a, lam in enumerate(lambdas, start=1):
        out += lam.T @ state.bloch[a]
    return out


def fidelity_from_blocks(state: SyndromeBlockState, r_ideal, lambdas: list[np.ndarray]) -> float:
    """(sum p + r_ideal . (r_0 + sum_a Lambda_a^T r_a)) / 2."""
    r_ideal = np.asarray(r_ideal, dtype=float)
    return 0.5 * (state.probabilities.sum() + r_ideal @ corrected_bloch(state, lambdas))


def ideal_bloch(r0, omega_vec, t: float) -> np.ndarray:
    """r0 rotated by angle |w| t about w (evolution under h = w.sigma/2)."""
    r0 = np.asarray(r0, dtype=float)
    w = np.asarray(omega_vec, dtype=float)
    size = np.linalg.norm(w)
    if size == 0:
        return r0.copy()
    k = w / size
    theta = size * t
    return (r0 * np.cos(theta) + np.cross(k, r0) * np.sin(theta)
            + k * (k @ r0) * (1 - np.cos(theta)))
