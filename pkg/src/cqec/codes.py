"""Non-degenerate stabilizer codes, their error actions and recovery operators.

The logical basis is the set of columns of the encoding unitary ``C``; column
``m * 2**k + l`` is the state |m, l>_L with syndrome ``m`` and logical label
``l``. A syndrome bit string (bit 1 leftmost, bit j set iff the operator
anticommutes with generator M_j) is identified with its binary value, so
adding syndromes is XOR on integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path

import numpy as np

from .errors import CodeStructureError, ConfigError, InvalidDensityMatrixError, SizeMismatchError
from .pauli import PauliOperator, commutes, dense_matrix, parse_pauli

UNITARY_TOL = 1e-12
BUILTIN_CODES = ("phase3",)


@dataclass(frozen=True)
class ErrorAction:
    """Logical-basis action of an error: E|m,l> = exp(i phases[m]) |m ^ index> (x) U|l>."""

    pattern: tuple[int, ...]
    logical_unitary: np.ndarray
    phases: np.ndarray

    @property
    def index(self) -> int:
        return pattern_index(self.pattern)


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    n: int
    k: int
    generators: tuple[PauliOperator, ...]
    logical_pointers: tuple[PauliOperator, ...]
    errors: tuple[PauliOperator, ...]
    logical_basis: np.ndarray = field(repr=False)
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "logical_pointers", tuple(self.logical_pointers))
        object.__setattr__(self, "errors", tuple(self.errors))
        basis = np.array(self.logical_basis, dtype=complex)
        basis.setflags(write=False)
        object.__setattr__(self, "logical_basis", basis)

    @property
    def n_syndromes(self) -> int:
        """Number of nontrivial syndromes, ``2**(n-k) - 1``."""
        return 2 ** (self.n - self.k) - 1

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def logical_dim(self) -> int:
        return 2**self.k

    @cached_property
    def error_actions(self) -> dict[int, ErrorAction]:
        """Error actions keyed by syndrome index (requires a non-degenerate code)."""
        actions = {}
        for e in self.errors:
            action = error_action(self, e)
            if action.index in actions or action.index == 0:
                raise CodeStructureError(f"error {e} does not have a unique nonzero syndrome")
            actions[action.index] = action
        return actions

    def recovery_unitary(self, m: int) -> np.ndarray:
        """U_m for syndrome ``m``; U_0 is the identity."""
        if m == 0:
            return np.eye(self.logical_dim, dtype=complex)
        try:
            return self.error_actions[m].logical_unitary
        except KeyError:
            raise CodeStructureError(f"no error produces syndrome {m}") from None

    @cached_property
    def recovery_operators(self) -> tuple[np.ndarray, ...]:
        return tuple(recovery_operator(self, m) for m in range(self.n_syndromes + 1))

    def to_logical(self, op: np.ndarray) -> np.ndarray:
        """Express a physical-basis matrix in the logical basis, C^dagger op C."""
        c = self.logical_basis
        return c.conj().T @ op @ c

    def to_physical(self, op: np.ndarray) -> np.ndarray:
        c = self.logical_basis
        return c @ op @ c.conj().T


def pattern_index(pattern) -> int:
    return int("".join(str(b) for b in pattern) or "0", 2)


def index_pattern(m: int, length: int) -> tuple[int, ...]:
    return tuple(int(b) for b in format(m, f"0{length}b"))


def syndrome_pattern(code: StabilizerCode, e: PauliOperator) -> tuple[int, ...]:
    """Bit j is 1 iff ``e`` anticommutes with generator M_j."""
    if e.n != code.n:
        raise SizeMismatchError(f"{e.n}-qubit operator for a {code.n}-qubit code")
    return tuple(0 if commutes(e, g) else 1 for g in code.generators)


def error_action(code: StabilizerCode, e: PauliOperator, tol: float = 1e-10) -> ErrorAction:
    """Read U_a and the syndrome phases off C^dagger E C.

    The phase convention is phi_{0a} = 0, so U_a is exactly the block taking
    syndrome 0 to syndrome c_a.
    """
    pattern = syndrome_pattern(code, e)
    shift = pattern_index(pattern)
    d = code.logical_dim
    n_blocks = code.n_syndromes + 1
    blocks = code.to_logical(dense_matrix(e)).reshape(n_blocks, d, n_blocks, d)
    blocks = blocks.transpose(0, 2, 1, 3)  # (row syndrome, column syndrome, d, d)

    expected = np.zeros((n_blocks, n_blocks), dtype=bool)
    expected[np.arange(n_blocks) ^ shift, np.arange(n_blocks)] = True
    stray = np.linalg.norm(blocks[~expected], axis=(-2, -1)) if (~expected).any() else np.zeros(1)
    if stray.max() > tol:
        raise CodeStructureError(
            f"{e} mixes syndromes beyond the shift {pattern} (stray norm {stray.max():.3e})")

    unitary = blocks[shift, 0].copy()
    if np.linalg.norm(unitary.conj().T @ unitary - np.eye(d)) > tol:
        raise CodeStructureError(f"{e} does not act unitarily on the logical space")
    phases = np.zeros(n_blocks)
    for m in range(n_blocks):
        block = blocks[m ^ shift, m]
        overlap = np.trace(unitary.conj().T @ block) / d
        if np.linalg.norm(block - overlap * unitary) > tol or abs(abs(overlap) - 1) > tol:
            raise CodeStructureError(f"{e} rotates the logical state differently in syndrome {m}")
        phases[m] = np.angle(overlap)
    unitary.setflags(write=False)
    return ErrorAction(pattern, unitary, phases)


def recovery_operator(code: StabilizerCode, m: int) -> np.ndarray:
    """Physical-basis matrix of R_m = |0><m| (x) U_m^dagger."""
    if not 0 <= m <= code.n_syndromes:
        raise ValueError(f"syndrome {m} outside 0..{code.n_syndromes}")
    n_blocks = code.n_syndromes + 1
    reset = np.zeros((n_blocks, n_blocks), dtype=complex)
    reset[0, m] = 1.0
    logical = np.kron(reset, code.recovery_unitary(m).conj().T)
    return code.to_physical(logical)


def check_density_matrix(rho: np.ndarray, dim: int | None = None, *, herm_tol: float = 1e-10,
                         trace_tol: float = 1e-10, psd_tol: float = 1e-8) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrixError(f"expected a square matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise InvalidDensityMatrixError(f"expected dimension {dim}, got {rho.shape[0]}")
    if np.linalg.norm(rho - rho.conj().T) > herm_tol:
        raise InvalidDensityMatrixError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise InvalidDensityMatrixError(f"trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(rho).min() < -psd_tol:
        raise InvalidDensityMatrixError("matrix has negative eigenvalues")
    return rho


def recovery_map(code: StabilizerCode, rho: np.ndarray) -> np.ndarray:
    """One detection-recovery event: sum_m R_m rho R_m^dagger."""
    rho = check_density_matrix(rho, code.dim)
    return sum(r @ rho @ r.conj().T for r in code.recovery_operators)


# -- validation --------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""


@dataclass
class ValidationReport:
    code: str
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "passed": self.passed,
            "checks": [vars(c) for c in self.checks],
        }

    def format(self) -> str:
        lines = [f"code {self.code}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            mark = "pass" if c.passed else "FAIL"
            extra = f"  {c.detail}" if c.detail else ""
            lines.append(f"  [{mark}] {c.name} (residual {c.residual:.3e}){extra}")
        return "\n".join(lines)


def _gf2_rank(rows: list[list[int]]) -> int:
    rows = [list(r) for r in rows]
    rank, cols = 0, len(rows[0]) if rows else 0
    for col in range(cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                rows[i] = [a ^ b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _pairwise_commute(ops_a, ops_b) -> list[str]:
    return [f"{p} ~ {q}" for p in ops_a for q in ops_b if not commutes(p, q)]


def verify_code(code: StabilizerCode) -> ValidationReport:
    """Run every structural check on ``code`` and collect the results."""
    checks: list[CheckResult] = []

    def run(name, fn):
        try:
            ok, residual, detail = fn()
        except Exception as exc:  # a broken check is a failed check
            ok, residual, detail = False, float("inf"), f"{type(exc).__name__}: {exc}"
        checks.append(CheckResult(name, bool(ok), float(residual), detail))

    def dimensions():
        problems = []
        if not 0 < code.k < code.n:
            problems.append(f"need 0 < k < n, got n={code.n}, k={code.k}")
        if len(code.generators) != code.n - code.k:
            problems.append(f"{len(code.generators)} generators, expected {code.n - code.k}")
        if len(code.logical_pointers) != code.k:
            problems.append(f"{len(code.logical_pointers)} logical pointers, expected {code.k}")
        if len(code.errors) != code.n_syndromes:
            problems.append(f"{len(code.errors)} errors, expected {code.n_syndromes}")
        ops = code.generators + code.logical_pointers + code.errors
        if any(p.n != code.n for p in ops):
            problems.append("operator length differs from n")
        if code.logical_basis.shape != (code.dim, code.dim):
            problems.append(f"logical basis has shape {code.logical_basis.shape}")
        return not problems, float(len(problems)), "; ".join(problems)

    def hermitian():
        bad = [str(p) for p in code.generators + code.logical_pointers + code.errors
               if not p.is_hermitian]
        return not bad, float(len(bad)), ", ".join(bad)

    def generators_commute():
        bad = _pairwise_commute(code.generators, code.generators)
        return not bad, float(len(bad)), ", ".join(bad)

    def pointers_commute():
        bad = _pairwise_commute(code.logical_pointers, code.generators + code.logical_pointers)
        return not bad, float(len(bad)), ", ".join(bad)

    def independent():
        rows = [list(g.x_bits + g.z_bits) for g in code.generators + code.logical_pointers]
        rank = _gf2_rank(rows)
        return rank == len(rows), float(len(rows) - rank), f"GF(2) rank {rank} of {len(rows)}"

    def unitary():
        c = code.logical_basis
        res = np.linalg.norm(c.conj().T @ c - np.eye(code.dim))
        return res <= UNITARY_TOL, res, ""

    def labeling():
        worst = 0.0
        ops = code.generators + code.logical_pointers
        for j, op in enumerate(ops, start=1):
            target = dense_matrix(PauliOperator.single(code.n, "Z", j))
            worst = max(worst, np.linalg.norm(code.to_logical(dense_matrix(op)) - target))
        return worst <= UNITARY_TOL, worst, "C^dagger M_j C = Z_j and C^dagger L C = Z_(n-k+j)"

    def non_degenerate():
        patterns = [syndrome_pattern(code, e) for e in code.errors]
        indices = sorted(pattern_index(p) for p in patterns)
        ok = indices == list(range(1, code.n_syndromes + 1))
        return ok, float(len(indices) - len(set(indices))), f"patterns {patterns}"

    def actions():
        worst = 0.0
        for e in code.errors:
            act = error_action(code, e)
            phys = dense_matrix(e)
            for m in range(code.n_syndromes + 1):
                for l in range(code.logical_dim):
                    ket = code.logical_basis[:, m * code.logical_dim + l]
                    shifted = m ^ act.index
                    target_block = code.logical_basis[
                        :, shifted * code.logical_dim:(shifted + 1) * code.logical_dim]
                    expected = np.exp(1j * act.phases[m]) * target_block @ act.logical_unitary[:, l]
                    worst = max(worst, np.linalg.norm(phys @ ket - expected))
        return worst <= UNITARY_TOL, worst, ""

    def recovery_complete():
        total = sum(r.conj().T @ r for r in code.recovery_operators)
        res = np.linalg.norm(total - np.eye(code.dim))
        return res <= UNITARY_TOL, res, "sum_m R_m^dagger R_m = I"

    run("dimensions", dimensions)
    run("operators hermitian", hermitian)
    run("generators commute", generators_commute)
    run("logical pointers commute with stabilizer", pointers_commute)
    run("generators independent", independent)
    run("logical basis unitary", unitary)
    run("logical labeling", labeling)
    run("non-degenerate error set", non_degenerate)
    run("error actions", actions)
    run("recovery completeness", recovery_complete)
    return ValidationReport(code.name, checks)


# -- built-in code and code files ----------------------------------------------


def _gate_on(n: int, gate: np.ndarray, qubit: int) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    return reduce(np.kron, [gate if j == qubit else eye for j in range(1, n + 1)])


def cnot(n: int, control: int, target: int) -> np.ndarray:
    """CNOT on 1-based qubits; qubit 1 is the most significant index bit."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - j)) & 1 for j in range(1, n + 1)]
        if bits[control - 1]:
            bits[target - 1] ^= 1
        row = int("".join(map(str, bits)), 2)
        out[row, col] = 1.0
    return out


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def three_qubit_phase_code() -> StabilizerCode:
    """The [[3,1]] code against single phase flips, M = (X1X3, X2X3), L = Z1Z2Z3.

    The decoder applies Hadamards to all qubits, CNOTs from qubit 3 onto
    qubits 1 and 2, and a final Hadamard on qubit 3. The encoder C is that
    circuit run backwards.
    """
    n = 3
    h_all = reduce(np.kron, [_HADAMARD] * n)
    encoder = h_all @ cnot(n, 3, 1) @ cnot(n, 3, 2) @ _gate_on(n, _HADAMARD, 3)
    p = lambda s: parse_pauli(s, n)  # noqa: E731
    return StabilizerCode(
        n=3,
        k=1,
        generators=(p("XIX"), p("IXX")),
        logical_pointers=(p("ZZZ"),),
        errors=(p("ZII"), p("IZI"), p("IIZ")),
        logical_basis=np.round(encoder.real, 15) + 0j,
        name="phase3",
    )


def code_from_dict(data: dict, name: str = "custom") -> StabilizerCode:
    """Build a code from the parsed contents of a code definition file."""
    try:
        n, k = int(data["n"]), int(data["k"])
        gens = [parse_pauli(s, n) for s in data["generators"]]
        pointers = [parse_pauli(s, n) for s in data["logical_pointers"]]
        errors = [parse_pauli(s, n) for s in data["errors"]]
    except KeyError as exc:
        raise ConfigError("missing required key", str(exc.args[0])) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    basis = data.get("logical_basis")
    if basis is None:
        raise ConfigError("user-supplied codes must give the encoding unitary", "logical_basis")
    real = np.asarray(basis.get("real"), dtype=float)
    imag = np.asarray(basis.get("imag", np.zeros_like(real)), dtype=float)
    if real.shape != imag.shape:
        raise ConfigError("real and imag parts differ in shape", "logical_basis")
    return StabilizerCode(n, k, tuple(gens), tuple(pointers), tuple(errors),
                          real + 1j * imag, name=str(data.get("name", name)))


def load_code(spec: str) -> StabilizerCode:
    """Resolve a built-in code name or a TOML code definition file."""
    if spec == "phase3":
        return three_qubit_phase_code()
    from .config import read_toml

    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"unknown code {spec!r} (built-ins: {', '.join(BUILTIN_CODES)})", "code")
    return code_from_dict(read_toml(path), name=path.stem)
