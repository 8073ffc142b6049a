import numpy as np
import pytest

from cqec.codes import (StabilizerCode, code_from_dict, error_action, load_code, recovery_map,
                        recovery_operator, syndrome_pattern, verify_code)
from cqec.errors import CodeStructureError, ConfigError, InvalidDensityMatrixError
from cqec.pauli import dense_matrix, parse_pauli


I2 = np.eye(2)
Z = np.diag([1.0, -1.0])


def p(text):
    return parse_pauli(text, 3)


def code_state(code, rng):
    """Random pure state in the code space (syndrome 0)."""
    amp = rng.normal(size=2) + 1j * rng.normal(size=2)
    amp /= np.linalg.norm(amp)
    logical = np.zeros(code.dim, dtype=complex)
    logical[:2] = amp
    return code.logical_basis @ logical


def test_verify_phase3_passes(phase3):
    report = verify_code(phase3)
    assert report.passed, report.format()
    assert report.failed() == []


def test_encoder_unitary_and_labeling(phase3):
    c = phase3.logical_basis
    assert np.allclose(c.conj().T @ c, np.eye(8), atol=1e-12)
    z = [dense_matrix(p(s)) for s in ("ZII", "IZI", "IIZ")]
    for j, gen in enumerate(phase3.generators):
        assert np.allclose(c.conj().T @ dense_matrix(gen) @ c, z[j], atol=1e-12)
    assert np.allclose(c.conj().T @ dense_matrix(phase3.logical_pointers[0]) @ c, z[2], atol=1e-12)


def test_syndrome_patterns(phase3):
    assert syndrome_pattern(phase3, p("IIZ")) == (1, 1)
    assert syndrome_pattern(phase3, p("III")) == (0, 0)
    assert syndrome_pattern(phase3, p("ZII")) == (1, 0)
    assert syndrome_pattern(phase3, p("IZI")) == (0, 1)


def test_error_actions(phase3):
    a1, a2, a3 = (error_action(phase3, e) for e in phase3.errors)
    assert np.allclose(a1.logical_unitary, I2) and np.allclose(a2.logical_unitary, I2)
    assert np.allclose(a3.logical_unitary, Z)
    assert a3.pattern == (1, 1)
    for act in (a1, a2, a3):
        assert np.allclose(act.phases, 0)


def test_stabilizer_and_pointer_actions(phase3):
    for j, gen in enumerate(phase3.generators):
        act = error_action(phase3, gen)
        assert act.pattern == (0, 0)
        assert np.allclose(act.logical_unitary, I2)
        # +1 on the code space, -1 on every syndrome whose bit j is set
        bits = np.array([(m >> (1 - j)) & 1 for m in range(4)])
        assert np.allclose(np.exp(1j * act.phases), (-1.0) ** bits)
    act = error_action(phase3, phase3.logical_pointers[0])
    assert act.pattern == (0, 0)
    assert np.allclose(act.logical_unitary, Z)


def test_e3_on_logical_basis(phase3):
    e3 = dense_matrix(p("IIZ"))
    c = phase3.logical_basis
    for m in range(4):
        for l in range(2):
            ket = c[:, 2 * m + l]
            target = c[:, 2 * (m ^ 3) + l] * (-1) ** l
            assert np.allclose(e3 @ ket, target, atol=1e-12)


def test_error_action_eq1_reproduced(phase3):
    c = phase3.logical_basis
    for e in phase3.errors:
        act = error_action(phase3, e)
        mat = dense_matrix(e)
        for m in range(4):
            for l in range(2):
                out = mat @ c[:, 2 * m + l]
                ref = np.exp(1j * act.phases[m]) * np.kron(np.eye(4)[m ^ act.index],
                                                            act.logical_unitary[:, l])
                assert np.allclose(out, c @ ref, atol=1e-12)


def test_recovery_completeness(phase3):
    total = sum(r.conj().T @ r for r in phase3.recovery_operators)
    assert np.abs(total - np.eye(8)).max() <= 1e-12


def test_recovery_undoes_single_errors(phase3, rng):
    r0 = recovery_operator(phase3, 0)
    r3 = recovery_operator(phase3, 3)
    for _ in range(5):
        psi = code_state(phase3, rng)
        assert np.allclose(r0 @ psi, psi, atol=1e-12)
        assert np.allclose(r3 @ dense_matrix(p("IIZ")) @ psi, psi, atol=1e-12)


def test_recovery_map_properties(phase3, rng):
    for _ in range(20):
        psi = code_state(phase3, rng)
        rho0 = np.outer(psi, psi.conj())
        assert np.allclose(recovery_map(phase3, rho0), rho0, atol=1e-12)
        for e in phase3.errors:
            m = dense_matrix(e)
            out = recovery_map(phase3, m @ rho0 @ m.conj().T)
            assert np.abs(out - rho0).max() <= 1e-10
    mixed = np.diag(rng.dirichlet(np.ones(8))).astype(complex)
    assert np.isclose(np.trace(recovery_map(phase3, mixed)), 1.0)


def test_recovery_map_rejects_bad_input(phase3):
    with pytest.raises(InvalidDensityMatrixError):
        recovery_map(phase3, np.eye(8))
    with pytest.raises(InvalidDensityMatrixError):
        recovery_map(phase3, np.eye(4) / 4)


def _variant(phase3, **changes):
    fields = dict(n=3, k=1, generators=phase3.generators, logical_pointers=phase3.logical_pointers,
                  errors=phase3.errors, logical_basis=phase3.logical_basis, name="variant")
    fields.update(changes)
    return StabilizerCode(**fields)


def test_verify_flags_anticommuting_generators(phase3):
    report = verify_code(_variant(phase3, generators=(p("XII"), p("ZII"))))
    assert not report.passed
    assert "generators commute" in report.failed()


def test_verify_flags_degenerate_errors(phase3):
    report = verify_code(_variant(phase3, errors=(p("ZII"), p("ZII"), p("IIZ"))))
    assert "non-degenerate error set" in report.failed()


def test_verify_flags_non_unitary_basis(phase3):
    basis = np.array(phase3.logical_basis)
    basis[:, 0] *= 2
    assert "logical basis unitary" in verify_code(_variant(phase3, logical_basis=basis)).failed()


def test_error_action_rejects_syndrome_mixing(phase3):
    # Rotating code states into syndrome 1 breaks the block structure of every error
    mix = np.eye(8, dtype=complex)
    mix[np.ix_([0, 2], [0, 2])] = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    bad = _variant(phase3, logical_basis=phase3.logical_basis @ mix)
    with pytest.raises(CodeStructureError):
        error_action(bad, p("IIZ"))
    assert not verify_code(bad).passed


def test_code_from_dict_round_trip(phase3):
    data = {
        "n": 3, "k": 1, "generators": ["XIX", "IXX"], "logical_pointers": ["ZZZ"],
        "errors": ["ZII", "IZI", "IIZ"],
        "logical_basis": {"real": phase3.logical_basis.real.tolist()},
    }
    code = code_from_dict(data)
    assert verify_code(code).passed
    assert np.allclose(code.recovery_operators[3], phase3.recovery_operators[3])
    with pytest.raises(ConfigError):
        code_from_dict({k: v for k, v in data.items() if k != "logical_basis"})
    with pytest.raises(ConfigError):
        code_from_dict({k: v for k, v in data.items() if k != "generators"})


def test_load_code_unknown():
    with pytest.raises(ConfigError):
        load_code("no-such-code")
    assert load_code("phase3").name == "phase3"
