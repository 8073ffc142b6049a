import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqec.errors import PauliParseError, ResourceLimitError
from cqec.pauli import (PauliOperator, commutes, dense_matrix, format_pauli, multiply, parse_pauli,
                        symplectic_product)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def all_paulis(n):
    for letters in itertools.product("IXYZ", repeat=n):
        for phase in range(4):
            yield PauliOperator.from_string("".join(letters)) * PauliOperator(
                (0,) * n, (0,) * n, phase)


def paulis(n):
    bits = st.lists(st.integers(0, 1), min_size=n, max_size=n).map(tuple)
    return st.builds(PauliOperator, bits, bits, st.integers(0, 3))


def test_x_times_z_is_minus_i_y():
    p = multiply(parse_pauli("X", 1), parse_pauli("Z", 1))
    assert p == parse_pauli("-iY", 1)
    assert np.allclose(dense_matrix(p), [[0, -1], [1, 0]])


def test_identity_is_neutral():
    for p in all_paulis(2):
        assert multiply(PauliOperator.identity(2), p) == p
        assert multiply(p, PauliOperator.identity(2)) == p


def test_x1x3_times_x2x3():
    p = multiply(parse_pauli("XIX", 3), parse_pauli("IXX", 3))
    assert p == parse_pauli("XXI", 3)
    assert p.phase == 0
    assert np.allclose(dense_matrix(parse_pauli("XIX", 3)) @ dense_matrix(parse_pauli("IXX", 3)),
                       dense_matrix(p))


def test_multiplication_matches_dense_exhaustively_n2():
    ops = list(all_paulis(2))
    for p in ops:
        for q in ops:
            assert np.allclose(dense_matrix(p * q), dense_matrix(p) @ dense_matrix(q))


def test_commutation_matches_dense_exhaustively_n2():
    ops = [p for p in all_paulis(2) if p.phase == 0]
    for p in ops:
        for q in ops:
            a, b = dense_matrix(p), dense_matrix(q)
            assert commutes(p, q) == np.allclose(a @ b, b @ a)
            assert symplectic_product(p, q) == (0 if commutes(p, q) else 1)


def test_commutation_examples():
    z1, z3 = parse_pauli("ZII", 3), parse_pauli("IIZ", 3)
    x1x3, x2x3 = parse_pauli("XIX", 3), parse_pauli("IXX", 3)
    assert not commutes(z3, x1x3)
    assert not commutes(z3, x2x3)
    assert commutes(z1, x2x3)
    assert not commutes(z1, x1x3)


def test_dense_examples():
    assert np.allclose(dense_matrix(parse_pauli("Z", 1)), np.diag([1, -1]))
    flip = dense_matrix(parse_pauli("XIX", 3))
    perm = np.zeros((8, 8))
    for b in range(8):
        perm[b ^ 0b101, b] = 1  # qubit 1 is the most significant bit
    assert np.array_equal(flip, perm)


def test_dense_realization_convention():
    # i^q times the product of X^x Z^z factors, up to the Y = iXZ bookkeeping
    for xs in itertools.product((0, 1), repeat=3):
        for zs in itertools.product((0, 1), repeat=3):
            p = PauliOperator(xs, zs, 0)
            mats = [np.linalg.matrix_power(X, x) @ np.linalg.matrix_power(Z, z) for x, z in zip(xs, zs)]
            ref = (1j) ** sum(x & z for x, z in zip(xs, zs)) * np.kron(np.kron(mats[0], mats[1]), mats[2])
            assert np.allclose(dense_matrix(p), ref)


def test_hermitian_iff_even_phase():
    for p in all_paulis(2):
        m = dense_matrix(p)
        assert p.is_hermitian == np.allclose(m, m.conj().T)


def test_parse_examples():
    p = parse_pauli("XIX", 3)
    assert p.x_bits == (1, 0, 1) and p.z_bits == (0, 0, 0) and p.phase == 0
    q = parse_pauli("-iY", 1)
    assert (q.phase, q.x_bits, q.z_bits) == (3, (1,), (1,))


@pytest.mark.parametrize("text,n", [("ZZZZ", 3), ("XQX", 3), ("", 1), ("--X", 1), ("iiX", 1)])
def test_parse_errors(text, n):
    with pytest.raises(PauliParseError):
        parse_pauli(text, n)


def test_parse_error_reports_position():
    with pytest.raises(PauliParseError) as info:
        parse_pauli("XQX", 3)
    assert info.value.position == 1


def test_dense_matrix_resource_limit():
    with pytest.raises(ResourceLimitError):
        dense_matrix(PauliOperator.identity(13))


def test_multiply_size_mismatch():
    with pytest.raises(ValueError):
        multiply(PauliOperator.identity(2), PauliOperator.identity(3))


@settings(max_examples=200, deadline=None)
@given(paulis(3), paulis(3))
def test_round_trip_and_dense_product(p, q):
    assert parse_pauli(format_pauli(p), 3) == p
    assert np.allclose(dense_matrix(p * q), dense_matrix(p) @ dense_matrix(q))


@settings(max_examples=100, deadline=None)
@given(paulis(3), paulis(3), paulis(3))
def test_associative(p, q, r):
    assert (p * q) * r == p * (q * r)


def test_random_products_n8(rng):
    for _ in range(20):
        p = PauliOperator(tuple(rng.integers(0, 2, 8)), tuple(rng.integers(0, 2, 8)), int(rng.integers(4)))
        q = PauliOperator(tuple(rng.integers(0, 2, 8)), tuple(rng.integers(0, 2, 8)), int(rng.integers(4)))
        a, b = dense_matrix(p), dense_matrix(q)
        assert np.allclose(dense_matrix(p * q), a @ b)
        assert commutes(p, q) == np.allclose(a @ b, b @ a)
