import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tristab.oracle import omega, pauli_matrix
from tristab.pauli import (
    PauliOp,
    commutation_phase,
    multiply,
    order,
    power,
    render,
    restricted_commutation_phase,
)

from conftest import pauli


@st.composite
def pauli_ops(draw, d=None, n=None):
    d = d or draw(st.sampled_from([2, 3, 4, 5, 6, 8, 9]))
    n = n or draw(st.integers(1, 2))
    x = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
    z = draw(st.lists(st.integers(0, d - 1), min_size=n, max_size=n))
    g2 = draw(st.integers(0, 2 * d - 1))
    if d % 2:
        g2 -= g2 % 2
    return PauliOp(d, tuple(x), tuple(z), g2)


@st.composite
def same_space(draw, count):
    d = draw(st.sampled_from([2, 3, 4, 5, 8, 9]))
    n = draw(st.integers(1, 2))
    return [draw(pauli_ops(d, n)) for _ in range(count)]


def test_zx_is_omega_xz_at_d4():
    Z, X = pauli(4, [0], [1]), pauli(4, [1], [0])
    prod = multiply(Z, X)
    assert (prod.x, prod.z, prod.gamma2) == ((1,), (1,), 2)
    Zm, Xm = pauli_matrix(Z), pauli_matrix(X)
    assert np.allclose(Zm @ Xm, omega(4) * Xm @ Zm)
    assert np.allclose(pauli_matrix(prod), Zm @ Xm)


def test_identity_is_neutral():
    a = pauli(9, [2, 3], [4, 5], 6)
    assert a * PauliOp.identity(9, 2) == a


def test_x_squared_d3():
    X = pauli(3, [1], [0])
    assert multiply(X, X) == pauli(3, [2], [0])


def test_commutation_examples():
    assert commutation_phase(pauli(4, [1], [0]), pauli(4, [0], [1])) == 3
    a = pauli(9, [1, 1, 1], [0, 0, 0])
    assert commutation_phase(a, a) == 0
    assert commutation_phase(a, pauli(9, [0, 0, 0], [1, 8, 0])) == 0


def test_restricted_examples():
    a = pauli(9, [1, 1, 1], [0, 0, 0])
    b = pauli(9, [0, 0, 0], [1, 8, 0])
    assert restricted_commutation_phase(a, b, [0]) == 1
    assert restricted_commutation_phase(a, b, []) == 0
    c = pauli(3, [0, 0, 0], [0, 1, 2])
    assert restricted_commutation_phase(pauli(3, [1, 1, 1], [0, 0, 0]), c, [1]) == 1


def test_odd_dimension_rejects_half_phase():
    with pytest.raises(ValueError):
        PauliOp(3, (1,), (0,), 1)


def test_mismatched_dimensions():
    with pytest.raises(ValueError):
        multiply(pauli(3, [1], [0]), pauli(9, [1], [0]))


def test_render():
    assert render(pauli(2, [1, 0], [0, 1], 1)) == "w^1/2 X0 Z1"
    assert render(pauli(9, [0, 0], [3, 0], 4)) == "w^2 Z0^3"
    assert render(PauliOp.identity(3, 2)) == "I"


@settings(max_examples=150, deadline=None)
@given(same_space(3))
def test_associative(ops):
    a, b, c = ops
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


@settings(max_examples=150, deadline=None)
@given(same_space(2))
def test_commutation_antisymmetric(ops):
    a, b = ops
    assert (commutation_phase(a, b) + commutation_phase(b, a)) % a.d == 0


@settings(max_examples=150, deadline=None)
@given(same_space(2), st.integers(0, 2**20))
def test_partition_sum(ops, salt):
    a, b = ops
    n = a.n_qudits
    rng = np.random.default_rng(salt)
    assign = rng.integers(0, 3, size=n)
    total = sum(restricted_commutation_phase(a, b, [q for q in range(n) if assign[q] == k]) for k in range(3))
    # a^T Omega b summed over parties equals the full form, i.e. the phase of b past a.
    assert total % a.d == commutation_phase(b, a)


@settings(max_examples=150, deadline=None)
@given(same_space(2))
def test_matrix_realization(ops):
    a, b = ops
    A, B = pauli_matrix(a), pauli_matrix(b)
    assert np.allclose(pauli_matrix(multiply(a, b)), A @ B, atol=1e-12)
    c = commutation_phase(a, b)
    assert np.allclose(A @ B, omega(a.d) ** c * B @ A, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(pauli_ops())
def test_power_and_order(a):
    A = pauli_matrix(a)
    k = order(a)
    assert np.allclose(np.linalg.matrix_power(A, k), np.eye(A.shape[0]), atol=1e-9)
    assert power(a, k) == PauliOp.identity(a.d, a.n_qudits)
    assert np.allclose(pauli_matrix(power(a, 3)), np.linalg.matrix_power(A, 3), atol=1e-9)
