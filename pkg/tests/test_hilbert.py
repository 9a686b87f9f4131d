import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabisim.errors import InvalidDimensionError, InvalidStateError, LayoutError, TruncationError
from rabisim.hilbert import (DensityMatrix, Operator, SpaceLayout, coherent_vector, displacement,
                             fock_ops, identity, ket_to_dm, partial_trace, partial_transpose,
                             qubit_ops, tensor, trace_norm, validate)


def rand_dm(dims, rng, rank=None):
    n = int(np.prod(dims))
    rank = rank or n
    X = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = X @ X.conj().T
    lay = SpaceLayout(tuple((f"f{i}", d) for i, d in enumerate(dims)))
    return DensityMatrix(lay, rho / np.trace(rho))


def test_fock_ops_small():
    a, num = fock_ops(2)
    assert np.array_equal(a.dense(), [[0, 1], [0, 0]])
    a, num = fock_ops(5)
    assert np.allclose(np.linalg.eigvalsh(num.dense()), [0, 1, 2, 3, 4])


def test_fock_ops_rejects_tiny():
    with pytest.raises(InvalidDimensionError):
        fock_ops(1)


@given(st.integers(2, 40))
def test_commutator_identity_except_top(n):
    a, _ = fock_ops(n)
    A = a.dense()
    comm = A @ A.conj().T - A.conj().T @ A
    expect = np.eye(n)
    expect[-1, -1] = 1 - n
    assert np.allclose(comm, expect)


def test_coherent_photon_number():
    v = coherent_vector(2.0, 30)
    n = np.arange(30)
    assert abs(np.sum(n * abs(v) ** 2) - 4.0) < 1e-6


def test_tensor_examples():
    I2 = identity(SpaceLayout.single("a", 2))
    I3 = identity(SpaceLayout.single("b", 3))
    assert np.array_equal(tensor([I2, I3]).dense(), np.eye(6))
    sz, _, _ = qubit_ops()
    D = Operator(SpaceLayout.single("c", 3), np.diag([0.0, 1, 2]))
    # basis (g, e): sigma_z = diag(-1, 1)
    assert np.array_equal(np.diag(tensor([sz, D]).dense()).real, [0, -1, -2, 0, 1, 2])


@given(st.integers(0, 2 ** 31))
def test_tensor_trace_and_associativity(seed):
    rng = np.random.default_rng(seed)
    # small integer entries keep every product exact
    ops = [Operator(SpaceLayout.single(l, 3), rng.integers(-5, 6, (3, 3)) + 1j * rng.integers(-5, 6, (3, 3)))
           for l in "abc"]
    A, B, C = ops
    assert np.trace(tensor([A, B]).dense()) == np.trace(A.dense()) * np.trace(B.dense())
    left = tensor([tensor([A, B]), C]).dense()
    right = tensor([A, tensor([B, C])]).dense()
    assert np.array_equal(left, right)


def test_partial_trace_product_and_bell():
    rng = np.random.default_rng(0)
    ra, rb = rand_dm([2], rng), rand_dm([3], rng)
    lay = SpaceLayout((("A", 2), ("B", 3)))
    rho = DensityMatrix(lay, np.kron(ra.data, rb.data))
    assert np.allclose(partial_trace(rho, "A").data, ra.data, atol=1e-14)
    assert np.allclose(partial_trace(rho, "B").data, rb.data, atol=1e-14)
    bell = ket_to_dm(SpaceLayout((("A", 2), ("B", 2))), [np.array([1, 0, 0, 1]) / math.sqrt(2)])
    for k in "AB":
        assert np.allclose(partial_trace(bell, k).data, np.eye(2) / 2)
    with pytest.raises(LayoutError):
        partial_trace(bell, "C")


@given(st.integers(0, 2 ** 31))
def test_partial_trace_schmidt(seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=6) + 1j * rng.normal(size=6)
    psi /= np.linalg.norm(psi)
    schmidt = np.linalg.svd(psi.reshape(2, 3), compute_uv=False) ** 2
    rho = ket_to_dm(SpaceLayout((("A", 2), ("B", 3))), [psi])
    ev = np.sort(np.linalg.eigvalsh(partial_trace(rho, "A").data))
    assert np.allclose(ev, np.sort(schmidt), atol=1e-12)


def test_partial_transpose_bell():
    bell = ket_to_dm(SpaceLayout((("A", 2), ("B", 2))), [np.array([1, 0, 0, 1]) / math.sqrt(2)])
    pt = partial_transpose(bell, "A")
    assert np.allclose(np.sort(np.linalg.eigvalsh(pt.dense())), [-0.5, 0.5, 0.5, 0.5])
    assert abs(trace_norm(pt.dense()) - 2.0) < 1e-12


@given(st.integers(0, 2 ** 31))
@settings(max_examples=30)
def test_partial_transpose_involution_and_ppt(seed):
    rng = np.random.default_rng(seed)
    lay = SpaceLayout((("A", 2), ("B", 3)))
    mix = np.zeros((6, 6), complex)
    for w in rng.dirichlet(np.ones(5)):
        mix += w * np.kron(rand_dm([2], rng).data, rand_dm([3], rng).data)
    rho = DensityMatrix(lay, mix)
    pt = partial_transpose(rho, "B")
    assert np.allclose(pt.dense(), pt.dense().conj().T)
    assert np.linalg.eigvalsh(pt.dense())[0] >= -1e-10
    back = partial_transpose(DensityMatrix(lay, pt.dense()), "B")
    assert np.allclose(back.dense(), mix)


def test_displacement_examples():
    assert np.allclose(displacement(0, 20).dense(), np.eye(20))
    col = displacement(1.0, 30).dense()[:, 0]
    exact = np.array([math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(30)])
    assert np.max(np.abs(col - exact)) < 1e-8
    prod = displacement(2.0, 40).dense() @ displacement(-2.0, 40).dense()
    k = 2 * 40 // 3
    assert np.allclose(prod[:k, :k], np.eye(k), atol=1e-6)


def test_displacement_truncation_guard():
    with pytest.raises(TruncationError):
        displacement(3.0, 20)
    displacement(3.0, 20, force=True)


@given(st.complex_numbers(max_magnitude=0.75), st.complex_numbers(max_magnitude=0.75))
@settings(max_examples=25)
def test_displacement_composition_phase(a, b):
    n = 40
    lhs = displacement(a, n, force=True).dense() @ displacement(b, n, force=True).dense()
    rhs = displacement(a + b, n, force=True).dense()
    phase = np.exp(1j * np.imag(a * np.conj(b)))
    k = 2 * n // 3
    assert np.max(np.abs(lhs[:k, :k] - phase * rhs[:k, :k])) < 1e-5


def test_validate_catches_bad_states():
    lay = SpaceLayout.single("q", 2)
    validate(DensityMatrix(lay, np.eye(2) / 2))
    with pytest.raises(InvalidStateError):
        validate(DensityMatrix(lay, np.eye(2)))
    with pytest.raises(InvalidStateError):
        validate(DensityMatrix(lay, np.array([[1.0, 0.1], [0.0, 0.0]])))
    with pytest.raises(InvalidStateError):
        validate(DensityMatrix(lay, np.diag([1.5, -0.5])))


def test_layout_invariants():
    lay = SpaceLayout((("a", 2), ("b", 5)))
    assert lay.total_dim == 10
    with pytest.raises(Exception):
        SpaceLayout((("a", 2), ("a", 3)))
