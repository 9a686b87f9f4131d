import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabisim.errors import LayoutError, UndefinedCorrelationError
from rabisim.hilbert import DensityMatrix, SpaceLayout, coherent_vector, ket_to_dm
from rabisim.observables import (WignerGrid, best_cat_fidelity, cat_fidelity, cat_state, g2_zero,
                                 log_negativity, min_eigenvalue, parity_expectation,
                                 parity_operator, survival_probability, wigner)

N = 40
CAV = SpaceLayout.single("cavity", N)
QC = SpaceLayout((("qubit", 2), ("cavity", N)))


def cav_dm(vec):
    vec = np.asarray(vec, complex)
    return ket_to_dm(SpaceLayout.single("cavity", len(vec)), [vec])


def fock(n, size=N):
    v = np.zeros(size)
    v[n] = 1
    return v


def test_g2_reference_states():
    assert g2_zero(cav_dm(coherent_vector(1.5, N, normalize=True))) == pytest.approx(1, abs=1e-10)
    for n in (1, 2, 5):
        assert g2_zero(cav_dm(fock(n))) == pytest.approx(1 - 1 / n, abs=1e-12)
    nbar = 0.7
    p = (nbar / (1 + nbar)) ** np.arange(N) / (1 + nbar)
    thermal = DensityMatrix(CAV, np.diag(p / p.sum()))
    assert g2_zero(thermal) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(UndefinedCorrelationError):
        g2_zero(cav_dm(fock(0)))


def test_g2_from_joint_state():
    psi = np.kron([1, 0], fock(3))
    assert g2_zero(ket_to_dm(QC, [psi])) == pytest.approx(2 / 3)


def test_parity_operator_signs():
    P = parity_operator(QC).dense()
    d = np.diag(P).real
    # g block: -sigma_z = +1, so (-1)^n ; e block: -(-1)^n
    assert np.array_equal(d[:N], (-1.0) ** np.arange(N))
    assert np.array_equal(d[N:], -(-1.0) ** np.arange(N))


def test_log_negativity():
    bell = ket_to_dm(SpaceLayout((("A", 2), ("B", 2))), [np.array([1, 0, 0, 1]) / math.sqrt(2)])
    assert log_negativity(bell, "A") == pytest.approx(1.0, abs=1e-12)
    prod = ket_to_dm(SpaceLayout((("A", 2), ("B", 2))), [np.kron([0.6, 0.8], [1, 0])])
    assert abs(log_negativity(prod, "B")) < 1e-12


@given(st.floats(0.2, 3.0), st.floats(0, 2 * math.pi))
@settings(max_examples=20, deadline=None)
def test_cat_state_properties(r, phi):
    alpha = r * np.exp(1j * phi)
    psi = cat_state(alpha, N)
    assert np.linalg.norm(psi) == pytest.approx(1, abs=1e-12)
    rho = ket_to_dm(QC, [psi])
    assert parity_expectation(rho) == pytest.approx(-1, abs=1e-10)
    assert cat_fidelity(rho, alpha) == pytest.approx(1, abs=1e-10)
    assert survival_probability(rho, psi) == pytest.approx(1, abs=1e-12)


def test_best_cat_fidelity_recovers_amplitude():
    alpha = 2.0 * np.exp(0.3j)
    rho = ket_to_dm(QC, [cat_state(alpha, N)])
    f, al = best_cat_fidelity(rho)
    assert f == pytest.approx(1, abs=1e-8)
    assert min(abs(al - alpha), abs(al + alpha)) < 1e-8


def test_cat_fidelity_layout():
    with pytest.raises(LayoutError):
        cat_fidelity(cav_dm(fock(0)), 1.0)


def test_wigner_reference_states():
    x = np.linspace(-3, 3, 31)
    W0 = wigner(cav_dm(fock(0, 12)), x, x)
    assert W0.values[15, 15] == pytest.approx(2 / math.pi, abs=1e-10)
    X, Y = np.meshgrid(x, x)
    assert np.allclose(W0.values, 2 / math.pi * np.exp(-(X ** 2 + Y ** 2)), atol=1e-9)
    W1 = wigner(cav_dm(fock(1, 12)), x, x)
    assert W1.values[15, 15] == pytest.approx(-2 / math.pi, abs=1e-10)
    assert W1.integral() == pytest.approx(1, abs=0.01)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
@settings(max_examples=10, deadline=None)
def test_wigner_coherent_gaussian(re, im):
    alpha = complex(re, im)
    x = np.linspace(-5, 5, 21)
    W = wigner(cav_dm(coherent_vector(alpha, 30, normalize=True)), x, x)
    X, Y = np.meshgrid(x, x)
    # W is centred at x + i y = sqrt(2) alpha
    c = math.sqrt(2) * alpha
    exact = 2 / math.pi * np.exp(-((X - c.real) ** 2 + (Y - c.imag) ** 2))
    assert np.max(np.abs(W.values - exact)) < 1e-7


def test_wigner_maxima_of_two_coherent_peaks():
    v = coherent_vector(2.0, N, True) + coherent_vector(-2.0, N, True)
    rho = 0.5 * (np.outer(coherent_vector(2.0, N, True), coherent_vector(2.0, N, True).conj())
                 + np.outer(coherent_vector(-2.0, N, True), coherent_vector(-2.0, N, True).conj()))
    W = wigner(DensityMatrix(CAV, rho), np.linspace(-5, 5, 51), np.linspace(-5, 5, 51))
    peaks = W.local_maxima(0.1)
    assert len(peaks) == 2
    assert sorted(round(p[0], 1) for p in peaks) == [-2.8, 2.8]
    assert np.linalg.norm(v) > 0


def test_wigner_rejects_joint_state():
    with pytest.raises(LayoutError):
        wigner(ket_to_dm(QC, [np.kron([1, 0], fock(0))]))


def test_min_eigenvalue():
    assert min_eigenvalue(DensityMatrix(CAV, np.diag(fock(3)))) == pytest.approx(0)
