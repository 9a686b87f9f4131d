"""Scalar and phase-space observables of qubit-cavity states.

Wigner functions use alpha = (x + i y)/sqrt(2), so the phase-space measure
is d^2 alpha = dx dy / 2 and a normalized state integrates to 1 only with
that factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import LayoutError, TruncationWarning, UndefinedCorrelationError
from .hilbert import (
    DensityMatrix,
    Operator,
    SpaceLayout,
    coherent_vector,
    displacement,
    eigvalsh,
    partial_trace,
    partial_transpose,
    trace_norm,
)


def expect(rho: DensityMatrix, op) -> float:
    """Re tr(op rho)."""
    return rho.expect(op)


def survival_probability(rho: DensityMatrix, psi0) -> float:
    """<psi0| rho |psi0> for a normalized ket ``psi0``."""
    psi0 = np.asarray(psi0, dtype=complex).ravel()
    if psi0.shape[0] != rho.layout.total_dim:
        raise LayoutError(f"ket of size {psi0.shape[0]} does not match {rho.layout}")
    psi0 = psi0 / np.linalg.norm(psi0)
    return float(np.real(np.vdot(psi0, rho.data @ psi0)))


def _cavity_marginal(rho: DensityMatrix, label: str = "cavity") -> np.ndarray:
    if len(rho.layout.factors) == 1:
        if rho.layout.labels[0] != label:
            raise LayoutError(f"no factor {label!r} in layout {rho.layout.labels}")
        return np.real(np.diag(rho.data))
    return np.real(np.diag(partial_trace(rho, label).data))


def g2_zero(rho: DensityMatrix, label: str = "cavity") -> float:
    """<a^dag a^dag a a> / <a^dag a>^2 from the photon-number distribution."""
    p = _cavity_marginal(rho, label)
    n = np.arange(len(p))
    mean = float(np.dot(n, p))
    if mean <= 1e-9:
        raise UndefinedCorrelationError(f"<a^dag a> = {mean:.3g} is too small for g2(0)")
    return float(np.dot(n * (n - 1), p)) / mean ** 2


def parity_operator(layout: SpaceLayout, qubit: str = "qubit", cavity: str = "cavity") -> Operator:
    """Pi = -sigma_z (-1)^(a^dag a) on a qubit (|g>, |e>) x Fock layout."""
    if set(layout.labels) != {qubit, cavity}:
        raise LayoutError(f"parity needs a {qubit!r} x {cavity!r} layout, got {layout.labels}")
    sz = np.array([-1.0, 1.0])
    fock = (-1.0) ** np.arange(layout.dim(cavity))
    diag = np.kron(sz, fock) if layout.labels[0] == qubit else np.kron(fock, sz)
    return Operator(layout, sp.diags(-diag).toarray() if layout.total_dim <= 512 else sp.diags(-diag),
                    hermitian=True)


def parity_expectation(rho: DensityMatrix) -> float:
    return rho.expect(parity_operator(rho.layout))


def log_negativity(rho: DensityMatrix, part: str) -> float:
    """log2 of the trace norm of the partial transpose with respect to ``part``."""
    if len(rho.layout.factors) != 2:
        raise LayoutError("log_negativity needs a bipartite layout")
    return max(0.0, math.log2(trace_norm(partial_transpose(rho, part).data)))


def cat_state(alpha: complex, n_max: int) -> np.ndarray:
    """{|e>(|a> + |-a>) - |g>(|a> - |-a>)}/2 on qubit (|g>, |e>) x Fock(n_max), renormalized."""
    plus = coherent_vector(alpha, n_max)
    minus = coherent_vector(-alpha, n_max)
    psi = np.concatenate([-(plus - minus), plus + minus]) / 2.0
    return psi / np.linalg.norm(psi)


def cat_fidelity(rho: DensityMatrix, alpha: complex) -> float:
    if rho.layout.labels != ("qubit", "cavity"):
        raise LayoutError(f"cat_fidelity needs a qubit x cavity layout, got {rho.layout.labels}")
    psi = cat_state(alpha, rho.layout.dim("cavity"))
    return float(np.real(np.vdot(psi, rho.data @ psi)))


def best_cat_fidelity(rho: DensityMatrix, radii=None) -> tuple[float, complex]:
    """Maximize cat_fidelity over a radial grid at the state's own phase.

    The phase comes from <a> when it is resolvable, else from <a^2>/2; the
    four quarter-turn branches of that phase are all tried.
    """
    radii = np.linspace(0.0, 4.0, 41) if radii is None else np.asarray(radii)
    n = rho.layout.dim("cavity")
    a = np.diag(np.sqrt(np.arange(1, n)), 1)
    red = partial_trace(rho, "cavity").data
    mean_a = np.trace(a @ red)
    if abs(mean_a) > 1e-8:
        phases = [np.angle(mean_a)]
    else:
        base = 0.5 * np.angle(np.trace(a @ a @ red))
        phases = [base + k * np.pi / 2 for k in range(4)]
    best = (-1.0, 0j)
    for r in radii:
        for ph in phases:
            al = r * np.exp(1j * ph)
            f = cat_fidelity(rho, al)
            if f > best[0]:
                best = (f, al)
    return best


@dataclass
class WignerGrid:
    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray  # shape (len(y_axis), len(x_axis))

    def integral(self) -> float:
        """Riemann sum of W d^2 alpha with d^2 alpha = dx dy / 2."""
        dx = self.x_axis[1] - self.x_axis[0] if len(self.x_axis) > 1 else 1.0
        dy = self.y_axis[1] - self.y_axis[0] if len(self.y_axis) > 1 else 1.0
        return float(self.values.sum() * dx * dy / 2.0)

    def local_maxima(self, rel_threshold: float = 0.1) -> list[tuple[float, float, float]]:
        """Strict 8-neighbour maxima above ``rel_threshold`` times the global max."""
        W = self.values
        thr = rel_threshold * W.max()
        pad = np.pad(W, 1, constant_values=-np.inf)
        out = []
        for i in range(W.shape[0]):
            for j in range(W.shape[1]):
                w = W[i, j]
                if w < thr:
                    continue
                nb = pad[i:i + 3, j:j + 3].copy()
                nb[1, 1] = -np.inf
                if w > nb.max():
                    out.append((float(self.x_axis[j]), float(self.y_axis[i]), float(w)))
        return out


def wigner(rho_cav: DensityMatrix, x_axis=None, y_axis=None, pad: int | None = None) -> WignerGrid:
    """W(alpha) = (2/pi) tr[D^dag(alpha) rho D(alpha) (-1)^(a^dag a)] on an (x, y) grid.

    D(x + i y) equals D(x) D(i y) up to a phase that cancels under
    conjugation, so the real-axis conjugations of rho and the
    imaginary-axis conjugations of the parity are computed once each.
    The Fock space is zero-padded so the displacements stay accurate.
    """
    if len(rho_cav.layout.factors) != 1:
        raise LayoutError("wigner() needs a single-factor cavity state; use partial_trace first")
    x_axis = np.linspace(-6, 6, 121) if x_axis is None else np.asarray(x_axis, float)
    y_axis = np.linspace(-6, 6, 121) if y_axis is None else np.asarray(y_axis, float)
    n = rho_cav.layout.total_dim
    amax = math.hypot(np.max(np.abs(x_axis)), np.max(np.abs(y_axis))) / math.sqrt(2)
    need = math.ceil(amax ** 2 + 6 * amax + 10)
    if pad is None:
        pad = need
    N = n + pad
    if N < need + n // 2:
        warnings.warn(f"Wigner grid reaches |alpha|={amax:.3g}; {N} Fock levels may be too few",
                      TruncationWarning, stacklevel=2)
    rho = np.zeros((N, N), dtype=complex)
    rho[:n, :n] = rho_cav.data
    parity = np.diag((-1.0) ** np.arange(N))
    rx = []
    for x in x_axis:
        D = displacement(x / math.sqrt(2), N, force=True).dense()
        rx.append(D.conj().T @ rho @ D)
    py = []
    for y in y_axis:
        D = displacement(1j * y / math.sqrt(2), N, force=True).dense()
        py.append((D @ parity @ D.conj().T).T)
    rx = np.array(rx)
    py = np.array(py)
    # W[iy, ix] = (2/pi) sum_ij rx[ix, i, j] * P_y[j, i]
    W = (2.0 / math.pi) * np.real(np.einsum("xij,yij->yx", rx, py, optimize=True))
    return WignerGrid(x_axis, y_axis, W)


def min_eigenvalue(rho: DensityMatrix) -> float:
    return float(eigvalsh(rho.data)[0])
