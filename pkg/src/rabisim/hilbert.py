"""Composite Hilbert spaces, elementary operators and state manipulation.

Every operator and density matrix carries a :class:`SpaceLayout` naming its
tensor factors, e.g. ``(("qubit", 2), ("cavity", 16))``.  Factor order is
the Kronecker order, so the last factor is the fastest-varying index.

This module is also the single place where the package touches numerical
linear algebra (Hermitian eigensolvers, sparse solves, norms); the rest of
the package goes through the helpers defined at the bottom.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    InvalidDimensionError,
    InvalidStateError,
    LayoutError,
    TruncationError,
    TruncationWarning,
)

#: Operators up to this dimension are stored densely, larger ones as CSR.
DENSE_LIMIT = 512


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered list of named tensor factors."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lbl), int(d)) for lbl, d in self.factors)
        if not factors:
            raise InvalidDimensionError("a layout needs at least one factor")
        labels = [lbl for lbl, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate factor labels in {labels}")
        for lbl, d in factors:
            if d < 1:
                raise InvalidDimensionError(f"factor {lbl!r} has dimension {d}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def single(cls, label: str, dim: int) -> "SpaceLayout":
        return cls(((label, dim),))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"no factor {label!r} in layout {self.labels}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def __mul__(self, other: "SpaceLayout") -> "SpaceLayout":
        return SpaceLayout(self.factors + other.factors)

    def __str__(self):
        return " ⊗ ".join(f"{lbl}[{d}]" for lbl, d in self.factors)


def _as_storage(mat):
    """Dense for small matrices, CSR above DENSE_LIMIT."""
    n = mat.shape[0]
    if n <= DENSE_LIMIT:
        return mat.toarray() if sp.issparse(mat) else np.asarray(mat, dtype=complex)
    return sp.csr_matrix(mat, dtype=complex)


class Operator:
    """Square complex matrix acting on a :class:`SpaceLayout`."""

    __slots__ = ("layout", "data", "hermitian")

    def __init__(self, layout: SpaceLayout, data, hermitian: bool = False):
        if sp.issparse(data):
            data = data.astype(complex)
        else:
            data = np.asarray(data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise InvalidDimensionError(f"operator must be square, got {data.shape}")
        if data.shape[0] != layout.total_dim:
            raise InvalidDimensionError(
                f"matrix of size {data.shape[0]} does not match layout {layout}"
            )
        self.layout = layout
        self.data = _as_storage(data)
        self.hermitian = hermitian

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    def dense(self) -> np.ndarray:
        return self.data.toarray() if self.is_sparse else self.data

    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.data)

    def dag(self) -> "Operator":
        return Operator(self.layout, self.data.conj().T, self.hermitian)

    def hermiticity_error(self) -> float:
        diff = self.data - self.data.conj().T
        scale = _inf_norm(self.data)
        return _inf_norm(diff) / scale if scale else 0.0

    def _check(self, other: "Operator"):
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout} vs {other.layout}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.layout, self.data + other.data,
                            self.hermitian and other.hermitian)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.layout, self.data - other.data,
                            self.hermitian and other.hermitian)
        return NotImplemented

    def __neg__(self):
        return Operator(self.layout, -self.data, self.hermitian)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        herm = self.hermitian and np.isreal(scalar)
        return Operator(self.layout, self.data * scalar, bool(herm))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.layout, self.data @ other.data)
        return self.data @ other

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"Operator({self.layout}, {kind}, hermitian={self.hermitian})"


class DensityMatrix:
    """Dense density matrix tagged with a layout."""

    __slots__ = ("layout", "data")

    def __init__(self, layout: SpaceLayout, data):
        data = np.array(data.toarray() if sp.issparse(data) else data, dtype=complex)
        if data.shape != (layout.total_dim, layout.total_dim):
            raise InvalidDimensionError(
                f"density matrix of shape {data.shape} does not match layout {layout}"
            )
        self.layout = layout
        self.data = data

    @classmethod
    def from_ket(cls, layout: SpaceLayout, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(layout, np.outer(psi, psi.conj()))

    def trace(self) -> complex:
        return np.trace(self.data)

    def expect(self, op) -> float:
        """Real part of tr(op rho)."""
        mat = op.data if isinstance(op, Operator) else op
        if sp.issparse(mat):
            return float(np.real(mat.multiply(self.data.T).sum()))
        return float(np.real(np.einsum("ij,ji->", mat, self.data)))

    def validate(self, herm_tol=1e-10, trace_tol=1e-8, pos_tol=1e-8) -> "DensityMatrix":
        """Raise InvalidStateError unless rho is a valid state within tolerance."""
        rho = self.data
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > herm_tol:
            raise InvalidStateError(f"not Hermitian: max |rho - rho^dag| = {herm:.3g}")
        tr = abs(np.trace(rho) - 1.0)
        if tr > trace_tol:
            raise InvalidStateError(f"trace deviates from 1 by {tr:.3g}")
        lam = eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if lam < -pos_tol:
            raise InvalidStateError(f"minimum eigenvalue {lam:.3g} below -{pos_tol:g}")
        return self

    def __repr__(self):
        return f"DensityMatrix({self.layout})"


validate = DensityMatrix.validate


# --- elementary operators ------------------------------------------------------------


def fock_ops(n_max: int, label: str = "cavity") -> tuple[Operator, Operator]:
    """Annihilation and number operators on the basis |0>, ..., |n_max - 1>."""
    if n_max < 2:
        raise InvalidDimensionError(f"n_max must be at least 2, got {n_max}")
    layout = SpaceLayout.single(label, n_max)
    a = np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), 1)
    num = np.diag(np.arange(n_max, dtype=float))
    return Operator(layout, a), Operator(layout, num, hermitian=True)


def qubit_ops(label: str = "qubit") -> tuple[Operator, Operator, Operator]:
    """sigma_z, sigma_+ and sigma_- on the ordered basis (|g>, |e>).

    sigma_z = |e><e| - |g><g| and sigma_+ = |e><g|.
    """
    layout = SpaceLayout.single(label, 2)
    sz = Operator(layout, np.diag([-1.0, 1.0]), hermitian=True)
    splus = Operator(layout, np.array([[0.0, 0.0], [1.0, 0.0]]))
    return sz, splus, splus.dag()


def identity(layout: SpaceLayout) -> Operator:
    n = layout.total_dim
    mat = sp.identity(n, dtype=complex, format="csr") if n > DENSE_LIMIT else np.eye(n)
    return Operator(layout, mat, hermitian=True)


def tensor(ops: Sequence[Operator]) -> Operator:
    """Kronecker product in the given order; layouts are concatenated."""
    ops = list(ops)
    if not ops:
        raise InvalidDimensionError("tensor() needs at least one operator")
    layout = reduce(lambda x, y: x * y, (op.layout for op in ops))
    if layout.total_dim > DENSE_LIMIT or any(op.is_sparse for op in ops):
        mat = reduce(lambda x, y: sp.kron(x, y, format="csr"), (op.csr() for op in ops))
    else:
        mat = reduce(np.kron, (op.dense() for op in ops))
    return Operator(layout, mat, all(op.hermitian for op in ops))


def embed(op: Operator, layout: SpaceLayout) -> Operator:
    """Place a single-factor operator into ``layout`` (identity elsewhere)."""
    if len(op.layout.factors) != 1:
        raise LayoutError("embed() expects a single-factor operator")
    (label, dim), = op.layout.factors
    if layout.dim(label) != dim:
        raise LayoutError(f"factor {label!r} has dimension {layout.dim(label)}, not {dim}")
    parts = [op if lbl == label else identity(SpaceLayout.single(lbl, d))
             for lbl, d in layout.factors]
    return tensor(parts)


def basis_ket(layout: SpaceLayout, **indices: int) -> np.ndarray:
    """Product basis vector, e.g. ``basis_ket(layout, qubit=1, cavity=0)``."""
    missing = set(layout.labels) - set(indices)
    unknown = set(indices) - set(layout.labels)
    if unknown:
        raise LayoutError(f"unknown factor labels {sorted(unknown)}")
    if missing:
        raise LayoutError(f"missing indices for factors {sorted(missing)}")
    flat = np.ravel_multi_index([indices[lbl] for lbl in layout.labels], layout.dims)
    psi = np.zeros(layout.total_dim, dtype=complex)
    psi[flat] = 1.0
    return psi


def coherent_vector(alpha: complex, n_max: int, normalize: bool = False) -> np.ndarray:
    """Fock amplitudes exp(-|a|^2/2) a^n / sqrt(n!) truncated at n_max."""
    n = np.arange(n_max)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.zeros(n_max, dtype=complex)
    if alpha == 0:
        amp[0] = 1.0
    else:
        mag = np.exp(-abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * log_fact)
        amp = mag * np.exp(1j * n * np.angle(alpha))
    if normalize:
        amp = amp / np.linalg.norm(amp)
    return amp


def truncation_ok(alpha: complex, n_max: int) -> bool:
    r = abs(alpha)
    return r * r + 6 * r + 10 <= n_max


def displacement(alpha: complex, n_max: int, force: bool = False,
                 label: str = "cavity") -> Operator:
    """exp(alpha a^dag - alpha^* a) in an n_max-level truncation."""
    if not force and not truncation_ok(alpha, n_max):
        raise TruncationError(
            f"|alpha|={abs(alpha):.3g} needs n_max >= "
            f"{math.ceil(abs(alpha) ** 2 + 6 * abs(alpha) + 10)}, got {n_max}"
        )
    a, _ = fock_ops(n_max, label)
    a = a.dense()
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return Operator(a_layout(n_max, label), scipy.linalg.expm(gen))


def a_layout(n_max: int, label: str = "cavity") -> SpaceLayout:
    return SpaceLayout.single(label, n_max)


# --- partial operations -------------------------------------------------------------

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _matrix_of(state):
    if isinstance(state, (DensityMatrix, Operator)):
        data = state.data
        return state.layout, (data.toarray() if sp.issparse(data) else data)
    raise TypeError(f"expected DensityMatrix or Operator, got {type(state).__name__}")


def partial_trace(rho, keep: str) -> DensityMatrix:
    """Reduced density matrix on the factor ``keep``."""
    layout, mat = _matrix_of(rho)
    q = layout.index(keep)
    k = len(layout.dims)
    tens = mat.reshape(layout.dims + layout.dims)
    row = list(_LETTERS[:k])
    col = list(row)
    col[q] = _LETTERS[k]
    spec = "".join(row) + "".join(col) + "->" + row[q] + col[q]
    red = np.einsum(spec, tens)
    return DensityMatrix(SpaceLayout.single(keep, layout.dims[q]), red)


def partial_transpose(rho, part: str) -> Operator:
    """Transpose the indices of factor ``part`` only."""
    layout, mat = _matrix_of(rho)
    q = layout.index(part)
    k = len(layout.dims)
    tens = mat.reshape(layout.dims + layout.dims)
    axes = list(range(2 * k))
    axes[q], axes[k + q] = axes[k + q], axes[q]
    out = tens.transpose(axes).reshape(mat.shape)
    return Operator(layout, out, hermitian=True)


def fock_populations(rho, label: str = "cavity") -> np.ndarray:
    red = partial_trace(rho, label) if len(rho.layout.factors) > 1 else rho
    return np.real(np.diag(red.data))


def top_fock_population(rho, label: str = "cavity", levels: int = 2) -> float:
    return float(np.sum(fock_populations(rho, label)[-levels:]))


def check_truncation(rho, label: str = "cavity", tol: float = 1e-6, where: str = "") -> bool:
    """Warn if the top two Fock levels hold more than ``tol`` population."""
    top = top_fock_population(rho, label)
    if top > tol:
        msg = f"top two Fock levels hold population {top:.2e}"
        warnings.warn(msg + (f" {where}" if where else ""), TruncationWarning, stacklevel=2)
        return False
    return True


# --- linear-algebra helpers ------------------------------------------------------------


def _inf_norm(mat) -> float:
    if sp.issparse(mat):
        return float(abs(mat).sum(axis=1).max()) if mat.nnz else 0.0
    return float(np.max(np.sum(np.abs(mat), axis=1))) if mat.size else 0.0


def eigh(mat) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix (ascending eigenvalues)."""
    mat = mat.dense() if isinstance(mat, Operator) else mat
    mat = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return np.linalg.eigh(mat)


def eigvalsh(mat) -> np.ndarray:
    mat = mat.dense() if isinstance(mat, Operator) else mat
    mat = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return np.linalg.eigvalsh(mat)


def eigvals_general(mat) -> np.ndarray:
    """Eigenvalues of a small non-Hermitian matrix."""
    return np.linalg.eigvals(np.asarray(mat))


def solve(mat, rhs) -> np.ndarray:
    """LU solve; sparse matrices go through SuperLU."""
    if sp.issparse(mat):
        return spla.splu(sp.csc_matrix(mat)).solve(np.asarray(rhs, dtype=complex))
    return np.linalg.solve(mat, rhs)


def lu_factor(mat):
    """Sparse LU factorization object with a ``solve`` method."""
    return spla.splu(sp.csc_matrix(mat))


def matvec(mat, vec) -> np.ndarray:
    return mat @ vec


def frobenius_norm(mat) -> float:
    if sp.issparse(mat):
        return float(spla.norm(mat))
    return float(np.linalg.norm(mat))


def trace_norm(mat) -> float:
    """Sum of |eigenvalues| of a Hermitian matrix."""
    return float(np.sum(np.abs(eigvalsh(mat))))


def ket_to_dm(layout: SpaceLayout, kets: Iterable[np.ndarray], weights=None) -> DensityMatrix:
    kets = [np.asarray(k, dtype=complex) for k in kets]
    weights = np.ones(len(kets)) / len(kets) if weights is None else np.asarray(weights)
    rho = sum(w * np.outer(k, k.conj()) / np.vdot(k, k) for w, k in zip(weights, kets))
    return DensityMatrix(layout, rho)
