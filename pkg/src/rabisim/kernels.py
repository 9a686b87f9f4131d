"""Backend selection for the fixed-step Lindblad integrator.

The compiled extension ``rabisim._lindblad`` is used when it imports; set
``RABISIM_PURE_PYTHON=1`` to force the numpy/scipy fallback.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from . import _lindblad_py
from .hilbert import Operator

BACKEND = "python"
_compiled = None
if os.environ.get("RABISIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _lindblad as _compiled  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _compiled = None


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def _csr(op):
    data = op.data if isinstance(op, Operator) else op
    return sp.csr_matrix(data, dtype=complex)


def _on_pattern(mat: sp.csr_matrix, pattern: sp.csr_matrix) -> np.ndarray:
    """Values of ``mat`` at the stored positions of ``pattern`` (zeros elsewhere)."""
    if pattern.nnz == 0:
        return np.zeros(0, dtype=complex)
    rows = np.repeat(np.arange(pattern.shape[0]), np.diff(pattern.indptr))
    return np.asarray(mat[rows, pattern.indices]).ravel()


class LindbladRK4:
    """Classical RK4 for ``d rho/dt = -i[H(t), rho] + sum_j r_j D[L_j] rho``.

    Parameters
    ----------
    H_static : Operator or matrix
        Time-independent Hamiltonian (angular units).
    harmonics : list of (nu, H_k)
        ``H(t) = H_static + sum_k H_k exp(-2 pi i nu_k t) + h.c.``
    dissipators : list of (rate, L)
    backend : {"cython", "python"}, optional
        Defaults to the module-level choice.
    """

    def __init__(self, H_static, harmonics=(), dissipators=(), backend: str | None = None):
        H0 = _csr(H_static)
        n = H0.shape[0]
        hk = [(float(nu), _csr(H)) for nu, H in harmonics]
        nh_part = sp.csr_matrix((n, n), dtype=complex)
        pa, pb, pk, pl, pw = [], [], [], [], []
        for rate, L in dissipators:
            L = _csr(L)
            nh_part = nh_part + rate * (L.conj().T @ L)
            coo = L.tocoo()
            # 2 r L[a,k] rho[k,l] conj(L[b,l])
            a_idx = np.repeat(coo.row, coo.nnz)
            k_idx = np.repeat(coo.col, coo.nnz)
            b_idx = np.tile(coo.row, coo.nnz)
            l_idx = np.tile(coo.col, coo.nnz)
            w = 2.0 * rate * np.outer(coo.data, coo.data.conj()).ravel()
            pa.append(a_idx); pb.append(b_idx); pk.append(k_idx); pl.append(l_idx); pw.append(w)
        base = (H0 - 1j * nh_part).tocsr()
        pattern = abs(base) + sp.csr_matrix((n, n))
        for _, H in hk:
            pattern = pattern + abs(H) + abs(H.conj().T)
        pattern = sp.csr_matrix(pattern)
        pattern.data[:] = 1.0
        pattern.sort_indices()
        base_v = _on_pattern(base, pattern)
        h_v = np.array([_on_pattern(H, pattern) for _, H in hk]).reshape(len(hk), pattern.nnz)
        hd_v = np.array([_on_pattern(H.conj().T.tocsr(), pattern) for _, H in hk]).reshape(len(hk), pattern.nnz)
        cat = (lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt))
        pw_all = cat(pw, complex)
        self.n = n
        self.nnz = pattern.nnz
        self.npairs = len(pw_all)
        self.backend = backend or BACKEND
        if self.backend == "cython" and _compiled is None:
            raise ImportError("compiled backend requested but rabisim._lindblad is not built")
        if self.backend not in ("cython", "python"):
            raise ValueError(f"unknown backend {self.backend!r}")
        mod = _compiled if self.backend == "cython" else _lindblad_py
        self._core = mod.RK4Core(
            n, pattern.indptr.astype(np.int32), pattern.indices.astype(np.int32),
            base_v.real.copy(), base_v.imag.copy(), np.array([nu for nu, _ in hk], float),
            h_v.real.copy(), h_v.imag.copy(), hd_v.real.copy(), hd_v.imag.copy(),
            cat(pa, np.int32), cat(pb, np.int32), cat(pk, np.int32), cat(pl, np.int32),
            pw_all.real.copy(), pw_all.imag.copy(),
        )

    @classmethod
    def from_generator(cls, gen, backend: str | None = None) -> "LindbladRK4":
        return cls(gen.H_static, gen.harmonics, gen.dissipators, backend)

    def rhs(self, rho: np.ndarray, t: float) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        re, im = self._core.rhs(np.ascontiguousarray(rho.real), np.ascontiguousarray(rho.imag), t)
        return re + 1j * im

    def advance(self, rho: np.ndarray, t0: float, dt: float, nsteps: int) -> np.ndarray:
        """Return rho after ``nsteps`` RK4 steps of size ``dt`` from ``t0``."""
        re = np.ascontiguousarray(np.real(rho), dtype=float).copy()
        im = np.ascontiguousarray(np.imag(rho), dtype=float).copy()
        self._core.advance(re, im, float(t0), float(dt), int(nsteps))
        return re + 1j * im
