"""Pure numpy/scipy RK4 core with the same interface as the compiled one."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class RK4Core:
    def __init__(self, n, indptr, indices, base_re, base_im, freq,
                 h_re, h_im, hd_re, hd_im, pa, pb, pk, pl, pw_re, pw_im):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        nnz = len(self.indices)
        self.base = np.asarray(base_re) + 1j * np.asarray(base_im)
        self.freq = np.asarray(freq, dtype=float)
        nh = len(self.freq)
        self.h = (np.asarray(h_re) + 1j * np.asarray(h_im)).reshape(nh, nnz)
        self.hd = (np.asarray(hd_re) + 1j * np.asarray(hd_im)).reshape(nh, nnz)
        self.pairs = (np.asarray(pa), np.asarray(pb), np.asarray(pk), np.asarray(pl))
        self.pw = np.asarray(pw_re) + 1j * np.asarray(pw_im)
        self._flat = np.asarray(pa) * self.n + np.asarray(pb)

    def _matrix(self, t):
        c = np.exp(-2j * np.pi * self.freq * t)
        vals = self.base + c @ self.h + np.conj(c) @ self.hd
        return sp.csr_matrix((vals, self.indices, self.indptr), shape=(self.n, self.n))

    def _rhs_c(self, rho, t):
        K = self._matrix(t) @ rho
        out = -1j * (K - K.conj().T)
        pa, pb, pk, pl = self.pairs
        jump = np.bincount(self._flat, weights=(self.pw * rho[pk, pl]).real, minlength=self.n ** 2) \
            + 1j * np.bincount(self._flat, weights=(self.pw * rho[pk, pl]).imag, minlength=self.n ** 2)
        return out + jump.reshape(self.n, self.n)

    def rhs(self, r_re, r_im, t):
        d = self._rhs_c(np.asarray(r_re) + 1j * np.asarray(r_im), t)
        return np.ascontiguousarray(d.real), np.ascontiguousarray(d.imag)

    def advance(self, r_re, r_im, t0, dt, nsteps):
        rho = r_re + 1j * r_im
        for step in range(int(nsteps)):
            t = t0 + step * dt
            k1 = self._rhs_c(rho, t)
            k2 = self._rhs_c(rho + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = self._rhs_c(rho + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = self._rhs_c(rho + dt * k3, t + dt)
            rho = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
        r_re[...] = rho.real
        r_im[...] = rho.imag
