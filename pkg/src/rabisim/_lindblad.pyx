# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 core for the Lindblad equation with harmonic Hamiltonian terms.

The density matrix is held as two C-contiguous float64 arrays (real, imag).
The effective non-Hermitian Hamiltonian lives on one CSR pattern whose values
at time t are ``base + sum_k (c_k h_k + conj(c_k) hd_k)``, with
``c_k = exp(-i 2 pi nu_k t)``.  Jump terms are stored as index pairs with a
precomputed weight ``2 r L[a,k] conj(L[b,l])`` contributing to ``out[a,b]``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()

DEF TILE = 32


cdef class RK4Core:
    cdef int n, nnz, nh, npair
    cdef int[::1] indptr, indices
    cdef double[::1] base_re, base_im, freq
    cdef double[:, ::1] h_re, h_im, hd_re, hd_im
    cdef int[::1] pa, pb, pk, pl
    cdef double[::1] pw_re, pw_im
    cdef double[::1] v_re, v_im
    cdef double[:, ::1] k_re, k_im, s_re, s_im, a_re, a_im, d_re, d_im

    def __init__(self, int n, indptr, indices, base_re, base_im, freq,
                 h_re, h_im, hd_re, hd_im, pa, pb, pk, pl, pw_re, pw_im):
        self.n = n
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int32)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.nnz = self.indices.shape[0]
        self.base_re = np.ascontiguousarray(base_re, dtype=np.float64)
        self.base_im = np.ascontiguousarray(base_im, dtype=np.float64)
        self.freq = np.ascontiguousarray(freq, dtype=np.float64)
        self.nh = self.freq.shape[0]
        self.h_re = np.ascontiguousarray(h_re, dtype=np.float64).reshape(self.nh, self.nnz)
        self.h_im = np.ascontiguousarray(h_im, dtype=np.float64).reshape(self.nh, self.nnz)
        self.hd_re = np.ascontiguousarray(hd_re, dtype=np.float64).reshape(self.nh, self.nnz)
        self.hd_im = np.ascontiguousarray(hd_im, dtype=np.float64).reshape(self.nh, self.nnz)
        self.pa = np.ascontiguousarray(pa, dtype=np.int32)
        self.pb = np.ascontiguousarray(pb, dtype=np.int32)
        self.pk = np.ascontiguousarray(pk, dtype=np.int32)
        self.pl = np.ascontiguousarray(pl, dtype=np.int32)
        self.pw_re = np.ascontiguousarray(pw_re, dtype=np.float64)
        self.pw_im = np.ascontiguousarray(pw_im, dtype=np.float64)
        self.npair = self.pa.shape[0]
        self.v_re = np.empty(self.nnz)
        self.v_im = np.empty(self.nnz)
        self.k_re = np.empty((n, n))
        self.k_im = np.empty((n, n))
        self.s_re = np.empty((n, n))
        self.s_im = np.empty((n, n))
        self.a_re = np.empty((n, n))
        self.a_im = np.empty((n, n))
        self.d_re = np.empty((n, n))
        self.d_im = np.empty((n, n))

    cdef void _values(self, double t) nogil:
        cdef int p, k
        cdef double c, s, ph
        for p in range(self.nnz):
            self.v_re[p] = self.base_re[p]
            self.v_im[p] = self.base_im[p]
        for k in range(self.nh):
            ph = -2.0 * M_PI * self.freq[k] * t
            c = cos(ph)
            s = sin(ph)
            # c_k h + conj(c_k) hd
            for p in range(self.nnz):
                self.v_re[p] += c * (self.h_re[k, p] + self.hd_re[k, p]) \
                    - s * (self.h_im[k, p] - self.hd_im[k, p])
                self.v_im[p] += c * (self.h_im[k, p] + self.hd_im[k, p]) \
                    + s * (self.h_re[k, p] - self.hd_re[k, p])

    cdef void _rhs(self, double[:, ::1] r_re, double[:, ::1] r_im, double t,
                   double[:, ::1] o_re, double[:, ::1] o_im) nogil:
        cdef int n = self.n
        cdef int i, j, p, q, bi, bj
        cdef double vr, vi, xr, xi, w_re, w_im
        cdef double* kr = &self.k_re[0, 0]
        cdef double* ki = &self.k_im[0, 0]
        cdef double* rr = &r_re[0, 0]
        cdef double* ri = &r_im[0, 0]
        cdef double* orr = &o_re[0, 0]
        cdef double* oi = &o_im[0, 0]
        cdef double* krow
        cdef double* kirow
        cdef double* xrow
        cdef double* xirow
        cdef int* ptr = &self.indptr[0]
        cdef int* idx = &self.indices[0]
        cdef double* vre = &self.v_re[0]
        cdef double* vim = &self.v_im[0]
        self._values(t)
        # K = H_nh rho, row by row
        for i in range(n):
            krow = kr + i * n
            kirow = ki + i * n
            for j in range(n):
                krow[j] = 0.0
                kirow[j] = 0.0
            for p in range(ptr[i], ptr[i + 1]):
                xrow = rr + idx[p] * n
                xirow = ri + idx[p] * n
                vr = vre[p]
                vi = vim[p]
                for j in range(n):
                    krow[j] += vr * xrow[j] - vi * xirow[j]
                    kirow[j] += vr * xirow[j] + vi * xrow[j]
        # -i (K - K^dag), tiled to keep the transposed reads in cache
        for bi in range(0, n, TILE):
            for bj in range(0, n, TILE):
                for i in range(bi, min(bi + TILE, n)):
                    for j in range(bj, min(bj + TILE, n)):
                        orr[i * n + j] = ki[i * n + j] + ki[j * n + i]
                        oi[i * n + j] = kr[j * n + i] - kr[i * n + j]
        # jumps: sum 2 r L rho L^dag
        for q in range(self.npair):
            j = self.pk[q] * n + self.pl[q]
            xr = rr[j]
            xi = ri[j]
            w_re = self.pw_re[q]
            w_im = self.pw_im[q]
            i = self.pa[q] * n + self.pb[q]
            orr[i] += w_re * xr - w_im * xi
            oi[i] += w_re * xi + w_im * xr

    def rhs(self, double[:, ::1] r_re, double[:, ::1] r_im, double t):
        out_re = np.empty((self.n, self.n))
        out_im = np.empty((self.n, self.n))
        cdef double[:, ::1] o_re = out_re
        cdef double[:, ::1] o_im = out_im
        with nogil:
            self._rhs(r_re, r_im, t, o_re, o_im)
        return out_re, out_im

    def advance(self, double[:, ::1] r_re, double[:, ::1] r_im, double t0, double dt, long nsteps):
        """In-place classical RK4 over ``nsteps`` steps; symmetrizes every step."""
        cdef int n = self.n
        cdef long step, m, nn = <long>n * n
        cdef int i, j
        cdef double t, h2 = 0.5 * dt, h6 = dt / 6.0, xr, xi
        cdef double* rr = &r_re[0, 0]
        cdef double* ri = &r_im[0, 0]
        cdef double* ar = &self.a_re[0, 0]
        cdef double* ai = &self.a_im[0, 0]
        cdef double* sr = &self.s_re[0, 0]
        cdef double* si = &self.s_im[0, 0]
        cdef double* dr = &self.d_re[0, 0]
        cdef double* di = &self.d_im[0, 0]
        with nogil:
            for step in range(nsteps):
                t = t0 + step * dt
                self._rhs(r_re, r_im, t, self.d_re, self.d_im)
                for m in range(nn):
                    ar[m] = dr[m]
                    ai[m] = di[m]
                    sr[m] = rr[m] + h2 * dr[m]
                    si[m] = ri[m] + h2 * di[m]
                self._rhs(self.s_re, self.s_im, t + h2, self.d_re, self.d_im)
                for m in range(nn):
                    ar[m] += 2.0 * dr[m]
                    ai[m] += 2.0 * di[m]
                    sr[m] = rr[m] + h2 * dr[m]
                    si[m] = ri[m] + h2 * di[m]
                self._rhs(self.s_re, self.s_im, t + h2, self.d_re, self.d_im)
                for m in range(nn):
                    ar[m] += 2.0 * dr[m]
                    ai[m] += 2.0 * di[m]
                    sr[m] = rr[m] + dt * dr[m]
                    si[m] = ri[m] + dt * di[m]
                self._rhs(self.s_re, self.s_im, t + dt, self.d_re, self.d_im)
                for m in range(nn):
                    rr[m] += h6 * (ar[m] + dr[m])
                    ri[m] += h6 * (ai[m] + di[m])
                # Hermitian symmetrization
                for i in range(n):
                    ri[i * n + i] = 0.0
                    for j in range(i + 1, n):
                        xr = 0.5 * (rr[i * n + j] + rr[j * n + i])
                        xi = 0.5 * (ri[i * n + j] - ri[j * n + i])
                        rr[i * n + j] = xr
                        rr[j * n + i] = xr
                        ri[i * n + j] = xi
                        ri[j * n + i] = -xi
