"""Time evolution and steady states of Lindblad generators.

Two integrators are offered.  ``fixed_rk4`` runs the sparse RK4 kernel from
:mod:`rabisim.kernels` and is the only sensible choice when the generator has
fast harmonics (the step is pinned by the 2*omega_tilde2 oscillation anyway).
``adaptive_rk45`` integrates the vectorized Liouvillian with a Dormand-Prince
pair and is the default for static (effective-model) generators.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateSteadyStateError,
    DomainError,
    FitQualityWarning,
    InvalidStateError,
    LayoutError,
    StiffnessError,
    TruncationError,
)
from .hilbert import DensityMatrix, Operator, eigvalsh, lu_factor
from .kernels import LindbladRK4
from .models import TWO_PI, TimeDependentGenerator

METHODS = ("fixed_rk4", "adaptive_rk45")


@dataclass
class SolverOptions:
    """Integrator settings.

    ``dt=None`` with ``fixed_rk4`` picks 1/(40 f_max) from the generator's
    fastest harmonic.
    """

    method: Optional[str] = None
    dt: Optional[float] = None
    rtol: float = 1e-8
    atol: float = 1e-10
    fock_guard: bool = True
    fock_tol: float = 1e-6
    snapshots: bool = False
    backend: Optional[str] = None

    def __post_init__(self):
        if self.method is not None and self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.dt is not None and not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.rtol < 1e-12:
            raise DomainError(f"rtol must be at least 1e-12, got {self.rtol}")


@dataclass
class Trajectory:
    times: np.ndarray
    observables: dict
    snapshots: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        for name, vals in self.observables.items():
            if len(vals) != len(self.times):
                raise DomainError(f"observable {name!r} has {len(vals)} samples, expected {len(self.times)}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.observables[name]


# --- helpers -------------------------------------------------------------------------


def _expect(mat, rho: np.ndarray) -> float:
    if sp.issparse(mat):
        return float(np.real(mat.multiply(rho.T).sum()))
    return float(np.real(np.einsum("ij,ji->", mat, rho)))


def _resolve_observables(gen: TimeDependentGenerator, observables) -> dict:
    out = {}
    for item in observables:
        if isinstance(item, str):
            if item not in gen.probes:
                raise LayoutError(f"unknown probe {item!r}; available: {sorted(gen.probes)}")
            out[item] = gen.probes[item].data
        elif isinstance(item, Operator):
            out[f"obs{len(out)}"] = item.data
        else:
            name, op = item
            out[name] = op.data if isinstance(op, Operator) else op
    return out


def fock_tail(rho: np.ndarray, gen: TimeDependentGenerator, levels: int = 2) -> float:
    """Population of the top ``levels`` Fock states."""
    dims = gen.layout.dims
    q = gen.layout.index(gen.cavity_factor)
    pops = np.real(np.diag(rho)).reshape(dims)
    axes = tuple(i for i in range(len(dims)) if i != q)
    marg = pops.sum(axis=axes) if axes else pops
    return float(marg[-levels:].sum())


def liouvillian(gen: TimeDependentGenerator) -> sp.csr_matrix:
    """Sparse superoperator on row-major vec(rho); vec(A rho B) = (A kron B^T) vec(rho)."""
    if not gen.is_static:
        raise DomainError("liouvillian() needs a generator without harmonics")
    n = gen.layout.total_dim
    eye = sp.identity(n, dtype=complex, format="csr")
    H = sp.csr_matrix(gen.H_static.data)
    L = -1j * (sp.kron(H, eye) - sp.kron(eye, H.T))
    for rate, op in gen.dissipators:
        J = sp.csr_matrix(op.data)
        JdJ = J.conj().T @ J
        L = L + rate * (2 * sp.kron(J, J.conj()) - sp.kron(JdJ, eye) - sp.kron(eye, JdJ.T))
    return sp.csr_matrix(L)


def _check_sample(rho, t, gen, opts, info):
    tr = np.trace(rho)
    dev = abs(tr - 1.0)
    info["max_trace_error"] = max(info.get("max_trace_error", 0.0), float(dev))
    if dev > 1e-8:
        raise InvalidStateError(f"trace drifted by {dev:.3g} at t={t:.6g} us")
    if opts.fock_guard:
        tail = fock_tail(rho, gen)
        if tail > opts.fock_tol:
            raise TruncationError(
                f"top two Fock levels hold {tail:.3g} > {opts.fock_tol:g} at t={t:.6g} us; "
                "increase n_max"
            )


# --- evolution -----------------------------------------------------------------------


def evolve(gen: TimeDependentGenerator, rho0: DensityMatrix, t_grid: Sequence[float],
           opts: Optional[SolverOptions] = None,
           observables: Iterable = ("n", "sz", "P_e0")) -> Trajectory:
    """Integrate from ``rho0`` at ``t_grid[0]`` and sample at every grid time.

    Parameters
    ----------
    gen : TimeDependentGenerator
    rho0 : DensityMatrix
        Initial state on ``gen.layout``.
    t_grid : sequence of float
        Strictly increasing sample times in microseconds.
    opts : SolverOptions, optional
    observables : iterable
        Probe names from ``gen.probes``, Operators, or ``(name, Operator)`` pairs.

    Returns
    -------
    Trajectory
    """
    opts = opts or SolverOptions()
    if rho0.layout != gen.layout:
        raise LayoutError(f"state layout {rho0.layout} does not match generator {gen.layout}")
    rho0.validate()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be a strictly increasing 1-D sequence")
    obs = _resolve_observables(gen, observables)
    method = opts.method or ("adaptive_rk45" if gen.is_static else "fixed_rk4")
    series = {name: [] for name in obs}
    snaps = []
    info = {"method": method}

    def record(rho, t):
        _check_sample(rho, t, gen, opts, info)
        for name, mat in obs.items():
            series[name].append(_expect(mat, rho))
        if opts.snapshots:
            lam = eigvalsh(rho)[0]
            info["min_eigenvalue"] = min(info.get("min_eigenvalue", 1.0), float(lam))
            if lam < -1e-6:
                warnings.warn(f"negative eigenvalue {lam:.3g} at t={t:.6g} us", RuntimeWarning,
                              stacklevel=3)
            snaps.append((float(t), DensityMatrix(gen.layout, rho.copy())))

    if method == "fixed_rk4":
        dt = opts.dt
        if dt is None:
            if gen.is_static:
                raise DomainError("fixed_rk4 on a static generator needs an explicit dt")
            dt = 1.0 / (40.0 * gen.max_frequency)
        kern = LindbladRK4.from_generator(gen, opts.backend)
        rho = rho0.data.copy()
        record(rho, t_grid[0])
        steps = 0
        for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
            nsteps = max(1, math.ceil((t1 - t0) / dt - 1e-9))
            rho = kern.advance(rho, t0, (t1 - t0) / nsteps, nsteps)
            steps += nsteps
            record(rho, t1)
        info.update(dt=dt, steps=steps, backend=kern.backend)
    else:
        if not gen.is_static:
            raise DomainError("adaptive_rk45 supports static generators only; use fixed_rk4")
        L = liouvillian(gen)
        n = gen.layout.total_dim
        record(rho0.data, t_grid[0])
        if len(t_grid) > 1:
            sol = solve_ivp(lambda t, y: L @ y, (t_grid[0], t_grid[-1]), rho0.data.ravel(),
                            method="RK45", t_eval=t_grid[1:], rtol=opts.rtol, atol=opts.atol)
            if sol.status < 0:
                raise StiffnessError(f"integration failed: {sol.message}")
            for t, y in zip(sol.t, sol.y.T):
                rho = y.reshape(n, n)
                rho = 0.5 * (rho + rho.conj().T)
                record(rho, t)
            info["rhs_evaluations"] = int(sol.nfev)
    return Trajectory(t_grid, {k: np.array(v) for k, v in series.items()}, snaps, info)


# --- steady state --------------------------------------------------------------------


def _constrained_solve(L: sp.csr_matrix, n: int, weights: np.ndarray, row: int):
    A = sp.lil_matrix(L)
    diag_idx = np.arange(n) * (n + 1)
    A[row, :] = 0
    A = sp.csr_matrix(A)
    trace_row = sp.csr_matrix((weights.astype(complex), (np.zeros(n, int), diag_idx)), shape=(1, n * n))
    A = sp.vstack([A[:row], trace_row, A[row + 1:]]).tocsc()
    b = np.zeros(n * n, dtype=complex)
    b[row] = 1.0
    try:
        lu = lu_factor(A)
    except RuntimeError as exc:  # exactly singular
        raise DegenerateSteadyStateError(
            f"Liouvillian kernel is not one-dimensional ({exc})") from None
    x = lu.solve(b)
    rho = x.reshape(n, n)
    return rho / np.trace(rho)


def steady_state(gen: TimeDependentGenerator, opts: Optional[SolverOptions] = None,
                 return_info: bool = False, seed: int = 12345):
    """Unique stationary state of a static generator.

    Solves L[rho] = 0 with one population row of the vectorized Liouvillian
    (the one with the largest diagonal magnitude) replaced by the trace
    condition.
    A second solve with random trace weights detects a degenerate kernel.
    If the residual bound fails the state is relaxed by time-marching.
    """
    if not gen.is_static:
        raise DomainError("steady_state() needs a generator without harmonics")
    if not any(rate > 0 for rate, _ in gen.dissipators):
        raise DegenerateSteadyStateError("no dissipation: every eigenstate is stationary")
    opts = opts or SolverOptions()
    n = gen.layout.total_dim
    L = liouvillian(gen)
    # the trace functional is the left null vector of L and lives on the
    # population entries, so only a population row can be swapped out
    pop_rows = np.arange(n) * (n + 1)
    row = int(pop_rows[np.argmax(np.abs(L.diagonal()[pop_rows]))])
    rho = _constrained_solve(L, n, np.ones(n), row)
    rng = np.random.default_rng(seed)
    rho2 = _constrained_solve(L, n, rng.uniform(0.5, 1.5, n), row)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(rho2))) \
            or np.max(np.abs(rho - rho2)) > 1e-6:
        raise DegenerateSteadyStateError(
            "steady state depends on the trace constraint; kernel dimension exceeds one")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    Lnorm = sp.linalg.norm(L)
    resid = float(np.linalg.norm(L @ rho.ravel()))
    info = {"method": "direct", "residual": resid, "liouvillian_norm": float(Lnorm)}
    if resid >= 1e-10 * Lnorm:
        rho, info = _relax(L, rho, n, info)
    if opts.fock_guard:
        tail = fock_tail(rho, gen)
        info["fock_tail"] = tail
        if tail > opts.fock_tol:
            raise TruncationError(f"steady state has {tail:.3g} in the top two Fock levels")
    dm = DensityMatrix(gen.layout, rho)
    return (dm, info) if return_info else dm


def _relax(L, rho, n, info, chunk=10.0, max_chunks=200, tol=1e-9):
    y = rho.ravel()
    for _ in range(max_chunks):
        sol = solve_ivp(lambda t, v: L @ v, (0.0, chunk), y, method="RK45", rtol=1e-10, atol=1e-12)
        if sol.status < 0:
            raise StiffnessError(f"time-marching failed: {sol.message}")
        y = sol.y[:, -1]
        rate = float(np.linalg.norm(L @ y))
        if rate < tol:
            break
    rho = y.reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    info.update(method="time-marching", residual=float(np.linalg.norm(L @ rho.ravel())))
    return rho, info


# --- leakage --------------------------------------------------------------------------


def leakage_probe(gen: TimeDependentGenerator, rho0: DensityMatrix, horizon: float,
                  n_samples: int = 201, opts: Optional[SolverOptions] = None,
                  fit_tol: float = 1e-4):
    """Linear-slope estimate of population loss from the qubit subspace.

    Returns ``(Gamma, residual)``: ``Gamma = -slope / (2 pi)`` in MHz from a
    least-squares line through P_qubit(t), and the RMS residual of that fit.
    """
    if "P_qubit" not in gen.probes:
        raise DomainError("generator has no qubit-subspace projector")
    opts = opts or SolverOptions(fock_guard=False)
    t = np.linspace(0.0, horizon, n_samples)
    traj = evolve(gen, rho0, t, opts, observables=("P_qubit",))
    P = traj["P_qubit"]
    slope, icpt = np.polyfit(t, P, 1)
    resid = float(np.sqrt(np.mean((P - (slope * t + icpt)) ** 2)))
    if np.max(np.diff(P)) > fit_tol + 3 * resid:
        warnings.warn("qubit population is not monotone within fit tolerance", FitQualityWarning,
                      stacklevel=2)
    return float(-slope / TWO_PI), resid


# --- scans ---------------------------------------------------------------------------


def parallel_map(func: Callable, items: Iterable, workers: Optional[int] = None) -> list:
    """Map over scan points, in worker processes when ``workers > 1``."""
    items = list(items)
    if not workers or workers <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
