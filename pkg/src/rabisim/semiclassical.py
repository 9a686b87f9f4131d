"""Factorized mean-field dynamics for alpha = <a>, beta = <sigma_->, w = <sigma_z>.

The flow is written on the real 5-vector (Re a, Im a, Re b, Im b, w); it is
not complex-analytic in alpha because of the alpha* terms, so stability is
analysed with the real Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, StiffnessError
from .hilbert import eigvals_general

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SemiState:
    alpha: complex
    beta: complex
    w: float

    def to_vector(self) -> np.ndarray:
        return np.array([self.alpha.real, self.alpha.imag, self.beta.real, self.beta.imag, self.w])

    @classmethod
    def from_vector(cls, y) -> "SemiState":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), float(y[4]))

    def spin_length(self) -> float:
        return abs(2 * self.beta) ** 2 + self.w ** 2


@dataclass(frozen=True)
class SemiParams:
    omega: float
    omega0: float
    g: float
    U: float
    kappa: float

    @classmethod
    def from_effective(cls, eff) -> "SemiParams":
        return cls(eff.omega, eff.omega0, eff.g_eff, eff.U, eff.kappa)

    def with_U(self, U: float) -> "SemiParams":
        return SemiParams(self.omega, self.omega0, self.g, U, self.kappa)


FIXED_POINTS = {"normal": SemiState(0j, 0j, -1.0), "inverted": SemiState(0j, 0j, 1.0)}


def _flow(y: np.ndarray, p: SemiParams) -> np.ndarray:
    ar, ai, br, bi, w = y
    field = p.omega + 0.5 * p.U * w
    spin = p.omega0 + p.U * (ar * ar + ai * ai)
    return TWO_PI * np.array([
        -p.kappa * ar + field * ai,
        -p.kappa * ai - field * ar - 2.0 * p.g * br,
        spin * bi,
        -spin * br + 2.0 * p.g * ar * w,
        -8.0 * p.g * ar * bi,  # 2ig(a + a*)(b - b*), assembled as a real product
    ])


def semi_rhs(s: SemiState, p: SemiParams) -> SemiState:
    """Time derivative (per microsecond) of the mean-field state."""
    return SemiState.from_vector(_flow(s.to_vector(), p))


def jacobian(y, p: SemiParams) -> np.ndarray:
    """Analytic Jacobian of the real 5-dimensional flow."""
    ar, ai, br, bi, w = y
    field = p.omega + 0.5 * p.U * w
    spin = p.omega0 + p.U * (ar * ar + ai * ai)
    g, U, k = p.g, p.U, p.kappa
    J = np.array([
        [-k, field, 0.0, 0.0, 0.5 * U * ai],
        [-field, -k, -2 * g, 0.0, -0.5 * U * ar],
        [2 * U * ar * bi, 2 * U * ai * bi, 0.0, spin, 0.0],
        [-2 * U * ar * br + 2 * g * w, -2 * U * ai * br, -spin, 0.0, 2 * g * ar],
        [-8 * g * bi, 0.0, 0.0, -8 * g * ar, 0.0],
    ])
    return TWO_PI * J


def semi_integrate(s0: SemiState, p: SemiParams, t_grid: Sequence[float],
                   rtol: float = 1e-10, atol: float = 1e-12) -> list[SemiState]:
    """Adaptive RK45 solution sampled on ``t_grid`` (microseconds)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    y0 = s0.to_vector()
    if len(t_grid) == 1:
        return [s0]
    sol = solve_ivp(lambda t, y: _flow(y, p), (t_grid[0], t_grid[-1]), y0, method="RK45",
                    t_eval=t_grid, rtol=rtol, atol=atol)
    if sol.status < 0:
        raise StiffnessError(f"mean-field integration failed: {sol.message}")
    return [SemiState.from_vector(y) for y in sol.y.T]


def fixed_point_stability(p: SemiParams, which: str = "normal", return_eigs: bool = False):
    """Largest real part of the linearization at the normal or inverted state.

    At these points the w row and column of the Jacobian vanish (spin length
    is conserved), so that structurally marginal direction is left out and
    the (alpha, beta) block decides stability.
    """
    if which not in FIXED_POINTS:
        raise DomainError(f"which must be 'normal' or 'inverted', got {which!r}")
    J = jacobian(FIXED_POINTS[which].to_vector(), p)
    if not np.any(J[4]) and not np.any(J[:, 4]):
        J = J[:4, :4]
    lam = eigvals_general(J)
    top = float(np.max(lam.real))
    return (top, lam) if return_eigs else top


def _unstable(p: SemiParams, U: float, which: str) -> bool:
    return fixed_point_stability(p.with_U(U), which) > 0


def stability_crossings(p: SemiParams, U_range: tuple[float, float], which: str = "normal",
                        tol: float = 1e-3, n_grid: int = 801) -> list[float]:
    """All U in ``U_range`` where the fixed point changes stability, each bisected to ``tol``.

    A grid pass comes first because at strong coupling the stable window can
    be much narrower than the scanned interval.
    """
    lo, hi = map(float, U_range)
    if not hi > lo:
        raise DomainError("U_range must be increasing")
    grid = np.linspace(lo, hi, max(int(n_grid), 2))
    flags = [_unstable(p, U, which) for U in grid]
    out = []
    for i in range(len(grid) - 1):
        if flags[i] == flags[i + 1]:
            continue
        a, b, fa = grid[i], grid[i + 1], flags[i]
        while b - a > tol:
            mid = 0.5 * (a + b)
            if _unstable(p, mid, which) == fa:
                a = mid
            else:
                b = mid
        out.append(float(0.5 * (a + b)))
    return out


def stability_scan(p: SemiParams, U_range: tuple[float, float], which: str = "normal",
                   tol: float = 1e-3, n_grid: int = 801) -> Optional[float]:
    """Lowest stability crossing in ``U_range``; None if the sign never changes."""
    found = stability_crossings(p, U_range, which, tol, n_grid)
    return found[0] if found else None


def persistent_oscillation(p: SemiParams, s0: SemiState, horizon: float = 200.0,
                           threshold: float = 1e-4, tail: float = 0.1) -> bool:
    """True if |rhs| stays above ``threshold`` over the last ``tail`` fraction of the run."""
    t = np.linspace(0.0, horizon, 2001)
    traj = semi_integrate(s0, p, t, rtol=1e-9, atol=1e-11)
    start = int((1 - tail) * len(t))
    speeds = [np.linalg.norm(_flow(s.to_vector(), p)) for s in traj[start:]]
    return bool(min(speeds) > threshold)
