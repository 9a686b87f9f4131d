"""Full D1 and effective Rabi generators, and the parameter maps between them.

Units: every stored frequency is an ordinary frequency in MHz.  Generators
carry angular quantities, i.e. the Hamiltonian operators and dissipator rates
are multiplied by 2*pi, so time is in microseconds throughout.

Dissipators follow ``D[L] rho = 2 L rho L^dag - L^dag L rho - rho L^dag L``,
weighted by their rate.

Qubit convention.  sigma_z = |e><e| - |g><g| and sigma_+ = |e><g| on the
ordered basis (|g>, |e>).  In the full atomic model |e> is |F=2, m=-2> and
|g> is |F=1, m=-1>; with that identification the two-photon Raman couplings
give sigma_+ a (co-rotating) the amplitude g1 and sigma_- a the amplitude g2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from . import atom as _atom
from .atom import AtomConstants
from .errors import (
    AdiabaticityError,
    DomainError,
    SingularDetuningError,
    TruncationError,
)
from .hilbert import (
    DensityMatrix,
    Operator,
    SpaceLayout,
    basis_ket,
    eigh,
    embed,
    fock_ops,
    identity,
    qubit_ops,
    tensor,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SQRT6 = math.sqrt(6.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Laser, cavity and atom inputs of the full model (MHz)."""

    g_cav: float
    Omega1: float
    Omega2: float
    Delta1: float
    Delta2: float
    delta: float = 0.0
    delta_cav: float = 0.0
    kappa: float = 0.0
    gamma: Optional[float] = None
    atom: AtomConstants = field(default_factory=AtomConstants)

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.atom.gamma)

    @property
    def omega_tilde2(self) -> float:
        return self.atom.omega_2 - self.delta

    def detuning_identity_residual(self) -> float:
        """Delta2 + omega_21' - Delta1 - omega_tilde2 (zero for a consistent set)."""
        return self.Delta2 + self.atom.omega_21p - self.Delta1 - self.omega_tilde2

    def adiabatic_margin(self) -> float:
        """min |Delta| / max(rate); the large-detuning regime needs this above 10."""
        rates = max(abs(self.g_cav), abs(self.Omega1), abs(self.Omega2),
                    self.kappa, self.gamma)
        if rates == 0:
            return math.inf
        return min(abs(self.Delta1), abs(self.Delta2)) / rates

    def is_adiabatic(self, factor: float = 10.0) -> bool:
        return self.adiabatic_margin() > factor


@dataclass(frozen=True)
class EffectiveParams:
    """Generalized Rabi parameters (MHz).

    ``g_counter`` is the amplitude of sigma_- a + sigma_+ a^dag; ``None`` means
    the balanced case where it equals ``g_eff``.
    """

    omega0: float
    omega: float
    g_eff: float
    U: float = 0.0
    kappa: float = 0.0
    negate_hamiltonian: bool = False
    g_counter: Optional[float] = None

    @property
    def g2(self) -> float:
        return self.g_eff if self.g_counter is None else self.g_counter


@dataclass
class EffectiveResult:
    """Output of :func:`effective_params`; unpacks as ``(eff, g1, g2)``."""

    eff: EffectiveParams
    g1: float
    g2: float
    balanced: bool
    warning: Optional[str] = None

    def __iter__(self):
        return iter((self.eff, self.g1, self.g2))


@dataclass
class TimeDependentGenerator:
    """Lindblad generator with harmonically driven Hamiltonian terms.

    ``H(t) = H_static + sum_k (H_k exp(-2 pi i nu_k t) + h.c.)``.  All
    operators already include the factor 2*pi; ``nu_k`` is in MHz.
    """

    layout: SpaceLayout
    H_static: Operator
    harmonics: list = field(default_factory=list)
    dissipators: list = field(default_factory=list)
    probes: dict = field(default_factory=dict)
    qubit_factor: str = "qubit"
    qubit_levels: dict = field(default_factory=dict)
    cavity_factor: str = "cavity"
    meta: dict = field(default_factory=dict)

    @property
    def is_static(self) -> bool:
        return not self.harmonics

    @property
    def max_frequency(self) -> float:
        return max((abs(nu) for nu, _ in self.harmonics), default=0.0)

    def hamiltonian(self, t: float) -> Operator:
        H = self.H_static.data
        for nu, Hk in self.harmonics:
            c = np.exp(-1j * TWO_PI * nu * t)
            H = H + c * Hk.data + np.conj(c) * Hk.data.conj().T
        return Operator(self.layout, H, hermitian=True)

    def basis_state(self, qubit: str, n: int = 0) -> DensityMatrix:
        """|qubit, n><qubit, n| with qubit in {'g', 'e'}."""
        if qubit not in self.qubit_levels:
            raise DomainError(f"qubit label must be 'g' or 'e', got {qubit!r}")
        n_max = self.layout.dim(self.cavity_factor)
        if not 0 <= n < n_max:
            raise DomainError(f"Fock index {n} outside 0..{n_max - 1}")
        idx = {self.qubit_factor: self.qubit_levels[qubit], self.cavity_factor: n}
        return DensityMatrix.from_ket(self.layout, basis_ket(self.layout, **idx))

    def max_hermiticity_error(self, times=(0.0, 0.1, 0.37)) -> float:
        errs = []
        for t in times:
            H = self.hamiltonian(t).data
            diff = H - H.conj().T
            norm = abs(H).sum(axis=1).max() if sp.issparse(H) else np.abs(H).sum(axis=1).max()
            dnorm = abs(diff).sum(axis=1).max() if sp.issparse(diff) else np.abs(diff).sum(axis=1).max()
            errs.append(float(dnorm) / float(norm) if norm else 0.0)
        return max(errs)


# --- parameter maps -----------------------------------------------------------------


def _inv(x: float, what: str) -> float:
    if x == 0:
        raise SingularDetuningError(f"zero denominator: {what}")
    return 1.0 / x


def _light_shift_terms(phys: PhysicalParams, wt2: float) -> float:
    """Ground-state differential light shift omega0 - delta for given omega_tilde2."""
    O1s, O2s = abs(phys.Omega1) ** 2, abs(phys.Omega2) ** 2
    D1, D2, w21 = phys.Delta1, phys.Delta2, phys.atom.omega_21p
    return (0.5 * O1s * _inv(D1, "Delta1")
            - 0.5 * O2s * _inv(D2, "Delta2")
            - O2s / 6.0 * _inv(D2 + w21, "Delta2 + omega_21'")
            + O2s / 12.0 * _inv(D2 + wt2, "Delta2 + omega_tilde2")
            + O2s / 12.0 * _inv(D1 + 2 * wt2, "Delta1 + 2 omega_tilde2"))


def _cavity_shift(g_cav, D1, D2, w21) -> float:
    return -0.5 * abs(g_cav) ** 2 * (_inv(D1, "Delta1") / 3.0
                                     + _inv(D2 + w21, "Delta2 + omega_21'") / 4.0
                                     + _inv(D2, "Delta2") / 12.0)


def nonlinear_U(g_cav, D1, D2, w21) -> float:
    return abs(g_cav) ** 2 * (_inv(D2 + w21, "Delta2 + omega_21'") / 4.0
                              + _inv(D2, "Delta2") / 12.0
                              - _inv(D1, "Delta1") / 3.0)


def raman_couplings(phys: PhysicalParams) -> tuple[float, float]:
    """(g1, g2): amplitudes of sigma_+ a and sigma_- a."""
    D1, D2, w21 = phys.Delta1, phys.Delta2, phys.atom.omega_21p
    g1 = phys.g_cav * phys.Omega2 / (2 * SQRT6) * (
        _inv(D2, "Delta2") + _inv(D2 + w21, "Delta2 + omega_21'"))
    g2 = phys.g_cav * phys.Omega1 / SQRT6 * _inv(D1, "Delta1")
    return g1, g2


def effective_params(phys: PhysicalParams, omega_tilde2: str = "after",
                     kappa: Optional[float] = None) -> EffectiveResult:
    """Map physical parameters to the generalized Rabi parameters.

    Parameters
    ----------
    phys : PhysicalParams
    omega_tilde2 : {"after", "before"}
        Evaluate omega_tilde2 in the off-resonant light shifts as
        ``omega_2 - delta`` ("after", default) or as ``omega_2`` ("before").
    kappa : float, optional
        Cavity decay to carry over; defaults to ``phys.kappa``.

    Returns
    -------
    EffectiveResult
        ``g_eff`` is g1.  If g1 and g2 differ by more than 1e-9 (relative)
        the result is flagged unbalanced and ``g_counter`` holds g2.
    """
    if omega_tilde2 == "after":
        wt2 = phys.omega_tilde2
    elif omega_tilde2 == "before":
        wt2 = phys.atom.omega_2
    else:
        raise DomainError(f"omega_tilde2 must be 'after' or 'before', got {omega_tilde2!r}")
    D1, D2, w21 = phys.Delta1, phys.Delta2, phys.atom.omega_21p
    omega0 = _light_shift_terms(phys, wt2) + phys.delta
    omega = phys.delta_cav + _cavity_shift(phys.g_cav, D1, D2, w21)
    U = nonlinear_U(phys.g_cav, D1, D2, w21)
    g1, g2 = raman_couplings(phys)
    balanced = abs(g1 - g2) < 1e-9 * max(abs(g1), 1.0)
    warning = None
    if not balanced:
        warning = f"unbalanced Raman couplings: g1={g1:.6g}, g2={g2:.6g} MHz"
    eff = EffectiveParams(
        omega0=omega0, omega=omega, g_eff=g1, U=U,
        kappa=phys.kappa if kappa is None else kappa,
        g_counter=None if balanced else g2,
    )
    return EffectiveResult(eff, g1, g2, balanced, warning)


def balance_omega2(phys: PhysicalParams) -> float:
    """Omega2 that makes g1 equal g2 for the given Omega1 and detunings."""
    D1, D2, w21 = phys.Delta1, phys.Delta2, phys.atom.omega_21p
    s = _inv(D2, "Delta2") + _inv(D2 + w21, "Delta2 + omega_21'")
    if s == 0:
        raise SingularDetuningError("1/Delta2 + 1/(Delta2 + omega_21') vanishes")
    return 2.0 * phys.Omega1 * _inv(D1, "Delta1") / s


def design_physical(targets: EffectiveParams, g_cav: float, Delta2: float,
                    atom: AtomConstants = AtomConstants(), gamma: Optional[float] = None,
                    adiabatic_factor: float = 10.0, max_iter: int = 50) -> PhysicalParams:
    """Physical settings that realize ``targets.omega0, omega, g_eff``.

    U is not independent once ``g_cav`` and the detunings are fixed; use
    :func:`delta2_for_U` to pick ``Delta2`` for a target U first.
    """
    if g_cav <= 0:
        raise DomainError(f"g_cav must be positive, got {g_cav}")
    delta = 0.0
    phys = None
    for _ in range(max_iter):
        Delta1 = Delta2 + atom.omega_21p - (atom.omega_2 - delta)
        Omega1 = targets.g_eff * SQRT6 * Delta1 / g_cav
        if abs(Omega1) > abs(Delta1) / adiabatic_factor:
            raise AdiabaticityError(
                f"g_eff={targets.g_eff} needs |Omega1|={abs(Omega1):.4g} MHz, above "
                f"|Delta1|/{adiabatic_factor:g}={abs(Delta1) / adiabatic_factor:.4g} MHz"
            )
        base = PhysicalParams(g_cav, Omega1, 0.0, Delta1, Delta2, delta, 0.0,
                              targets.kappa, gamma, atom)
        Omega2 = balance_omega2(base)
        base = replace(base, Omega2=Omega2)
        # omega0 = shifts(omega_2 - delta) + delta; fixed point in delta
        new_delta = delta
        for _ in range(max_iter):
            trial = replace(base, delta=new_delta)
            nxt = targets.omega0 - _light_shift_terms(trial, trial.omega_tilde2)
            if abs(nxt - new_delta) < 1e-13 * max(1.0, abs(nxt)):
                new_delta = nxt
                break
            new_delta = nxt
        delta_cav = targets.omega - _cavity_shift(g_cav, Delta1, Delta2, atom.omega_21p)
        phys = replace(base, delta=new_delta, delta_cav=delta_cav)
        if abs(new_delta - delta) < 1e-12 * max(1.0, abs(new_delta)):
            break
        delta = new_delta
    log.debug("design_physical: U = %.6g MHz",
              nonlinear_U(g_cav, phys.Delta1, Delta2, atom.omega_21p))
    return phys


def delta2_for_U(U_target: float, g_cav: float, atom: AtomConstants = AtomConstants(),
                 bracket=(-60000.0, -1000.0), tol: float = 1e-4) -> float:
    """Delta2 giving nonlinearity ``U_target`` with Delta1 tied by the detuning identity."""
    w21, w2 = atom.omega_21p, atom.omega_2

    def f(D2):
        return nonlinear_U(g_cav, D2 + w21 - w2, D2, w21) - U_target

    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise DomainError(f"U={U_target} MHz not reachable for Delta2 in {bracket}")
    D2 = brentq(f, lo, hi, xtol=1e-9, rtol=1e-14)
    if abs(f(D2)) > tol:
        raise DomainError(f"Delta2 search missed U by {abs(f(D2)):.3g} MHz")
    return D2


# --- generators ---------------------------------------------------------------------


def _parity_op(sz: Operator, num: Operator) -> Operator:
    sign = np.diag(num.dense()).real.round().astype(int) % 2
    par = sp.diags(np.where(sign == 0, 1.0, -1.0))
    return Operator(sz.layout, -(sz.data @ par) if not sz.is_sparse else -(sz.csr() @ par),
                    hermitian=True)


def build_effective(eff: EffectiveParams, n_max: int, rotating_wave: bool = False) -> TimeDependentGenerator:
    """Generalized Rabi generator on qubit (|g>, |e>) x Fock(n_max).

    ``rotating_wave=True`` drops the counter-rotating terms (Jaynes-Cummings).
    """
    sz1, sp1, sm1 = qubit_ops()
    a1, n1 = fock_ops(n_max)
    layout = sz1.layout * a1.layout
    Iq = identity(sz1.layout)
    Ic = identity(a1.layout)
    sz, splus = tensor([sz1, Ic]), tensor([sp1, Ic])
    a, num = tensor([Iq, a1]), tensor([Iq, n1])
    sminus, adag = splus.dag(), a.dag()
    co = splus @ a + sminus @ adag
    counter = sminus @ a + splus @ adag
    H = 0.5 * eff.omega0 * sz + eff.omega * num + eff.g_eff * co + 0.5 * eff.U * (sz @ num)
    if not rotating_wave:
        H = H + eff.g2 * counter
    H = TWO_PI * H
    if eff.negate_hamiltonian:
        H = -H
    H = Operator(layout, H.data, hermitian=True)
    dissipators = [(TWO_PI * eff.kappa, a)] if eff.kappa > 0 else []
    nproj = Operator(layout, tensor([Iq, Operator(a1.layout, np.diag(np.eye(n_max)[0]))]).data)
    e_proj = tensor([Operator(sz1.layout, np.diag([0.0, 1.0])), Ic])
    g_proj = tensor([Operator(sz1.layout, np.diag([1.0, 0.0])), Ic])
    probes = {
        "n": num,
        "sz": sz,
        "P_e0": e_proj @ nproj,
        "P_g0": g_proj @ nproj,
        "P_qubit": identity(layout),
        "parity": _parity_op(sz, num),
    }
    return TimeDependentGenerator(
        layout, H, [], dissipators, probes,
        qubit_factor="qubit", qubit_levels={"g": 0, "e": 1},
        meta={"kind": "effective", "params": eff, "n_max": n_max},
    )


# residual rotation of each coupling term, in units of omega_tilde2
_FRAME_NU = {
    # (drive, F, F') -> nu / omega_tilde2 for the term written as X e^{+i nu t}
    ("Omega1", 1, 1): 1, ("Omega1", 1, 2): 0, ("Omega1", 2, 1): 2, ("Omega1", 2, 2): 1,
    ("Omega2", 1, 1): -1, ("Omega2", 1, 2): -2, ("Omega2", 2, 1): 0, ("Omega2", 2, 2): -1,
    ("g_cav", 1, 1): 0, ("g_cav", 1, 2): -1, ("g_cav", 2, 1): 1, ("g_cav", 2, 2): 0,
}
_POLARIZATION = {"Omega1": -1, "Omega2": 1, "g_cav": 0}


def frame_rotation(drive: str, F: int, Fp: int) -> int:
    """Residual rotation frequency of a coupling term in units of omega_tilde2.

    Derived from the frame energies F=1: 0, F=2: w, F'=1: wL2 + w,
    F'=2: wL1 = wL2 + 2w, photon: wL2 + w, with w = omega_tilde2.
    """
    return _FRAME_NU[(drive, F, Fp)]


def build_full(phys: PhysicalParams, n_max: int, waive_adiabatic: bool = False,
               adiabatic_factor: float = 10.0) -> TimeDependentGenerator:
    """Full 16-level D1 generator on atom (16) x Fock(n_max) in the rotating frame."""
    if n_max < 8:
        raise TruncationError(f"full model needs n_max >= 8, got {n_max}")
    if not waive_adiabatic and not phys.is_adiabatic(adiabatic_factor):
        raise AdiabaticityError(
            f"detunings only {phys.adiabatic_margin():.3g}x the largest rate; "
            "pass waive_adiabatic=True to build anyway"
        )
    alay = _atom.atom_layout()
    a1, n1 = fock_ops(n_max)
    layout = alay * a1.layout
    Ia = sp.identity(16, format="csr")
    Ic = sp.identity(n_max, format="csr")
    a_full = sp.kron(Ia, a1.csr(), format="csr")
    adag_full = a_full.conj().T.tocsr()

    def proj(manifold, F):
        return sp.csr_matrix(_atom.projector(manifold, F).dense())

    diag = (phys.delta * proj("ground", 2) + phys.Delta2 * proj("excited", 1)
            + phys.Delta1 * proj("excited", 2))
    H_static = sp.kron(diag, Ic) + phys.delta_cav * sp.kron(Ia, n1.csr())

    amps = {"Omega1": phys.Omega1, "Omega2": phys.Omega2, "g_cav": phys.g_cav}
    buckets: dict[int, sp.csr_matrix] = {}
    placement = {}
    for drive, amp in amps.items():
        p = _POLARIZATION[drive]
        for F in (1, 2):
            for Fp in (1, 2):
                A = sp.kron(sp.csr_matrix(_atom.transition_matrix(F, Fp, p)), Ic, format="csr")
                X = amp * (A @ adag_full if drive == "g_cav" else A)
                nu = frame_rotation(drive, F, Fp)
                placement[(drive, F, Fp)] = nu
                if nu == 0:
                    H_static = H_static + X + X.conj().T
                elif nu > 0:
                    buckets[nu] = buckets.get(nu, 0) + X.conj().T
                else:
                    buckets[-nu] = buckets.get(-nu, 0) + X
    wt2 = phys.omega_tilde2
    H_static = Operator(layout, TWO_PI * sp.csr_matrix(H_static), hermitian=True)
    harmonics = [(k * wt2, Operator(layout, TWO_PI * sp.csr_matrix(buckets[k])))
                 for k in sorted(buckets) if sp.csr_matrix(buckets[k]).nnz]

    dissipators = []
    if phys.kappa > 0:
        dissipators.append((TWO_PI * phys.kappa, Operator(layout, a_full)))
    if phys.gamma > 0:
        for F, Fp, p in _atom.decay_channels():
            A = sp.kron(sp.csr_matrix(_atom.transition_matrix(F, Fp, p)), Ic, format="csr")
            if A.nnz:
                dissipators.append((TWO_PI * phys.gamma / 2.0, Operator(layout, A)))

    e_lvl = _atom.level_index("ground", 2, -2)
    g_lvl = _atom.level_index("ground", 1, -1)
    diag_e = np.zeros(16)
    diag_e[e_lvl] = 1.0
    diag_g = np.zeros(16)
    diag_g[g_lvl] = 1.0
    Pe = sp.kron(sp.diags(diag_e), Ic, format="csr")
    Pg = sp.kron(sp.diags(diag_g), Ic, format="csr")
    vac = sp.kron(Ia, sp.diags(np.eye(n_max)[0]), format="csr")
    num = Operator(layout, sp.kron(Ia, n1.csr(), format="csr"), hermitian=True)
    sz = Operator(layout, Pe - Pg, hermitian=True)
    probes = {
        "n": num,
        "sz": sz,
        "P_e0": Operator(layout, Pe @ vac, hermitian=True),
        "P_g0": Operator(layout, Pg @ vac, hermitian=True),
        "P_qubit": Operator(layout, Pe + Pg, hermitian=True),
        "parity": _parity_op(sz, num),
        "P_excited": Operator(layout, sp.kron(proj("excited", 1) + proj("excited", 2), Ic,
                                              format="csr"), hermitian=True),
    }
    gen = TimeDependentGenerator(
        layout, H_static, harmonics, dissipators, probes,
        qubit_factor="atom", qubit_levels={"g": g_lvl, "e": e_lvl},
        meta={"kind": "full", "params": phys, "n_max": n_max, "placement": placement},
    )
    err = gen.max_hermiticity_error()
    if err > 1e-12:
        raise AssertionError(f"full Hamiltonian not Hermitian (relative error {err:.3g})")
    return gen


def rabi_spectrum(eff: EffectiveParams, n_max: int, k: int, check: bool = True) -> list[float]:
    """k lowest eigenvalues of H/(2 pi) in MHz, checked against a doubled cutoff."""
    if k > 2 * n_max:
        raise DomainError(f"k={k} exceeds the dimension {2 * n_max}")

    def levels(n):
        H = build_effective(replace(eff, kappa=0.0), n).H_static.dense() / TWO_PI
        return eigh(H)[0][:k]

    ev = levels(n_max)
    if check:
        ev2 = levels(2 * n_max)
        dev = float(np.max(np.abs(ev - ev2)))
        if dev > 1e-6:
            raise TruncationError(
                f"spectrum not converged at n_max={n_max}: doubling moves levels by {dev:.3g} MHz"
            )
    return [float(x) for x in ev]
