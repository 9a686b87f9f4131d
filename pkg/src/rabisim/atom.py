"""Rb-87 D1 level structure and dipole transition operators.

Angular momenta are passed around as plain numbers (ints or halves); the
Racah sums below work internally with doubled integers and exact rationals,
so 3-j and 6-j symbols come out exact up to the final square root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .hilbert import Operator, SpaceLayout, embed

ATOM_LABEL = "atom"
N_LEVELS = 16

# electron and nuclear angular momenta for the D1 line
J_GROUND = Fraction(1, 2)
J_EXCITED = Fraction(1, 2)
I_NUCLEAR = Fraction(3, 2)


@dataclass(frozen=True)
class AtomConstants:
    """Hyperfine splittings and decay rate, ordinary frequencies in MHz."""

    omega_2: float = 6835.0
    omega_21p: float = 812.0
    gamma: float = 5.7


@dataclass(frozen=True)
class AtomicLevel:
    manifold: str  # "ground" or "excited"
    F: int
    m: int

    def __post_init__(self):
        if self.manifold not in ("ground", "excited"):
            raise DomainError(f"manifold must be 'ground' or 'excited', got {self.manifold!r}")
        if self.F not in (1, 2) or abs(self.m) > self.F:
            raise DomainError(f"invalid hyperfine level F={self.F}, m={self.m}")

    @property
    def index(self) -> int:
        return level_index(self.manifold, self.F, self.m)

    def __str__(self):
        prime = "'" if self.manifold == "excited" else ""
        return f"|F{prime}={self.F}, m={self.m}>"


def _build_levels():
    out = []
    for manifold in ("ground", "excited"):
        for F in (1, 2):
            out.extend(AtomicLevel(manifold, F, m) for m in range(-F, F + 1))
    return tuple(out)


#: Basis order: F=1 (0-2), F=2 (3-7), F'=1 (8-10), F'=2 (11-15), m ascending.
LEVELS = _build_levels()
_OFFSET = {("ground", 1): 0, ("ground", 2): 3, ("excited", 1): 8, ("excited", 2): 11}


def level_index(manifold: str, F: int, m: int) -> int:
    if (manifold, F) not in _OFFSET or abs(m) > F:
        raise DomainError(f"no level {manifold} F={F} m={m}")
    return _OFFSET[(manifold, F)] + m + F


def atom_layout() -> SpaceLayout:
    return SpaceLayout.single(ATOM_LABEL, N_LEVELS)


# --- angular momentum algebra --------------------------------------------------------


def _twice(j) -> int:
    tj = Fraction(j) * 2
    if tj.denominator != 1:
        raise DomainError(f"{j} is not a multiple of 1/2")
    return int(tj)


def _fact(two_x: int) -> int:
    # factorial of x given 2x; x must be a non-negative integer here
    return math.factorial(two_x // 2)


def _triangle(a: int, b: int, c: int) -> bool:
    # doubled arguments
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _delta_sq(a: int, b: int, c: int) -> Fraction:
    return Fraction(_fact(a + b - c) * _fact(a - b + c) * _fact(-a + b + c), _fact(a + b + c + 2))


def _signed_sqrt(sign: int, sq: Fraction) -> float:
    return sign * math.sqrt(sq) if sq else 0.0


@lru_cache(maxsize=None)
def _wigner3j_2(j1, j2, j3, m1, m2, m3) -> float:
    if m1 + m2 + m3 != 0 or not _triangle(j1, j2, j3):
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j + m) % 2:
            return 0.0
    pre = _delta_sq(j1, j2, j3) * (
        _fact(j1 + m1) * _fact(j1 - m1) * _fact(j2 + m2) * _fact(j2 - m2)
        * _fact(j3 + m3) * _fact(j3 - m3)
    )
    # Racah sum over integer k with all factorial arguments >= 0
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2) // 2
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2) // 2
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        k2 = 2 * k
        den = (_fact(k2) * _fact(j3 - j2 + k2 + m1) * _fact(j3 - j1 + k2 - m2)
               * _fact(j1 + j2 - j3 - k2) * _fact(j1 - k2 - m1) * _fact(j2 - k2 + m2))
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    sign = phase * (1 if total > 0 else -1)
    return _signed_sqrt(sign, pre * total * total)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3-j symbol (j1 j2 j3; m1 m2 m3) by the Racah formula."""
    return _wigner3j_2(*(_twice(x) for x in (j1, j2, j3, m1, m2, m3)))


@lru_cache(maxsize=None)
def _wigner6j_2(j1, j2, j3, j4, j5, j6) -> float:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle(*t) for t in triads):
        return 0.0
    pre = Fraction(1)
    for t in triads:
        pre *= _delta_sq(*t)
    a = [sum(t) for t in triads]
    b = [j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4]
    total = Fraction(0)
    for t in range(max(a) // 2, min(b) // 2 + 1):
        t2 = 2 * t
        den = math.prod(_fact(t2 - x) for x in a) * math.prod(_fact(x - t2) for x in b)
        total += Fraction((-1) ** t * math.factorial(t + 1), den)
    if total == 0:
        return 0.0
    return _signed_sqrt(1 if total > 0 else -1, pre * total * total)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6-j symbol {j1 j2 j3; j4 j5 j6} by the Racah formula."""
    return _wigner6j_2(*(_twice(x) for x in (j1, j2, j3, j4, j5, j6)))


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention."""
    two = [_twice(x) for x in (j1, j2, M)]
    phase = -1 if ((two[0] - two[1] + two[2]) // 2) % 2 else 1
    return phase * math.sqrt(2 * J + 1) * wigner_3j(j1, j2, J, m1, m2, -M)


# --- dipole elements and operators ---------------------------------------------------


def _check_qn(F, m, Fp, mp, p):
    if F not in (1, 2) or Fp not in (1, 2):
        raise DomainError(f"hyperfine numbers must be 1 or 2, got F={F}, F'={Fp}")
    if abs(m) > F or abs(mp) > Fp:
        raise DomainError(f"|m| exceeds F in ({F},{m}) or ({Fp},{mp})")
    if p not in (-1, 0, 1):
        raise DomainError(f"polarization p must be -1, 0 or +1, got {p}")


@lru_cache(maxsize=None)
def dipole_element(F: int, m: int, Fp: int, mp: int, p: int) -> float:
    """<F,m| mu_p |F',m'> in units of the reduced D1 dipole.

    Zero unless m' = m + p.  The overall scale makes the total decay
    strength out of every excited sublevel equal to one.
    """
    _check_qn(F, m, Fp, mp, p)
    if mp != m + p:
        return 0.0
    J, Jp, I = J_GROUND, J_EXCITED, I_NUCLEAR
    # ground |F m> couples to |F' m'> (x) photon |1, -p>
    exponent = Fp + J + 1 + I
    phase = -1 if int(exponent) % 2 else 1
    red = phase * math.sqrt((2 * Fp + 1) * (2 * J + 1)) * wigner_6j(J, Jp, 1, Fp, F, I)
    return red * clebsch_gordan(Fp, mp, 1, -p, F, m)


def transition_matrix(F: int, Fp: int, p: int) -> np.ndarray:
    """16x16 matrix of A^(p)_{FF'} on the bare atomic basis."""
    _check_qn(F, 0, Fp, 0, p)
    mat = np.zeros((N_LEVELS, N_LEVELS))
    for m in range(-F, F + 1):
        mp = m + p
        if abs(mp) <= Fp:
            mat[level_index("ground", F, m), level_index("excited", Fp, mp)] = \
                dipole_element(F, m, Fp, mp, p)
    return mat


def transition_operator(F: int, Fp: int, p: int, layout: SpaceLayout | None = None) -> Operator:
    """Lowering operator sum_m <F,m|mu_p|F',m+p> |F,m><F',m+p| embedded in ``layout``."""
    op = Operator(atom_layout(), transition_matrix(F, Fp, p))
    if layout is None or layout == op.layout:
        return op
    return embed(op, layout)


def decay_channels():
    """All (F, F', p) triples of the D1 line."""
    return [(F, Fp, p) for F in (1, 2) for Fp in (1, 2) for p in (-1, 0, 1)]


def projector(manifold: str, F: int, layout: SpaceLayout | None = None, m: int | None = None) -> Operator:
    """Projector onto a hyperfine manifold, or onto one sublevel if ``m`` is given."""
    diag = np.zeros(N_LEVELS)
    ms = range(-F, F + 1) if m is None else (m,)
    for mm in ms:
        diag[level_index(manifold, F, mm)] = 1.0
    op = Operator(atom_layout(), np.diag(diag), hermitian=True)
    return op if layout is None or layout == op.layout else embed(op, layout)
