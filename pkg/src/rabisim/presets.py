"""Named parameter sets (MHz) with their target effective parameters."""

from __future__ import annotations

from dataclasses import dataclass

from .models import EffectiveParams, PhysicalParams


@dataclass(frozen=True)
class Preset:
    name: str
    phys: PhysicalParams
    expected_eff: EffectiveParams

    @property
    def negate(self) -> bool:
        return self.expected_eff.negate_hamiltonian


def _p(name, g, O1, O2, D1, D2, d, dc, w0, w, geff, U, negate=False):
    return Preset(name, PhysicalParams(g, O1, O2, D1, D2, d, dc),
                  EffectiveParams(w0, w, geff, U, negate_hamiltonian=negate))


# g_cav, Omega1, Omega2, Delta1, Delta2, delta, delta_cav | omega0, omega, g_eff, U
_TABLE = [
    _p("Ia", 200, -160, -120, -26000, -20000, 0.19, 0.40, 0.0, 1.0, 0.5, -0.18),
    _p("IIa", 200, -320, -240, -26000, -20000, 0.77, 0.40, 0.0, 1.0, 1.0, -0.18),
    _p("IIIa", 200, -640, -480, -26000, -20000, 3.1, 0.40, 0.0, 1.0, 2.0, -0.18),
    _p("Ib", 200, -100, -65.0, -17000, -11000, 0.25, -0.034, 0.0, 1.0, 0.5, -0.50),
    _p("IIb", 200, -210, -130, -17000, -11000, 0.99, -0.034, 0.0, 1.0, 1.0, -0.50),
    _p("IIIb", 200, -420, -260, -17000, -11000, 4.0, -0.034, 0.0, 1.0, 2.0, -0.50),
    _p("T3-I", 50, -390, -230, -16000, -10000, 4.4, 0.93, 0.0, 1.0, 0.5, -0.04),
    _p("T3-II", 50, -784, -470, -16000, -10000, 18, 0.93, 0.0, 1.0, 1.0, -0.04),
    _p("T3-III", 50, -1560, -940, -16000, -10000, 70, 0.93, 0.0, 1.0, 2.0, -0.04),
    _p("T4-I", 200, -120, -40, -9700, -3700, 1.4, -1.9, 1.0, 1.0, 1.0, -3.0),
    _p("T4-II", 200, -130, -53, -11000, -4800, 1.2, -1.2, 1.0, 1.0, 1.0, -1.5),
    _p("T4-III", 200, -320, -240, -26000, -20000, 1.8, 0.40, 1.0, 1.0, 1.0, -0.18),
    _p("T4-IV", 200, 130, 53, -11000, -4800, -0.80, -3.2, 1.0, 1.0, 1.0, 1.5, negate=True),
    _p("T4-V", 200, 120, 40, -9700, -3700, -0.65, -3.9, 1.0, 1.0, 1.0, 3.0, negate=True),
]

PRESETS = {p.name: p for p in _TABLE}

#: preset groups
BASE_SETS = ["Ia", "IIa", "IIIa", "Ib", "IIb", "IIIb"]
WEAK_CAVITY_SETS = ["T3-I", "T3-II", "T3-III"]
NONLINEAR_SETS = ["T4-I", "T4-II", "T4-III", "T4-IV", "T4-V"]


def get(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
