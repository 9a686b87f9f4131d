import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabisim.dynamics import (SolverOptions, Trajectory, evolve, fock_tail, leakage_probe,
                              liouvillian, parallel_map, steady_state)
from rabisim.errors import (DegenerateSteadyStateError, DomainError, LayoutError,
                            StiffnessError, TruncationError)
from rabisim.hilbert import DensityMatrix, Operator
from rabisim.models import EffectiveParams, TimeDependentGenerator, build_effective
from rabisim.observables import survival_probability

TWO_PI = 2 * math.pi


def test_options_validation():
    with pytest.raises(DomainError):
        SolverOptions(method="euler")
    with pytest.raises(DomainError):
        SolverOptions(dt=0)
    with pytest.raises(DomainError):
        SolverOptions(rtol=1e-14)


def test_trajectory_validation():
    with pytest.raises(DomainError):
        Trajectory([0, 0], {"n": [1, 2]})
    with pytest.raises(DomainError):
        Trajectory([0, 1], {"n": [1]})
    tr = Trajectory([0, 1], {"n": [1, 2]})
    assert list(tr["n"]) == [1, 2]


@given(st.floats(0.3, 2.0))
@settings(max_examples=6, deadline=None)
def test_displaced_oscillator_closed_form(g):
    # omega0 = U = kappa = 0: <n>(t) = 4 (g/w)^2 sin^2(w t / 2) with w in cycles per us
    w = 1.0
    gen = build_effective(EffectiveParams(0.0, w, g), 50)
    t = np.linspace(0, 1, 11)
    tr = evolve(gen, gen.basis_state("g", 0), t, SolverOptions(rtol=1e-10, atol=1e-12),
                observables=("n", "P_g0"))
    exact = 4 * (g / w) ** 2 * np.sin(math.pi * w * t) ** 2
    assert np.max(np.abs(tr["n"] - exact)) < 1e-6
    assert abs(tr["P_g0"][-1] - 1) < 1e-6


def test_fixed_step_matches_adaptive():
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.8, -0.3, 0.1), 20)
    t = np.linspace(0, 0.5, 6)
    a = evolve(gen, gen.basis_state("e"), t, SolverOptions(rtol=1e-10, atol=1e-12))
    b = evolve(gen, gen.basis_state("e"), t, SolverOptions(method="fixed_rk4", dt=1e-3))
    for k in ("n", "sz", "P_e0"):
        assert np.max(np.abs(a[k] - b[k])) < 1e-8
    assert a.info["method"] == "adaptive_rk45" and b.info["method"] == "fixed_rk4"


def test_fixed_step_needs_dt_for_static():
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.5), 8)
    with pytest.raises(DomainError):
        evolve(gen, gen.basis_state("e"), [0, 0.1], SolverOptions(method="fixed_rk4"))


def test_harmonic_generator_matches_rotating_frame():
    # sigma_+ e^{-i nu t} + h.c. on a qubit split by nu is a static Rabi problem in the rotating frame
    gen0 = build_effective(EffectiveParams(1.0, 1.0, 0.0), 2)
    splus = np.kron(np.array([[0, 0], [1, 0]]), np.eye(2))  # |e><g|
    nu, Om = 1.0, 0.25
    H0 = Operator(gen0.layout, TWO_PI * 0.5 * nu * np.kron(np.diag([-1.0, 1.0]), np.eye(2)))
    Hk = Operator(gen0.layout, TWO_PI * Om * splus)
    gen = replace(gen0, H_static=H0, harmonics=[(nu, Hk)], dissipators=[])
    t = np.linspace(0, 2, 5)
    tr = evolve(gen, gen.basis_state("g"), t, SolverOptions(dt=1e-3, fock_guard=False),
                observables=("sz",))
    # resonant Rabi flopping at 2 * Om
    assert np.allclose(tr["sz"], -np.cos(TWO_PI * 2 * Om * t), atol=1e-8)


def test_bad_inputs():
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.5), 8)
    other = build_effective(EffectiveParams(1.0, 1.0, 0.5), 9)
    with pytest.raises(LayoutError):
        evolve(gen, other.basis_state("e"), [0, 1])
    with pytest.raises(DomainError):
        evolve(gen, gen.basis_state("e"), [1, 0])
    with pytest.raises(LayoutError):
        evolve(gen, gen.basis_state("e"), [0, 1], observables=("nope",))


def test_fock_guard_trips():
    gen = build_effective(EffectiveParams(0.0, 1.0, 2.0), 10)
    with pytest.raises(TruncationError, match="t="):
        evolve(gen, gen.basis_state("g"), np.linspace(0, 0.5, 6))


def test_liouvillian_trace_preserving():
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.7, 0.2, 0.3), 6)
    L = liouvillian(gen)
    n = gen.layout.total_dim
    tr_row = np.eye(n).ravel()
    assert np.max(np.abs(tr_row @ L.toarray())) < 1e-12


def test_steady_state_damped_cavity_is_vacuum_free_atom():
    # no qubit coupling: only the cavity relaxes, qubit populations stay arbitrary
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.0, 0.0, 0.5), 6)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(gen)
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.5), 6)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(gen)


def test_steady_state_residual_and_cutoff():
    eff = EffectiveParams(1.0, 1.0, 2.0, 0.0, 0.2)
    gen = build_effective(eff, 60)
    rho, info = steady_state(gen, return_info=True)
    assert info["residual"] < 1e-10 * info["liouvillian_norm"]
    assert info["fock_tail"] < 1e-6
    n60 = rho.expect(gen.probes["n"])
    gen2 = build_effective(eff, 120)
    n120 = steady_state(gen2).expect(gen2.probes["n"])
    assert abs(n60 - n120) / n120 < 0.01


def test_steady_state_frozen_values():
    gen = build_effective(EffectiveParams(1.0, 1.0, 2.0, -2.1, 0.2), 60)
    rho = steady_state(gen)
    assert rho.expect(gen.probes["n"]) == pytest.approx(6.0842252, abs=1e-5)
    assert rho.expect(gen.probes["sz"]) == pytest.approx(0.6717634, abs=1e-5)


def test_steady_state_needs_static():
    gen = build_effective(EffectiveParams(1.0, 1.0, 0.5, 0, 0.1), 6)
    gen = replace(gen, harmonics=[(1.0, gen.probes["n"])])
    with pytest.raises(DomainError):
        steady_state(gen)


def test_leakage_probe_closed_system():
    gen = build_effective(EffectiveParams(0.0, 1.0, 0.5, 0.0, 0.1), 12)
    gamma, resid = leakage_probe(gen, gen.basis_state("e"), 1.0, n_samples=11)
    assert abs(gamma) < 1e-10 and resid < 1e-10


def test_parallel_map_order():
    assert parallel_map(lambda x: x * x, range(6), workers=1) == [0, 1, 4, 9, 16, 25]
