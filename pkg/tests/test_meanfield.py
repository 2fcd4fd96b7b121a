"""Mean-field equations: fixed points, conservation laws, closed-form limits."""

import math

import numpy as np
import pytest

from mlcavity import (
    AtomNumberModel,
    DriveParams,
    IntegrationControl,
    LevelScheme,
    TransitionGeometry,
    coupling_set,
    derivatives,
    effective_coupling,
    initial_state,
    integrate,
    intracavity_intensity_ss,
)

GAMMA = 2 * math.pi * 6.065e6
KAPPA = 2 * math.pi * 6.7e6
G0 = 2 * math.pi * 210e3


def _scheme(two_fg=4, geometry=TransitionGeometry.PI, g0=G0):
    return LevelScheme(
        two_fg=two_fg, two_fe=two_fg + 2, geometry=geometry, g0=g0, gamma=GAMMA
    )


def _equal_state(couplings):
    return initial_state(couplings, {m: 1.0 for m in couplings.ground})


def test_dark_state_is_fixed_point_without_drive():
    couplings = coupling_set(_scheme())
    state = _equal_state(couplings)
    drive = DriveParams(eta=0.0, delta_a=1e6, delta_c=-2e6, kappa=KAPPA)
    dstate = derivatives(state, drive, couplings, 1000.0)
    assert dstate.a == 0
    assert all(v == 0 for v in dstate.sigma.values())
    assert all(v == 0 for v in dstate.P.values())
    assert all(v == 0 for v in dstate.rho_ee.values())


def test_zero_atoms_decouple_to_empty_cavity():
    couplings = coupling_set(_scheme())
    drive = DriveParams(eta=0.3 * KAPPA, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    series = integrate(
        _equal_state(couplings),
        drive,
        couplings,
        AtomNumberModel.constant(0.0),
        (0.0, 25.0 / KAPPA),
    )
    # with no atoms the coherence sum drops out of the cavity equation and
    # the field settles at the empty-cavity value
    assert series.photon_number[-1] == pytest.approx(drive.eta**2 / KAPPA**2, rel=1e-6)


def test_population_flow_is_conservative_at_random_states():
    rng = np.random.default_rng(7)
    couplings = coupling_set(_scheme())
    drive = DriveParams(eta=0.2 * KAPPA, delta_a=3e6, delta_c=-1e6, kappa=KAPPA)
    for _ in range(10):
        pops = rng.random(len(couplings.ground))
        pops /= pops.sum()
        state = initial_state(couplings, dict(zip(couplings.ground, pops)))
        state.a = complex(rng.normal(), rng.normal())
        for m in state.sigma:
            state.sigma[m] = 1e-3 * complex(rng.normal(), rng.normal())
        for m in state.rho_ee:
            state.rho_ee[m] = 1e-4 * rng.random()
        dstate = derivatives(state, drive, couplings, 500.0)
        # the P equations only redistribute: loss to each excited partner is
        # exactly balanced by the branching gains, so d/dt (sum P) = 0
        assert sum(dstate.P.values()) == pytest.approx(0.0, abs=1e-9)


def test_coherence_decay_without_drive():
    couplings = coupling_set(_scheme())
    state = _equal_state(couplings)
    for m in state.sigma:
        state.sigma[m] = 1e-3
    drive = DriveParams(eta=0.0, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    t_end = 4.0 / GAMMA
    series = integrate(
        state,
        drive,
        couplings,
        AtomNumberModel.constant(0.0),
        (0.0, t_end),
        t_eval=np.array([0.0, t_end]),
    )
    # sigma decays at Gamma/2 once the cavity stays empty (N = 0)
    expected = 1e-3 * math.exp(-0.5 * GAMMA * t_end)
    assert abs(series.sigma[-1, 0]) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("delta_mhz", [-24.0, -8.0, 0.0, 8.0, 24.0])
def test_weak_drive_steady_state_matches_closed_form(delta_mhz):
    couplings = coupling_set(_scheme())
    delta = 2 * math.pi * delta_mhz * 1e6
    # weak enough that optical pumping barely moves the populations within
    # the settling window, keeping the frozen-population closed form valid
    drive = DriveParams(eta=0.02 * KAPPA, delta_a=delta, delta_c=delta, kappa=KAPPA)
    n_atoms = 1000.0
    series = integrate(
        _equal_state(couplings),
        drive,
        couplings,
        AtomNumberModel.constant(n_atoms),
        (0.0, 30e-6),
        ctrl=IntegrationControl(rtol=1e-10, atol=1e-13),
    )
    pops = {m: 1.0 / len(couplings.ground) for m in couplings.ground}
    g_eff = effective_coupling(couplings, pops)
    expected = intracavity_intensity_ss(drive, GAMMA, n_atoms, g_eff)
    assert series.photon_number[-1] == pytest.approx(expected, rel=1e-4)


def test_conservation_drift_bounded_by_tolerance():
    couplings = coupling_set(_scheme())
    drive = DriveParams(eta=0.5 * KAPPA, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    ctrl = IntegrationControl(rtol=1e-8, atol=1e-10)
    series = integrate(
        _equal_state(couplings),
        drive,
        couplings,
        AtomNumberModel.constant(200.0),
        (0.0, 100e-6),
        ctrl=ctrl,
    )
    assert series.meta["conservation_drift"] < 10 * ctrl.rtol
    assert np.all(series.populations > -10 * ctrl.rtol)
    assert np.all(series.rho_ee > -10 * ctrl.rtol)


def test_optical_pumping_direction_under_pi_drive():
    couplings = coupling_set(_scheme())
    drive = DriveParams(eta=0.5 * KAPPA, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    series = integrate(
        _equal_state(couplings),
        drive,
        couplings,
        AtomNumberModel.constant(100.0),
        (0.0, 2e-3),
    )
    # pi pumping piles population toward small |m|, raising g_eff
    assert series.population(0)[-1] > series.population(0)[0]
    assert series.population(4)[-1] < series.population(4)[0]
    assert series.g_eff[-1] > series.g_eff[0]


def test_atom_number_models():
    const = AtomNumberModel.constant(5.0)
    assert const.at(0.0) == const.at(1.0) == 5.0

    ball = AtomNumberModel.ballistic(
        n0=100.0, temperature=75e-6, sigma0=200e-6, waist=80e-6, mass=1.44316060e-25
    )
    assert ball.at(0.0) == pytest.approx(
        100.0 * 80e-6**2 / (80e-6**2 + 4 * 200e-6**2)
    )
    assert ball.at(5e-3) < ball.at(1e-3) < ball.at(0.0)

    table = AtomNumberModel.table([0.0, 1.0, 2.0], [10.0, 4.0, 0.0])
    assert table.at(0.5) == pytest.approx(7.0)
    assert table.at(3.0) == 0.0  # clamped to the last entry

    for model in (const, ball, table):
        variant, params, tt, tv = model.packed()
        for t in (0.0, 0.7e-3, 2.0e-3):
            from mlcavity.meanfield import _n_at

            assert _n_at(t, variant, params, tt, tv) == pytest.approx(model.at(t))


def test_atom_number_model_validation():
    with pytest.raises(ValueError):
        AtomNumberModel.constant(-1.0)
    with pytest.raises(ValueError):
        AtomNumberModel.table([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        AtomNumberModel.table([0.0, 1.0], [1.0, -1.0])
    with pytest.raises(ValueError):
        AtomNumberModel.ballistic(1.0, -1.0, 0.0, 1.0, 1.0)


def test_time_dependent_atom_number_enters_dynamics():
    couplings = coupling_set(_scheme())
    drive = DriveParams(eta=0.05 * KAPPA, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    table = AtomNumberModel.table([0.0, 1e-4, 2e-4], [2000.0, 1000.0, 500.0])
    series = integrate(
        _equal_state(couplings), drive, couplings, table, (0.0, 2e-4)
    )
    assert series.n_eff[0] == 2000.0
    assert series.n_eff[-1] == 500.0
    # fewer atoms -> weaker collective block -> more light gets through
    assert series.photon_number[-1] > series.photon_number[len(series.times) // 2]


def test_initial_state_validation():
    couplings = coupling_set(_scheme())
    with pytest.raises(ValueError):
        initial_state(couplings, {0: -1.0})
    with pytest.raises(ValueError):
        initial_state(couplings, {m: 0.0 for m in couplings.ground})
    state = initial_state(couplings, {0: 2.0, 2: 2.0})
    assert state.P[0] == pytest.approx(0.5)
    assert state.P[4] == 0.0


def test_derivatives_rejects_unknown_sublevels():
    couplings = coupling_set(_scheme())
    state = _equal_state(couplings)
    state.P[99] = 0.1
    drive = DriveParams(eta=0.0, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    with pytest.raises(ValueError):
        derivatives(state, drive, couplings, 1.0)


def test_drive_params_validation():
    with pytest.raises(ValueError):
        DriveParams(eta=1.0, delta_a=0.0, delta_c=0.0, kappa=0.0)
    with pytest.raises(ValueError):
        DriveParams(eta=-1.0, delta_a=0.0, delta_c=0.0, kappa=1.0)


def test_state_roundtrip_through_series():
    couplings = coupling_set(_scheme())
    drive = DriveParams(eta=0.1 * KAPPA, delta_a=0.0, delta_c=0.0, kappa=KAPPA)
    series = integrate(
        _equal_state(couplings),
        drive,
        couplings,
        AtomNumberModel.constant(50.0),
        (0.0, 20e-6),
        t_eval=np.array([0.0, 10e-6, 20e-6]),
    )
    mid = series.state_at(1)
    resumed = integrate(
        mid,
        drive,
        couplings,
        AtomNumberModel.constant(50.0),
        (10e-6, 20e-6),
        t_eval=np.array([20e-6]),
    )
    final = series.final_state()
    assert resumed.final_state().a == pytest.approx(final.a, rel=1e-6)
    for m in final.P:
        assert resumed.final_state().P[m] == pytest.approx(final.P[m], abs=1e-9)
