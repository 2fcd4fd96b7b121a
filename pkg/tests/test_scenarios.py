"""Scenario generators: atom-number model, power/potential conventions,
coupling table, transmission dynamics, coefficient landscape."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import c as c_light
from scipy.constants import hbar
from scipy.constants import k as k_boltzmann

from mlcavity import (
    ExperimentConfig,
    atom_number_ballistic,
    classify_regime,
    dipole_potential_depth,
    eta_from_power,
    run_dynamics,
    scenario_fig2,
    scenario_fig3,
    scenario_fig4,
    scenario_fig5,
    steady_state_populations,
)
from mlcavity.scenarios import (
    FIG4_ATOM_NUMBERS,
    RB87_D2_OMEGA,
    RB87_MASS,
    _ballistic_model,
    default_scheme,
)

KAPPA = 2 * math.pi * 6.7e6


def _fast_config(**kwargs):
    """Short-horizon configuration so dynamics tests stay cheap."""
    defaults = dict(t_span=(0.0, 0.5e-3), n_out=51)
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


def test_ballistic_atom_number_formula():
    n0, temp, sigma0, waist = 1000.0, 75e-6, 200e-6, 80e-6
    # direct evaluation of the transverse-overlap formula
    for t in (0.0, 1e-3, 5e-3):
        sig_sq = sigma0**2 + (k_boltzmann * temp / RB87_MASS) * t**2
        expected = n0 * waist**2 / (waist**2 + 4.0 * sig_sq)
        got = atom_number_ballistic(t, n0, temp, sigma0, waist)
        assert got == pytest.approx(expected, rel=1e-12)
    # monotone decrease in time, increase with colder clouds
    assert atom_number_ballistic(2e-3, n0, temp, sigma0, waist) < atom_number_ballistic(
        1e-3, n0, temp, sigma0, waist
    )
    assert atom_number_ballistic(2e-3, n0, temp / 4, sigma0, waist) > atom_number_ballistic(
        2e-3, n0, temp, sigma0, waist
    )


def test_ballistic_model_normalized_to_n0():
    config = _fast_config(n0=11200.0)
    model = _ballistic_model(config)
    # the config n0 is the effective number at release, not the bare cloud size
    assert model.at(0.0) == pytest.approx(config.n0, rel=1e-12)
    assert model.at(3e-3) < config.n0


def test_eta_from_power_conventions():
    omega = RB87_D2_OMEGA
    eta = eta_from_power(2.4e-9, KAPPA, omega, 0.10)
    n = 2.4e-9 * 0.10 / (hbar * omega * c_light)
    assert eta == pytest.approx(KAPPA * math.sqrt(n), rel=1e-12)
    assert eta / KAPPA == pytest.approx(1.7732556222190619, rel=1e-9)
    # square-root law in power and zero edge
    assert eta_from_power(4 * 2.4e-9, KAPPA, omega, 0.10) == pytest.approx(2 * eta)
    assert eta_from_power(0.0, KAPPA, omega, 0.10) == 0.0
    with pytest.raises(ValueError):
        eta_from_power(1.0, -KAPPA, omega, 0.10)
    with pytest.raises(ValueError):
        eta_from_power(-1.0, KAPPA, omega, 0.10)


def test_dipole_potential_depth():
    delta = 2 * math.pi * 24e6
    u = dipole_potential_depth(2.4e-9, 80e-6, delta)
    # ~0.5 uK for the blue-detuned probe lattice
    assert u == pytest.approx(5.261082840398389e-07, rel=1e-9)
    # sign flips with detuning, magnitude linear in power
    assert dipole_potential_depth(2.4e-9, 80e-6, -delta) == pytest.approx(-u)
    assert dipole_potential_depth(4.8e-9, 80e-6, delta) == pytest.approx(2 * u)
    with pytest.raises(ArithmeticError):
        dipole_potential_depth(2.4e-9, 80e-6, 0.0)
    with pytest.raises(ValueError):
        dipole_potential_depth(-1.0, 80e-6, delta)


def test_steady_state_populations():
    pops = steady_state_populations(default_scheme())
    assert sum(pops.values()) == pytest.approx(1.0, abs=1e-9)
    # pi pumping gives a symmetric distribution peaked at m = 0
    assert pops[0] > pops[2] > pops[4] > 0
    for m in (2, 4):
        assert pops[m] == pytest.approx(pops[-m], abs=1e-6)


def test_fig2_coupling_table():
    rows = scenario_fig2()
    values = dict(rows)
    assert rows[0][0] == "equal"
    assert values["equal"] == pytest.approx(7 / 15, abs=1e-12)
    assert values["steady-state"] == pytest.approx(0.546647457587637, rel=1e-6)
    # optical pumping raises the collective coupling above the equal mixture
    assert values["steady-state"] > values["equal"]
    assert values["m=0"] == pytest.approx(0.6, abs=1e-12)
    for label in ("m=-2", "m=2"):
        assert values[label] == pytest.approx(1 / 3, abs=1e-12)
    for label in ("m=-1", "m=1"):
        assert values[label] == pytest.approx(8 / 15, abs=1e-12)


def test_fig2_requires_pi_geometry():
    from mlcavity import LevelScheme, TransitionGeometry

    scheme = LevelScheme(
        two_fg=4,
        two_fe=6,
        geometry=TransitionGeometry.SIGMA_PLUS,
        g0=2 * math.pi * 210e3,
        gamma=2 * math.pi * 6.065e6,
    )
    with pytest.raises(ValueError):
        scenario_fig2(scheme)


def test_run_dynamics_smoke():
    config = _fast_config()
    result = run_dynamics(config, 24.0)
    assert result.delta_p_mhz == 24.0
    assert len(result.series.times) == config.n_out
    assert result.power_watts.shape == result.power_normalized.shape
    assert np.all(result.power_normalized >= 0.0)
    assert np.all(result.power_normalized <= 1.0 + 1e-9)
    assert np.all(result.coupling_mhz > 0.0)
    # power in watts is the normalized trace rescaled by a constant
    ratio = result.power_watts[1:] / result.power_normalized[1:]
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)
    assert not result.weak_field_warning


def test_fig3_requires_single_detuning():
    with pytest.raises(ValueError):
        scenario_fig3(_fast_config(delta_p_mhz=(24.0, -24.0)))
    result = scenario_fig3(_fast_config())
    assert result.delta_p_mhz == 24.0


def test_fig4_ordering_and_atom_numbers():
    config = _fast_config(delta_p_mhz=(24.0, -15.0, 15.0, -24.0))
    results = scenario_fig4(config)
    detunings = [r.delta_p_mhz for r in results]
    assert detunings == sorted(config.delta_p_mhz)
    for r in results:
        assert r.series.n_eff[0] == pytest.approx(
            FIG4_ATOM_NUMBERS[r.delta_p_mhz], rel=1e-9
        )


def test_fig4_unknown_detuning_falls_back_to_config_n0():
    config = _fast_config(delta_p_mhz=(20.0,), n0=5000.0)
    (result,) = scenario_fig4(config)
    assert result.series.n_eff[0] == pytest.approx(5000.0, rel=1e-9)


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        _fast_config(delta_p_mhz=())
    with pytest.raises(ValueError):
        _fast_config(kappa=0.0)
    with pytest.raises(ValueError):
        _fast_config(n0=-1.0)
    # zero drive power is allowed (dark cavity)
    config = _fast_config(p_cav=0.0)
    result = run_dynamics(config, 24.0)
    assert np.all(result.series.photon_number == 0.0)


def test_fig5_landscape_and_traces():
    grid = np.linspace(-2.0, 2.0, 81)
    result = scenario_fig5(grid=grid, n_trace=101)
    assert set(result.traces) == {"weak", "decelerated", "accelerated"}
    assert result.alpha_strong.shape == grid.shape

    # weak coupling collapses the coefficients; strong coupling does not
    finite = np.isfinite(result.alpha_strong)
    assert np.all(np.abs(result.alpha_weak[np.isfinite(result.alpha_weak)]) < 1e-3)
    assert np.nanmax(result.alpha_strong) > 1.0
    # alpha is nonnegative wherever defined
    assert np.all(result.alpha_strong[finite] >= 0.0)

    # each trace carries the regime its label promises
    expected = {
        "weak": "exponential",
        "decelerated": "decelerated",
        "accelerated": "accelerated",
    }
    for label, trace in result.traces.items():
        assert classify_regime(trace.coeffs) == expected[label]
        assert trace.p_minus[0] == pytest.approx(1.0)
        assert np.all(np.diff(trace.p_minus) < 0)

    # matched drives: all traces start with the same slope (within 1%)
    slopes = {
        label: trace.coeffs.gamma_eff
        / (trace.coeffs.alpha + trace.coeffs.beta + 1.0)
        for label, trace in result.traces.items()
    }
    ref = slopes["weak"]
    for label in ("decelerated", "accelerated"):
        assert slopes[label] == pytest.approx(ref, rel=0.01)

    # the weak trace is exponential up to its residual (tiny) alpha and beta
    weak = result.traces["weak"]
    model = np.exp(-weak.coeffs.gamma_eff * weak.times)
    assert np.max(np.abs(weak.p_minus - model)) < 1e-3
