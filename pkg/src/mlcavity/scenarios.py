"""Experiment-style scenario generators.

Bundles the Rb-87 D2 parameter set, the ballistic-expansion atom-number
model, effective-coupling comparisons for characteristic population
distributions, cavity-transmission dynamics at the normal-mode slopes, the
two-transition coefficient landscape with matched-drive decay traces, and
the dipole-potential sanity estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as c_light
from scipy.constants import hbar
from scipy.constants import k as k_boltzmann

from . import meanfield, pumping, spectra
from .levels import CouplingSet, LevelScheme, TransitionGeometry, coupling_set

# Rb-87 D2 line constants (overridable wherever they appear as arguments).
RB87_MASS = 1.44316060e-25  # kg
RB87_D2_OMEGA = 2 * math.pi * 384.2304844685e12  # rad/s
RB87_D2_GAMMA = 2 * math.pi * 6.065e6  # rad/s

_TWO_PI = 2 * math.pi


def default_scheme(
    g0: float = _TWO_PI * 210e3, gamma: float = RB87_D2_GAMMA
) -> LevelScheme:
    """The F=2 -> F'=3 pi-driven scheme of the Rb-87 D2 line."""
    return LevelScheme(
        two_fg=4, two_fe=6, geometry=TransitionGeometry.PI, g0=g0, gamma=gamma
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Free-fall cavity-transmission experiment parameters."""

    scheme: LevelScheme = field(default_factory=default_scheme)
    kappa: float = _TWO_PI * 6.7e6  # rad/s, from the 13.4 MHz cavity FWHM
    delta_p_mhz: tuple[float, ...] = (24.0,)
    n0: float = 11200.0  # effective atom number at release
    temperature: float = 75e-6  # K
    sigma0: float = 200e-6  # m, initial cloud rms radius
    waist: float = 80e-6  # m
    p_cav: float = 2.4e-9  # W, resonant empty-cavity circulating power
    round_trip: float = 0.10  # m
    mirror_transmission: float = 0.015
    omega: float = RB87_D2_OMEGA
    t_span: tuple[float, float] = (0.0, 5e-3)
    n_out: int = 1001
    rtol: float = 1e-8
    atol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.delta_p_mhz:
            raise ValueError("probe detuning list must be nonempty")
        for name in ("kappa", "temperature", "waist", "round_trip", "omega"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n0 < 0 or self.sigma0 < 0 or self.p_cav < 0:
            raise ValueError("n0, sigma0 and p_cav must be nonnegative")


def atom_number_ballistic(
    t: float,
    n0: float,
    temperature: float,
    sigma0: float,
    waist: float,
    mass: float = RB87_MASS,
) -> float:
    """Effective atom number of a ballistically expanding Gaussian cloud.

    Transverse overlap of a cloud of rms radius sigma(t) with a Gaussian
    mode of waist w0:  N(t) = n0 w0^2 / (w0^2 + 4 sigma(t)^2) with
    sigma(t)^2 = sigma0^2 + (kB T / m) t^2.  Gravity translates the cloud
    along the mode and is ignored here.
    """
    sig_sq = sigma0**2 + (k_boltzmann * temperature / mass) * t**2
    return n0 * waist**2 / (waist**2 + 4.0 * sig_sq)


def eta_from_power(
    p_cav: float, kappa: float, omega: float, round_trip: float
) -> float:
    """Pump rate giving circulating power ``p_cav`` in the empty resonant cavity.

    Photon number n = p_cav l / (hbar omega c) and eta = kappa sqrt(n).
    """
    if min(kappa, omega, round_trip) <= 0 or p_cav < 0:
        raise ValueError("inputs must be positive (p_cav nonnegative)")
    n = p_cav * round_trip / (hbar * omega * c_light)
    return kappa * math.sqrt(n)


def dipole_potential_depth(
    p_cav: float,
    waist: float,
    delta: float,
    gamma: float = RB87_D2_GAMMA,
    omega0: float = RB87_D2_OMEGA,
) -> float:
    """Standing-wave antinode dipole potential depth, in kelvin (U / kB).

    Antinode intensity of a circulating power p_cav in a standing wave:
    each direction carries p_cav / 2, field doubling at the antinode gives
    a factor 4, hence I = 8 p_cav / (pi w0^2).  Two-level dipole potential
    U = (3 pi c^2 / 2 omega0^3) (Gamma / delta) I.
    """
    if delta == 0:
        raise ArithmeticError("detuning must be nonzero")
    if min(p_cav, waist, gamma, omega0) <= 0:
        raise ValueError("power, waist, gamma and omega0 must be positive")
    intensity = 8.0 * p_cav / (math.pi * waist**2)
    u = (3.0 * math.pi * c_light**2 / (2.0 * omega0**3)) * (gamma / delta) * intensity
    return u / k_boltzmann


def _ballistic_model(config: ExperimentConfig) -> meanfield.AtomNumberModel:
    """Ballistic model normalized so the effective number at t=0 is n0."""
    scale = (config.waist**2 + 4.0 * config.sigma0**2) / config.waist**2
    return meanfield.AtomNumberModel.ballistic(
        config.n0 * scale,
        config.temperature,
        config.sigma0,
        config.waist,
        RB87_MASS,
    )


def steady_state_populations(
    scheme: LevelScheme,
    dp_tol: float = 1e-9,
    max_chunks: int = 200,
) -> dict[int, float]:
    """Optical-pumping steady state of the ground populations at weak drive.

    Integrates the mean-field equations for a single weakly driven atom on
    resonance until every population derivative falls below ``dp_tol``
    (in 1/s).  The stationary distribution balances pumping against decay
    branching and is independent of the drive details in this limit.
    """
    couplings = coupling_set(scheme)
    gamma = scheme.gamma
    kappa = gamma
    # photon number ~ Gamma^2 / (4 g0^2) * 1e-3 keeps rho_ee near 1e-3
    a_target_sq = 1e-3 * gamma**2 / (4.0 * scheme.g0**2)
    eta = kappa * math.sqrt(a_target_sq)
    drive = meanfield.DriveParams(eta=eta, delta_a=0.0, delta_c=0.0, kappa=kappa)
    n_model = meanfield.AtomNumberModel.constant(1.0)

    state = meanfield.initial_state(
        couplings, {m: 1.0 for m in couplings.ground}
    )
    c_min_sq = min(c * c for c in couplings.cg.values())
    pump_rate = 4.0 * c_min_sq * scheme.g0**2 * a_target_sq / gamma
    chunk = 5.0 / pump_rate
    ctrl = meanfield.IntegrationControl(rtol=1e-10, atol=1e-12)
    t = 0.0
    for _ in range(max_chunks):
        series = meanfield.integrate(
            state,
            drive,
            couplings,
            n_model,
            (t, t + chunk),
            ctrl=ctrl,
            t_eval=np.array([t, t + chunk]),
        )
        t += chunk
        state = series.final_state()
        deriv = meanfield.derivatives(state, drive, couplings, 1.0)
        if max(abs(v) for v in deriv.P.values()) < dp_tol:
            total = sum(state.P.values())
            return {m: p / total for m, p in state.P.items()}
    raise RuntimeError("steady-state populations did not converge")


def scenario_fig2(scheme: LevelScheme | None = None) -> list[tuple[str, float]]:
    """Effective-coupling table g_eff^2/g0^2 for characteristic populations.

    Rows: equal populations, the optical-pumping steady state, and each
    single-sublevel distribution.
    """
    scheme = scheme or default_scheme()
    if scheme.geometry is not TransitionGeometry.PI:
        raise ValueError("the effective-coupling comparison assumes pi geometry")
    couplings = coupling_set(scheme)
    ground = couplings.ground
    rows: list[tuple[str, float]] = []

    equal = {m: 1.0 / len(ground) for m in ground}
    rows.append(
        ("equal", spectra.effective_coupling(couplings, equal) ** 2 / scheme.g0**2)
    )
    steady = steady_state_populations(scheme)
    rows.append(
        (
            "steady-state",
            spectra.effective_coupling(couplings, steady) ** 2 / scheme.g0**2,
        )
    )
    for m in ground:
        single = {mm: 1.0 if mm == m else 0.0 for mm in ground}
        label = f"m={m // 2}" if m % 2 == 0 else f"m={m}/2"
        rows.append(
            (
                label,
                spectra.effective_coupling(couplings, single) ** 2 / scheme.g0**2,
            )
        )
    return rows


@dataclass
class DynamicsResult:
    """One transmission-dynamics run with derived observable traces."""

    delta_p_mhz: float
    series: meanfield.TimeSeries
    power_watts: np.ndarray
    power_normalized: np.ndarray  # scaled to the empty-cavity resonant maximum
    coupling_mhz: np.ndarray  # g_eff sqrt(N) / 2 pi, MHz
    weak_field_warning: bool


def run_dynamics(config: ExperimentConfig, delta_p_mhz: float) -> DynamicsResult:
    scheme = config.scheme
    couplings = coupling_set(scheme)
    eta = eta_from_power(config.p_cav, config.kappa, config.omega, config.round_trip)
    delta = _TWO_PI * delta_p_mhz * 1e6
    drive = meanfield.DriveParams(
        eta=eta, delta_a=delta, delta_c=delta, kappa=config.kappa
    )
    init = meanfield.initial_state(couplings, {m: 1.0 for m in couplings.ground})
    series = meanfield.integrate(
        init,
        drive,
        couplings,
        _ballistic_model(config),
        config.t_span,
        ctrl=meanfield.IntegrationControl(rtol=config.rtol, atol=config.atol),
        t_eval=np.linspace(config.t_span[0], config.t_span[1], config.n_out),
    )
    empty_max = eta**2 / config.kappa**2
    norm = series.photon_number / empty_max if empty_max > 0 else np.zeros_like(
        series.photon_number
    )
    power_watts = np.array(
        [
            spectra.transmitted_power(
                n_ph, config.omega, config.round_trip, config.mirror_transmission
            )
            for n_ph in series.photon_number
        ]
    )
    coupling_mhz = series.g_eff * np.sqrt(series.n_eff) / _TWO_PI / 1e6
    return DynamicsResult(
        delta_p_mhz=delta_p_mhz,
        series=series,
        power_watts=power_watts,
        power_normalized=norm,
        coupling_mhz=coupling_mhz,
        weak_field_warning=series.meta["peak_rho_ee"] > 0.05,
    )


def scenario_fig3(config: ExperimentConfig | None = None) -> DynamicsResult:
    """Transmission dynamics at a single probe detuning (default +24 MHz)."""
    config = config or ExperimentConfig()
    if len(config.delta_p_mhz) != 1:
        raise ValueError("single-detuning scenario needs exactly one probe detuning")
    return run_dynamics(config, config.delta_p_mhz[0])


# Per-detuning fitted atom numbers for the four-slope comparison.
FIG4_ATOM_NUMBERS = {-24.0: 10600.0, -15.0: 9200.0, +15.0: 10500.0, +24.0: 11200.0}


def _fig4_single(args) -> DynamicsResult:
    config, delta_p = args
    n0 = FIG4_ATOM_NUMBERS.get(delta_p, config.n0)
    return run_dynamics(replace(config, n0=n0), delta_p)


def scenario_fig4(
    config: ExperimentConfig | None = None, jobs: int | None = None
) -> list[DynamicsResult]:
    """Transmission dynamics on all four normal-mode slopes.

    Results are ordered by probe detuning regardless of scheduling.
    """
    config = config or ExperimentConfig(delta_p_mhz=(-24.0, -15.0, +15.0, +24.0))
    detunings = sorted(config.delta_p_mhz)
    work = [(config, d) for d in detunings]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fig4_single, work))
    else:
        results = [_fig4_single(w) for w in work]
    return results


@dataclass
class Fig5Result:
    """Coefficient landscape and matched-drive decay traces."""

    delta_over_gn: np.ndarray  # delta_a / (g0 sqrt(N)) of the strong case
    alpha_strong: np.ndarray
    beta_strong: np.ndarray
    alpha_weak: np.ndarray
    beta_weak: np.ndarray
    traces: dict[str, pumping.RateTrace]
    params: dict


def scenario_fig5(
    c_minus_sq: float = 1.0 / 3.0,
    c_plus_sq: float = 1.0,
    gamma: float = RB87_D2_GAMMA,
    n_atoms: float = 1e4,
    strong_ratio: float = 10.0,
    weak_ratio: float = 0.01,
    grid: np.ndarray | None = None,
    n_trace: int = 401,
) -> Fig5Result:
    """Alpha/beta versus detuning and the three matched-drive P_-(t) traces.

    Follows the convention Gamma = kappa and delta_c = delta_a.  Traces:
    weak coupling at delta_a = 0 (exponential), strong coupling at
    delta_a = 0 (decelerated) and at delta_a = g0 sqrt(N) (accelerated),
    with pump rates matched so all start with the same absorbed power.
    """
    kappa = gamma
    if grid is None:
        grid = np.linspace(-3.0, 3.0, 601)
    g0_strong = strong_ratio * gamma / math.sqrt(n_atoms)
    g0_weak = weak_ratio * gamma / math.sqrt(n_atoms)
    gn_strong = g0_strong * math.sqrt(n_atoms)

    def params(g0, delta, eta):
        return pumping.TwoTransitionParams(
            c_minus_sq=c_minus_sq,
            c_plus_sq=c_plus_sq,
            g0=g0,
            gamma=gamma,
            kappa=kappa,
            n_atoms=n_atoms,
            delta_a=delta,
            delta_c=delta,
            eta=eta,
        )

    def sweep(g0):
        alphas = np.empty_like(grid)
        betas = np.empty_like(grid)
        for i, x in enumerate(grid):
            try:
                coeffs = pumping.rate_coefficients(params(g0, x * gn_strong, 0.0))
                alphas[i], betas[i] = coeffs.alpha, coeffs.beta
            except pumping.DegenerateParameterError:
                alphas[i] = betas[i] = np.nan
        return alphas, betas

    alpha_strong, beta_strong = sweep(g0_strong)
    alpha_weak, beta_weak = sweep(g0_weak)

    # Reference: weak coupling, resonant, modest drive.
    reference = params(g0_weak, 0.0, 0.1 * kappa)
    ref_coeffs = pumping.rate_coefficients(reference)
    horizon = 6.0 / ref_coeffs.gamma_eff

    def run_trace(p: pumping.TwoTransitionParams) -> pumping.RateTrace:
        # Each matched case decays on a wildly different time scale; stop at
        # a population floor (via the implicit solution) so the fast traces
        # are not integrated across the slow reference horizon.
        coeffs = pumping.rate_coefficients(p)
        t_end = min(horizon, pumping.implicit_time(1e-3, coeffs))
        t_eval = np.linspace(0.0, t_end, n_trace)
        return pumping.integrate_rate(p, (0.0, t_end), t_eval=t_eval)

    traces: dict[str, pumping.RateTrace] = {}
    traces["weak"] = run_trace(reference)
    for label, delta in (("decelerated", 0.0), ("accelerated", gn_strong)):
        unmatched = params(g0_strong, delta, reference.eta)
        eta = pumping.match_drive_strength(unmatched, reference)
        traces[label] = run_trace(params(g0_strong, delta, eta))

    return Fig5Result(
        delta_over_gn=grid,
        alpha_strong=alpha_strong,
        beta_strong=beta_strong,
        alpha_weak=alpha_weak,
        beta_weak=beta_weak,
        traces=traces,
        params={
            "c_minus_sq": c_minus_sq,
            "c_plus_sq": c_plus_sq,
            "gamma": gamma,
            "kappa": kappa,
            "n_atoms": n_atoms,
            "strong_ratio": strong_ratio,
            "weak_ratio": weak_ratio,
            "eta_reference": reference.eta,
        },
    )
