"""Nonlinear two-transition optical-pumping rate model.

In the weak-driving limit the cavity and the coherences follow the slowly
varying populations adiabatically, reducing the mean-field system for the
two-ground-state scheme to a single nonlinear rate equation

    dP_-/dt = -Gamma_eff * P_- / (alpha P_-^2 + beta P_- + 1),

whose coefficients encode the backaction of the population-dependent
collective coupling on the intracavity field.  The equation admits a
closed-form implicit solution t(P_-), an exponential limit when alpha and
beta vanish, and a square-root decay law while alpha P_-^2 > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import meanfield, ode, spectra
from .levels import two_transition_scheme


class DegenerateParameterError(ValueError):
    """Rate-coefficient denominator is not positive; the weak-drive reduction
    does not apply at these parameters."""


@dataclass(frozen=True)
class TwoTransitionParams:
    """Inputs of the two-transition rate model.  Rates in rad/s."""

    c_minus_sq: float
    c_plus_sq: float
    g0: float
    gamma: float
    kappa: float
    n_atoms: float
    delta_a: float
    delta_c: float
    eta: float

    def __post_init__(self) -> None:
        if not 0 < self.c_minus_sq <= 1 or not 0 < self.c_plus_sq <= 1:
            raise ValueError("squared CG coefficients must lie in (0, 1]")
        if min(self.g0, self.gamma, self.kappa) <= 0:
            raise ValueError("g0, gamma and kappa must be positive")
        if self.n_atoms <= 0:
            raise ValueError("atom number must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


@dataclass(frozen=True)
class RateCoefficients:
    """Dimensionless coefficients u, w, alpha, beta and the rate Gamma_eff."""

    u: float
    w: float
    alpha: float
    beta: float
    gamma_eff: float


def rate_coefficients(p: TwoTransitionParams) -> RateCoefficients:
    """Evaluate the rate-model coefficients from the physical parameters.

    Note the deliberately asymmetric denominators: alpha carries
    c_+^2 (c_+^2 + u) + w while beta and Gamma_eff carry (c_+^2 + u) + w.

    Raises
    ------
    DegenerateParameterError
        If either denominator is zero or negative; such points lie outside
        the validity range of the weak-drive reduction.
    """
    g_sq_n = p.g0**2 * p.n_atoms
    u = (p.gamma * p.kappa - 2.0 * p.delta_a * p.delta_c) / g_sq_n
    w = (
        ((p.gamma / 2.0) ** 2 + p.delta_a**2)
        * (p.kappa**2 + p.delta_c**2)
        / g_sq_n**2
    )
    denom_alpha = p.c_plus_sq * (p.c_plus_sq + u) + w
    denom_beta = (p.c_plus_sq + u) + w
    if denom_alpha <= 0 or denom_beta <= 0:
        raise DegenerateParameterError(
            f"nonpositive rate-coefficient denominator (alpha: {denom_alpha:.3e}, "
            f"beta: {denom_beta:.3e}) at delta_a = {p.delta_a:.3e} rad/s"
        )
    diff = p.c_minus_sq - p.c_plus_sq
    alpha = diff**2 / denom_alpha
    beta = 2.0 * diff * (1.0 + u / 2.0) / denom_beta
    gamma_eff = (
        (p.eta**2 / (p.g0**2 * p.n_atoms**2))
        * (p.c_minus_sq / p.c_plus_sq)
        * p.gamma
        / denom_beta
    )
    return RateCoefficients(u=u, w=w, alpha=alpha, beta=beta, gamma_eff=gamma_eff)


@dataclass
class RateTrace:
    """P_-(t) from the rate equation; P_+ follows as 1 - P_-."""

    times: np.ndarray
    p_minus: np.ndarray
    coeffs: RateCoefficients
    meta: dict = field(default_factory=dict)

    @property
    def p_plus(self) -> np.ndarray:
        return 1.0 - self.p_minus


def integrate_rate(
    p: TwoTransitionParams,
    t_span: tuple[float, float],
    ctrl: meanfield.IntegrationControl | None = None,
    t_eval: np.ndarray | None = None,
) -> RateTrace:
    """Solve the nonlinear rate equation from P_-(0) = 1."""
    coeffs = rate_coefficients(p)
    if ctrl is None:
        ctrl = meanfield.IntegrationControl(rtol=1e-10, atol=1e-13)
    alpha, beta, geff = coeffs.alpha, coeffs.beta, coeffs.gamma_eff

    def f(t, y):
        pm = y[0]
        return np.array([-geff * pm / (alpha * pm * pm + beta * pm + 1.0)])

    max_step = ctrl.max_step if ctrl.max_step is not None else np.inf
    t_out, y_out, stats = ode.solve(
        f,
        t_span,
        np.array([1.0]),
        rtol=ctrl.rtol,
        atol=ctrl.atol,
        max_step=max_step,
        t_eval=t_eval,
    )
    return RateTrace(
        times=t_out,
        p_minus=y_out[:, 0],
        coeffs=coeffs,
        meta={"n_accepted": stats.n_accepted, "rtol": ctrl.rtol, "atol": ctrl.atol},
    )


def implicit_time(p_minus: float, coeffs: RateCoefficients) -> float:
    """Closed-form time at which the population reaches ``p_minus``.

    t(P) = -[ (alpha/2) P^2 + beta P + ln P ] / Gamma_eff
           + (alpha + 2 beta) / (2 Gamma_eff),
    with t(1) = 0.
    """
    if p_minus <= 0:
        raise ValueError("population must be positive")
    a, b, geff = coeffs.alpha, coeffs.beta, coeffs.gamma_eff
    return (-(0.5 * a * p_minus**2 + b * p_minus + math.log(p_minus)) + 0.5 * a + b) / geff


def classify_regime(coeffs: RateCoefficients) -> str:
    """One of ``exponential``, ``accelerated``, ``decelerated``.

    Exponential when both |alpha| and |beta| stay below 0.1; otherwise the
    sign of alpha + beta decides whether the initial decay from P_- = 1 is
    faster or slower than the matched exponential.
    """
    if max(abs(coeffs.alpha), abs(coeffs.beta)) < 0.1:
        return "exponential"
    return "accelerated" if coeffs.alpha + coeffs.beta > 0 else "decelerated"


def alpha_strong_coupling(p: TwoTransitionParams) -> float:
    """Strong-coupling scaling of alpha at |delta_a| = g0 sqrt(N)."""
    return (
        (p.c_minus_sq - p.c_plus_sq) ** 2
        * p.g0**2
        * p.n_atoms
        / (p.gamma / 2.0 + p.kappa) ** 2
    )


def _initial_absorption(p: TwoTransitionParams) -> float:
    """Initially absorbed power per atom at P_- = 1.

    Proportional to the scattering rate g_eff^2 |a(0)|^2 / (delta_a^2 +
    (Gamma/2)^2) with the steady-state field of the fully polarized sample;
    the g_eff^2 factor keeps the comparison fair between parameter sets that
    differ in single-atom coupling, not just in drive.
    """
    g_eff = p.g0 * math.sqrt(p.c_minus_sq)
    drive = meanfield.DriveParams(
        eta=p.eta, delta_a=p.delta_a, delta_c=p.delta_c, kappa=p.kappa
    )
    a_sq = spectra.intracavity_intensity_ss(drive, p.gamma, p.n_atoms, g_eff)
    return g_eff**2 * a_sq / (p.delta_a**2 + (p.gamma / 2.0) ** 2)


def match_drive_strength(
    p: TwoTransitionParams, reference: TwoTransitionParams
) -> float:
    """Pump rate for ``p`` that reproduces the reference's initial absorption.

    Initially absorbed light power is proportional to
    |a(0)|^2 / (delta_a^2 + (Gamma/2)^2); matching it makes decay traces
    start with the same slope across parameter sets.
    """
    target = _initial_absorption(reference)
    if target <= 0:
        raise ArithmeticError("reference absorption is zero; target unreachable")
    unit = _initial_absorption(
        TwoTransitionParams(
            c_minus_sq=p.c_minus_sq,
            c_plus_sq=p.c_plus_sq,
            g0=p.g0,
            gamma=p.gamma,
            kappa=p.kappa,
            n_atoms=p.n_atoms,
            delta_a=p.delta_a,
            delta_c=p.delta_c,
            eta=1.0,
        )
    )
    return math.sqrt(target / unit)


@dataclass
class CrosscheckReport:
    """Rate model vs full mean-field integration on the same scheme."""

    times: np.ndarray
    p_minus_rate: np.ndarray
    p_minus_meanfield: np.ndarray
    max_abs_deviation: float
    peak_rho_ee: float


def crosscheck_meanfield(
    p: TwoTransitionParams,
    t_span: tuple[float, float],
    n_points: int = 201,
    ctrl: meanfield.IntegrationControl | None = None,
) -> CrosscheckReport:
    """Compare P_-(t) between the rate model and the mean-field equations."""
    t_eval = np.linspace(t_span[0], t_span[1], n_points)
    rate = integrate_rate(p, t_span, t_eval=t_eval)

    couplings = two_transition_scheme(p.c_minus_sq, p.c_plus_sq, p.g0, p.gamma)
    drive = meanfield.DriveParams(
        eta=p.eta, delta_a=p.delta_a, delta_c=p.delta_c, kappa=p.kappa
    )
    init = meanfield.initial_state(couplings, {-1: 1.0, +1: 0.0})
    series = meanfield.integrate(
        init,
        drive,
        couplings,
        meanfield.AtomNumberModel.constant(p.n_atoms),
        t_span,
        ctrl=ctrl or meanfield.IntegrationControl(),
        t_eval=t_eval,
    )
    p_mf = series.population(-1)
    dev = float(np.max(np.abs(rate.p_minus - p_mf)))
    return CrosscheckReport(
        times=t_eval,
        p_minus_rate=rate.p_minus,
        p_minus_meanfield=p_mf,
        max_abs_deviation=dev,
        peak_rho_ee=series.meta["peak_rho_ee"],
    )
