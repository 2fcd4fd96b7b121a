"""Mean-field equations of motion for the coupled atom-cavity system.

State variables: complex cavity amplitude ``a`` (|a|^2 = photon number), one
complex coherence ``sigma_m`` and excited population ``rho_ee_{m'}`` per
cavity-coupled ground sublevel, and a transition population ``P_m`` per
ground sublevel.  Under the identical-atom reduction the atom index drops
out and the atom number enters only as the factor N multiplying the
coherence sum in the cavity equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import k as _k_boltzmann

from . import ode
from .levels import CouplingSet

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


@dataclass(frozen=True)
class DriveParams:
    """Cavity pump rate and detunings, all in rad/s."""

    eta: float
    delta_a: float
    delta_c: float
    kappa: float

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


@dataclass
class MeanFieldState:
    """Cavity amplitude, coherences and populations at one instant.

    ``sigma`` and ``rho_ee`` are keyed by the ground two_m of the transition
    they belong to (the excited partner is m + q); ``P`` covers every ground
    sublevel.
    """

    a: complex
    sigma: dict[int, complex]
    P: dict[int, float]
    rho_ee: dict[int, float]


@dataclass(frozen=True)
class AtomNumberModel:
    """Effective atom number N(t): constant, ballistic-expansion, or tabulated."""

    kind: str
    n0: float = 0.0
    temperature: float = 0.0
    sigma0: float = 0.0
    waist: float = 0.0
    mass: float = 0.0
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    @staticmethod
    def constant(n0: float) -> "AtomNumberModel":
        if n0 < 0:
            raise ValueError("atom number must be nonnegative")
        return AtomNumberModel(kind="constant", n0=n0)

    @staticmethod
    def ballistic(
        n0: float, temperature: float, sigma0: float, waist: float, mass: float
    ) -> "AtomNumberModel":
        if min(n0, temperature, waist, mass) < 0 or sigma0 < 0:
            raise ValueError("ballistic model parameters must be nonnegative")
        return AtomNumberModel(
            kind="ballistic",
            n0=n0,
            temperature=temperature,
            sigma0=sigma0,
            waist=waist,
            mass=mass,
        )

    @staticmethod
    def table(times, values) -> "AtomNumberModel":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("table times must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("atom numbers must be nonnegative")
        return AtomNumberModel(kind="table", times=times, values=values)

    def at(self, t: float) -> float:
        if self.kind == "constant":
            return self.n0
        if self.kind == "ballistic":
            sig_sq = self.sigma0**2 + (_k_boltzmann * self.temperature / self.mass) * t**2
            return self.n0 * self.waist**2 / (self.waist**2 + 4.0 * sig_sq)
        return float(np.interp(t, self.times, self.values))

    def packed(self) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
        """Numeric encoding consumed by the compiled right-hand side."""
        empty = np.zeros(0)
        if self.kind == "constant":
            return 0, np.array([self.n0]), empty, empty
        if self.kind == "ballistic":
            return (
                1,
                np.array(
                    [
                        self.n0,
                        _k_boltzmann * self.temperature / self.mass,
                        self.sigma0,
                        self.waist,
                    ]
                ),
                empty,
                empty,
            )
        return 2, empty, np.asarray(self.times, float), np.asarray(self.values, float)


@dataclass(frozen=True)
class IntegrationControl:
    """Tolerances and step limits for the adaptive integrator."""

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None  # None: 3 / fastest rate in the problem

    def __post_init__(self) -> None:
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class TimeSeries:
    """Sampled observables of one integration run."""

    times: np.ndarray
    a: np.ndarray  # complex
    photon_number: np.ndarray
    ground_two_m: tuple[int, ...]
    populations: np.ndarray  # (n_times, n_ground)
    coupled_two_m: tuple[int, ...]
    rho_ee: np.ndarray  # (n_times, n_coupled), keyed by ground partner
    sigma: np.ndarray  # (n_times, n_ground), complex coherences
    g_eff: np.ndarray
    n_eff: np.ndarray
    meta: dict = field(default_factory=dict)

    def population(self, two_m: int) -> np.ndarray:
        return self.populations[:, self.ground_two_m.index(two_m)]

    def state_at(self, index: int) -> MeanFieldState:
        """Reconstruct the full mean-field state at one sample index."""
        return MeanFieldState(
            a=complex(self.a[index]),
            sigma={
                m: complex(self.sigma[index, i])
                for i, m in enumerate(self.ground_two_m)
                if m in self.coupled_two_m
            },
            P={
                m: float(self.populations[index, i])
                for i, m in enumerate(self.ground_two_m)
            },
            rho_ee={
                m: float(self.rho_ee[index, j])
                for j, m in enumerate(self.coupled_two_m)
            },
        )

    def final_state(self) -> MeanFieldState:
        return self.state_at(-1)


class _Layout:
    """Index maps and parameter arrays for the packed real state vector.

    Layout: [Re a, Im a, Re sigma_i..., Im sigma_i..., P_i..., rho_j...] with
    i over all ground sublevels (uncoupled ones carry g_i = 0) and j over the
    cavity-populated excited sublevels, one per coupled ground state.
    """

    def __init__(self, couplings: CouplingSet):
        self.ground = couplings.ground
        self.n_g = len(self.ground)
        self.coupled = couplings.coupled_ground()
        self.n_e = len(self.coupled)
        self.g = np.array(
            [couplings.couplings.get(m, 0.0) for m in self.ground], dtype=float
        )
        # excited slot for each ground index, -1 if uncoupled
        self.e_of_i = np.full(self.n_g, -1, dtype=np.int64)
        self.i_of_j = np.empty(self.n_e, dtype=np.int64)
        for j, m in enumerate(self.coupled):
            i = self.ground.index(m)
            self.e_of_i[i] = j
            self.i_of_j[j] = i
        # decay gain matrix: b[i, j] = branching of excited partner of
        # coupled ground j into ground sublevel i
        self.b_gain = np.zeros((self.n_g, self.n_e), dtype=float)
        for j, m in enumerate(self.coupled):
            two_k = m + couplings.two_q
            for i, mg in enumerate(self.ground):
                self.b_gain[i, j] = couplings.branching.get((mg, two_k), 0.0)
        self.n_y = 2 + 3 * self.n_g + self.n_e

    def pack(self, state: MeanFieldState) -> np.ndarray:
        y = np.zeros(self.n_y, dtype=float)
        y[0], y[1] = state.a.real, state.a.imag
        for i, m in enumerate(self.ground):
            s = state.sigma.get(m, 0.0)
            y[2 + i] = s.real
            y[2 + self.n_g + i] = s.imag
            y[2 + 2 * self.n_g + i] = state.P.get(m, 0.0)
        for j, m in enumerate(self.coupled):
            y[2 + 3 * self.n_g + j] = state.rho_ee.get(m, 0.0)
        return y

    def unpack(self, y: np.ndarray) -> MeanFieldState:
        n_g = self.n_g
        return MeanFieldState(
            a=complex(y[0], y[1]),
            sigma={
                m: complex(y[2 + i], y[2 + n_g + i])
                for i, m in enumerate(self.ground)
                if self.e_of_i[i] >= 0
            },
            P={m: float(y[2 + 2 * n_g + i]) for i, m in enumerate(self.ground)},
            rho_ee={
                m: float(y[2 + 3 * n_g + j]) for j, m in enumerate(self.coupled)
            },
        )


@njit(cache=True)
def _n_at(t, n_variant, n_params, n_table_t, n_table_v):
    if n_variant == 0:
        return n_params[0]
    if n_variant == 1:
        # n_params = [n0, kT/m, sigma0, waist]
        sig_sq = n_params[2] * n_params[2] + n_params[1] * t * t
        w_sq = n_params[3] * n_params[3]
        return n_params[0] * w_sq / (w_sq + 4.0 * sig_sq)
    return np.interp(t, n_table_t, n_table_v)


@njit(cache=True)
def _rhs(t, y, args):
    (
        g,
        e_of_i,
        i_of_j,
        b_gain,
        gamma,
        kappa,
        eta,
        delta_a,
        delta_c,
        n_variant,
        n_params,
        n_table_t,
        n_table_v,
    ) = args
    n_atoms = _n_at(t, n_variant, n_params, n_table_t, n_table_v)
    n_g = g.shape[0]
    n_e = i_of_j.shape[0]
    dy = np.zeros_like(y)
    ar = y[0]
    ai = y[1]
    # cavity: da/dt = -(kappa - i delta_c) a + N sum_m g_m sigma_m + eta
    sum_r = 0.0
    sum_i = 0.0
    for i in range(n_g):
        sum_r += g[i] * y[2 + i]
        sum_i += g[i] * y[2 + n_g + i]
    dy[0] = -kappa * ar - delta_c * ai + n_atoms * sum_r + eta
    dy[1] = -kappa * ai + delta_c * ar + n_atoms * sum_i
    # coherences and excited populations
    for i in range(n_g):
        sr = y[2 + i]
        si = y[2 + n_g + i]
        p = y[2 + 2 * n_g + i]
        j = e_of_i[i]
        rho = y[2 + 3 * n_g + j] if j >= 0 else 0.0
        sz = 2.0 * rho - p
        dy[2 + i] = -0.5 * gamma * sr - delta_a * si + g[i] * sz * ar
        dy[2 + n_g + i] = -0.5 * gamma * si + delta_a * sr + g[i] * sz * ai
        if j >= 0:
            # -g_m (a sigma* + a* sigma) = -2 g_m Re(a sigma*)
            dy[2 + 3 * n_g + j] = -gamma * rho - 2.0 * g[i] * (ar * sr + ai * si)
    # populations: loss to own excited partner, gain from all populated k
    for i in range(n_g):
        j = e_of_i[i]
        dp = -gamma * y[2 + 3 * n_g + j] if j >= 0 else 0.0
        for jj in range(n_e):
            dp += gamma * b_gain[i, jj] * y[2 + 3 * n_g + jj]
        dy[2 + 2 * n_g + i] = dp
    return dy


def derivatives(
    state: MeanFieldState,
    params: DriveParams,
    couplings: CouplingSet,
    n_atoms: float,
) -> MeanFieldState:
    """Instantaneous time derivative of the mean-field state."""
    for m in state.P:
        if m not in couplings.ground:
            raise ValueError(f"population sublevel 2m={m} not in the coupling set")
    for m in state.sigma:
        if m not in couplings.couplings:
            raise ValueError(f"coherence sublevel 2m={m} is not cavity-coupled")
    lay = _Layout(couplings)
    n_variant, n_params, n_tt, n_tv = AtomNumberModel.constant(float(n_atoms)).packed()
    dy = _rhs(
        0.0,
        lay.pack(state),
        (
            lay.g,
            lay.e_of_i,
            lay.i_of_j,
            lay.b_gain,
            couplings.gamma,
            params.kappa,
            params.eta,
            params.delta_a,
            params.delta_c,
            n_variant,
            n_params,
            n_tt,
            n_tv,
        ),
    )
    return lay.unpack(dy)


def initial_state(
    couplings: CouplingSet, populations: dict[int, float]
) -> MeanFieldState:
    """Dark initial state with normalized ground populations.

    ``populations`` maps ground two_m to nonnegative weights; they are
    normalized to sum to one.  Cavity field, coherences and excited
    populations start at zero.
    """
    weights = {m: float(populations.get(m, 0.0)) for m in couplings.ground}
    if any(w < 0 for w in weights.values()):
        raise ValueError("populations must be nonnegative")
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("populations must not all be zero")
    return MeanFieldState(
        a=0.0,
        sigma={m: 0.0 for m in couplings.coupled_ground()},
        P={m: w / total for m, w in weights.items()},
        rho_ee={m: 0.0 for m in couplings.coupled_ground()},
    )


def _g_eff(couplings: CouplingSet, p_row: np.ndarray, ground: tuple[int, ...]) -> float:
    acc = 0.0
    for i, m in enumerate(ground):
        c = couplings.cg.get(m)
        if c is not None:
            acc += c * c * p_row[i]
    return couplings.g0 * math.sqrt(max(acc, 0.0))


def integrate(
    initial: MeanFieldState,
    params: DriveParams,
    couplings: CouplingSet,
    n_model: AtomNumberModel,
    t_span: tuple[float, float],
    ctrl: IntegrationControl = IntegrationControl(),
    t_eval: np.ndarray | None = None,
) -> TimeSeries:
    """Integrate the mean-field equations over ``t_span``.

    N(t) is evaluated from ``n_model`` inside the right-hand side, so every
    integrator stage sees the instantaneous atom number.  Run metadata
    includes the population-conservation drift and the peak excited
    population.
    """
    lay = _Layout(couplings)
    y0 = lay.pack(initial)
    n_start = n_model.at(t_span[0])
    g_max = float(np.max(np.abs(lay.g))) if lay.n_g else 0.0

    n_variant, n_params, n_tt, n_tv = n_model.packed()
    args = (
        lay.g,
        lay.e_of_i,
        lay.i_of_j,
        lay.b_gain,
        couplings.gamma,
        params.kappa,
        params.eta,
        params.delta_a,
        params.delta_c,
        n_variant,
        n_params,
        n_tt,
        n_tv,
    )

    if ctrl.max_step is None:
        fastest = max(
            params.kappa,
            couplings.gamma,
            g_max * math.sqrt(max(n_start, 1.0)),
            abs(params.delta_a),
            abs(params.delta_c),
        )
        max_step = 3.0 / fastest
    else:
        max_step = ctrl.max_step

    t_out, y_out, stats = ode.solve_compiled(
        _rhs,
        t_span,
        y0,
        args,
        rtol=ctrl.rtol,
        atol=ctrl.atol,
        max_step=max_step,
        t_eval=t_eval,
    )

    n_g = lay.n_g
    a = y_out[:, 0] + 1j * y_out[:, 1]
    sigma = y_out[:, 2 : 2 + n_g] + 1j * y_out[:, 2 + n_g : 2 + 2 * n_g]
    populations = y_out[:, 2 + 2 * n_g : 2 + 3 * n_g]
    rho_ee = y_out[:, 2 + 3 * n_g :]
    n_eff = np.array([n_model.at(t) for t in t_out])
    g_eff = np.array([_g_eff(couplings, row, lay.ground) for row in populations])
    drift = float(np.max(np.abs(populations.sum(axis=1) - 1.0)))
    return TimeSeries(
        times=t_out,
        a=a,
        photon_number=np.abs(a) ** 2,
        ground_two_m=lay.ground,
        populations=populations,
        coupled_two_m=lay.coupled,
        rho_ee=rho_ee,
        sigma=sigma,
        g_eff=g_eff,
        n_eff=n_eff,
        meta={
            "conservation_drift": drift,
            "peak_rho_ee": float(rho_ee.max(initial=0.0)),
            "rtol": ctrl.rtol,
            "atol": ctrl.atol,
            "max_step": max_step,
            "n_accepted": stats.n_accepted,
            "n_rejected": stats.n_rejected,
            "n_rhs": stats.n_rhs,
        },
    )
