"""Closed-form steady-state observables of the coupled system.

Weak-field results: population-weighted effective coupling, steady-state
intracavity intensity, the collective normal-mode splitting, and scanned
transmission spectra with peak extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as c_light
from scipy.constants import hbar

from .levels import CouplingSet


@dataclass
class SpectrumScan:
    """Transmission scan along delta_a = delta_c with extracted peaks."""

    detunings: np.ndarray  # rad/s
    intensities: np.ndarray  # photon number |a|^2
    peaks: tuple[float, ...]  # rad/s, interpolated maxima positions
    separation: float  # rad/s, 0 when only one peak is present


def effective_coupling(couplings: CouplingSet, populations: dict[int, float]) -> float:
    """Population-weighted collective coupling g_eff = g0 sqrt(sum c_m^2 P_m)."""
    total = sum(populations.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"populations must be normalized, sum = {total!r}")
    acc = 0.0
    for m, p in populations.items():
        c = couplings.cg.get(m)
        if c is not None:
            acc += c * c * p
    return couplings.g0 * math.sqrt(max(acc, 0.0))


def intracavity_intensity_ss(
    params, gamma: float, n_atoms: float, g_eff: float
) -> float:
    """Weak-field steady-state photon number for given drive and coupling.

    ``params`` carries eta, delta_a, delta_c and kappa (a DriveParams or any
    object with those attributes).
    """
    if n_atoms < 0:
        raise ValueError("atom number must be nonnegative")
    da, dc = params.delta_a, params.delta_c
    atom_lor = gamma**2 / 4.0 + da**2
    denom = (
        n_atoms**2 * g_eff**4
        + n_atoms * g_eff**2 * (gamma * params.kappa - 2.0 * da * dc)
        + atom_lor * (params.kappa**2 + dc**2)
    )
    if denom <= 0:
        raise ArithmeticError(
            "nonpositive denominator in the steady-state intensity: "
            "unphysical parameter combination"
        )
    return atom_lor * params.eta**2 / denom


def normal_mode_splitting(g_eff: float, n_atoms: float) -> float:
    """Collective normal-mode splitting 2 g_eff sqrt(N), rad/s."""
    if n_atoms < 0:
        raise ValueError("atom number must be nonnegative")
    return 2.0 * g_eff * math.sqrt(n_atoms)


def _refine_peak(x: np.ndarray, logy: np.ndarray, i: int) -> float:
    """Quadratic (three-point) interpolation of a discrete maximum."""
    if i == 0 or i == len(x) - 1:
        return float(x[i])
    y0, y1, y2 = logy[i - 1], logy[i], logy[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0:
        return float(x[i])
    shift = 0.5 * (y0 - y2) / denom
    return float(x[i] + shift * (x[i + 1] - x[i]))


def transmission_spectrum(
    params,
    gamma: float,
    n_atoms: float,
    couplings: CouplingSet,
    populations: dict[int, float],
    grid: np.ndarray,
) -> SpectrumScan:
    """Scan the steady-state intensity along delta_a = delta_c = grid.

    ``params`` supplies eta and kappa; its detunings are overridden by the
    grid.  Maxima are located by quadratic interpolation on the log
    intensity; with atoms present in the strong-coupling regime two peaks
    are reported and their separation returned.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("detuning grid must be nonempty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("detuning grid must be strictly increasing")
    g_eff = effective_coupling(couplings, populations)

    atom_lor = gamma**2 / 4.0 + grid**2
    denom = (
        n_atoms**2 * g_eff**4
        + n_atoms * g_eff**2 * (gamma * params.kappa - 2.0 * grid**2)
        + atom_lor * (params.kappa**2 + grid**2)
    )
    if np.any(denom <= 0):
        raise ArithmeticError("nonpositive denominator in the steady-state intensity")
    intens = atom_lor * params.eta**2 / denom

    logy = np.log(np.maximum(intens, 1e-300))
    interior = np.nonzero(
        (logy[1:-1] > logy[:-2]) & (logy[1:-1] >= logy[2:])
    )[0] + 1
    if len(interior) == 0:
        # monotone scan; fall back to the global maximum at an endpoint
        interior = np.array([int(np.argmax(logy))])
    if len(interior) > 2:
        order = np.argsort(intens[interior])[::-1][:2]
        interior = np.sort(interior[order])
    peaks = tuple(_refine_peak(grid, logy, int(i)) for i in interior)
    separation = abs(peaks[-1] - peaks[0]) if len(peaks) == 2 else 0.0
    return SpectrumScan(
        detunings=grid, intensities=intens, peaks=peaks, separation=separation
    )


def transmitted_power(
    a_sq: float, omega: float, round_trip: float, mirror_transmission: float
) -> float:
    """Power leaking through the outcoupling mirror, in watts.

    The circulating power for photon number |a|^2 in a ring of round-trip
    length l is |a|^2 hbar omega c / l; a fraction ``mirror_transmission``
    of it is coupled out.
    """
    if round_trip <= 0 or omega <= 0:
        raise ValueError("round-trip length and frequency must be positive")
    if not 0 <= mirror_transmission <= 1:
        raise ValueError("mirror transmission must lie in [0, 1]")
    p_circ = a_sq * hbar * omega * c_light / round_trip
    return p_circ * mirror_transmission


def circulating_power(a_sq: float, omega: float, round_trip: float) -> float:
    """Intracavity circulating power for photon number |a|^2, in watts."""
    if round_trip <= 0 or omega <= 0:
        raise ValueError("round-trip length and frequency must be positive")
    return a_sq * hbar * omega * c_light / round_trip
