"""Embedded Dormand-Prince 5(4) integrator with PI step-size control.

Small shared core used by both the mean-field equations and the scalar
pumping rate equation.  The right-hand side is a plain callable
``f(t, y) -> ndarray``; output samples are taken by landing steps exactly on
the requested grid (steps are much smaller than the grid spacing in every
regime simulated here).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


class StiffnessError(RuntimeError):
    """Step size underflowed; the system is too stiff for the explicit pair."""

    def __init__(self, t_reached: float):
        super().__init__(
            f"step size underflow at t = {t_reached:.6e} s; system too stiff"
        )
        self.t_reached = t_reached


# Dormand-Prince 5(4) tableau, zero-padded to full rows so stage sums can
# use whole-matrix products (unused entries multiply by zero).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_ORDER_EXP = 1 / 5
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_PI_ALPHA = 0.7 / 5  # current-error exponent of the PI controller
_PI_BETA = 0.4 / 5  # previous-error exponent


@dataclass
class SolveStats:
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0


def _error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol):
    # Hairer-Norsett-Wanner style heuristic, one trial Euler step.
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    if not (0.0 < h0 < np.inf):  # extreme tolerances can overflow d0 or d1
        h0 = 1e-6
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ORDER_EXP
    return min(100 * h0, h1)


def solve(
    f,
    t_span: tuple[float, float],
    y0: np.ndarray,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
    t_eval: np.ndarray | None = None,
    step_hook=None,
) -> tuple[np.ndarray, np.ndarray, SolveStats]:
    """Integrate y' = f(t, y) over ``t_span``, sampling at ``t_eval``.

    ``step_hook(t, y)``, when given, is called once before the first step and
    after every accepted step; it is the place to refresh slowly varying
    parameters (e.g. the effective atom number) between steps.

    Returns ``(t_out, y_out, stats)`` with ``y_out`` of shape
    ``(len(t_out), len(y0))``.

    Raises
    ------
    StiffnessError
        If the error-controlled step size collapses below the resolvable
        time scale, reporting the time reached.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    y = np.asarray(y0, dtype=float).copy()
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 1001)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval[0] < t0 - 1e-30 or t_eval[-1] > t1 * (1 + 1e-12) + 1e-30:
            raise ValueError("t_eval must lie within t_span")

    stats = SolveStats()
    out = np.empty((len(t_eval), len(y)), dtype=float)
    i_out = 0
    t = t0
    if step_hook is not None:
        step_hook(t, y)
    k = np.zeros((7, len(y)), dtype=float)
    k[0] = f(t, y)
    stats.n_rhs += 1
    # record any output points at t0
    while i_out < len(t_eval) and t_eval[i_out] <= t0:
        out[i_out] = y
        i_out += 1

    h = min(_initial_step(f, t0, y, k[0], rtol, atol), max_step, t1 - t0)
    stats.n_rhs += 1
    if not h > 0.0:  # nan or zero from an overflowed heuristic
        raise StiffnessError(t0)
    err_prev = 1.0
    tiny = np.finfo(float).tiny

    while t < t1:
        h = min(h, max_step, t1 - t)
        # land exactly on the next requested output time
        if i_out < len(t_eval) and t + h > t_eval[i_out]:
            h_try = t_eval[i_out] - t
        else:
            h_try = h
        if h_try < 1e-14 * max(abs(t), 1e-30) + tiny:
            raise StiffnessError(t)

        for s in range(1, 7):
            k[s] = f(t + _C[s] * h_try, y + h_try * (_A[s] @ k))
        stats.n_rhs += 6
        y_new = y + h_try * (_B5 @ k)
        err_vec = h_try * (_E @ k)
        err = _error_norm(err_vec, y, y_new, rtol, atol)

        if err <= 1.0:
            t_new = t + h_try
            # FSAL: stage 7 equals f at the new point
            k0_new = k[6].copy()
            while i_out < len(t_eval) and t_eval[i_out] <= t_new * (1 + 1e-15):
                out[i_out] = y_new
                i_out += 1
            t, y = t_new, y_new
            k[0] = k0_new
            stats.n_accepted += 1
            if step_hook is not None and t < t1:
                # parameters refreshed here vary slowly; the FSAL stage stays
                # valid to well below the step tolerance
                step_hook(t, y)
            factor = _SAFETY * (err + 1e-30) ** -_PI_ALPHA * err_prev**_PI_BETA
            err_prev = max(err, 1e-10)
        else:
            stats.n_rejected += 1
            factor = _SAFETY * (err + 1e-30) ** -_ORDER_EXP
        h = h_try * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))

    while i_out < len(t_eval):
        out[i_out] = y
        i_out += 1
    return t_eval, out, stats


@njit
def _solve_core(f, t0, t1, y0, args, rtol, atol, max_step, t_eval, out):
    """Same stepping scheme as ``solve``, compiled; f(t, y, args) -> dy.

    Returns (status, t_reached, n_accepted, n_rejected, n_rhs) with status 0
    on success and 1 on step-size underflow.
    """
    n = y0.shape[0]
    y = y0.copy()
    t = t0
    k = np.zeros((7, n))
    k[0] = f(t, y, args)
    n_rhs = 1
    n_acc = 0
    n_rej = 0
    i_out = 0
    n_out = t_eval.shape[0]
    while i_out < n_out and t_eval[i_out] <= t0:
        out[i_out] = y
        i_out += 1

    # initial step heuristic (trial Euler step)
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((k[0] / scale) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    if not (0.0 < h0 < np.inf):  # extreme tolerances can overflow d0 or d1
        h0 = 1e-6
    f1 = f(t0 + h0, y + h0 * k[0], args)
    n_rhs += 1
    d2 = np.sqrt(np.mean(((f1 - k[0]) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ORDER_EXP
    h = min(100.0 * h0, h1)
    h = min(h, max_step, t1 - t0)
    if not h > 0.0:  # nan or zero from an overflowed heuristic
        return 1, t0, n_acc, n_rej, n_rhs

    err_prev = 1.0
    tiny = 1e-300
    while t < t1:
        h = min(h, max_step, t1 - t)
        if i_out < n_out and t + h > t_eval[i_out]:
            h_try = t_eval[i_out] - t
        else:
            h_try = h
        if h_try < 1e-14 * max(abs(t), 1e-30) + tiny:
            return 1, t, n_acc, n_rej, n_rhs

        for s in range(1, 7):
            y_stage = y + h_try * (_A[s] @ k)
            k[s] = f(t + _C[s] * h_try, y_stage, args)
        n_rhs += 6
        y_new = y + h_try * (_B5 @ k)
        err_vec = h_try * (_E @ k)
        escale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((err_vec / escale) ** 2))

        if err <= 1.0:
            t_new = t + h_try
            k0_new = k[6].copy()
            while i_out < n_out and t_eval[i_out] <= t_new * (1.0 + 1e-15):
                out[i_out] = y_new
                i_out += 1
            t = t_new
            y = y_new
            k[0] = k0_new
            n_acc += 1
            factor = _SAFETY * (err + 1e-30) ** -_PI_ALPHA * err_prev**_PI_BETA
            err_prev = max(err, 1e-10)
        else:
            n_rej += 1
            factor = _SAFETY * (err + 1e-30) ** -_ORDER_EXP
        h = h_try * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))

    while i_out < n_out:
        out[i_out] = y
        i_out += 1
    return 0, t, n_acc, n_rej, n_rhs


def solve_compiled(
    f,
    t_span: tuple[float, float],
    y0: np.ndarray,
    args: tuple,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
    t_eval: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, SolveStats]:
    """Compiled counterpart of ``solve`` for jitted right-hand sides.

    ``f(t, y, args)`` must be a numba-compiled function (or plain Python when
    numba is unavailable); ``args`` is an arbitrary parameter tuple passed
    through untouched.  Slowly varying parameters such as the effective atom
    number are evaluated inside ``f`` itself.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    y0 = np.asarray(y0, dtype=float)
    if t_eval is None:
        t_eval = np.linspace(t0, t1, 1001)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
    out = np.empty((len(t_eval), len(y0)))
    status, t_reached, n_acc, n_rej, n_rhs = _solve_core(
        f, t0, t1, y0, args, rtol, atol, max_step, t_eval, out
    )
    if status == 1:
        raise StiffnessError(t_reached)
    stats = SolveStats(n_accepted=n_acc, n_rejected=n_rej, n_rhs=n_rhs)
    return t_eval, out, stats
