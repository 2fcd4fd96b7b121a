"""Angular-momentum algebra for a driven F -> F' transition.

All angular momenta and magnetic quantum numbers are passed around as
*twice-value* integers (``two_f = 2F``, ``two_m = 2m``) so that half-integer
spins stay exact and selection rules reduce to integer arithmetic.
Clebsch-Gordan coefficients are evaluated with the Racah factorial sum over
exact rationals; only the final square root is floating point.  Signs follow
the Condon-Shortley convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache


class TransitionGeometry(Enum):
    """Drive polarization, fixing the photon spherical component q.

    A ground sublevel m couples only to the excited sublevel m' = m + q.
    """

    PI = "pi"
    SIGMA_PLUS = "sigma_plus"
    SIGMA_MINUS = "sigma_minus"

    @property
    def two_q(self) -> int:
        """Twice the photon spherical component (0, +2, -2)."""
        return {"pi": 0, "sigma_plus": 2, "sigma_minus": -2}[self.value]


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _half_fact(two_n: int) -> int:
    """Factorial of ``two_n / 2``; the argument must be even and >= 0."""
    if two_n < 0 or two_n % 2:
        raise ValueError(f"factorial argument 2x{two_n} is not a nonnegative integer")
    return _fact(two_n // 2)


def clebsch_gordan_exact(
    two_f1: int, two_m1: int, two_f2: int, two_m2: int, two_f: int, two_m: int
) -> tuple[int, Fraction]:
    """Exact Clebsch-Gordan coefficient <F1 m1; F2 m2 | F m>.

    Returns ``(sign, square)`` with the coefficient equal to
    ``sign * sqrt(square)`` and ``square`` an exact rational.  Selection-rule
    failures (m != m1 + m2, triangle violation) give ``(0, 0)``.

    Raises
    ------
    ValueError
        If any |m| exceeds its F or an (F, m) pair has inconsistent parity.
    """
    for two_j, two_mm in ((two_f1, two_m1), (two_f2, two_m2), (two_f, two_m)):
        if two_j < 0:
            raise ValueError(f"negative angular momentum 2F={two_j}")
        if (two_j + two_mm) % 2:
            raise ValueError(f"inconsistent parity: 2F={two_j}, 2m={two_mm}")
        if abs(two_mm) > two_j:
            raise ValueError(f"|m| > F: 2F={two_j}, 2m={two_mm}")

    if two_m != two_m1 + two_m2:
        return 0, Fraction(0)
    if not (abs(two_f1 - two_f2) <= two_f <= two_f1 + two_f2):
        return 0, Fraction(0)
    if (two_f1 + two_f2 + two_f) % 2:
        return 0, Fraction(0)

    # Triangle coefficient squared and the m-dependent factorial products.
    pref = Fraction(
        _half_fact(two_f1 + two_f2 - two_f)
        * _half_fact(two_f1 - two_f2 + two_f)
        * _half_fact(-two_f1 + two_f2 + two_f),
        _half_fact(two_f1 + two_f2 + two_f + 2),
    )
    pref *= two_f + 1
    pref *= (
        _half_fact(two_f1 + two_m1)
        * _half_fact(two_f1 - two_m1)
        * _half_fact(two_f2 + two_m2)
        * _half_fact(two_f2 - two_m2)
        * _half_fact(two_f + two_m)
        * _half_fact(two_f - two_m)
    )

    # Racah sum over integer k; bounds keep every factorial argument >= 0.
    k_min = max(0, -(two_f - two_f2 + two_m1) // 2, -(two_f - two_f1 - two_m2) // 2)
    k_max = min(
        (two_f1 + two_f2 - two_f) // 2,
        (two_f1 - two_m1) // 2,
        (two_f2 + two_m2) // 2,
    )
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            _fact(k)
            * _half_fact(two_f1 + two_f2 - two_f - 2 * k)
            * _half_fact(two_f1 - two_m1 - 2 * k)
            * _half_fact(two_f2 + two_m2 - 2 * k)
            * _half_fact(two_f - two_f2 + two_m1 + 2 * k)
            * _half_fact(two_f - two_f1 - two_m2 + 2 * k)
        )
        total += Fraction(-1 if k % 2 else 1, denom)

    if total == 0:
        return 0, Fraction(0)
    sign = 1 if total > 0 else -1
    return sign, pref * total * total


def clebsch_gordan(
    two_f1: int, two_m1: int, two_f2: int, two_m2: int, two_f: int, two_m: int
) -> float:
    """Clebsch-Gordan coefficient <F1 m1; F2 m2 | F m> as a float."""
    sign, square = clebsch_gordan_exact(two_f1, two_m1, two_f2, two_m2, two_f, two_m)
    return sign * math.sqrt(square)


@dataclass(frozen=True)
class LevelScheme:
    """A driven Fg -> Fe transition with its drive geometry and rates.

    ``g0`` is the single-atom coupling and ``gamma`` the excited-state decay
    rate, both in rad/s.
    """

    two_fg: int
    two_fe: int
    geometry: TransitionGeometry
    g0: float
    gamma: float

    def __post_init__(self) -> None:
        if self.two_fg < 0 or self.two_fe < 0:
            raise ValueError("angular momenta must be nonnegative")
        if (self.two_fg - self.two_fe) % 2:
            raise ValueError("Fg and Fe must both be integer or both half-integer")
        if abs(self.two_fg - self.two_fe) > 2:
            raise ValueError("|Fg - Fe| must be <= 1 for a dipole transition")
        if self.two_fg + self.two_fe < 2:
            raise ValueError("Fg + Fe must be >= 1")
        if self.g0 <= 0:
            raise ValueError("g0 must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def ground_sublevels(self) -> tuple[int, ...]:
        """Ground two_m values, -2Fg..2Fg in steps of 2."""
        return tuple(range(-self.two_fg, self.two_fg + 1, 2))

    def excited_sublevels(self) -> tuple[int, ...]:
        return tuple(range(-self.two_fe, self.two_fe + 1, 2))


@dataclass(frozen=True)
class CouplingSet:
    """Per-sublevel couplings and decay branching for one scheme.

    All maps are keyed by twice-value magnetic quantum numbers.  ``couplings``
    holds g_m = g0 * c_m in rad/s for the cavity-coupled ground sublevels;
    sublevels absent from the map do not couple (g_m = 0).  ``branching`` maps
    (ground two_m, excited two_k) to the decay probability of |e,k> into
    |g,m>; for a closed transition each excited column sums to one.
    """

    g0: float
    gamma: float
    two_q: int
    ground: tuple[int, ...]
    excited: tuple[int, ...]
    couplings: dict[int, float]
    cg: dict[int, float]
    cg_sq: dict[int, Fraction] = field(repr=False)
    branching: dict[tuple[int, int], float] = field(repr=False)

    def partner(self, two_m: int) -> int | None:
        """Excited sublevel driven from ground ``two_m``, or None if uncoupled."""
        two_k = two_m + self.two_q
        return two_k if two_m in self.couplings else None

    def coupled_ground(self) -> tuple[int, ...]:
        return tuple(m for m in self.ground if m in self.couplings)

    def populated_excited(self) -> tuple[int, ...]:
        """Excited sublevels reachable by the cavity drive, in ground order."""
        return tuple(m + self.two_q for m in self.coupled_ground())


def coupling_set(scheme: LevelScheme) -> CouplingSet:
    """Couplings g_m = g0 c_m and branching ratios for a closed transition.

    Only Fe = Fg + 1 is supported: any other dipole-allowed Fe leaks
    population to hyperfine states outside the model.
    """
    if scheme.two_fe != scheme.two_fg + 2:
        raise ValueError(
            "unsupported: open transition (Fe must equal Fg + 1 for a closed scheme)"
        )
    two_q = scheme.geometry.two_q
    cg: dict[int, float] = {}
    cg_sq: dict[int, Fraction] = {}
    couplings: dict[int, float] = {}
    for two_m in scheme.ground_sublevels():
        two_k = two_m + two_q
        if abs(two_k) > scheme.two_fe:
            continue
        sign, square = clebsch_gordan_exact(
            scheme.two_fg, two_m, 2, two_q, scheme.two_fe, two_k
        )
        if sign == 0:
            continue
        cg[two_m] = sign * math.sqrt(square)
        cg_sq[two_m] = square
        couplings[two_m] = scheme.g0 * cg[two_m]

    branching: dict[tuple[int, int], float] = {}
    for two_k in scheme.excited_sublevels():
        for two_m in scheme.ground_sublevels():
            if abs(two_k - two_m) > 2:
                continue
            _, square = clebsch_gordan_exact(
                scheme.two_fg, two_m, 2, two_k - two_m, scheme.two_fe, two_k
            )
            branching[(two_m, two_k)] = float(square)

    return CouplingSet(
        g0=scheme.g0,
        gamma=scheme.gamma,
        two_q=two_q,
        ground=scheme.ground_sublevels(),
        excited=scheme.excited_sublevels(),
        couplings=couplings,
        cg=cg,
        cg_sq=cg_sq,
        branching=branching,
    )


def two_transition_scheme(
    c_minus_sq: float, c_plus_sq: float, g0: float, gamma: float
) -> CouplingSet:
    """Synthetic two-ground-state coupling set with free squared CG values.

    Models a sigma+ driven two-ground-state system (sublevels m = -1/2, +1/2
    keyed as two_m = -1, +1) whose two coupling strengths are set directly
    by ``c_minus_sq`` and ``c_plus_sq``.  Decay is one-way by construction:
    every photon scattered on the - transition transfers the atom to the +
    ground state, and the + transition cycles, so the - population decays
    monotonically toward zero.
    """
    for name, val in (("c_minus_sq", c_minus_sq), ("c_plus_sq", c_plus_sq)):
        if not 0 < val <= 1:
            raise ValueError(f"{name} must lie in (0, 1], got {val}")
    if g0 <= 0 or gamma <= 0:
        raise ValueError("g0 and gamma must be positive")

    cg_sq = {-1: Fraction(c_minus_sq), +1: Fraction(c_plus_sq)}
    cg = {-1: math.sqrt(c_minus_sq), +1: math.sqrt(c_plus_sq)}
    couplings = {m: g0 * c for m, c in cg.items()}
    # one-way kinetics: the excited partner of - (two_m' = +1) decays
    # entirely into the + ground state; the + transition is closed
    branching = {
        (+1, 1): 1.0,
        (+1, 3): 1.0,
    }
    return CouplingSet(
        g0=g0,
        gamma=gamma,
        two_q=2,
        ground=(-1, 1),
        excited=(1, 3),
        couplings=couplings,
        cg=cg,
        cg_sq=cg_sq,
        branching=branching,
    )
