"""Periodic orbits of the rotating Kepler problem at a fixed Jacobi energy."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

import numpy as np
from scipy.optimize import brentq

from .core import PhasePoint
from .errors import DomainError, NonGenericEnergyError, ResonantEnergyError
from .halfint import HalfInteger

__all__ = [
    "CircularRoots",
    "FamilyId",
    "OrbitRecord",
    "GenericityReport",
    "circular_cubic",
    "circular_energies",
    "circular_period",
    "circular_orbit_state",
    "collision_period",
    "resonance_energy",
    "bifurcation_energies",
    "enumerate_families",
    "is_generic",
    "catalog",
    "GENERIC_TOL",
]

GENERIC_TOL = 1e-9


def circular_cubic(E, c):
    """2E(c - E)^2 + 1; its zeros are the Kepler energies of circular orbits."""
    return 2.0 * E * (c - E) ** 2 + 1.0


@dataclass(frozen=True)
class CircularRoots:
    """Real roots of the circular-orbit cubic, ascending.

    ``retrograde`` is the smallest root (orbit gamma_+), ``direct`` the middle
    one (gamma_-) and ``outer`` the largest.  A double root is listed once
    in ``roots`` and fills both ``direct`` and ``outer``.
    """

    c: float
    roots: tuple[float, ...]
    retrograde: float
    direct: float | None = None
    outer: float | None = None

    @property
    def E_plus(self) -> float:
        return self.retrograde

    @property
    def E_minus(self) -> float | None:
        return self.direct


def _root(c, lo, hi):
    E = brentq(circular_cubic, lo, hi, args=(c,), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    # one Newton polish
    d = 2.0 * (c - E) * (c - 3.0 * E)
    if d != 0.0:
        En = E - circular_cubic(E, c) / d
        if lo <= En <= hi and abs(circular_cubic(En, c)) <= abs(circular_cubic(E, c)):
            E = En
    return float(E)


def circular_energies(c: float, double_tol: float = 1e-13) -> CircularRoots:
    """Kepler energies of the circular orbits at Jacobi energy ``c``.

    The cubic has critical points E = c and E = c/3 with values 1 and
    1 + 8c^3/27, which give sign-change brackets for every root.
    """
    c = float(c)
    if not math.isfinite(c):
        raise DomainError("c must be finite")
    f = lambda E: circular_cubic(E, c)  # noqa: E731
    top = min(c, 0.0)
    lo = top - 1.0
    while f(lo) >= 0.0:
        lo = top + 2.0 * (lo - top)
    retro = _root(c, lo, top) if c < 0 else _root(c, lo, 0.0)
    if c >= 0:
        return CircularRoots(c, (retro,), retro)
    fc3 = f(c / 3.0)
    if fc3 > double_tol:
        return CircularRoots(c, (retro,), retro)
    if fc3 >= -double_tol:
        E2 = c / 3.0
        return CircularRoots(c, (retro, E2), retro, E2, E2)
    direct = _root(c, c, c / 3.0)
    outer = _root(c, c / 3.0, 0.0)
    return CircularRoots(c, (retro, direct, outer), retro, direct, outer)


def _sign(sign) -> int:
    if sign in ("+", 1):
        return 1
    if sign in ("-", "−", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def circular_period(E: float, sign) -> float:
    """Rotating-frame period 2 pi / |(-2E)^(3/2) +- 1| of a circular orbit."""
    if not E < 0:
        raise DomainError("circular orbits need E < 0")
    den = (-2.0 * E) ** 1.5 + _sign(sign)
    if abs(den) < 1e-12:
        raise ResonantEnergyError("the direct orbit at E = -1/2 is a circle of equilibria in the rotating frame")
    return 2.0 * math.pi / abs(den)


def collision_period(c: float) -> float:
    """Period of the vertical collision orbits, which have Kepler energy c."""
    if not c < 0:
        raise DomainError("collision orbits need c < 0")
    return 2.0 * math.pi / (-2.0 * c) ** 1.5


def circular_orbit_state(E: float, sign, t: float = 0.0) -> PhasePoint:
    """State at time ``t`` on the circular orbit of Kepler energy ``E``.

    In cylindrical coordinates the orbit is
    ``(w^2, (1/w^3 + 1) t, 0, 0, w, 0)`` with ``w = +-1/sqrt(-2E)``.
    """
    if not E < 0:
        raise DomainError("circular orbits need E < 0")
    w = _sign(sign) / math.sqrt(-2.0 * E)
    return PhasePoint.from_cylindrical(w * w, (1.0 / w**3 + 1.0) * t, 0.0, 0.0, w, 0.0)


# ---------------------------------------------------------------------------
# resonances


@dataclass(frozen=True, order=True)
class FamilyId:
    """Coprime resonance pair (k, l): k Kepler periods fill l rotations.

    The family is a 3-sphere in the moduli space and an S^3 x S^1 of
    orbits in phase space; both dimensions are kept as class constants.
    """

    k: int
    l: int  # noqa: E741

    MODULI_DIM: ClassVar[int] = 3
    PHASE_DIM: ClassVar[int] = 4

    def __post_init__(self):
        if int(self.k) != self.k or int(self.l) != self.l or self.k < 1 or self.l < 1:
            raise ValueError(f"(k, l) must be positive integers, got ({self.k}, {self.l})")
        if math.gcd(self.k, self.l) != 1:
            raise ValueError(f"({self.k}, {self.l}) is not coprime; use FamilyId.reduced")

    @classmethod
    def reduced(cls, k: int, l: int):  # noqa: E741
        """(FamilyId, g): the coprime form of (k, l) and the common factor removed."""
        if k < 1 or l < 1:
            raise ValueError("(k, l) must be positive")
        g = math.gcd(k, l)
        return cls(k // g, l // g), g

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.k, self.l)

    @property
    def energy(self) -> float:
        return resonance_energy(self.k, self.l)

    def __str__(self):
        return f"({self.k},{self.l})"


def resonance_energy(k: int, l: int) -> float:  # noqa: E741
    """E_{k,l} = -(k/l)^(2/3) / 2."""
    if k < 1 or l < 1:
        raise DomainError("k and l must be positive")
    return -0.5 * float(np.cbrt(k / l)) ** 2


def bifurcation_energies(k: int, l: int) -> tuple[float, float]:  # noqa: E741
    """(c^-, c^+) = E_{k,l} -+ 1/sqrt(-2E_{k,l})."""
    E = resonance_energy(k, l)
    d = 1.0 / float(np.cbrt(k / l))
    return E - d, E + d


def enumerate_families(c: float, k_max: int) -> list[FamilyId]:
    """Coprime (k, l), k <= k_max, with E_+ < E_{k,l} < E_- at energy ``c``."""
    if not c < -1.5:
        raise DomainError("families are enumerated below the critical energy -3/2")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    roots = circular_energies(c)
    lo = (-2.0 * roots.direct) ** 1.5
    hi = (-2.0 * roots.retrograde) ** 1.5
    out = []
    for k in range(1, k_max + 1):
        for l in range(max(1, math.floor(k / hi)), math.ceil(k / lo) + 1):  # noqa: E741
            if math.gcd(k, l) != 1:
                continue
            if roots.retrograde < resonance_energy(k, l) < roots.direct:
                out.append(FamilyId(k, l))
    return sorted(out, key=lambda f: (f.k, f.l))


@dataclass(frozen=True)
class GenericityReport:
    """Outcome of :func:`is_generic`; ``offenders`` pairs a family with the violated equation."""

    c: float
    k_max: int
    offenders: tuple[tuple[FamilyId, str], ...]

    @property
    def generic(self) -> bool:
        return not self.offenders

    def __bool__(self):
        return self.generic


def _candidate_ls(k, x):
    # l near k / x, widened so that near-tangential crossings are not missed
    centre = k / x
    lo = max(1, math.floor(centre * (1 - 1e-3)) - 1)
    hi = math.ceil(centre * (1 + 1e-3)) + 1
    return range(lo, hi + 1)


def is_generic(c: float, k_max: int, tol: float = GENERIC_TOL) -> GenericityReport:
    """Check c != E_{k,l} and c != c^+-_{k,l} for every coprime pair with k <= k_max.

    c = E_{k,l} forces k/l = (-2c)^(3/2); c = c^+-_{k,l} forces E_{k,l} to be a
    circular energy of ``c``.  Only pairs near those ratios are tested.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    c = float(c)
    checks = []
    if c < 0:
        checks.append(("E", (-2.0 * c) ** 1.5))
    for E in circular_energies(c).roots:
        checks.append(("c", (-2.0 * E) ** 1.5))
    found = {}
    for k in range(1, k_max + 1):
        for what, x in checks:
            for l in _candidate_ls(k, x):  # noqa: E741
                if math.gcd(k, l) != 1:
                    continue
                if what == "E":
                    if abs(c - resonance_energy(k, l)) < tol:
                        found[(k, l, "E")] = "c = E_{k,l}"
                else:
                    cm, cp = bifurcation_energies(k, l)
                    if abs(c - cm) < tol:
                        found[(k, l, "c-")] = "c = c^-_{k,l}"
                    if abs(c - cp) < tol:
                        found[(k, l, "c+")] = "c = c^+_{k,l}"
    offenders = tuple(sorted(((FamilyId(k, l), why) for (k, l, _), why in found.items()), key=lambda o: (o[0], o[1])))
    return GenericityReport(c, k_max, offenders)


# ---------------------------------------------------------------------------
# catalog

KINDS = ("retrograde", "direct", "outer-direct", "collision+", "collision-", "family")


@dataclass(frozen=True)
class OrbitRecord:
    """A periodic orbit (or Morse-Bott family) on the level H = c.

    ``period`` is that of the simple orbit in rotating-frame time; ``cover``
    is the iterate.  ``index`` is filled in by the index engine.
    """

    kind: str
    E: float
    c: float
    period: float
    cover: int = 1
    family: FamilyId | None = None
    index: HalfInteger | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown orbit kind {self.kind!r}")
        if self.cover < 1:
            raise ValueError("cover must be at least 1")
        if (self.kind == "family") != (self.family is not None):
            raise ValueError("family records carry a FamilyId and only they do")

    @property
    def label(self) -> str:
        names = {
            "retrograde": "gamma_+",
            "direct": "gamma_-",
            "outer-direct": "gamma_out",
            "collision+": "gamma_c+",
            "collision-": "gamma_c-",
        }
        if self.kind == "family":
            return f"Sigma_{{{self.family.k},{self.family.l}}}"
        base = names[self.kind]
        return base if self.cover == 1 else f"{base}^{self.cover}"

    @property
    def total_period(self) -> float:
        return self.cover * self.period

    def with_index(self, index) -> "OrbitRecord":
        return dataclasses.replace(self, index=index if isinstance(index, HalfInteger) else HalfInteger.of(index))


def catalog(c: float, N_max: int, k_max: int, tol: float = GENERIC_TOL) -> list[OrbitRecord]:
    """All periodic orbits of interest at generic ``c < -3/2`` (indices unfilled).

    Covers 1..N_max of gamma_+, gamma_-, gamma_c+ and gamma_c-, then every
    family Sigma_{k,l} with k <= k_max.  The outer direct orbit is left out.
    """
    if not c < -1.5:
        raise DomainError("the catalog is defined below the critical energy -3/2")
    if N_max < 1:
        raise ValueError("N_max must be at least 1")
    report = is_generic(c, k_max, tol)
    if not report.generic:
        offenders = [f for f, _ in report.offenders]
        reasons = ", ".join(f"{f} ({why})" for f, why in report.offenders)
        raise NonGenericEnergyError(f"c = {c!r} is not generic: {reasons}", offenders)
    roots = circular_energies(c)
    tau_p = circular_period(roots.retrograde, "+")
    tau_m = circular_period(roots.direct, "-")
    tau_c = collision_period(c)
    out = []
    for N in range(1, N_max + 1):
        out.append(OrbitRecord("retrograde", roots.retrograde, c, tau_p, N))
        out.append(OrbitRecord("direct", roots.direct, c, tau_m, N))
        out.append(OrbitRecord("collision+", c, c, tau_c, N))
        out.append(OrbitRecord("collision-", c, c, tau_c, N))
    for fam in enumerate_families(c, k_max):
        out.append(OrbitRecord("family", fam.energy, c, 2.0 * math.pi * fam.l, 1, fam))
    return out
