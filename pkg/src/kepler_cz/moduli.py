"""Moduli of Kepler orbits at fixed energy as points of S^2 x S^2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .catalog import FamilyId, bifurcation_energies
from .core import PhasePoint, invariants
from .errors import DegenerateBirthError, DomainError, InconsistentInvariantsError, SingularLevelError

__all__ = [
    "SpherePair",
    "LocusTags",
    "CriticalPoint",
    "BifurcationEvent",
    "to_sphere_pair",
    "from_sphere_pair",
    "moduli_point",
    "classify_point",
    "l3_value",
    "a3_value",
    "l3_morse_data",
    "a3_morse_data",
    "projected_hessian",
    "projected_gradient",
    "morse_index",
    "level_set_sample",
    "bifurcation_schedule",
    "NAMED_POINTS",
]

TAG_TOL = 1e-9


@dataclass(frozen=True)
class SpherePair:
    x: np.ndarray
    y: np.ndarray
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(3)
        y = np.asarray(self.y, dtype=float).reshape(3)
        for v in (x, y):
            if abs(np.linalg.norm(v) - 1.0) > self.tol:
                raise InconsistentInvariantsError(f"|{v}| = {np.linalg.norm(v)!r} is not 1")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def as_array(self):
        return np.concatenate([self.x, self.y])


_E3 = np.array([0.0, 0.0, 1.0])
NAMED_POINTS = {
    "gamma_+": (_E3, _E3),
    "gamma_-": (-_E3, -_E3),
    "gamma_c+": (_E3, -_E3),
    "gamma_c-": (-_E3, _E3),
}


def _scale(E):
    if not E < 0:
        raise DomainError("the moduli space is defined for bound energies E < 0")
    return math.sqrt(-2.0 * E)


def to_sphere_pair(E: float, L, A, tol: float = 1e-9) -> SpherePair:
    """(sqrt(-2E) L - A, sqrt(-2E) L + A)."""
    s = _scale(E)
    L = np.asarray(L, dtype=float)
    A = np.asarray(A, dtype=float)
    if abs(A @ L) > tol:
        raise InconsistentInvariantsError(f"A . L = {A @ L!r} is not zero")
    defect = A @ A - 2.0 * E * (L @ L) - 1.0
    if abs(defect) > tol:
        raise InconsistentInvariantsError(f"|A|^2 - 2E|L|^2 - 1 = {defect!r}")
    return SpherePair(s * L - A, s * L + A, tol=max(1e-9, 2 * tol))


def from_sphere_pair(E: float, sp: SpherePair):
    """(L, A) = ((x + y) / (2 sqrt(-2E)), -(x - y) / 2)."""
    s = _scale(E)
    return (sp.x + sp.y) / (2.0 * s), -(sp.x - sp.y) / 2.0


def moduli_point(state: PhasePoint, tol: float = 1e-8) -> tuple[float, SpherePair]:
    """Kepler energy and moduli point of the Kepler orbit through ``state``."""
    inv = invariants(state)
    return inv.E, to_sphere_pair(inv.E, inv.L, inv.A, tol)


@dataclass(frozen=True)
class LocusTags:
    flags: frozenset = frozenset()

    def __contains__(self, tag):
        return tag in self.flags

    def __iter__(self):
        return iter(sorted(self.flags))

    def __len__(self):
        return len(self.flags)

    def __getattr__(self, name):
        key = name.replace("_plus", "+").replace("_minus", "-")
        if key in _ALL_TAGS:
            return key in self.flags
        raise AttributeError(name)


_ALL_TAGS = frozenset(
    {"circular", "collision", "planar", "vertical", "retrograde", "direct", "collision+", "collision-"}
)


def classify_point(sp: SpherePair, tol: float = TAG_TOL) -> LocusTags:
    """Special loci containing ``sp``; tags use equality within ``tol``."""
    x, y = sp.x, sp.y

    def close(a, b):
        return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) <= tol))

    tags = set()
    if close(x, y):
        tags.add("circular")
    if close(x, -y):
        tags.add("collision")
    if close(x[:2], -y[:2]) and close(x[2], y[2]):
        tags.add("planar")
    if close(x[:2], y[:2]) and close(x[2], -y[2]):
        tags.add("vertical")
    names = {"gamma_+": "retrograde", "gamma_-": "direct", "gamma_c+": "collision+", "gamma_c-": "collision-"}
    for key, tag in names.items():
        px, py = NAMED_POINTS[key]
        if close(x, px) and close(y, py):
            tags.add(tag)
    return LocusTags(frozenset(tags))


def l3_value(E: float, sp: SpherePair) -> float:
    return float((sp.x[2] + sp.y[2]) / (2.0 * _scale(E)))


def a3_value(sp: SpherePair) -> float:
    return float(-(sp.x[2] - sp.y[2]) / 2.0)


# ---------------------------------------------------------------------------
# Morse data


def _tangent_basis(v):
    # orthonormal basis of the plane orthogonal to the unit vector v
    a = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - (a @ v) * v
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(v, e1)


def _exp(v, u):
    n = np.linalg.norm(u)
    if n == 0:
        return v.copy()
    return math.cos(n) * v + math.sin(n) * u / n


def _chart(sp: SpherePair):
    bx, by = _tangent_basis(sp.x), _tangent_basis(sp.y)

    def point(w):
        return (
            _exp(sp.x, w[0] * bx[0] + w[1] * bx[1]),
            _exp(sp.y, w[2] * by[0] + w[3] * by[1]),
        )

    return point


def projected_gradient(f: Callable, sp: SpherePair, h: float = 1e-6) -> np.ndarray:
    """Gradient of ``f(x, y)`` along S^2 x S^2 in geodesic normal coordinates."""
    point = _chart(sp)
    g = np.empty(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        g[i] = (f(*point(e)) - f(*point(-e))) / (2 * h)
    return g


def projected_hessian(f: Callable, sp: SpherePair, h: float = 1e-4) -> np.ndarray:
    """Hessian of ``f(x, y)`` along S^2 x S^2 in geodesic normal coordinates."""
    point = _chart(sp)
    H = np.empty((4, 4))
    f0 = f(*point(np.zeros(4)))
    for i in range(4):
        for j in range(i, 4):
            ei = np.zeros(4)
            ej = np.zeros(4)
            ei[i] = h
            ej[j] = h
            if i == j:
                H[i, i] = (f(*point(ei)) - 2 * f0 + f(*point(-ei))) / h**2
            else:
                H[i, j] = H[j, i] = (
                    f(*point(ei + ej)) - f(*point(ei - ej)) - f(*point(ej - ei)) + f(*point(-ei - ej))
                ) / (4 * h * h)
    return H


def morse_index(f: Callable, sp: SpherePair, tol: float = 1e-6) -> int:
    """Number of negative eigenvalues of the projected Hessian (must be nondegenerate)."""
    ev = np.linalg.eigvalsh(projected_hessian(f, sp))
    if np.min(np.abs(ev)) < tol:
        raise DomainError("degenerate critical point")
    return int(np.sum(ev < 0))


@dataclass(frozen=True)
class CriticalPoint:
    name: str
    point: SpherePair
    value: float
    index: int
    hessian_index: int

    @property
    def consistent(self) -> bool:
        return self.index == self.hessian_index


def _critical(f, table):
    out = []
    for name, value, idx in table:
        sp = SpherePair(*NAMED_POINTS[name])
        out.append(CriticalPoint(name, sp, value, idx, morse_index(f, sp)))
    return out


def l3_morse_data(E: float) -> list[CriticalPoint]:
    """Critical points of L3 = (x3 + y3) / (2 sqrt(-2E)), ascending by value.

    Minimum at gamma_-, saddles of index 2 at the two collision orbits,
    maximum at gamma_+.  Each stated index is paired with the signature of
    the projected Hessian.
    """
    s = _scale(E)
    f = lambda x, y: (x[2] + y[2]) / (2.0 * s)  # noqa: E731
    table = [("gamma_-", -1.0 / s, 0), ("gamma_c+", 0.0, 2), ("gamma_c-", 0.0, 2), ("gamma_+", 1.0 / s, 4)]
    return _critical(f, table)


def a3_morse_data(E: float | None = None) -> list[CriticalPoint]:
    """Critical points of A3 = -(x3 - y3) / 2, ascending by value.

    A3 = -1 at gamma_c+ (minimum) and +1 at gamma_c- (maximum); the circular
    orbits gamma_+- are saddles.
    """
    if E is not None:
        _scale(E)
    f = lambda x, y: -(x[2] - y[2]) / 2.0  # noqa: E731
    table = [("gamma_c+", -1.0, 0), ("gamma_+", 0.0, 2), ("gamma_-", 0.0, 2), ("gamma_c-", 1.0, 4)]
    return _critical(f, table)


def level_set_sample(E: float, L3_value: float, n: int, seed=None, tol: float = 1e-12) -> list[SpherePair]:
    """``n`` points of S^2 x S^2 on the level L3 = ``L3_value``.

    With S = x3 + y3 fixed, x3 is uniform on its admissible interval and the
    two azimuths are uniform.
    """
    s = _scale(E)
    if abs(L3_value) <= tol:
        raise SingularLevelError("L3 = 0 is a singular level (not a manifold)")
    if abs(L3_value) >= 1.0 / s - tol:
        raise DomainError(f"|L3| must be below {1.0 / s!r} for a regular level")
    rng = np.random.default_rng(seed)
    S = 2.0 * s * L3_value
    lo, hi = max(-1.0, S - 1.0), min(1.0, S + 1.0)
    x3 = rng.uniform(lo, hi, n)
    y3 = S - x3
    ax = rng.uniform(0.0, 2 * math.pi, n)
    ay = rng.uniform(0.0, 2 * math.pi, n)
    out = []
    for i in range(n):
        rx = math.sqrt(max(0.0, 1.0 - x3[i] ** 2))
        ry = math.sqrt(max(0.0, 1.0 - y3[i] ** 2))
        out.append(
            SpherePair(
                (rx * math.cos(ax[i]), rx * math.sin(ax[i]), x3[i]),
                (ry * math.cos(ay[i]), ry * math.sin(ay[i]), y3[i]),
            )
        )
    return out


# ---------------------------------------------------------------------------
# births and deaths


@dataclass(frozen=True)
class BifurcationEvent:
    """Sigma_{k,l} is born out of gamma_-^{k-l} at c^- and dies into gamma_+^{k+l} at c^+."""

    family: FamilyId
    c_minus: float
    birth_cover: int
    c_plus: float
    death_cover: int


def bifurcation_schedule(k: int, l: int) -> BifurcationEvent:  # noqa: E741
    fam, _ = FamilyId.reduced(k, l)
    if fam.k <= fam.l:
        raise DegenerateBirthError(f"({k}, {l}) has k <= l, so there is no direct cover k - l >= 1")
    cm, cp = bifurcation_energies(fam.k, fam.l)
    return BifurcationEvent(fam, cm, fam.k - fam.l, cp, fam.k + fam.l)
