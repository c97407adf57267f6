"""Moser regularization and Hill's region.

Flat states ``(q, p)`` are sent to the cotangent bundle of a 3-sphere by the
switch map ``(q, p) -> (p, -q)`` followed by the inverse stereographic
projection ``Psi_r`` from the north pole ``(r, 0, 0, 0)``.  Regularized
Hamiltonians are always evaluated on the unit sphere, reached from the
radius-``r`` sphere through ``(x, y) -> (x / r, r y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import PhasePoint, SphereCotangent
from .errors import DomainError, NorthPoleError

__all__ = [
    "SphereCotangent",
    "HillClassification",
    "stereo_lift",
    "stereo_project",
    "switch_map",
    "scaling_map",
    "regularize",
    "unregularize",
    "collision_orbit",
    "effective_potential",
    "ray_gap",
    "hill_classify",
    "CRITICAL_ENERGY",
]

CRITICAL_ENERGY = -1.5


def stereo_lift(r: float, p, q, tol: float = 1e-9) -> SphereCotangent:
    """Psi_r(p, q): the cotangent lift of inverse stereographic projection."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = float(r)
    if r <= 0:
        raise DomainError("sphere radius must be positive")
    pp = p @ p
    pq = p @ q
    den = pp + r * r
    x = np.concatenate([[r * (pp - r * r) / den], 2.0 * r * r * p / den])
    y = np.concatenate([[pq / r], den / (2.0 * r * r) * q - pq / (r * r) * p])
    return SphereCotangent(x, y, r, tol=tol * max(1.0, den))


def stereo_project(r: float, sc: SphereCotangent, pole_tol: float = 0.0):
    """Phi_r(x, y) = (p, q), the inverse of :func:`stereo_lift`."""
    r = float(r)
    if abs(sc.radius - r) > 1e-9 * max(1.0, r):
        raise DomainError(f"state lives on the sphere of radius {sc.radius}, not {r}")
    x0, xv = sc.x[0], sc.x[1:]
    y0, yv = sc.y[0], sc.y[1:]
    gap = r - x0
    if gap <= pole_tol * r:
        raise NorthPoleError("the north pole has no stereographic image")
    a = r * xv / gap
    b = gap / r * yv + y0 / r * xv
    return a, b


def switch_map(q, p):
    """sigma(q, p) = (p, -q)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return p.copy(), -q


def scaling_map(r: float, sc: SphereCotangent) -> SphereCotangent:
    """(x, y) -> (r x, y / r), from the unit sphere to the radius-``r`` sphere."""
    if abs(sc.radius - 1.0) > 1e-12:
        raise DomainError("scaling_map expects a point on the unit sphere")
    return SphereCotangent(r * sc.x, sc.y / r, r, tol=sc.tol * max(1.0, r))


def regularize(state: PhasePoint, r: float) -> SphereCotangent:
    """Image of a flat state on the unit-sphere chart used for K_r and K_c."""
    a, b = switch_map(state.q, state.p)
    sc = stereo_lift(r, a, b)
    return SphereCotangent(sc.x / r, sc.y * r, 1.0, tol=1e-8)


def unregularize(sc: SphereCotangent, r: float, pole_tol: float = 0.0) -> PhasePoint:
    """Inverse of :func:`regularize`; raises at the north pole (collision)."""
    big = scaling_map(r, sc)
    a, b = stereo_project(r, big, pole_tol)
    # undo sigma: (a, b) = (p, -q)
    return PhasePoint(-b, a)


def collision_orbit(r: float, sign: str | int, t: float):
    """Closed-form collision orbit on the unit sphere and its flat image.

    ``sign`` is ``"+"``/``"-"`` (or +1/-1); sign ``-`` starts at
    ``x = (-1, 0, 0, 0), y = (0, 0, 0, -1/r)`` and moves along the positive
    q3 half-axis, ``q3(t) = (1 + cos rt) / r^2``.  The flat image is ``None``
    at collision instants.
    """
    s = _sign(sign)
    r = float(r)
    if r <= 0:
        raise DomainError("r must be positive")
    c, sn = math.cos(r * t), math.sin(r * t)
    x = np.array([-c, 0.0, 0.0, s * sn])
    y = np.array([sn / r, 0.0, 0.0, s * c / r])
    sc = SphereCotangent(x, y, 1.0)
    if 1.0 + c < 1e-12:
        return sc, None
    q3 = -s * (1.0 + c) / (r * r)
    p3 = s * r * sn / (1.0 + c)
    return sc, PhasePoint((0.0, 0.0, q3), (0.0, 0.0, p3))


def _sign(sign) -> int:
    if sign in ("+", 1, +1.0):
        return 1
    if sign in ("-", "−", -1, -1.0):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


# ---------------------------------------------------------------------------
# Hill's region


@dataclass(frozen=True)
class HillClassification:
    """Where ``q`` sits relative to the Hill region at energy ``c``.

    ``tag`` is one of ``bounded-component``, ``unbounded-component``,
    ``single-component`` or ``forbidden``; the radii are the roots of
    ``U = c`` along the ray through ``q`` (``None`` when absent).
    """

    tag: str
    inner_root: float | None
    outer_root: float | None


def effective_potential(q) -> float:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0:
        raise DomainError("the effective potential is singular at the origin")
    return float(-1.0 / n - 0.5 * (q[0] ** 2 + q[1] ** 2))


def ray_gap(c: float, direction, xtol: float = 1e-10):
    """Forbidden interval (s1, s2) of ``U = c`` along a ray, or ``None``.

    Along the unit direction ``u`` the potential is
    ``-1/s - rho^2 s^2 / 2`` with ``rho^2 = u1^2 + u2^2``; it peaks at
    ``s = rho^(-2/3)`` with value ``-1.5 rho^(2/3)``.  On the vertical axis
    the outer root is infinite.
    """
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    rho2 = u[0] ** 2 + u[1] ** 2
    if c >= 0:
        return None

    def U(s):
        return -1.0 / s - 0.5 * rho2 * s * s

    if rho2 < 1e-300:
        return (-1.0 / c, math.inf)
    rho = math.sqrt(rho2)
    s_peak = rho ** (-2.0 / 3.0)
    if U(s_peak) <= c:
        return None
    f = lambda s: U(s) - c  # noqa: E731
    lo = min(s_peak, -1.0 / c) * 0.5
    while f(lo) > 0:
        lo *= 0.5
    s1 = brentq(f, lo, s_peak, xtol=xtol)
    hi = 2.0 * s_peak
    while f(hi) > 0:
        hi *= 2.0
    s2 = brentq(f, s_peak, hi, xtol=xtol)
    return (s1, s2)


def hill_classify(c: float, q) -> HillClassification:
    """Classify ``q`` against the Hill region at Jacobi energy ``c``.

    Below the critical energy -3/2 every ray has a forbidden gap, so the
    admissible set splits into the part inside the first root (bounded) and
    the part outside the second (unbounded).  Above it the planar rays are
    gap-free and the admissible set is connected; such points carry the
    ``single-component`` tag even though near-vertical rays still have gaps.
    """
    q = np.asarray(q, dtype=float)
    Uq = effective_potential(q)
    n = np.linalg.norm(q)
    gap = ray_gap(c, q)
    s1, s2 = (gap if gap is not None else (None, None))
    if Uq > c:
        return HillClassification("forbidden", s1, s2)
    if c > CRITICAL_ENERGY:
        return HillClassification("single-component", s1, s2)
    if gap is None:  # pragma: no cover - every ray has a gap below -3/2
        return HillClassification("single-component", None, None)
    tag = "bounded-component" if n <= s1 else "unbounded-component"
    return HillClassification(tag, s1, s2)
