"""Spherical coordinates, Delaunay and LRL actions, and the resonant return map.

Spherical coordinates are ``q = r (sin psi cos phi, sin psi sin phi, cos psi)``
with conjugate momenta ``p_r = p.e_r``, ``p_psi = r p.e_psi`` and
``p_phi = r sin(psi) p.e_phi``.  Delaunay actions are
``(p_l, p_g, p_theta) = (1/sqrt(-2E), |L|, L3)``; the LRL variant swaps
``p_g`` for ``p_eta = A3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PhasePoint, invariants
from .errors import AxisChartError, DomainError, UnboundStateError, VerticalOrbitError

__all__ = [
    "SphericalPoint",
    "DelaunayActions",
    "JacobianReport",
    "to_spherical",
    "from_spherical",
    "delaunay_actions",
    "delaunay_jacobian",
    "lrl_action",
    "lrl_jacobian",
    "orbit_case",
    "numeric_rank",
    "delaunay_return_map",
    "MorseBottReport",
    "morse_bott_test",
    "RANK_REL_TOL",
]

RANK_REL_TOL = 1e-8


@dataclass(frozen=True)
class SphericalPoint:
    r: float
    psi: float
    phi: float
    p_r: float
    p_psi: float
    p_phi: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("r must be positive")
        if not 0.0 < self.psi < math.pi:
            raise AxisChartError("spherical chart excludes the poles (psi in (0, pi))")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.psi, self.phi, self.p_r, self.p_psi, self.p_phi])

    @classmethod
    def from_array(cls, a) -> "SphericalPoint":
        return cls(*map(float, a))


def _basis(psi, phi):
    sp, cp = math.sin(psi), math.cos(psi)
    sf, cf = math.sin(phi), math.cos(phi)
    e_r = np.array([sp * cf, sp * sf, cp])
    e_psi = np.array([cp * cf, cp * sf, -sp])
    e_phi = np.array([-sf, cf, 0.0])
    return e_r, e_psi, e_phi


def to_spherical(state: PhasePoint) -> SphericalPoint:
    q, p = state.q, state.p
    rho = math.hypot(q[0], q[1])
    if rho == 0.0:
        raise AxisChartError("spherical chart excludes the q3-axis")
    r = float(np.linalg.norm(q))
    psi = math.atan2(rho, q[2])
    phi = math.atan2(q[1], q[0])
    e_r, e_psi, e_phi = _basis(psi, phi)
    return SphericalPoint(r, psi, phi, float(p @ e_r), float(r * (p @ e_psi)), float(r * math.sin(psi) * (p @ e_phi)))


def from_spherical(sp: SphericalPoint) -> PhasePoint:
    e_r, e_psi, e_phi = _basis(sp.psi, sp.phi)
    q = sp.r * e_r
    p = sp.p_r * e_r + sp.p_psi / sp.r * e_psi + sp.p_phi / (sp.r * math.sin(sp.psi)) * e_phi
    return PhasePoint(q, p)


@dataclass(frozen=True)
class DelaunayActions:
    p_l: float
    p_g: float
    p_theta: float

    def as_array(self):
        return np.array([self.p_l, self.p_g, self.p_theta])


def _W(sp: SphericalPoint):
    s2 = math.sin(sp.psi) ** 2
    return 2.0 / sp.r - sp.p_r**2 - sp.p_psi**2 / sp.r**2 - sp.p_phi**2 / (sp.r**2 * s2)


def delaunay_actions(sp: SphericalPoint) -> DelaunayActions:
    """(p_l, p_g, p_theta) from spherical coordinates."""
    W = _W(sp)  # equals -2E
    if not W > 0:
        raise UnboundStateError("Delaunay actions need a bound state (E < 0)")
    G = sp.p_psi**2 + sp.p_phi**2 / math.sin(sp.psi) ** 2
    return DelaunayActions(W**-0.5, math.sqrt(G), sp.p_phi)


def lrl_action(sp: SphericalPoint) -> float:
    """p_eta = A3 in spherical coordinates."""
    s, c = math.sin(sp.psi), math.cos(sp.psi)
    G = sp.p_psi**2 + sp.p_phi**2 / s**2
    return c / sp.r * G + s * sp.p_r * sp.p_psi - c


def numeric_rank(M: np.ndarray, rel_tol: float = RANK_REL_TOL):
    """(rank, singular values) with the threshold rel_tol * largest singular value."""
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0, sv
    return int(np.sum(sv > rel_tol * sv[0])), sv


def orbit_case(state: PhasePoint, tol: float = 1e-9) -> str:
    """``case3`` planar, ``case2`` circular non-planar, ``case1`` otherwise."""
    inv = invariants(state)
    nL = np.linalg.norm(inv.L)
    if nL == 0:
        raise DomainError("collision orbits have no orbital plane")
    if math.hypot(inv.L[0], inv.L[1]) <= tol * nL:
        return "case3"
    if np.linalg.norm(inv.A) <= tol:
        return "case2"
    return "case1"


@dataclass(frozen=True)
class JacobianReport:
    """Transposed Jacobian (rows r, psi, phi, p_r, p_psi, p_phi) and its rank data.

    For circular states ``bracket`` is the value of
    ``-1/r + p_psi^2/r^2 + p_phi^2/(r^2 sin^2 psi)``, which fixes the (1,1)
    entry, and ``claimed`` is ``1/r - 2E``; ``bracket_identity`` is
    ``1/r - p_r^2 + 2E``, the value the bracket actually takes.
    """

    matrix: np.ndarray
    case: str
    rank: int
    singular_values: np.ndarray
    bracket: float
    claimed: float
    bracket_identity: float

    @property
    def full_rank(self) -> bool:
        return self.rank == 3


def delaunay_jacobian(sp: SphericalPoint, rel_tol: float = RANK_REL_TOL, case_tol: float = 1e-9) -> JacobianReport:
    """d(p_l, p_g, p_theta) / d(r, psi, phi, p_r, p_psi, p_phi), transposed to 6 x 3."""
    if abs(sp.p_phi) < 1e-12:
        raise VerticalOrbitError("vertical orbits (p_phi = 0) are excluded")
    W = _W(sp)
    if not W > 0:
        raise UnboundStateError("Delaunay actions need a bound state (E < 0)")
    r, s, c = sp.r, math.sin(sp.psi), math.cos(sp.psi)
    x = W**1.5  # (-2E)^(3/2)
    G = sp.p_psi**2 + sp.p_phi**2 / s**2
    nL = math.sqrt(G)
    bracket = -1.0 / r + sp.p_psi**2 / r**2 + sp.p_phi**2 / (r**2 * s**2)
    J = np.zeros((6, 3))
    J[0, 0] = -bracket / (r * x)
    J[1, 0] = -sp.p_phi**2 * c / (x * r**2 * s**3)
    J[1, 1] = -sp.p_phi**2 * c / (nL * s**3)
    J[3, 0] = sp.p_r / x
    J[4, 0] = sp.p_psi / (x * r**2)
    J[4, 1] = sp.p_psi / nL
    J[5, 0] = sp.p_phi / (x * r**2 * s**2)
    J[5, 1] = sp.p_phi / (nL * s**2)
    J[5, 2] = 1.0
    rank, sv = numeric_rank(J, rel_tol)
    E = -0.5 * W
    case = orbit_case(from_spherical(sp), case_tol)
    return JacobianReport(J, case, rank, sv, bracket, 1.0 / r - 2.0 * E, 1.0 / r - sp.p_r**2 + 2.0 * E)


def lrl_jacobian(sp: SphericalPoint, rel_tol: float = RANK_REL_TOL, case_tol: float = 1e-9) -> JacobianReport:
    """d(p_l, p_eta, p_theta) / d(spherical), transposed to 6 x 3."""
    if abs(sp.p_phi) < 1e-12:
        raise VerticalOrbitError("vertical orbits (p_phi = 0) are excluded")
    base = delaunay_jacobian(sp, rel_tol, case_tol)
    r, s, c = sp.r, math.sin(sp.psi), math.cos(sp.psi)
    G = sp.p_psi**2 + sp.p_phi**2 / s**2
    col = np.array(
        [
            -c * G / r**2,
            sp.p_r * sp.p_psi * c + s - 2.0 * sp.p_phi**2 * c * c / (r * s**3) - s * G / r,
            0.0,
            sp.p_psi * s,
            sp.p_r * s + 2.0 * sp.p_psi * c / r,
            2.0 * sp.p_phi * c / (r * s**2),
        ]
    )
    J = base.matrix.copy()
    J[:, 1] = col
    rank, sv = numeric_rank(J, rel_tol)
    return JacobianReport(J, base.case, rank, sv, base.bracket, base.claimed, base.bracket_identity)


# ---------------------------------------------------------------------------
# resonant return map


def delaunay_return_map(k: int, l: int):  # noqa: E741
    """(Psi, p_l) for Sigma_{k,l} in Delaunay order (l, g, theta, p_l, p_g, p_theta).

    Psi = exp(tau L) with the only nonzero generator entry -3/p_l^4 at
    (l, p_l) and return time tau = 2 pi k p_l^3, p_l = (l/k)^(1/3).
    """
    if k < 1 or l < 1 or math.gcd(k, l) != 1:
        raise ValueError("(k, l) must be coprime positive integers")
    p_l = float(np.cbrt(l / k))
    Psi = np.eye(6)
    Psi[0, 3] = -6.0 * math.pi * k / p_l
    return Psi, p_l


@dataclass(frozen=True)
class MorseBottReport:
    family: tuple[int, int]
    p_l: float
    entry: float
    displacement: float
    normal: np.ndarray

    @property
    def morse_bott(self) -> bool:
        return self.displacement != 0.0

    def __bool__(self):
        return self.morse_bott


def morse_bott_test(k: int, l: int) -> MorseBottReport:  # noqa: E741
    """Apply the return map to nu = -p_l^3 d_pl + d_ptheta; the d_l displacement is 6 pi k p_l^2."""
    Psi, p_l = delaunay_return_map(k, l)
    nu = np.zeros(6)
    nu[3] = -(p_l**3)
    nu[5] = 1.0
    moved = Psi @ nu - nu
    if np.max(np.abs(moved[1:])) != 0.0:  # pragma: no cover - the shear only moves the l-component
        raise AssertionError("return map moved nu off the l-direction")
    return MorseBottReport((k, l), p_l, float(Psi[0, 3]), float(moved[0]), nu)
