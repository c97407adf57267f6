"""Symplectic frames along the named orbits and the numerical index pipeline.

The closed-form indices are re-derived here from integrated variational
flows: the linearized flow is expressed in a symplectic frame of the
contact structure, cut down to its 4x4 transverse block, and scanned for
crossings by :func:`kepler_cz.index.robbin_salamon`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import OrbitRecord, circular_period
from .core import (
    ANGULAR_L3,
    Hamiltonian,
    IntegratorConfig,
    PhasePoint,
    SphereCotangent,
    integrate,
    rotating_field_cylindrical,
    rotating_jacobian_cylindrical,
    variational_flow,
)
from .errors import DomainError, FrameDegeneracyError, OffOrbitError
from .halfint import HalfInteger
from .index import CrossingSettings, RSIndex, SymplecticPath, robbin_salamon
from .regularization import collision_orbit

__all__ = [
    "Frame",
    "frame_planar",
    "frame_collision",
    "cylindrical_one_forms",
    "cylindrical_gram",
    "NumericIndex",
    "planar_path",
    "collision_paths",
    "numeric_cz",
]

# cylindrical coordinate order (r, theta, z, p_r, p_theta, p_z)
_R, _TH, _Z, _PR, _PTH, _PZ = range(6)


@dataclass(frozen=True)
class Frame:
    """Frame vectors (columns) at a point of the given chart."""

    point: np.ndarray
    vectors: np.ndarray
    normal: np.ndarray | None = None
    chart: str = "cylindrical"

    @property
    def full(self) -> np.ndarray:
        if self.normal is None:
            return self.vectors
        return np.hstack([self.vectors, self.normal])


def _w0(E, sign):
    if not E < 0:
        raise DomainError("E must be negative")
    s = 1 if sign in ("+", 1) else -1
    return s / math.sqrt(-2.0 * E)


def cylindrical_gram(U: np.ndarray, V: np.ndarray | None = None) -> np.ndarray:
    """omega(u_i, v_j) for omega = dp_r^dr + dp_theta^dtheta + dp_z^dz."""
    V = U if V is None else V
    J = np.zeros((6, 6))
    for q, p in ((_R, _PR), (_TH, _PTH), (_Z, _PZ)):
        J[p, q] = 1.0
        J[q, p] = -1.0
    return U.T @ J @ V


def cylindrical_one_forms(w) -> tuple[np.ndarray, np.ndarray]:
    """(dH, lambda) at a cylindrical point, with lambda = -q.dp = p_theta dtheta - r dp_r - z dp_z."""
    w = np.asarray(w, dtype=float)
    X = rotating_field_cylindrical(w)
    dH = np.empty(6)
    dH[[_R, _TH, _Z]] = -X[[_PR, _PTH, _PZ]]
    dH[[_PR, _PTH, _PZ]] = X[[_R, _TH, _Z]]
    lam = np.zeros(6)
    lam[_TH] = w[_PTH]
    lam[_PR] = -w[_R]
    lam[_PZ] = -w[_Z]
    return dH, lam


def frame_planar(E: float, sign, t: float = 0.0, state=None, tol: float = 1e-8) -> Frame:
    """Frame (X1..X4) and normal pair (N1, N2) along gamma_+- in cylindrical coordinates.

    X1 = d_theta + (1/w) d_pr, X2 = w d_r, X3 = d_pz, X4 = d_z,
    N1 = (1/w) d_theta, N2 = -(w d_ptheta + w^2 d_r), with w = +-1/sqrt(-2E).
    When ``state`` is given it must lie on the orbit.
    """
    w = _w0(E, sign)
    point = np.array([w * w, (1.0 / w**3 + 1.0) * t, 0.0, 0.0, w, 0.0])
    if state is not None:
        got = np.asarray(state.cylindrical() if isinstance(state, PhasePoint) else state, dtype=float)
        diff = got - point
        diff[_TH] = 0.0  # any point of the circle will do
        if np.max(np.abs(diff)) > tol:
            raise OffOrbitError("state is not on the circular orbit")
        point = got
    X = np.zeros((6, 4))
    X[_TH, 0], X[_PR, 0] = 1.0, 1.0 / w
    X[_R, 1] = w
    X[_PZ, 2] = 1.0
    X[_Z, 3] = 1.0
    Nf = np.zeros((6, 2))
    Nf[_TH, 0] = 1.0 / w
    Nf[_PTH, 1], Nf[_R, 1] = -w, -w * w
    return Frame(point, X, Nf, "cylindrical")


def frame_collision(r: float, sign, t: float = 0.0, state=None, tol: float = 1e-8) -> Frame:
    """(d_y1, d_x1, d_y2, d_x2) along gamma_c+- on the unit-sphere chart (x0..x3, y0..y3)."""
    sc, _ = collision_orbit(r, sign, t)
    point = sc.as_array()
    if state is not None:
        got = np.asarray(state.as_array() if isinstance(state, SphereCotangent) else state, dtype=float)
        if np.max(np.abs(got[[1, 2, 5, 6]])) > tol:
            raise OffOrbitError("state is not on a vertical collision orbit")
        point = got
    X = np.zeros((8, 4))
    for col, idx in enumerate((5, 1, 6, 2)):
        X[idx, col] = 1.0
    return Frame(point, X, None, "sphere")


# ---------------------------------------------------------------------------
# numerical paths


def _cyl_variational_rhs(_t, v):
    w = v[:6]
    M = v[6:].reshape(6, 6)
    return np.concatenate([rotating_field_cylindrical(w), (rotating_jacobian_cylindrical(w) @ M).ravel()])


def planar_path(E: float, sign, N: int = 1, cfg: IntegratorConfig | None = None, coupling_tol: float = 1e-6):
    """Sampled transverse linearized flow of gamma_+-^N in the frame of :func:`frame_planar`."""
    cfg = cfg or IntegratorConfig()
    fr = frame_planar(E, sign)
    tau = circular_period(E, sign)
    T = N * tau
    v0 = np.concatenate([fr.point, np.eye(6).ravel()])
    _, sol = integrate(_cyl_variational_rhs, v0, T, cfg, dense=True)
    F = fr.full
    Finv = np.linalg.inv(F)

    def block(t):
        M = sol(t)[6:].reshape(6, 6)
        G = Finv @ M @ F
        # the linearized flow preserves ker dH, so nothing leaks into N2
        if np.max(np.abs(G[5, :4])) > coupling_tol * max(1.0, np.max(np.abs(G))):
            raise FrameDegeneracyError(f"transverse block leaks into the normal direction at t = {t:g}")
        return G[:4, :4]

    block(T)
    return SymplecticPath(block, T, 4, None, None, f"numeric Psi_H({sign})", {"E": E, "N": N}, tau)


def collision_paths(c: float, sign, N: int = 1, cfg: IntegratorConfig | None = None, coupling_tol: float = 1e-6):
    """Sampled (Psi_KE, Psi_L) for gamma_c+-^N.

    Psi_KE is the K_r variational flow on the unit sphere (r = sqrt(-2c)) in
    the frame (d_y1, d_x1, d_y2, d_x2) over N regularized periods; Psi_L is
    the L3 variational flow in the basis (d_p1, d_q1, d_p2, d_q2) over the
    rotating-frame time 2 pi N / r^3.
    """
    if not c < 0:
        raise DomainError("collision orbits need c < 0")
    cfg = cfg or IntegratorConfig()
    r = math.sqrt(-2.0 * c)
    sc0, flat0 = collision_orbit(r, sign, 0.0)
    T_k = N * 2 * math.pi / r
    _, _, at = variational_flow(Hamiltonian.moser_kr(r), sc0, T_k, cfg, dense=True)
    idx = [5, 1, 6, 2]
    rest = [i for i in range(8) if i not in idx]

    def block_k(t):
        _, M = at(t)
        if np.max(np.abs(M[np.ix_(rest, idx)])) > coupling_tol * max(1.0, np.max(np.abs(M))):
            raise FrameDegeneracyError(f"frame block is not invariant at t = {t:g}")
        return M[np.ix_(idx, idx)]

    T_l = N * 2 * math.pi / r**3
    _, _, at_l = variational_flow(ANGULAR_L3, flat0, T_l, cfg, dense=True)
    jdx = [3, 0, 4, 1]

    def block_l(t):
        return at_l(t)[1][np.ix_(jdx, jdx)]

    block_k(T_k)
    pk = SymplecticPath(block_k, T_k, 4, None, None, "numeric Psi_KE", {"r": r, "N": N}, 2 * math.pi / r)
    pl = SymplecticPath(block_l, T_l, 4, None, None, "numeric Psi_L", {"N": N}, 2 * math.pi)
    return pk, pl


@dataclass(frozen=True)
class NumericIndex:
    """Numerically computed index with the per-path crossing audit."""

    value: HalfInteger
    parts: tuple[tuple[str, RSIndex], ...]

    def __eq__(self, other):
        if isinstance(other, NumericIndex):
            return self.value == other.value
        return self.value == other

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return str(self.value)

    def audit(self):
        return [
            {"path": name, "index": str(part.value), "crossings": [c.to_dict() for c in part.crossings]}
            for name, part in self.parts
        ]


def numeric_cz(
    orbit: OrbitRecord,
    cfg: IntegratorConfig | None = None,
    settings: CrossingSettings | None = None,
) -> NumericIndex:
    """Conley-Zehnder index of gamma_+-^N or gamma_c+-^N from integrated variational flows."""
    N = orbit.cover
    if orbit.kind in ("retrograde", "direct"):
        sign = "+" if orbit.kind == "retrograde" else "-"
        res = robbin_salamon(planar_path(orbit.E, sign, N, cfg), settings)
        return NumericIndex(res.value, (("Psi_H", res),))
    if orbit.kind in ("collision+", "collision-"):
        sign = "+" if orbit.kind == "collision+" else "-"
        pk, pl = collision_paths(orbit.c, sign, N, cfg)
        rk = robbin_salamon(pk, settings)
        rl = robbin_salamon(pl, settings)
        return NumericIndex(rk.value + rl.value, (("Psi_KE", rk), ("Psi_L", rl)))
    raise DomainError(f"no numerical pipeline for orbit kind {orbit.kind!r}")
