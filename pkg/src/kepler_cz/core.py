"""Phase-space types, the Kepler / rotating Hamiltonians and their flows.

Units are the dimensionless gravitational units of the rotating Kepler
problem: unit central mass at the origin, frame rotating with unit angular
velocity about the q3-axis.

Two charts are supported:

* flat phase space T*(R^3 \\ 0), states are :class:`PhasePoint`, vectors
  ordered ``(q1, q2, q3, p1, p2, p3)``;
* the cotangent bundle of the unit 3-sphere used by Moser regularization,
  states are :class:`SphereCotangent`, vectors ordered
  ``(x0, x1, x2, x3, y0, y1, y2, y3)``.

Both charts use Hamilton's equations ``dq/dt = dH/dp, dp/dt = -dH/dq`` and the
symplectic matrix ``J = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import DOP853, RK23, RK45, OdeSolution
from scipy.optimize import brentq

from .errors import (
    ChartError,
    CollisionError,
    DegenerateConicError,
    DomainError,
    StepLimitError,
    UnboundedConicError,
)

__all__ = [
    "PhasePoint",
    "SphereCotangent",
    "InvariantTriple",
    "IntegratorConfig",
    "HamiltonianKind",
    "Hamiltonian",
    "KEPLER_E",
    "ANGULAR_L3",
    "ROTATING_H",
    "invariants",
    "hamiltonian_value",
    "vector_field",
    "field_jacobian",
    "flow",
    "variational_flow",
    "integrate",
    "first_return_time",
    "poisson_bracket",
    "conic_trace",
    "argument_of_perigee",
    "symplectic_form",
    "rotating_field_cylindrical",
    "rotating_jacobian_cylindrical",
]


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class PhasePoint:
    """A point (q, p) of T*(R^3 \\ 0)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(3)
        p = np.asarray(self.p, dtype=float).reshape(3)
        if not np.linalg.norm(q) > 0.0:
            raise DomainError("PhasePoint requires |q| > 0; collisions live in the regularized chart")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        return cls(z[:3], z[3:6])

    @classmethod
    def from_cylindrical(cls, r, theta, z, p_r, p_theta, p_z) -> "PhasePoint":
        c, s = math.cos(theta), math.sin(theta)
        q = (r * c, r * s, z)
        p = (p_r * c - p_theta * s / r, p_r * s + p_theta * c / r, p_z)
        return cls(q, p)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    def cylindrical(self) -> tuple[float, float, float, float, float, float]:
        """(r, theta, z, p_r, p_theta, p_z); requires q off the vertical axis."""
        q1, q2, q3 = self.q
        p1, p2, p3 = self.p
        r = math.hypot(q1, q2)
        if r == 0.0:
            raise ChartError("cylindrical chart excludes the q3-axis")
        theta = math.atan2(q2, q1)
        p_r = (q1 * p1 + q2 * p2) / r
        p_theta = q1 * p2 - q2 * p1
        return r, theta, q3, p_r, p_theta, p3

    def spherical(self):
        from .action_angle import to_spherical

        return to_spherical(self)


@dataclass(frozen=True)
class SphereCotangent:
    """A point (x, y) of T*S^3_r inside R^4 x R^4.

    ``x`` lies on the sphere of radius ``radius`` and ``y`` is orthogonal to
    ``x``.  The invariants are checked to ``tol`` on construction.
    """

    x: np.ndarray
    y: np.ndarray
    radius: float = 1.0
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(4)
        y = np.asarray(self.y, dtype=float).reshape(4)
        r = float(self.radius)
        if r <= 0:
            raise DomainError("sphere radius must be positive")
        scale = max(1.0, r)
        if abs(np.linalg.norm(x) - r) > self.tol * scale:
            raise ChartError(f"|x| = {np.linalg.norm(x)!r} is not the sphere radius {r!r}")
        if abs(x @ y) > self.tol * scale * max(1.0, np.linalg.norm(y)):
            raise ChartError("x . y must vanish on the cotangent bundle")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "radius", r)

    @classmethod
    def from_array(cls, z, radius: float = 1.0, tol: float = 1e-9) -> "SphereCotangent":
        z = np.asarray(z, dtype=float)
        return cls(z[:4], z[4:8], radius, tol)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class InvariantTriple:
    """Kepler energy, angular momentum and Laplace-Runge-Lenz vector."""

    E: float
    L: np.ndarray
    A: np.ndarray

    @property
    def eccentricity(self) -> float:
        return float(np.linalg.norm(self.A))

    def residuals(self) -> tuple[float, float]:
        """(A.L, |A|^2 - 2E|L|^2 - 1); both vanish for a genuine Kepler orbit."""
        return float(self.A @ self.L), float(self.A @ self.A - 2 * self.E * (self.L @ self.L) - 1)


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for the numerical flows.

    ``scheme`` names an explicit Runge-Kutta pair (``DOP853`` by default).
    Setting ``max_step`` forces a bounded step, which with a tight
    tolerance behaves as a fixed-step high-order scheme.
    """

    scheme: str = "DOP853"
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = math.inf
    max_steps: int = 1_000_000
    collision_floor: float = 1e-6

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(_SCHEMES)}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0 or not self.max_step > 0:
            raise ValueError("step limits must be positive")


_SCHEMES = {"DOP853": DOP853, "RK45": RK45, "RK23": RK23}


# ---------------------------------------------------------------------------
# Hamiltonians


class HamiltonianKind(enum.Enum):
    KEPLER_E = "E"
    ANGULAR_L3 = "L3"
    ROTATING_H = "H"
    MOSER_KR = "K_r"
    MOSER_KC = "K_c"


@dataclass(frozen=True)
class Hamiltonian:
    """Tag plus parameter: ``r`` for K_r, the Jacobi energy ``c`` for K_c."""

    kind: HamiltonianKind
    param: float | None = None

    def __post_init__(self):
        needs = self.kind in (HamiltonianKind.MOSER_KR, HamiltonianKind.MOSER_KC)
        if needs and self.param is None:
            raise ValueError(f"{self.kind.value} needs a parameter")
        if not needs and self.param is not None:
            raise ValueError(f"{self.kind.value} takes no parameter")
        if self.kind is HamiltonianKind.MOSER_KR and not self.param > 0:
            raise DomainError("K_r needs r > 0")
        if self.kind is HamiltonianKind.MOSER_KC and not self.param < 0:
            raise DomainError("K_c needs a negative Jacobi energy")

    @classmethod
    def moser_kr(cls, r: float) -> "Hamiltonian":
        return cls(HamiltonianKind.MOSER_KR, float(r))

    @classmethod
    def moser_kc(cls, c: float) -> "Hamiltonian":
        return cls(HamiltonianKind.MOSER_KC, float(c))

    @property
    def on_sphere(self) -> bool:
        return self.kind in (HamiltonianKind.MOSER_KR, HamiltonianKind.MOSER_KC)

    @property
    def dim(self) -> int:
        return 8 if self.on_sphere else 6

    def __str__(self):
        return self.kind.value if self.param is None else f"{self.kind.value}({self.param:g})"


KEPLER_E = Hamiltonian(HamiltonianKind.KEPLER_E)
ANGULAR_L3 = Hamiltonian(HamiltonianKind.ANGULAR_L3)
ROTATING_H = Hamiltonian(HamiltonianKind.ROTATING_H)


def symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n matrix [[0, I], [-I, 0]]."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


# ---------------------------------------------------------------------------
# array-level fields


def _kepler_value(z):
    q, p = z[:3], z[3:]
    return 0.5 * (p @ p) - 1.0 / np.linalg.norm(q)


def _l3_value(z):
    return z[0] * z[4] - z[1] * z[3]


def _kepler_field(z):
    q, p = z[:3], z[3:]
    rq = np.linalg.norm(q)
    return np.concatenate([p, -q / rq**3])


def _l3_field(z):
    return np.array([-z[1], z[0], 0.0, -z[4], z[3], 0.0])


_L3_JAC = np.zeros((6, 6))
_L3_JAC[0, 1], _L3_JAC[1, 0] = -1.0, 1.0
_L3_JAC[3, 4], _L3_JAC[4, 3] = -1.0, 1.0


def _kepler_jac(z):
    q = z[:3]
    rq = np.linalg.norm(q)
    A = np.zeros((6, 6))
    A[:3, 3:] = np.eye(3)
    A[3:, :3] = -np.eye(3) / rq**3 + 3.0 * np.outer(q, q) / rq**5
    return A


def _geodesic_quadratic(x, y):
    # |x|^2|y|^2 - (x.y)^2, equal to |y|^2 on T*S^3 and invariant under the
    # flows of |x|^2 and x.y, so its flow preserves the cotangent bundle.
    return (x @ x) * (y @ y) - (x @ y) ** 2


def _kr_value(z, r):
    return 0.5 * r * r * _geodesic_quadratic(z[:4], z[4:])


def _kr_field(z, r):
    x, y = z[:4], z[4:]
    xy = x @ y
    dx = r * r * ((y @ y) * x - xy * y)
    dy = r * r * ((x @ x) * y - xy * x)
    return np.concatenate([dy, -dx])


def _kr_jac(z, r):
    x, y = z[:4], z[4:]
    xy = x @ y
    I4 = np.eye(4)
    Hxx = (y @ y) * I4 - np.outer(y, y)
    Hyy = (x @ x) * I4 - np.outer(x, x)
    Hxy = 2.0 * np.outer(x, y) - np.outer(y, x) - xy * I4  # d(grad_x)/dy
    A = np.zeros((8, 8))
    A[:4, :4] = Hxy.T
    A[:4, 4:] = Hyy
    A[4:, :4] = -Hxx
    A[4:, 4:] = -Hxy
    return r * r * A


def _kc_parts(z, c):
    # K_c = |y|^2 (r + (1 - x0) (x1 y2 - x2 y1) / r)^2 / 2 on the unit sphere,
    # obtained from |q| (H - c) + 1 in the switched stereographic chart.
    r = math.sqrt(-2.0 * c)
    x, y = z[:4], z[4:]
    nx = np.linalg.norm(x)
    w = 1.0 - x[0] / nx
    m = x[1] * y[2] - x[2] * y[1]
    G = r + w * m / r
    return r, x, y, nx, w, m, G


def _kc_value(z, c):
    _, x, y, _, _, _, G = _kc_parts(z, c)
    return 0.5 * _geodesic_quadratic(x, y) * G * G


def _kc_field(z, c):
    r, x, y, nx, w, m, G = _kc_parts(z, c)
    Q = _geodesic_quadratic(x, y)
    xy = x @ y
    dQx = 2.0 * ((y @ y) * x - xy * y)
    dQy = 2.0 * ((x @ x) * y - xy * x)
    e0 = np.array([1.0, 0.0, 0.0, 0.0])
    dwx = -(e0 / nx - x[0] * x / nx**3)
    dmx = np.array([0.0, y[2], -y[1], 0.0])
    dmy = np.array([0.0, -x[2], x[1], 0.0])
    dGx = (m * dwx + w * dmx) / r
    dGy = w * dmy / r
    gx = 0.5 * G * G * dQx + Q * G * dGx
    gy = 0.5 * G * G * dQy + Q * G * dGy
    return np.concatenate([gy, -gx])


def _numeric_jac(f, z, step=1e-6):
    n = z.size
    A = np.empty((n, n))
    for j in range(n):
        h = step * max(1.0, abs(z[j]))
        e = np.zeros(n)
        e[j] = h
        A[:, j] = (f(z + e) - f(z - e)) / (2 * h)
    return A


def _value_fn(h: Hamiltonian) -> Callable[[np.ndarray], float]:
    k = h.kind
    if k is HamiltonianKind.KEPLER_E:
        return _kepler_value
    if k is HamiltonianKind.ANGULAR_L3:
        return _l3_value
    if k is HamiltonianKind.ROTATING_H:
        return lambda z: _kepler_value(z) + _l3_value(z)
    if k is HamiltonianKind.MOSER_KR:
        return lambda z: _kr_value(z, h.param)
    return lambda z: _kc_value(z, h.param)


def _field_fn(h: Hamiltonian) -> Callable[[np.ndarray], np.ndarray]:
    k = h.kind
    if k is HamiltonianKind.KEPLER_E:
        return _kepler_field
    if k is HamiltonianKind.ANGULAR_L3:
        return _l3_field
    if k is HamiltonianKind.ROTATING_H:
        return lambda z: _kepler_field(z) + _l3_field(z)
    if k is HamiltonianKind.MOSER_KR:
        return lambda z: _kr_field(z, h.param)
    return lambda z: _kc_field(z, h.param)


def _jac_fn(h: Hamiltonian) -> Callable[[np.ndarray], np.ndarray]:
    k = h.kind
    if k is HamiltonianKind.KEPLER_E:
        return _kepler_jac
    if k is HamiltonianKind.ANGULAR_L3:
        return lambda z: _L3_JAC
    if k is HamiltonianKind.ROTATING_H:
        return lambda z: _kepler_jac(z) + _L3_JAC
    if k is HamiltonianKind.MOSER_KR:
        return lambda z: _kr_jac(z, h.param)
    f = _field_fn(h)
    return lambda z: _numeric_jac(f, z)


def _as_chart_array(h: Hamiltonian, state) -> np.ndarray:
    if h.on_sphere:
        if isinstance(state, PhasePoint):
            raise ChartError(f"{h} lives on the sphere cotangent chart, got a PhasePoint")
        if isinstance(state, SphereCotangent):
            if abs(state.radius - 1.0) > 1e-12:
                raise ChartError("regularized Hamiltonians are evaluated on the unit sphere; rescale first")
            return state.as_array()
    else:
        if isinstance(state, SphereCotangent):
            raise ChartError(f"{h} lives on flat phase space, got a SphereCotangent")
        if isinstance(state, PhasePoint):
            return state.as_array()
    z = np.asarray(state, dtype=float)
    if z.shape != (h.dim,):
        raise ChartError(f"{h} expects a state of length {h.dim}, got shape {z.shape}")
    return z


def _wrap(h: Hamiltonian, z: np.ndarray, like):
    if isinstance(like, PhasePoint):
        return PhasePoint.from_array(z)
    if isinstance(like, SphereCotangent):
        return SphereCotangent.from_array(z, 1.0, tol=1e-6)
    return z


# ---------------------------------------------------------------------------
# public operations


def invariants(state: PhasePoint) -> InvariantTriple:
    """Kepler energy, angular momentum q x p, and LRL vector p x L - q/|q|."""
    if isinstance(state, PhasePoint):
        q, p = state.q, state.p
    else:
        z = np.asarray(state, dtype=float)
        q, p = z[:3], z[3:6]
    rq = np.linalg.norm(q)
    if rq == 0.0:
        raise DomainError("invariants are undefined at the origin")
    L = np.cross(q, p)
    A = np.cross(p, L) - q / rq
    E = 0.5 * (p @ p) - 1.0 / rq
    return InvariantTriple(float(E), L, A)


def hamiltonian_value(h: Hamiltonian, state) -> float:
    return float(_value_fn(h)(_as_chart_array(h, state)))


def vector_field(h: Hamiltonian, state) -> np.ndarray:
    """Hamiltonian vector field (dH/dp, -dH/dq) at ``state``."""
    return _field_fn(h)(_as_chart_array(h, state))


def field_jacobian(h: Hamiltonian, state) -> np.ndarray:
    """Derivative of the vector field; the generator of the variational flow."""
    return np.array(_jac_fn(h)(_as_chart_array(h, state)))


def integrate(
    fun: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t: float,
    cfg: IntegratorConfig,
    *,
    dense: bool = False,
    floor: Callable[[np.ndarray], float] | None = None,
):
    """Step an explicit RK pair from 0 to ``t``.

    Returns the final vector, or ``(final, OdeSolution)`` when ``dense`` is
    set.  ``floor`` maps a state to its distance from the collision set; the
    run aborts with :class:`CollisionError` when it drops below
    ``cfg.collision_floor``.
    """
    y0 = np.asarray(y0, dtype=float)
    if t == 0:
        if dense:
            raise ValueError("dense output needs a nonzero duration")
        return y0.copy()
    if not math.isfinite(t):
        raise ValueError("duration must be finite")
    solver = _SCHEMES[cfg.scheme](fun, 0.0, y0, t, rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step)
    ts, interps = [0.0], []
    steps = 0
    while solver.status == "running":
        if steps >= cfg.max_steps:
            raise StepLimitError(f"step limit {cfg.max_steps} reached at t = {solver.t:g}")
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepLimitError(f"integrator failed at t = {solver.t:g}: {msg}")
        if floor is not None and floor(solver.y) < cfg.collision_floor:
            raise CollisionError(f"|q| fell below {cfg.collision_floor:g} at t = {solver.t:g}")
        if dense:
            ts.append(solver.t)
            interps.append(solver.dense_output())
    if dense:
        return solver.y.copy(), OdeSolution(ts, interps)
    return solver.y.copy()


def _flat_floor(z):
    return float(np.linalg.norm(z[:3]))


def flow(h: Hamiltonian, state, t: float, cfg: IntegratorConfig | None = None):
    """Time-``t`` map of the Hamiltonian flow, returned in the input's type."""
    cfg = cfg or IntegratorConfig()
    z0 = _as_chart_array(h, state)
    f = _field_fn(h)
    floor = None if h.on_sphere or h.kind is HamiltonianKind.ANGULAR_L3 else _flat_floor
    z = integrate(lambda _t, z: f(z), z0, t, cfg, floor=floor)
    return _wrap(h, z, state)


def _variational_rhs(h: Hamiltonian):
    f, jac = _field_fn(h), _jac_fn(h)
    n = h.dim

    def rhs(_t, w):
        z = w[:n]
        M = w[n:].reshape(n, n)
        return np.concatenate([f(z), (jac(z) @ M).ravel()])

    return rhs


def variational_flow(h: Hamiltonian, state, t: float, cfg: IntegratorConfig | None = None, *, dense=False):
    """Flow together with its linearization ``M = d(Fl_t)``.

    With ``dense=True`` the third return value evaluates ``(state, M)`` at any
    intermediate time.
    """
    cfg = cfg or IntegratorConfig()
    z0 = _as_chart_array(h, state)
    n = h.dim
    w0 = np.concatenate([z0, np.eye(n).ravel()])
    floor = None if h.on_sphere or h.kind is HamiltonianKind.ANGULAR_L3 else _flat_floor
    out = integrate(_variational_rhs(h), w0, t, cfg, dense=dense, floor=floor)
    if dense:
        w, sol = out

        def at(s):
            ws = sol(s)
            return ws[:n], ws[n:].reshape(n, n)

        return _wrap(h, w[:n], state), w[n:].reshape(n, n), at
    return _wrap(h, out[:n], state), out[n:].reshape(n, n)


def first_return_time(
    h: Hamiltonian,
    state,
    t_max: float,
    cfg: IntegratorConfig | None = None,
    proximity: float = 1e-2,
) -> float:
    """First time the orbit returns to its starting point.

    Returns are detected on the hyperplane through the start orthogonal to
    the initial velocity, crossed in the initial direction, and accepted
    only when the state is within ``proximity`` (relative) of the start.
    """
    cfg = cfg or IntegratorConfig()
    z0 = _as_chart_array(h, state)
    f = _field_fn(h)
    v0 = f(z0)
    if not np.linalg.norm(v0) > 0:
        raise DomainError("equilibrium states have no return time")
    floor = None if h.on_sphere else _flat_floor
    _, sol = integrate(lambda _t, z: f(z), z0, t_max, cfg, dense=True, floor=floor)
    scale = max(1.0, np.linalg.norm(z0))

    def g(s):
        return (sol(s) - z0) @ v0

    # skip the departure from the section at t = 0
    t_prev = min(t_max, 1e-3 * t_max)
    grid = np.linspace(t_prev, t_max, 4001)
    g_prev = g(grid[0])
    for s in grid[1:]:
        g_s = g(s)
        if g_prev < 0.0 <= g_s:
            root = brentq(g, t_prev, s, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            if np.linalg.norm(sol(root) - z0) < proximity * scale:
                return float(root)
        t_prev, g_prev = s, g_s
    raise DomainError(f"no return to the initial state within t = {t_max:g}")


# ---------------------------------------------------------------------------
# Poisson brackets

_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI[_i, _j, _k] = 1.0
    _LEVI[_i, _k, _j] = -1.0


def _observable(name):
    """(value, analytic gradient or None) for a named observable."""
    if isinstance(name, Hamiltonian):
        if name.on_sphere:
            raise ChartError("Poisson brackets are taken on flat phase space")
        return _value_fn(name), lambda z: _grad_named(name.kind.value, z)
    if name in ("E", "H", "L3", "L1", "L2"):
        return _named_value(name), lambda z: _grad_named(name, z)
    if name in ("A1", "A2", "A3"):
        return _named_value(name), None
    raise ValueError(f"unknown observable {name!r}")


def _named_value(name):
    if name == "E":
        return _kepler_value
    if name == "H":
        return lambda z: _kepler_value(z) + _l3_value(z)
    i = int(name[1]) - 1
    if name[0] == "L":
        return lambda z: np.cross(z[:3], z[3:])[i]
    return lambda z: invariants(z).A[i]


def _grad_named(name, z):
    q, p = z[:3], z[3:]
    if name in ("E", "H"):
        rq = np.linalg.norm(q)
        g = np.concatenate([q / rq**3, p])
        if name == "H":
            g = g + np.array([p[1], -p[0], 0.0, -q[1], q[0], 0.0])
        return g
    i = int(name[1]) - 1
    # L_i = eps_ijk q_j p_k
    dq = _LEVI[i] @ p
    dp = -(_LEVI[i] @ q)
    return np.concatenate([dq, dp])


def _fd_gradient(f, z, h):
    def central(step):
        g = np.empty(6)
        for j in range(6):
            e = np.zeros(6)
            e[j] = step
            g[j] = (f(z + e) - f(z - e)) / (2 * step)
        return g

    # one Richardson step cancels the O(h^2) term
    return (4.0 * central(h / 2) - central(h)) / 3.0


def poisson_bracket(f, g, state, h: float = 1e-5) -> float:
    """Canonical bracket sum(df/dq dg/dp - df/dp dg/dq).

    Observables are names (``"E"``, ``"H"``, ``"L1"``..``"A3"``) or flat
    :class:`Hamiltonian` tags.  Analytic gradients are used where available,
    Richardson-refined central differences with step ``h`` otherwise.
    """
    z = state.as_array() if isinstance(state, PhasePoint) else np.asarray(state, dtype=float)
    if f == g:
        return 0.0
    grads = []
    for obs in (f, g):
        val, grad = _observable(obs)
        grads.append(grad(z) if grad is not None else _fd_gradient(val, z, h))
    gf, gg = grads
    return float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3])


# ---------------------------------------------------------------------------
# orbit geometry


def _in_plane_axes(L):
    n = L / np.linalg.norm(L)
    ref = np.array([1.0, 0.0, 0.0])
    e1 = ref - (ref @ n) * n
    if np.linalg.norm(e1) < 1e-8:
        ref = np.array([0.0, 1.0, 0.0])
        e1 = ref - (ref @ n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def argument_of_perigee(L, A) -> float:
    """Angle of A in the orbital plane, measured from the projected first axis.

    The reference axis is e1 projected into the plane L.q = 0 (e2 when L is
    parallel to e1); angles increase in the sense of L.
    """
    L = np.asarray(L, dtype=float)
    A = np.asarray(A, dtype=float)
    if not np.linalg.norm(L) > 0:
        raise DegenerateConicError("collision orbits (L = 0) have no orbital plane")
    if np.linalg.norm(A) == 0:
        return 0.0
    e1, e2 = _in_plane_axes(L)
    return math.atan2(A @ e2, A @ e1)


def conic_trace(L, A, theta: float) -> float:
    """Radius |L|^2 / (1 + |A| cos(theta - g)) at polar angle ``theta``."""
    L = np.asarray(L, dtype=float)
    A = np.asarray(A, dtype=float)
    L2 = float(L @ L)
    if L2 == 0:
        raise DegenerateConicError("collision orbits (L = 0) have a degenerate trace")
    g = argument_of_perigee(L, A)
    denom = 1.0 + np.linalg.norm(A) * math.cos(theta - g)
    if denom <= 0:
        raise UnboundedConicError(f"the conic does not reach polar angle {theta!r}")
    return L2 / denom


# ---------------------------------------------------------------------------
# cylindrical chart for the rotating Hamiltonian


def rotating_field_cylindrical(w: Sequence[float]) -> np.ndarray:
    """X_H in cylindrical coordinates (r, theta, z, p_r, p_theta, p_z)."""
    r, _, z, pr, pt, pz = w
    R3 = (r * r + z * z) ** 1.5
    return np.array([pr, pt / r**2 + 1.0, pz, pt**2 / r**3 - r / R3, 0.0, -z / R3])


def rotating_jacobian_cylindrical(w: Sequence[float]) -> np.ndarray:
    """Derivative of :func:`rotating_field_cylindrical`."""
    r, _, z, _, pt, _ = w
    R2 = r * r + z * z
    R3, R5 = R2**1.5, R2**2.5
    A = np.zeros((6, 6))
    A[0, 3] = 1.0
    A[1, 0] = -2.0 * pt / r**3
    A[1, 4] = 1.0 / r**2
    A[2, 5] = 1.0
    A[3, 0] = -3.0 * pt**2 / r**4 + 3.0 * r * r / R5 - 1.0 / R3
    A[3, 2] = 3.0 * r * z / R5
    A[3, 4] = 2.0 * pt / r**3
    A[5, 0] = 3.0 * r * z / R5
    A[5, 2] = 3.0 * z * z / R5 - 1.0 / R3
    return A
