"""Robbin-Salamon index of paths of symplectic matrices.

Paths live on R^{2n} with the block-diagonal form
``Omega = diag([[0, 1], [-1, 0]], ...)``, i.e. bases are ordered
``(v1, w1, v2, w2, ...)`` with ``omega(v_i, w_i) = 1``.  The crossing form at
a crossing ``t`` is ``Q_t(v) = v^T Omega Psi'(t) v`` on ``ker(Psi(t) - I)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .catalog import OrbitRecord, catalog, circular_period
from .errors import DomainError, NonSymplecticPathError, ResonantEnergyError, UnresolvedCrossingError
from .halfint import HalfInteger

__all__ = [
    "omega_matrix",
    "SymplecticPath",
    "Crossing",
    "RSIndex",
    "CrossingSettings",
    "robbin_salamon",
    "rs_index",
    "analytic_path",
    "psi_h",
    "psi_ke",
    "psi_l",
    "product_path",
    "mu_ratio",
    "cz_circular",
    "cz_collision",
    "rs_family",
    "decomposition_index",
    "closed_form_index",
    "indexed_catalog",
    "signature",
]


def omega_matrix(dim: int) -> np.ndarray:
    """Block-diagonal symplectic matrix of size ``dim``."""
    if dim % 2:
        raise ValueError("dimension must be even")
    Om = np.zeros((dim, dim))
    for i in range(0, dim, 2):
        Om[i, i + 1] = 1.0
        Om[i + 1, i] = -1.0
    return Om


def signature(Q: np.ndarray, rel_tol: float = 1e-6):
    """(n+, n-, n0) of a symmetric matrix, zero meaning below rel_tol * max|eig|."""
    if Q.size == 0:
        return 0, 0, 0
    ev = np.linalg.eigvalsh(0.5 * (Q + Q.T))
    scale = max(np.max(np.abs(ev)), 1e-300)
    zero = np.abs(ev) <= rel_tol * scale
    return int(np.sum((ev > 0) & ~zero)), int(np.sum((ev < 0) & ~zero)), int(np.sum(zero))


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class SymplecticPath:
    """A path ``[0, tau] -> Sp(dim)`` starting at the identity.

    Analytic paths carry an exact derivative and a list of exact crossing
    times; other paths are scanned numerically by :func:`robbin_salamon`.
    ``period`` sets the sampling scale of that scan (samples per period).
    """

    func: Callable[[float], np.ndarray]
    tau: float
    dim: int
    derivative: Callable[[float], np.ndarray] | None = None
    crossing_times: tuple[float, ...] | None = None
    name: str = "path"
    params: dict = field(default_factory=dict)
    period: float | None = None

    def __post_init__(self):
        if self.dim not in (2, 4, 6):
            raise ValueError("paths act on 2-, 4- or 6-dimensional symplectic space")
        if not self.tau > 0:
            raise ValueError("the interval must have positive length")
        if np.max(np.abs(self(0.0) - np.eye(self.dim))) > 1e-8:
            raise NonSymplecticPathError(f"{self.name} does not start at the identity")

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.func(t), dtype=float)

    @property
    def analytic(self) -> bool:
        return self.crossing_times is not None and self.derivative is not None

    def dot(self, t: float, h: float = 1e-6) -> np.ndarray:
        """Time derivative; exact when available, else second-order differences."""
        if self.derivative is not None:
            return np.asarray(self.derivative(t), dtype=float)
        h = min(h, self.tau / 4)
        if t - h < 0:
            return (-3 * self(t) + 4 * self(t + h) - self(t + 2 * h)) / (2 * h)
        if t + h > self.tau:
            return (3 * self(t) - 4 * self(t - h) + self(t - 2 * h)) / (2 * h)
        return (self(t + h) - self(t - h)) / (2 * h)

    def symplectic_defect(self, n: int = 64) -> float:
        Om = omega_matrix(self.dim)
        worst = 0.0
        for t in np.linspace(0.0, self.tau, n):
            P = self(t)
            worst = max(worst, float(np.max(np.abs(P.T @ Om @ P - Om))))
        return worst

    def check_symplectic(self, tol: float = 1e-8, n: int = 64) -> None:
        d = self.symplectic_defect(n)
        if d > tol:
            raise NonSymplecticPathError(f"{self.name}: |Psi^T Omega Psi - Omega| = {d:.3g} exceeds {tol:g}")

    def numeric(self) -> "SymplecticPath":
        """Same path with the exact crossing data and derivative dropped."""
        return SymplecticPath(self.func, self.tau, self.dim, None, None, self.name + "~", dict(self.params), self.period)

    def time_warp(self, phi: Callable[[float], float], new_tau: float) -> "SymplecticPath":
        """``s -> Psi(phi(s))`` for an increasing ``phi`` with phi(0)=0, phi(new_tau)=tau."""
        f = self.func
        per = None if self.period is None else self.period * new_tau / self.tau
        return SymplecticPath(lambda s: f(phi(s)), new_tau, self.dim, None, None, self.name + "∘warp", {}, per)

    @classmethod
    def from_samples(cls, times: Sequence[float], matrices: Sequence[np.ndarray], name="sampled", period=None):
        """Cubic-spline interpolant of sampled matrices (times must start at 0)."""
        times = np.asarray(times, dtype=float)
        mats = np.asarray(matrices, dtype=float)
        if times[0] != 0.0:
            raise ValueError("samples must start at t = 0")
        spline = CubicSpline(times, mats, axis=0)
        dspline = spline.derivative()
        dim = mats.shape[1]
        path = cls(spline, float(times[-1]), dim, dspline, None, name, {}, period)
        path.check_symplectic(tol=1e-6, n=min(len(times), 64))
        return path


def _rotation_block(w, a, t):
    """exp(t [[0, -a w], [w / a, 0]]) = [[cos, -a sin], [sin / a, cos]] (frequency w)."""
    c, s = math.cos(w * t), math.sin(w * t)
    return np.array([[c, -a * s], [s / a, c]])


def _multiples(step, tau, rel=1e-12):
    m = 0
    out = []
    while m * step <= tau * (1 + rel):
        out.append(tau if abs(m * step - tau) <= rel * tau else m * step)
        m += 1
    return tuple(out)


def psi_h(E: float, sign, N: int = 1) -> SymplecticPath:
    """Linearized H-flow of gamma_+- in the frame (X1, X2, X3, X4), over N periods.

    Generator ``[[0, -1/w^4, 0, 0], [1/w^2, 0, 0, 0], [0, 0, 0, -1/w^6], [0, 0, 1, 0]]``
    with ``w = +-1/sqrt(-2E)``; crossings sit at multiples of ``2 pi |w|^3``.
    """
    s = 1 if sign in ("+", 1) else -1
    if not E < 0:
        raise DomainError("E must be negative")
    w0 = s / math.sqrt(-2.0 * E)
    aw = abs(w0)
    freq = 1.0 / aw**3
    L = np.zeros((4, 4))
    L[0, 1], L[1, 0] = -1.0 / w0**4, 1.0 / w0**2
    L[2, 3], L[3, 2] = -1.0 / w0**6, 1.0
    tau = N * circular_period(E, s)

    def f(t):
        P = np.zeros((4, 4))
        P[:2, :2] = _rotation_block(freq, 1.0 / aw, t)
        P[2:, 2:] = _rotation_block(freq, 1.0 / aw**3, t)
        return P

    return SymplecticPath(
        f, tau, 4, lambda t: L @ f(t), _multiples(2 * math.pi * aw**3, tau),
        "Psi_H", {"E": E, "sign": s, "N": N, "generator": L}, tau / N,
    )


def psi_ke(r: float, N: int = 1, tau: float | None = None) -> SymplecticPath:
    """Linearized K_E-flow along a collision orbit in the frame (dy1, dx1, dy2, dx2).

    Each block is ``exp(t [[0, -1], [r^2, 0]])``; crossings at multiples of 2 pi / r.
    """
    if not r > 0:
        raise DomainError("r must be positive")
    L = np.zeros((4, 4))
    L[0, 1] = L[2, 3] = -1.0
    L[1, 0] = L[3, 2] = r * r
    tau = N * 2 * math.pi / r if tau is None else tau

    def f(t):
        P = np.zeros((4, 4))
        B = _rotation_block(r, 1.0 / r, t)
        P[:2, :2] = B
        P[2:, 2:] = B
        return P

    return SymplecticPath(
        f, tau, 4, lambda t: L @ f(t), _multiples(2 * math.pi / r, tau),
        "Psi_KE", {"r": r, "N": N, "generator": L}, 2 * math.pi / r,
    )


# Linearized L3-flow in the basis (dp1, dq1, dp2, dq2): dp1' = -dp2, dq1' = -dq2, ...
_M_L = np.array([[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


def psi_l(tau: float = 2 * math.pi, speed: float = 1.0) -> SymplecticPath:
    """Linearized L3-flow in the basis (dp1, dq1, dp2, dq2), run at angular ``speed``."""

    def f(t):
        c, s = math.cos(speed * t), math.sin(speed * t)
        return np.array([[c, 0, -s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, s, 0, c]], dtype=float)

    return SymplecticPath(
        f, tau, 4, lambda t: speed * _M_L @ f(t), _multiples(2 * math.pi / abs(speed), tau),
        "Psi_L", {"speed": speed, "generator": speed * _M_L}, 2 * math.pi / abs(speed),
    )


def analytic_path(kind: str, params: dict | None = None, N: int = 1) -> SymplecticPath:
    """Named closed-form path: ``"H"`` (E, sign), ``"KE"`` (r) or ``"L"`` (tau)."""
    params = dict(params or {})
    key = kind.upper().replace("_", "").replace("PSI", "")
    if key == "H":
        return psi_h(params["E"], params.get("sign", "+"), N)
    if key in ("KE", "K", "KR"):
        return psi_ke(params["r"], N)
    if key in ("L", "L3"):
        return psi_l(params.get("tau", 2 * math.pi * N), params.get("speed", 1.0))
    raise ValueError(f"unknown analytic path {kind!r}")


def product_path(a: SymplecticPath, b: SymplecticPath, tau: float = 1.0) -> SymplecticPath:
    """Pointwise product ``s -> a(s tau_a / tau) b(s tau_b / tau)`` on ``[0, tau]``."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    ka, kb = a.tau / tau, b.tau / tau

    def f(s):
        return a(ka * s) @ b(kb * s)

    def df(s):
        return ka * a.dot(ka * s) @ b(kb * s) + kb * a(ka * s) @ b.dot(kb * s)

    per = None
    if a.period and b.period:
        per = min(a.period / ka, b.period / kb)
    return SymplecticPath(f, tau, a.dim, df, None, f"{a.name}*{b.name}", {}, per)


# ---------------------------------------------------------------------------
# crossings and the index


@dataclass(frozen=True)
class Crossing:
    """A crossing with its kernel, crossing form and signature."""

    t: float
    kernel: np.ndarray
    form: np.ndarray
    n_plus: int
    n_minus: int
    n_zero: int
    where: str  # "start" | "interior" | "end"

    @property
    def signature(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def kernel_dim(self) -> int:
        return self.kernel.shape[1]

    def to_dict(self):
        return {"t": self.t, "where": self.where, "kernel_dim": self.kernel_dim, "signature": self.signature}


@dataclass(frozen=True)
class RSIndex:
    """Index value plus the crossings that produced it."""

    value: HalfInteger
    crossings: tuple[Crossing, ...]

    def __eq__(self, other):
        if isinstance(other, RSIndex):
            return self.value == other.value
        return self.value == other

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return str(self.value)

    def __float__(self):
        return float(self.value)

    def as_fraction(self) -> Fraction:
        return self.value.as_fraction()


@dataclass(frozen=True)
class CrossingSettings:
    """Thresholds for the numerical crossing scan.

    ``kernel_tol`` separates true crossings (smallest singular value of
    ``Psi - I`` below it) from near misses above ``miss_tol``; refined
    minima in between are reported as unresolved.
    """

    samples_per_period: int = 2048
    kernel_tol: float = 1e-7
    miss_tol: float = 1e-4
    xatol: float = 1e-10
    form_rel_tol: float = 1e-6


def _sigma_min(P):
    return float(np.linalg.svd(P - np.eye(P.shape[0]), compute_uv=False)[-1])


def _kernel(P, tol):
    _, s, Vt = np.linalg.svd(P - np.eye(P.shape[0]))
    return Vt[s < tol].T


def _make_crossing(path, t, where, tol, rel_tol):
    K = _kernel(path(t), tol)
    if K.shape[1] == 0:
        raise UnresolvedCrossingError(f"{path.name}: empty kernel at claimed crossing t = {t!r}")
    Om = omega_matrix(path.dim)
    S = Om @ path.dot(t)
    Q = K.T @ (0.5 * (S + S.T)) @ K
    npos, nneg, nzero = signature(Q, rel_tol)
    if nzero:
        raise UnresolvedCrossingError(f"{path.name}: degenerate crossing form at t = {t!r}")
    return Crossing(float(t), K, Q, npos, nneg, nzero, where)


def _scan(path: SymplecticPath, st: CrossingSettings):
    """Crossing times of a path without exact crossing data."""
    per = path.period or path.tau
    n = max(64, int(math.ceil(st.samples_per_period * path.tau / per)))
    ts = np.linspace(0.0, path.tau, n + 1)
    sig = np.array([_sigma_min(path(t)) for t in ts])
    found = [0.0]
    for i in range(1, n + 1):
        right = sig[i + 1] if i < n else math.inf
        if not (sig[i] <= sig[i - 1] and sig[i] <= right):
            continue
        lo, hi = ts[i - 1], ts[min(i + 1, n)]
        # offset the variable so Brent's relative tolerance acts on the bracket width
        obj = lambda u, lo=lo: _sigma_min(path(lo + u)) ** 2  # noqa: E731
        res = minimize_scalar(obj, bounds=(0.0, hi - lo), method="bounded", options={"xatol": st.xatol})
        t_star = float(lo + res.x)
        s_star = math.sqrt(max(res.fun, 0.0))
        if i == n or hi - t_star < 10 * st.xatol:
            # the minimum may sit on the end point
            if sig[n] < s_star:
                t_star, s_star = path.tau, sig[n]
        if s_star >= st.miss_tol:
            continue
        if s_star >= st.kernel_tol:
            raise UnresolvedCrossingError(
                f"{path.name}: near-crossing at t = {t_star:.12g} with sigma_min = {s_star:.3g}"
            )
        if t_star < 10 * st.xatol:
            continue
        if abs(t_star - path.tau) <= 10 * st.xatol:
            t_star = path.tau
        if found and abs(t_star - found[-1]) <= 10 * st.xatol:
            continue
        found.append(t_star)
    return found


def robbin_salamon(path: SymplecticPath, settings: CrossingSettings | None = None) -> RSIndex:
    """mu_RS = Sign(Q_0)/2 + sum of interior Sign(Q_t) + Sign(Q_tau)/2."""
    st = settings or CrossingSettings()
    if path.analytic:
        times = list(path.crossing_times)
        tol = 1e-9
    else:
        path.check_symplectic(tol=1e-6 if path.derivative is not None else 1e-8)
        times = _scan(path, st)
        tol = st.kernel_tol * 10
    crossings = []
    for t in times:
        where = "start" if t == 0.0 else ("end" if t == path.tau else "interior")
        crossings.append(_make_crossing(path, t, where, tol, st.form_rel_tol))
    ends = sum(c.signature for c in crossings if c.where != "interior")
    inner = sum(c.signature for c in crossings if c.where == "interior")
    return RSIndex(HalfInteger.from_signature_sum(ends, inner), tuple(crossings))


def rs_index(path: SymplecticPath, settings: CrossingSettings | None = None) -> HalfInteger:
    return robbin_salamon(path, settings).value


# ---------------------------------------------------------------------------
# closed forms


def mu_ratio(E: float, sign) -> Fraction | float:
    """mu_+- = x / (x +- 1) with x = (-2E)^(3/2)."""
    s = 1 if sign in ("+", 1) else -1
    x = (-2.0 * E) ** 1.5
    return x / (x + s)


def cz_circular(E: float, sign, N: int = 1, tol: float = 1e-9) -> HalfInteger:
    """2 + 4 floor(N mu_+-); the N-th cover is degenerate when N mu is an integer."""
    if not E < 0:
        raise DomainError("E must be negative")
    if N < 1:
        raise ValueError("N must be at least 1")
    s = 1 if sign in ("+", 1) else -1
    x = (-2.0 * E) ** 1.5
    if abs(x + s) < 1e-12:
        raise ResonantEnergyError("the direct orbit at E = -1/2 is degenerate")
    if s < 0 and x < 1:
        raise DomainError("the closed form covers the direct orbit only for E < -1/2")
    val = N * x / (x + s)
    if abs(val - round(val)) < tol:
        raise ResonantEnergyError(f"E = {E!r} is resonant for cover {N}: N mu = {val!r}")
    return HalfInteger(2 * (2 + 4 * math.floor(val)))


def cz_collision(N: int = 1) -> HalfInteger:
    if N < 1:
        raise ValueError("N must be at least 1")
    return HalfInteger(8 * N)


def rs_family(k: int, l: int) -> HalfInteger:  # noqa: E741
    """4k - 1/2."""
    if k < 1 or l < 1 or math.gcd(k, l) != 1:
        raise ValueError("(k, l) must be coprime positive integers")
    return HalfInteger(8 * k - 1)


def decomposition_index(E: float, N: int = 1, settings: CrossingSettings | None = None):
    """(mu(Psi_KE), mu(Psi_L), sum) for the N-th collision cover at Kepler energy E.

    Psi_KE runs over N regularized periods 2 pi N / r; Psi_L runs over the
    matching rotating-frame time 2 pi N / r^3.
    """
    if not E < 0:
        raise DomainError("E must be negative")
    r = math.sqrt(-2.0 * E)
    a = robbin_salamon(psi_ke(r, N), settings).value
    b = robbin_salamon(psi_l(2 * math.pi * N / r**3), settings).value
    return a, b, a + b


def closed_form_index(rec: OrbitRecord) -> HalfInteger:
    """Index of a catalog record from the closed forms."""
    if rec.kind == "retrograde":
        return cz_circular(rec.E, "+", rec.cover)
    if rec.kind == "direct":
        return cz_circular(rec.E, "-", rec.cover)
    if rec.kind in ("collision+", "collision-"):
        return cz_collision(rec.cover)
    if rec.kind == "family":
        return rs_family(rec.family.k, rec.family.l)
    raise DomainError(f"no closed form for orbit kind {rec.kind!r}")


def indexed_catalog(c: float, N_max: int, k_max: int) -> list[OrbitRecord]:
    """:func:`kepler_cz.catalog.catalog` with every index filled in."""
    return [rec.with_index(closed_form_index(rec)) for rec in catalog(c, N_max, k_max)]
