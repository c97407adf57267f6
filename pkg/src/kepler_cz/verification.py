"""Seeded property suites behind ``kepler-cz verify``.

Each suite returns a :class:`SuiteResult` holding one :class:`PropertyResult`
per property, with the first counterexample kept for failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .action_angle import (
    delaunay_actions,
    delaunay_jacobian,
    lrl_action,
    lrl_jacobian,
    morse_bott_test,
    to_spherical,
)
from .catalog import OrbitRecord, circular_energies, circular_period, collision_period
from .core import KEPLER_E, Hamiltonian, IntegratorConfig, PhasePoint, flow, invariants, poisson_bracket
from .index import CrossingSettings, closed_form_index
from .ledger import bifurcation_invariance, compare_with_reference, shift_consistency
from .numeric_index import numeric_cz
from .regularization import collision_orbit, regularize, stereo_lift, stereo_project

__all__ = [
    "PropertyResult",
    "SuiteResult",
    "SUITES",
    "run_suite",
    "random_bound_state",
]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    worst: float | None = None
    tolerance: float | None = None
    counterexample: dict | None = None

    def to_dict(self):
        return {
            "property": self.name,
            "passed": self.passed,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "counterexample": self.counterexample,
        }


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    seed: int
    properties: tuple[PropertyResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    @property
    def first_failure(self) -> PropertyResult | None:
        return next((p for p in self.properties if not p.passed), None)


def random_bound_state(rng: np.random.Generator, min_L: float = 0.2, min_ecc: float = 0.05) -> PhasePoint:
    """A bound state with |q| in [0.5, 2] and |L|, |A| kept away from zero."""
    while True:
        u = rng.normal(size=3)
        q = u / np.linalg.norm(u) * rng.uniform(0.5, 2.0)
        d = rng.normal(size=3)
        speed = math.sqrt(2.0 / np.linalg.norm(q) * rng.uniform(0.2, 0.8))
        st = PhasePoint(q, d / np.linalg.norm(d) * speed)
        inv = invariants(st)
        if np.linalg.norm(inv.L) > min_L and np.linalg.norm(inv.A) > min_ecc:
            return st


class _Tracker:
    """Running worst value for one property, remembering the first offender."""

    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.worst = 0.0
        self.example = None

    def see(self, value, **context):
        value = float(value)
        if value > self.worst or math.isnan(value):
            self.worst = value
        if (not value <= self.tol) and self.example is None:
            self.example = {"value": value, **{k: _jsonable(v) for k, v in context.items()}}

    def check(self, ok: bool, **context):
        if not ok and self.example is None:
            self.example = {k: _jsonable(v) for k, v in context.items()}

    def result(self):
        return PropertyResult(self.name, self.example is None, self.worst, self.tol, self.example)


def _jsonable(v):
    if isinstance(v, PhasePoint):
        return v.as_array().tolist()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v if isinstance(v, (int, float, str, bool, type(None))) else str(v)


# ---------------------------------------------------------------------------
# suites


def suite_conservation(seed: int, n: int = 100, tol: float = 1e-9, cfg: IntegratorConfig | None = None):
    cfg = cfg or IntegratorConfig(rtol=1e-12, atol=1e-12)
    rng = np.random.default_rng(seed)
    tE, tL, tA = (_Tracker(f"{x} drift per Kepler period", tol) for x in "ELA")
    for _ in range(n):
        st = random_bound_state(rng)
        inv = invariants(st)
        T = 2 * math.pi / (-2.0 * inv.E) ** 1.5
        out = invariants(flow(KEPLER_E, st, T, cfg))
        tE.see(abs(out.E - inv.E) / abs(inv.E), state=st)
        tL.see(np.linalg.norm(out.L - inv.L) / np.linalg.norm(inv.L), state=st)
        tA.see(np.linalg.norm(out.A - inv.A) / np.linalg.norm(inv.A), state=st)
    return [tE.result(), tL.result(), tA.result()]


_EPS = {(0, 1): (2, 1), (1, 2): (0, 1), (2, 0): (1, 1), (1, 0): (2, -1), (2, 1): (0, -1), (0, 2): (1, -1)}


def suite_poisson(seed: int, n: int = 100, tol: float = 1e-6):
    rng = np.random.default_rng(seed)
    names = {
        "{E, L_i} = 0": _Tracker("{E, L_i} = 0", tol),
        "{E, A_i} = 0": _Tracker("{E, A_i} = 0", tol),
        "{A_i, L_j} = eps_ijk A_k": _Tracker("{A_i, L_j} = eps_ijk A_k", tol),
        "{L_i, L_j} = eps_ijk L_k": _Tracker("{L_i, L_j} = eps_ijk L_k", tol),
        "antisymmetry": _Tracker("antisymmetry", tol),
    }
    for _ in range(n):
        st = random_bound_state(rng)
        inv = invariants(st)
        for i in range(3):
            names["{E, L_i} = 0"].see(abs(poisson_bracket("E", f"L{i + 1}", st)), state=st, i=i)
            names["{E, A_i} = 0"].see(abs(poisson_bracket("E", f"A{i + 1}", st)), state=st, i=i)
            for j in range(3):
                k, s = _EPS.get((i, j), (None, 0))
                a_exp = s * inv.A[k] if k is not None else 0.0
                l_exp = s * inv.L[k] if k is not None else 0.0
                ai, lj, li = f"A{i + 1}", f"L{j + 1}", f"L{i + 1}"
                names["{A_i, L_j} = eps_ijk A_k"].see(abs(poisson_bracket(ai, lj, st) - a_exp), state=st, i=i, j=j)
                names["{L_i, L_j} = eps_ijk L_k"].see(abs(poisson_bracket(li, lj, st) - l_exp), state=st, i=i, j=j)
                names["antisymmetry"].see(
                    abs(poisson_bracket(ai, lj, st) + poisson_bracket(lj, ai, st)), state=st, i=i, j=j
                )
    return [t.result() for t in names.values()]


def suite_regularization(seed: int, n: int = 100, tol: float = 1e-12, flow_tol: float = 1e-9):
    rng = np.random.default_rng(seed)
    trip = _Tracker("stereographic round trip", tol)
    rels = [_Tracker(f"relation {i}", tol) for i in range(1, 5)]
    for _ in range(n):
        r = rng.uniform(0.5, 2.0)
        p = rng.normal(size=3)
        q = rng.normal(size=3)
        sc = stereo_lift(r, p, q)
        p2, q2 = stereo_project(r, sc)
        scale = max(1.0, np.linalg.norm(p), np.linalg.norm(q))
        trip.see(max(np.max(np.abs(p2 - p)), np.max(np.abs(q2 - q))) / scale, r=r, p=p, q=q)
        x0, ny = sc.x[0], np.linalg.norm(sc.y)
        pp, nq = p @ p, np.linalg.norm(q)
        rels[0].see(abs((r - x0) - 2 * r**3 / (pp + r * r)) / r, r=r, p=p, q=q)
        rels[1].see(abs(pp - (2 * r**3 / (r - x0) - r * r)) / max(1.0, pp), r=r, p=p, q=q)
        rels[2].see(abs(ny**2 - (pp + r * r) ** 2 / (4 * r**4) * nq**2) / max(1.0, ny**2), r=r, p=p, q=q)
        rels[3].see(abs(nq - (r - x0) / r * ny) / max(1.0, nq), r=r, p=p, q=q)
    orbit = _Tracker("K_r flow reproduces the collision orbit", flow_tol)
    height = _Tracker("q3(t) = (1 + cos rt) / r^2", flow_tol)
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-12)
    for r in (1.0, math.sqrt(4.2), float(rng.uniform(0.7, 2.5))):
        sc0, _ = collision_orbit(r, "-", 0.0)
        h = Hamiltonian.moser_kr(r)
        for frac in (0.25, 0.5, 0.75, 1.0):
            t = frac * 2 * math.pi / r
            got = flow(h, sc0, t, cfg)
            exact, flat = collision_orbit(r, "-", t)
            orbit.see(np.max(np.abs(got.as_array() - exact.as_array())), r=r, t=t)
            if flat is not None:
                height.see(abs(flat.q[2] - (1 + math.cos(r * t)) / r**2), r=r, t=t)
                pulled = regularize(flat, r)
                height.see(np.max(np.abs(pulled.as_array() - exact.as_array())), r=r, t=t)
    return [trip.result(), *(t.result() for t in rels), orbit.result(), height.result()]


def suite_index_agreement(seed: int, c: float = -2.1, N_max: int = 3, cfg=None, settings=None):
    del seed  # deterministic
    settings = settings or CrossingSettings()
    roots = circular_energies(c)
    tau_c = collision_period(c)
    out = []
    for N in range(1, N_max + 1):
        recs = [
            OrbitRecord("retrograde", roots.retrograde, c, circular_period(roots.retrograde, "+"), N),
            OrbitRecord("direct", roots.direct, c, circular_period(roots.direct, "-"), N),
            OrbitRecord("collision+", c, c, tau_c, N),
            OrbitRecord("collision-", c, c, tau_c, N),
        ]
        for rec in recs:
            closed = closed_form_index(rec)
            got = numeric_cz(rec, cfg, settings)
            t = _Tracker(f"{rec.label} numeric = closed form", 0.0)
            t.check(got.value == closed, orbit=rec.label, closed=str(closed), numeric=str(got.value))
            out.append(t.result())
    return out


def suite_morse_bott(seed: int, n: int = 100, tol: float = 1e-10, k_max: int = 50):
    rng = np.random.default_rng(seed)
    acts = _Tracker("Delaunay actions = (1/sqrt(-2E), |L|, L3)", tol)
    eta = _Tracker("p_eta = A3", tol)
    rank1 = _Tracker("case-1 Jacobian rank 3", 0.0)
    for _ in range(n):
        st = random_bound_state(rng)
        if math.hypot(st.q[0], st.q[1]) < 1e-3:
            continue
        sp = to_spherical(st)
        inv = invariants(st)
        d = delaunay_actions(sp)
        want = np.array([1 / math.sqrt(-2 * inv.E), np.linalg.norm(inv.L), inv.L[2]])
        acts.see(np.max(np.abs(d.as_array() - want)), state=st)
        eta.see(abs(lrl_action(sp) - inv.A[2]), state=st)
        rep = delaunay_jacobian(sp)
        if rep.case == "case1":
            rank1.check(rep.rank == 3, state=st, singular_values=rep.singular_values)
    rank2 = _Tracker("case-2 Jacobian rank 3 (circular inclined)", 0.0)
    ident2 = _Tracker("case-2 bracket equals 1/r - 2E != 0", tol)
    for _ in range(10):
        E = -rng.uniform(0.3, 1.5)
        incl = rng.uniform(0.2, 1.3)
        R = 1 / (-2 * E)
        v = math.sqrt(1 / R)
        st = PhasePoint((R, 0, 0), (0, v * math.cos(incl), v * math.sin(incl)))
        rep = delaunay_jacobian(to_spherical(st))
        rank2.check(
            rep.case == "case2" and rep.rank == 3,
            state=st,
            rank=rep.rank,
            bracket=rep.bracket,
            claimed=rep.claimed,
        )
        ident2.check(
            abs(rep.bracket - rep.claimed) <= tol and rep.claimed != 0,
            state=st,
            bracket=rep.bracket,
            claimed=rep.claimed,
            actual_identity=rep.bracket_identity,
        )
    rank3 = _Tracker("LRL Jacobian rank 3 (planar non-circular)", 0.0)
    for _ in range(10):
        R = rng.uniform(0.6, 1.6)
        pr = rng.uniform(0.1, 0.5) * rng.choice([-1, 1])
        pt = rng.uniform(0.5, 1.0) * math.sqrt(1 / R)
        st = PhasePoint((R, 0, 0), (pr, pt, 0))
        if invariants(st).E >= 0:
            continue
        rep = lrl_jacobian(to_spherical(st))
        rank3.check(rep.rank == 3, state=st, rank=rep.rank)
    shear = _Tracker("return-map displacement 6 pi k p_l^2 != 0", 0.0)
    for k in range(1, k_max + 1):
        for l in range(1, k_max + 1):  # noqa: E741
            if math.gcd(k, l) != 1:
                continue
            rep = morse_bott_test(k, l)
            shear.check(
                bool(rep) and math.isclose(rep.displacement, 6 * math.pi * k * rep.p_l**2, rel_tol=1e-14),
                family=[k, l],
            )
    ref = morse_bott_test(8, 1)
    exact = _Tracker("(8,1) displacement = 12 pi", 0.0)
    exact.check(ref.displacement == 12 * math.pi and ref.entry == -96 * math.pi, displacement=ref.displacement)
    return [acts.result(), eta.result(), rank1.result(), rank2.result(), ident2.result(), rank3.result(), shear.result(), exact.result()]


def suite_ledger(seed: int, c: float = -2.1, cap: int = 10, eps: float = 1e-3):
    del seed
    rep = compare_with_reference(c, cap)
    match = _Tracker(f"ledger at c = {c}, cap {cap} matches the reference", 0.0)
    bad = rep.mismatches + rep.unverified
    match.check(rep.all_match, rows=[r.to_dict() for r in bad])
    bif = _Tracker("bifurcation invariance", 0.0)
    for kl in ((2, 1), (4, 1), (8, 1)):
        chk = bifurcation_invariance(*kl, eps=eps)
        bif.check(chk.passed, family=list(kl), before=chk.before, after=chk.after, expected=chk.expected_after)
    ident = _Tracker("4k - 1/2 - 3/2 = 4k - 2", 0.0)
    for k in range(1, 51):
        try:
            shift_consistency(k, 1)
        except AssertionError as exc:
            ident.check(False, k=k, error=str(exc))
    return [match.result(), bif.result(), ident.result()]


SUITES: dict[str, Callable[[int], list[PropertyResult]]] = {
    "conservation": suite_conservation,
    "poisson": suite_poisson,
    "regularization": suite_regularization,
    "index-agreement": suite_index_agreement,
    "morse-bott": suite_morse_bott,
    "ledger": suite_ledger,
}


def run_suite(name: str, seed: int = 0, **kwargs) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return SuiteResult(name, seed, tuple(fn(seed, **kwargs)))
