import math
from fractions import Fraction

import numpy as np
import pytest

from kepler_cz.catalog import (
    FamilyId,
    OrbitRecord,
    bifurcation_energies,
    catalog,
    circular_cubic,
    circular_energies,
    circular_orbit_state,
    circular_period,
    collision_period,
    enumerate_families,
    is_generic,
    resonance_energy,
)
from kepler_cz.core import ROTATING_H, IntegratorConfig, PhasePoint, first_return_time, flow, invariants
from kepler_cz.errors import NonGenericEnergyError, ResonantEnergyError

TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-12)
C21_ROOTS = (-2.5433830775074338, -1.5279557677888171, -0.12866115470374928)


def _bisect(f, a, b):
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if (f(m) > 0) == (fa > 0):
            a, fa = m, f(m)
        else:
            b = m
    return 0.5 * (a + b)


def test_roots_at_minus_2_1():
    roots = circular_energies(-2.1)
    np.testing.assert_allclose(roots.roots, C21_ROOTS, atol=1e-12)
    f = lambda E: circular_cubic(E, -2.1)  # noqa: E731
    oracle = (_bisect(f, -3, -2.1), _bisect(f, -2.1, -0.7), _bisect(f, -0.7, -1e-9))
    np.testing.assert_allclose(roots.roots, oracle, atol=1e-10)
    for E in roots.roots:
        assert abs(circular_cubic(E, -2.1)) < 1e-10
    assert roots.retrograde + 1 / math.sqrt(-2 * roots.retrograde) == pytest.approx(-2.1, abs=1e-10)
    for E in (roots.direct, roots.outer):
        assert E - 1 / math.sqrt(-2 * E) == pytest.approx(-2.1, abs=1e-10)


def test_root_counts():
    double = circular_energies(-1.5)
    assert double.retrograde == pytest.approx(-2.0)
    assert double.direct == pytest.approx(-0.5)
    assert len(circular_energies(0.0).roots) == 1


def test_periods():
    assert circular_period(-0.5, "+") == pytest.approx(math.pi)
    assert circular_period(-2.0, "+") == pytest.approx(2 * math.pi / 9)
    with pytest.raises(ResonantEnergyError):
        circular_period(-0.5, "-")
    assert collision_period(-0.5) == pytest.approx(2 * math.pi)


def test_circular_state():
    st = circular_orbit_state(-0.5, "+", 0.0)
    np.testing.assert_allclose(st.as_array(), [1, 0, 0, 0, 1, 0], atol=1e-15)
    r, _, _, _, pth, _ = circular_orbit_state(-0.5, "-", 0.0).cylindrical()
    assert (r, pth) == pytest.approx((1, -1))


@pytest.mark.parametrize("sign", ["+", "-"])
def test_circular_state_tracks_rotating_flow(sign):
    E = circular_energies(-2.1).retrograde if sign == "+" else circular_energies(-2.1).direct
    st0 = circular_orbit_state(E, sign, 0.0)
    out = flow(ROTATING_H, st0, 0.3, TIGHT)
    np.testing.assert_allclose(out.as_array(), circular_orbit_state(E, sign, 0.3).as_array(), atol=1e-8)
    T = circular_period(E, sign)
    assert first_return_time(ROTATING_H, st0, 1.5 * T, TIGHT) == pytest.approx(T, rel=1e-6)


def test_resonance_and_bifurcation_energies():
    assert resonance_energy(8, 1) == -2.0
    assert bifurcation_energies(8, 1) == (-2.5, -1.5)
    assert resonance_energy(1, 1) == -0.5
    assert resonance_energy(2, 4) == resonance_energy(1, 2)
    fam, g = FamilyId.reduced(4, 2)
    assert (fam.k, fam.l, g) == (2, 1, 2)
    assert fam.ratio == Fraction(2)
    with pytest.raises(ValueError):
        FamilyId(4, 2)


def test_family_enumeration():
    got = [(f.k, f.l) for f in enumerate_families(-2.1, 11)]
    assert got == [(6, 1), (7, 1), (8, 1), (9, 1), (10, 1), (11, 1), (11, 2)]
    lo = (-2 * C21_ROOTS[1]) ** 1.5
    hi = (-2 * C21_ROOTS[0]) ** 1.5
    brute = [(k, l) for k in range(1, 12) for l in range(1, k + 1) if math.gcd(k, l) == 1 and lo < k / l < hi]
    assert sorted(brute) == sorted(got)
    assert enumerate_families(-2.1, 5) == []
    assert enumerate_families(-50.0, 20) == []


def test_genericity():
    assert is_generic(-2.1, 20)
    rep = is_generic(-2.5, 8)
    assert not rep
    assert FamilyId(8, 1) in [f for f, _ in rep.offenders]
    assert not is_generic(-2.0, 8)


def test_catalog_counts():
    assert len(catalog(-2.1, 1, 5)) == 4
    recs = catalog(-2.1, 1, 11)
    assert len(recs) == 11
    assert [r.kind for r in recs[:4]] == ["retrograde", "direct", "collision+", "collision-"]
    with pytest.raises(NonGenericEnergyError) as err:
        catalog(-2.0, 1, 11)
    assert FamilyId(8, 1) in err.value.offenders


def test_record_invariants():
    for rec in catalog(-2.1, 2, 11):
        if rec.kind in ("retrograde", "direct"):
            assert abs(circular_cubic(rec.E, rec.c)) < 1e-10
        elif rec.kind.startswith("collision"):
            assert rec.E == rec.c
        else:
            assert rec.E == resonance_energy(rec.family.k, rec.family.l)
    with pytest.raises(ValueError):
        OrbitRecord("family", -2.0, -2.1, 1.0)


def test_resonant_orbit_closes():
    # an eccentric orbit with E = E_{2,1} closes after rotating-frame time 2 pi
    E = resonance_energy(2, 1)
    r0 = 0.5 * (1 / -E)
    v = math.sqrt(2 * (E + 1 / r0))
    st = PhasePoint((r0, 0, 0.1), (0, v * 0.8, v * 0.6))
    st = PhasePoint(st.q, st.p * math.sqrt(2 * (E + 1 / np.linalg.norm(st.q))) / np.linalg.norm(st.p))
    assert invariants(st).E == pytest.approx(E, abs=1e-14)
    out = flow(ROTATING_H, st, 2 * math.pi, TIGHT)
    np.testing.assert_allclose(out.as_array(), st.as_array(), atol=1e-8)


def test_endpoints_monotone_in_c():
    prev = None
    for c in np.linspace(-4, -1.6, 25):
        roots = circular_energies(float(c))
        if prev is not None:
            assert roots.retrograde > prev[0]
            assert prev[1] < roots.direct < -0.5 < roots.outer < prev[2]
        prev = roots.roots
