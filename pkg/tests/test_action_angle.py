import math

import numpy as np
import pytest

from kepler_cz.action_angle import (
    SphericalPoint,
    delaunay_actions,
    delaunay_jacobian,
    delaunay_return_map,
    from_spherical,
    lrl_action,
    lrl_jacobian,
    morse_bott_test,
    orbit_case,
    to_spherical,
)
from kepler_cz.core import PhasePoint, invariants
from kepler_cz.errors import AxisChartError, UnboundStateError, VerticalOrbitError
from kepler_cz.verification import random_bound_state


def _fd_jacobian(f, sp, h=1e-6):
    a = sp.as_array()
    cols = []
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        cols.append((f(SphericalPoint.from_array(a + e)) - f(SphericalPoint.from_array(a - e))) / (2 * h))
    return np.array(cols)


def _delaunay_vec(sp):
    return delaunay_actions(sp).as_array()


def _lrl_vec(sp):
    d = delaunay_actions(sp)
    return np.array([d.p_l, lrl_action(sp), d.p_theta])


def _inclined(rng):
    while True:
        st = random_bound_state(rng)
        L = invariants(st).L
        if abs(L[2]) > 0.1 * np.linalg.norm(L) and np.hypot(L[0], L[1]) > 0.1 * np.linalg.norm(L):
            try:
                return st, to_spherical(st)
            except AxisChartError:
                continue


def _circular_inclined(r=1.3, incl=0.7, phase=0.4):
    v = 1 / math.sqrt(r)
    u = np.array([math.cos(phase), math.sin(phase), 0.0])
    w = math.cos(incl) * np.array([-math.sin(phase), math.cos(phase), 0.0]) + math.sin(incl) * np.array([0, 0, 1.0])
    return PhasePoint(r * u, v * w)


def test_spherical_round_trip(rng):
    for _ in range(50):
        st = random_bound_state(rng)
        back = from_spherical(to_spherical(st))
        np.testing.assert_allclose(back.as_array(), st.as_array(), atol=1e-12)
    with pytest.raises(AxisChartError):
        to_spherical(PhasePoint((0, 0, 1), (1, 0, 0)))


def test_actions_match_invariants(rng):
    for _ in range(50):
        st = random_bound_state(rng)
        inv = invariants(st)
        d = delaunay_actions(to_spherical(st))
        assert d.p_l == pytest.approx(1 / math.sqrt(-2 * inv.E), rel=1e-12)
        assert d.p_g == pytest.approx(np.linalg.norm(inv.L), rel=1e-12)
        assert d.p_theta == pytest.approx(inv.L[2], abs=1e-12)
        assert lrl_action(to_spherical(st)) == pytest.approx(inv.A[2], abs=1e-12)
    with pytest.raises(UnboundStateError):
        delaunay_actions(to_spherical(PhasePoint((1, 0, 0.2), (0, 2, 0))))


def test_analytic_jacobians_match_differences(rng):
    for _ in range(30):
        _, sp = _inclined(rng)
        np.testing.assert_allclose(delaunay_jacobian(sp).matrix, _fd_jacobian(_delaunay_vec, sp), atol=1e-7)
        np.testing.assert_allclose(lrl_jacobian(sp).matrix, _fd_jacobian(_lrl_vec, sp), atol=1e-7)


def test_case1_full_rank(rng):
    for _ in range(100):
        st, sp = _inclined(rng)
        rep = delaunay_jacobian(sp)
        assert rep.case == "case1"
        assert rep.full_rank


def test_case2_bracket_identity():
    # on a circular inclined orbit the (1,1) bracket equals 1/r - p_r^2 + 2E, which vanishes
    for r, incl in ((1.3, 0.7), (0.6, 1.1), (2.0, 0.3)):
        st = _circular_inclined(r, incl)
        rep = delaunay_jacobian(to_spherical(st))
        assert rep.case == "case2"
        assert rep.bracket == pytest.approx(rep.bracket_identity, abs=1e-12)
        assert abs(rep.bracket) < 1e-12
        assert rep.claimed == pytest.approx(2 / r)
        assert rep.rank == 2


def test_planar_cases():
    st = PhasePoint((1.0, 0.2, 0.0), (0.1, 1.1, 0.0))
    assert orbit_case(st) == "case3"
    sp = to_spherical(st)
    assert lrl_jacobian(sp).rank == 3
    assert delaunay_jacobian(sp).rank == 2
    with pytest.raises(VerticalOrbitError):
        delaunay_jacobian(to_spherical(PhasePoint((1.0, 0.0, 0.3), (0.0, 0.0, 0.9))))


def test_return_map():
    Psi, p_l = delaunay_return_map(8, 1)
    assert p_l == 0.5
    assert Psi[0, 3] == -96 * math.pi
    rep = morse_bott_test(8, 1)
    assert rep.displacement == 12 * math.pi
    assert rep
    for k in range(1, 51):
        rep = morse_bott_test(k, 1)
        assert rep.displacement == pytest.approx(6 * math.pi * k * rep.p_l**2, rel=1e-14)
        assert rep.displacement != 0
    with pytest.raises(ValueError):
        delaunay_return_map(4, 2)
