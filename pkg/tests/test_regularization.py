import math

import numpy as np
import pytest

from kepler_cz.core import Hamiltonian, IntegratorConfig, PhasePoint, SphereCotangent, flow, hamiltonian_value
from kepler_cz.errors import DomainError, NorthPoleError
from kepler_cz.regularization import (
    collision_orbit,
    effective_potential,
    hill_classify,
    ray_gap,
    regularize,
    scaling_map,
    stereo_lift,
    stereo_project,
    switch_map,
    unregularize,
)
from kepler_cz.verification import random_bound_state

TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-12)


def test_project_example():
    sc = SphereCotangent((-1, 0, 0, 0), (0, 0, 0, 1))
    a, b = stereo_project(1.0, sc)
    np.testing.assert_allclose(a, [0, 0, 0])
    np.testing.assert_allclose(b, [0, 0, 2])


def test_lift_example():
    sc = stereo_lift(1.0, (0, 0, 0), (0, 0, 2))
    np.testing.assert_allclose(sc.x, [-1, 0, 0, 0])
    np.testing.assert_allclose(sc.y, [0, 0, 0, 1])


def test_north_pole():
    with pytest.raises(NorthPoleError):
        stereo_project(1.0, SphereCotangent((1, 0, 0, 0), (0, 1, 0, 0)))


def test_round_trips_and_relations(rng):
    for _ in range(200):
        r = rng.uniform(0.3, 3.0)
        p, q = rng.normal(size=3), rng.normal(size=3)
        sc = stereo_lift(r, p, q)
        assert abs(np.linalg.norm(sc.x) - r) < 1e-12 * r
        assert abs(sc.x @ sc.y) < 1e-12 * max(1, np.linalg.norm(sc.y))
        p2, q2 = stereo_project(r, sc)
        np.testing.assert_allclose(p2, p, atol=1e-12 * max(1, np.linalg.norm(p)))
        np.testing.assert_allclose(q2, q, atol=1e-12 * max(1, np.linalg.norm(q)))
        x0, ny, pp = sc.x[0], np.linalg.norm(sc.y), p @ p
        assert r - x0 == pytest.approx(2 * r**3 / (pp + r * r), rel=1e-12)
        assert pp == pytest.approx(2 * r**3 / (r - x0) - r * r, rel=1e-10, abs=1e-12)
        assert ny**2 == pytest.approx((pp + r * r) ** 2 / (4 * r**4) * (q @ q), rel=1e-12)
        assert np.linalg.norm(q) == pytest.approx((r - x0) / r * ny, rel=1e-12)


def test_lift_then_project_from_sphere(rng):
    for _ in range(20):
        r = rng.uniform(0.5, 2)
        x = rng.normal(size=4)
        x *= r / np.linalg.norm(x)
        y = rng.normal(size=4)
        y -= (x @ y) / (r * r) * x
        sc = SphereCotangent(x, y, r)
        back = stereo_lift(r, *stereo_project(r, sc))
        np.testing.assert_allclose(back.as_array(), sc.as_array(), atol=1e-11)


def test_switch_map():
    a, b = switch_map((1, 2, 3), (4, 5, 6))
    np.testing.assert_array_equal(a, [4, 5, 6])
    np.testing.assert_array_equal(b, [-1, -2, -3])
    a2, b2 = switch_map(a, b)
    np.testing.assert_array_equal(a2, [-1, -2, -3])
    np.testing.assert_array_equal(b2, [-4, -5, -6])
    Jac = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
    Om = Jac  # same matrix in the (q, p) ordering
    assert np.array_equal(Jac.T @ Om @ Jac, Om)


def test_scaling_map():
    sc = SphereCotangent((0, 1, 0, 0), (0, 0, 1, 0))
    big = scaling_map(2.0, sc)
    assert np.linalg.norm(big.x) == pytest.approx(2)
    assert np.linalg.norm(big.y) == pytest.approx(0.5)
    same = scaling_map(1.0, sc)
    np.testing.assert_array_equal(same.as_array(), sc.as_array())
    with pytest.raises(DomainError):
        scaling_map(2.0, big)


def test_kr_is_one_half_on_energy_level(rng):
    for _ in range(10):
        st = random_bound_state(rng)
        E = -0.5 * (2 / np.linalg.norm(st.q) - st.p @ st.p)
        r = math.sqrt(-2 * E)
        sc = regularize(st, r)
        assert hamiltonian_value(Hamiltonian.moser_kr(r), sc) == pytest.approx(0.5, abs=1e-12)
        back = unregularize(sc, r)
        np.testing.assert_allclose(back.as_array(), st.as_array(), atol=1e-12)


def test_kc_is_one_half_on_jacobi_level(rng):
    from kepler_cz.core import ROTATING_H

    for _ in range(10):
        st = random_bound_state(rng)
        c = hamiltonian_value(ROTATING_H, st)
        if c >= 0:
            continue
        r = math.sqrt(-2 * c)
        assert hamiltonian_value(Hamiltonian.moser_kc(c), regularize(st, r)) == pytest.approx(0.5, abs=1e-12)


def test_collision_orbit_examples():
    sc, flat = collision_orbit(1.0, "-", 0.0)
    np.testing.assert_allclose(sc.x, [-1, 0, 0, 0])
    np.testing.assert_allclose(sc.y, [0, 0, 0, -1])
    np.testing.assert_allclose(flat.q, [0, 0, 2])
    sc, flat = collision_orbit(1.0, "-", math.pi)
    assert flat is None


@pytest.mark.parametrize("sign", ["+", "-"])
def test_collision_orbit_solves_reduced_system(sign):
    r = 1.3
    h = 1e-6
    for t in np.linspace(0, 2 * math.pi / r, 9):
        x, y = collision_orbit(r, sign, t)[0].x, collision_orbit(r, sign, t)[0].y
        xp, yp = collision_orbit(r, sign, t + h)[0].x, collision_orbit(r, sign, t + h)[0].y
        xm, ym = collision_orbit(r, sign, t - h)[0].x, collision_orbit(r, sign, t - h)[0].y
        dx, dy = (xp - xm) / (2 * h), (yp - ym) / (2 * h)
        np.testing.assert_allclose([dx[0], dx[3], dy[0], dy[3]], [r * r * y[0], r * r * y[3], -x[0], -x[3]], atol=1e-8)


def test_collision_height_and_flow():
    for r in (1.0, 1.7):
        for t in (0.0, 0.5, 1.3):
            _, flat = collision_orbit(r, "-", t)
            assert flat.q[2] == pytest.approx((1 + math.cos(r * t)) / r**2, abs=1e-15)
        sc0, _ = collision_orbit(r, "-", 0.0)
        T = 2 * math.pi / r
        out = flow(Hamiltonian.moser_kr(r), sc0, T, TIGHT)
        np.testing.assert_allclose(out.as_array(), collision_orbit(r, "-", T)[0].as_array(), atol=1e-9)


def test_collision_flat_image_is_kepler_motion():
    r = 1.4
    for t in (0.3, 1.0, 1.8):
        _, flat = collision_orbit(r, "+", t)
        E = 0.5 * flat.p @ flat.p - 1 / np.linalg.norm(flat.q)
        assert E == pytest.approx(-r * r / 2, rel=1e-12)
        assert flat.q[2] < 0


def test_effective_potential_and_hill():
    assert effective_potential((0.1, 0, 0)) == pytest.approx(-10.005)
    assert effective_potential((10, 0, 0)) == pytest.approx(-50.1)
    assert hill_classify(-2, (0.1, 0, 0)).tag == "bounded-component"
    assert hill_classify(-2, (10, 0, 0)).tag == "unbounded-component"
    assert hill_classify(-2, (1, 0, 0)).tag == "forbidden"
    assert hill_classify(-1.0, (1, 0, 0)).tag == "single-component"
    with pytest.raises(DomainError):
        effective_potential((0, 0, 0))


def test_critical_energy_boundary():
    assert ray_gap(-1.5 - 1e-6, (1, 0, 0)) is not None
    assert ray_gap(-1.5 + 1e-6, (1, 0, 0)) is None
    s1, s2 = ray_gap(-2.0, (1, 0, 0))
    for s in (s1, s2):
        assert effective_potential((s, 0, 0)) == pytest.approx(-2.0, abs=1e-9)


def test_hill_tag_consistent_with_potential(rng):
    for _ in range(200):
        c = rng.uniform(-3, -0.5)
        q = rng.normal(size=3) * rng.uniform(0.1, 3)
        tag = hill_classify(c, q).tag
        assert (tag == "forbidden") == (effective_potential(q) > c)
