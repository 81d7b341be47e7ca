import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gibbslab.errors import ConfigError, ConvergenceError
from gibbslab.hypgeom import (
    MobiusMap,
    ProjPoint,
    UnitTangent,
    boundary,
    boundary_from_angle,
    busemann,
    busemann_closed,
    canonical_form,
    chordal,
    geodesic_point,
    hdist,
    hdist_array,
    mobius_apply,
    parabolic_fixing,
)

from .strategies import angles, boundary_points, points, tangents


def disk_distance(z, w):
    # independent formula: 2 artanh |(z - w)/(z - conj w)|
    return 2 * math.atanh(abs((z - w) / (z - w.conjugate())))


def random_sl2r(rng):
    M = rng.normal(size=(2, 2))
    if np.linalg.det(M) < 0:
        M[:, 0] *= -1
    return M / math.sqrt(np.linalg.det(M))


# --- distance -------------------------------------------------------------


def test_hdist_frozen_values():
    assert hdist(1j, 2j) == pytest.approx(math.log(2), abs=1e-15)
    assert hdist(1j, math.exp(5) * 1j) == pytest.approx(5.0, abs=1e-13)
    assert hdist(1j, 1 + 1j) == pytest.approx(2 * math.asinh(0.5), abs=1e-15)


@given(points(), points())
def test_hdist_matches_disk_formula(z, w):
    if z == w:
        return
    d = hdist(z, w)
    assert abs(d - disk_distance(z, w)) <= 1e-9 * max(1.0, d)


@given(points(), points(), points())
def test_triangle_inequality_and_symmetry(x, y, z):
    assert hdist(x, y) == pytest.approx(hdist(y, x), abs=1e-12)
    assert hdist(x, z) <= hdist(x, y) + hdist(y, z) + 1e-10


@given(points(), points(), st.integers(0, 10**6))
def test_hdist_isometry_invariance(z, w, seed):
    M = random_sl2r(np.random.default_rng(seed))
    assert hdist(mobius_apply(M, z), mobius_apply(M, w)) == pytest.approx(hdist(z, w), abs=1e-8)


def test_hdist_array_and_rejects_boundary():
    z = np.array([1j, 2j])
    assert np.allclose(hdist_array(z, 1j), [0, math.log(2)])
    with pytest.raises(ConfigError):
        hdist(1.0, 1j)


# --- Busemann ---------------------------------------------------------------


def test_busemann_at_infinity_frozen():
    assert busemann(ProjPoint.infinity(), 1j, 1j * math.e) == pytest.approx(-1.0, abs=1e-9)
    # beta_inf(y, z) = log(Im y / Im z)
    assert busemann(ProjPoint.infinity(), 3 + 2j, -1 + 0.5j) == pytest.approx(math.log(4), abs=1e-9)


@given(boundary_points(), points(), st.floats(0.1, 8))
def test_busemann_along_the_ray_is_minus_distance(xi, y, s):
    z = geodesic_point(y, xi, s)
    assert busemann(xi, y, z) == pytest.approx(-s, abs=1e-8)


@given(boundary_points(), points(), points())
def test_busemann_limit_matches_closed_form(xi, y, z):
    assert busemann(xi, y, z) == pytest.approx(float(busemann_closed(xi, y, z)), abs=1e-8)


@given(boundary_points(), points(), points(), points())
def test_busemann_cocycle(xi, x, y, z):
    assert abs(busemann(xi, x, y) + busemann(xi, y, z) - busemann(xi, x, z)) < 1e-8


@given(boundary_points(), points(), points())
def test_busemann_antisymmetric_and_lipschitz(xi, y, z):
    b = busemann(xi, y, z)
    assert busemann(xi, z, y) == pytest.approx(-b, abs=1e-9)
    assert abs(b) <= hdist(y, z) + 1e-9


def test_busemann_errors():
    with pytest.raises(ConfigError):
        busemann(ProjPoint(1j), 1j, 2j)
    with pytest.raises(ConvergenceError, match="tol"):
        busemann(boundary(0.3), 1j, 5 + 1j, tol=1e-30, t_cap=10)


@given(boundary_points(), points(), st.floats(-3, 3))
def test_horocycle_map_keeps_busemann_zero(xi, z, s):
    w = parabolic_fixing(xi, s)(z)
    assert abs(busemann(xi, z, w)) < 1e-8


# --- geodesics ----------------------------------------------------------------


@given(points(), points(), st.floats(0, 1))
def test_geodesic_point_between(z1, z2, frac):
    L = hdist(z1, z2)
    if L < 1e-6:
        return
    p = geodesic_point(z1, z2, frac * L)
    assert hdist(z1, p) == pytest.approx(frac * L, abs=1e-8)
    assert hdist(p, z2) == pytest.approx((1 - frac) * L, abs=1e-8)


def test_geodesic_point_toward_infinity():
    assert geodesic_point(2 + 1j, ProjPoint.infinity(), 3.0) == pytest.approx(2 + math.exp(3) * 1j)
    assert geodesic_point(1j, boundary(0.0), math.log(4)) == pytest.approx(0.25j)


# --- projective points --------------------------------------------------------


def test_chordal_frozen():
    assert ProjPoint(0).chordal(ProjPoint.infinity()) == pytest.approx(1.0)
    assert ProjPoint(1).chordal(ProjPoint(-1)) == pytest.approx(1.0)
    assert ProjPoint(1).chordal(ProjPoint(1j)) == pytest.approx(math.sqrt(0.5))


@given(angles, angles)
def test_chordal_on_circle_is_half_angle_sine(a, b):
    d = boundary_from_angle(a).chordal(boundary_from_angle(b))
    assert d == pytest.approx(abs(math.sin((a - b) / 2)), abs=1e-12)


@given(angles)
def test_boundary_angle_round_trip(a):
    p = boundary_from_angle(a)
    assert p.is_real()
    assert min(abs(p.angle - a), 2 * math.pi - abs(p.angle - a)) < 1e-12


def test_points_near_infinity_use_homogeneous_coordinates():
    far = ProjPoint.from_chart(1e12)
    assert far.chordal(ProjPoint.infinity()) == pytest.approx(1e-12, rel=1e-6)
    assert ProjPoint.from_chart(complex("inf")) == ProjPoint.infinity()
    assert math.isinf(ProjPoint.infinity().chart().real)
    assert boundary(math.inf) == ProjPoint(1, 0)


def test_chordal_keeps_small_distances():
    u = np.array([1.0, 0.0])
    v = np.array([1.0, 1e-12])
    assert float(chordal(u, v)) == pytest.approx(1e-12, rel=1e-6)


def test_projpoint_rejects_zero():
    with pytest.raises(ConfigError):
        ProjPoint(0, 0)


# --- Mobius maps --------------------------------------------------------------


def test_mobius_composition_and_inverse(rng):
    A, B = MobiusMap(random_sl2r(rng)), MobiusMap(random_sl2r(rng))
    z = 0.3 + 0.9j
    assert (A @ B)(z) == pytest.approx(A(B(z)))
    assert A.inverse()(A(z)) == pytest.approx(z)
    assert A @ A.inverse() == MobiusMap.identity()


def test_mobius_equality_up_to_sign(rng):
    M = random_sl2r(rng)
    assert MobiusMap(M) == MobiusMap(-M)
    assert np.allclose(canonical_form(np.array([M, -M]))[0], canonical_form(np.array([M, -M]))[1])


def test_mobius_normalises_determinant():
    m = MobiusMap([[2, 0], [0, 2]])
    assert m.det == pytest.approx(1)
    with pytest.raises(ConfigError):
        MobiusMap([[1, 2], [2, 4]])


def test_mobius_acts_on_projpoints():
    m = MobiusMap([[0, -1], [1, 0]])
    assert m(ProjPoint(0)) == ProjPoint.infinity()
    assert m(ProjPoint.infinity()) == ProjPoint(0)


# --- unit tangent bundle --------------------------------------------------------


@given(points(), angles)
def test_base_angle_round_trip(z, a):
    v = UnitTangent.from_base_angle(z, a)
    assert v.base == pytest.approx(z, abs=1e-10 * max(1, abs(z)))
    da = abs(v.angle - a)
    assert min(da, 2 * math.pi - da) < 1e-9


@given(tangents())
def test_hopf_round_trip(v):
    xm, xp, t = v.hopf
    w = UnitTangent.from_hopf(xm, xp, t)
    assert hdist(w.base, v.base) < 1e-8
    assert np.allclose(w.frame, v.frame, atol=1e-8) or np.allclose(w.frame, -v.frame, atol=1e-8)


@given(tangents(), st.floats(-5, 5))
def test_flow_moves_along_geodesic(v, t):
    w = v.flow(t)
    assert hdist(v.base, w.base) == pytest.approx(abs(t), abs=1e-8)
    xm, xp, s = v.hopf
    xm2, xp2, s2 = w.hopf
    assert xm.chordal(xm2) < 1e-9 and xp.chordal(xp2) < 1e-9
    assert s2 == pytest.approx(s + t, abs=1e-8)
    if t > 0:
        assert geodesic_point(v.base, xp, t) == pytest.approx(w.base, abs=1e-8 * max(1, abs(w.base)))


@given(tangents(), st.integers(0, 10**6))
def test_push_is_equivariant(v, seed):
    M = random_sl2r(np.random.default_rng(seed))
    g = MobiusMap(M)
    w = v.push(g)
    assert hdist(w.base, g(v.base)) < 1e-7
    xm, xp, _ = v.hopf
    ym, yp, _ = w.hopf
    assert ym.chordal(g(xm)) < 1e-9 and yp.chordal(g(xp)) < 1e-9


def test_vertical_vector_at_i():
    v = UnitTangent.from_base_angle(1j, math.pi / 2)
    xm, xp, t = v.hopf
    assert xp == ProjPoint.infinity() and xm == ProjPoint(0) and t == pytest.approx(0, abs=1e-14)
    with pytest.raises(ConfigError):
        UnitTangent.from_hopf(ProjPoint(0), ProjPoint(0), 0.0)
