import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbslab.errors import ConfigError
from gibbslab.group import GENERATORS, ball
from gibbslab.hypgeom import (
    ORIGIN,
    MobiusMap,
    ProjPoint,
    apply_real,
    boundary_from_angle,
    busemann,
    geodesic_point,
    hdist,
    parabolic_fixing,
)
from gibbslab.measures import uniform_circle
from gibbslab.potential import (
    Potential,
    bump_series,
    constant,
    delta_cocycle,
    delta_cocycle_many,
    estimate_pressure,
    f_harmonic_eval,
    geodesic_integral,
    gibbs_kernel,
    kappa,
    parse_potential,
    path_integral_direct,
    segment_integrals,
    zero,
)

from .strategies import angles, boundary_points, points

BUMP = bump_series(q=ORIGIN, r=0.8, A=0.5)
OFF_CENTRE = bump_series(q=0.3 + 1.4j, r=0.6, A=-0.7)


# --- pointwise values -----------------------------------------------------------


def test_bump_profile_frozen():
    assert BUMP(ORIGIN) == pytest.approx(0.5, abs=1e-15)
    z = geodesic_point(ORIGIN, 2j, 0.4)
    assert BUMP(z) == pytest.approx(0.5 * (1 - 0.25) ** 3, abs=1e-12)
    assert BUMP(geodesic_point(ORIGIN, 2j, 0.81)) == 0.0


@given(points(rmax=3.0), st.integers(0, 7), st.integers(0, 7))
def test_potential_is_group_invariant(z, i, j):
    w = apply_real(GENERATORS[i] @ GENERATORS[j], z)
    for F in (BUMP, OFF_CENTRE):
        assert F(w) == pytest.approx(F(z), abs=1e-9)


def test_constant_and_zero_values():
    assert zero()(0.2 + 3j) == 0.0
    assert constant(0.3)(5 + 0.1j) == 0.3
    assert BUMP.shifted(0.2)(ORIGIN) == pytest.approx(0.7)


# --- line integrals -------------------------------------------------------------


def test_radial_integral_closed_form():
    # int_0^r A (1 - (t/r)^2)^3 dt = 16/35 A r
    z = geodesic_point(ORIGIN, 5j, 1.5)
    assert geodesic_integral(BUMP, ORIGIN, z) == pytest.approx(16 / 35 * 0.5 * 0.8, abs=1e-10)
    w = geodesic_point(ORIGIN, 0.2j, 1.5)
    assert geodesic_integral(BUMP, w, z) == pytest.approx(32 / 35 * 0.5 * 0.8, abs=1e-8)


def test_constant_integral_is_length():
    z1, z2 = 0.3 + 0.5j, -2 + 4j
    assert geodesic_integral(constant(0.3), z1, z2) == pytest.approx(0.3 * hdist(z1, z2), rel=1e-14)


@settings(max_examples=15)
@given(points(rmax=4.0), points(rmax=4.0))
def test_windowed_integral_matches_direct_quadrature(z1, z2):
    for F in (BUMP, OFF_CENTRE):
        assert geodesic_integral(F, z1, z2) == pytest.approx(path_integral_direct(F, z1, z2, step=0.02), abs=2e-6)


@given(points(rmax=4.0), points(rmax=4.0), st.floats(0, 1))
def test_integral_additive_and_reversible(z1, z2, frac):
    if hdist(z1, z2) < 1e-9:
        return
    m = geodesic_point(z1, z2, frac * hdist(z1, z2))
    whole = geodesic_integral(OFF_CENTRE, z1, z2)
    assert geodesic_integral(OFF_CENTRE, z1, m) + geodesic_integral(OFF_CENTRE, m, z2) == pytest.approx(whole, abs=1e-7)
    assert geodesic_integral(OFF_CENTRE, z2, z1) == pytest.approx(whole, abs=1e-7)


@given(points(rmax=3.0), points(rmax=3.0), st.integers(0, 7))
def test_integral_group_invariant(z1, z2, k):
    g = GENERATORS[k]
    moved = geodesic_integral(BUMP, apply_real(g, z1), apply_real(g, z2))
    assert moved == pytest.approx(geodesic_integral(BUMP, z1, z2), abs=1e-7)


def test_segment_integrals_vectorised_shape():
    z1 = np.array([[1j, 2j], [0.5 + 1j, 3j]])
    out = segment_integrals(BUMP, z1, 1j)
    assert out.shape == (2, 2)
    assert out[0, 0] == 0.0
    assert kappa(BUMP, 1j, 1j) == 1.0


# --- Gibbs cocycle and kernel -------------------------------------------------


@given(boundary_points(), points(rmax=3.0), points(rmax=3.0))
def test_constant_potential_delta_is_exponential_busemann(xi, y, z):
    c = 0.3
    assert delta_cocycle(constant(c), y, z, xi) == pytest.approx(math.exp(c * busemann(xi, y, z)), rel=1e-7)


@settings(max_examples=15)
@given(boundary_points(), points(rmax=3.0), points(rmax=3.0), points(rmax=3.0))
def test_delta_cocycle_relation(xi, x, y, z):
    a, b, c = (delta_cocycle(BUMP, p, q, xi) for p, q in ((x, y), (y, z), (x, z)))
    assert a * b == pytest.approx(c, rel=1e-5)


@settings(max_examples=15)
@given(boundary_points(), points(rmax=3.0), points(rmax=3.0), st.integers(0, 7))
def test_delta_cocycle_group_equivariant(xi, y, z, k):
    g = MobiusMap(GENERATORS[k])
    moved = delta_cocycle(BUMP, g(y), g(z), g(xi))
    assert moved == pytest.approx(delta_cocycle(BUMP, y, z, xi), rel=1e-5)


@settings(max_examples=15)
@given(boundary_points(), points(rmax=3.0), st.floats(-2, 2))
def test_kernel_on_horocycle_equals_delta(xi, z, s):
    w = parabolic_fixing(xi, s)(z)
    d = delta_cocycle(BUMP, z, w, xi)
    assert gibbs_kernel(BUMP, z, w, xi, 1.0) == pytest.approx(d, rel=1e-7)


def test_delta_many_matches_single():
    angles_ = np.linspace(0, 2 * np.pi, 7, endpoint=False)
    U = np.array([boundary_from_angle(a).u for a in angles_])
    many = delta_cocycle_many(BUMP, 0.2 + 0.7j, -1 + 2j, U)
    one = [delta_cocycle(BUMP, 0.2 + 0.7j, -1 + 2j, boundary_from_angle(a)) for a in angles_]
    assert np.allclose(many, one, rtol=1e-9)


def test_delta_rejects_interior_point():
    with pytest.raises(ConfigError):
        delta_cocycle(BUMP, 1j, 2j, ProjPoint(1j))


@given(points(rmax=3.0))
def test_poisson_integral_of_uniform_measure_is_one(z):
    # zero potential, P = 1: the kernel integrates to one against the visual measure from i
    assert f_harmonic_eval(zero(), uniform_circle(4096), z, 1.0) == pytest.approx(1.0, rel=1e-6)


# --- pressure -------------------------------------------------------------------


def test_pressure_zero_near_one(B11):
    est = estimate_pressure(zero(), B11, (8, 11))
    assert abs(est.slope - 1) < 0.15
    assert est.radii == (8, 9, 10, 11)
    assert est.to_json()["samples"][0]["R"] == 8


def test_pressure_shifts_with_constant(B11):
    # exact only as R -> infinity; shells of finite width blur the shift slightly
    p0 = estimate_pressure(zero(), B11).slope
    for c in (-0.4, 0.3):
        assert estimate_pressure(constant(c), B11).slope == pytest.approx(p0 + c, abs=0.02)


def test_pressure_monotone_in_bump_amplitude(B11):
    vals = [estimate_pressure(bump_series(A=A), B11).slope for A in (-0.5, 0.0, 0.5)]
    assert vals[0] < vals[1] < vals[2]


def test_pressure_window_errors(B11):
    with pytest.raises(ConfigError, match="four"):
        estimate_pressure(zero(), B11, (9, 11))
    with pytest.raises(ConfigError, match="exceeds"):
        estimate_pressure(zero(), ball(9), (6, 10))


# --- parsing and validation -----------------------------------------------------


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("zero", zero()),
        ("const:0.3", constant(0.3)),
        ("bump:1j,0.8,0.5", bump_series()),
        ("bump:0.3+1.4j,0.6,-0.7", OFF_CENTRE),
    ],
)
def test_parse_potential(spec, expected):
    F = parse_potential(spec)
    assert F == expected
    assert parse_potential(F.spec()) == F


@pytest.mark.parametrize("spec", ["", "const:x", "bump:1j,0.8", "wave:1", "bump:1j,2.0,0.5", "bump:-1j,0.5,1"])
def test_parse_potential_rejects(spec):
    with pytest.raises(ConfigError):
        parse_potential(spec)


def test_potential_validation():
    with pytest.raises(ConfigError):
        Potential(constant=math.nan)
    with pytest.raises(ConfigError, match="distance 4"):
        bump_series(q=1000j)
    assert Potential(bump_radius=5.0).is_zero


@given(angles)
def test_lipschitz_bound_holds(a):
    z = geodesic_point(ORIGIN, boundary_from_angle(a), 0.3)
    w = geodesic_point(z, boundary_from_angle(a + 1), 0.05)
    assert abs(BUMP(z) - BUMP(w)) <= BUMP.lipschitz * hdist(z, w) + 1e-12
