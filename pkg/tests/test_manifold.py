import math

import numpy as np
import pytest

from rieszlab import (DomainError, InputError, ball_volume,
                      euclidean_ball_volume, exp_map, flat_torus,
                      geodesic_distance, log_map, make_manifold,
                      sample_uniform, sphere)
from rieszlab.rng import stream
from oracles import grid_torus_ball_volume

ALL_MANIFOLDS = [sphere(1), sphere(2), sphere(3), flat_torus(1), flat_torus(2), flat_torus(3)]


# ----------------------------------------------------------------------
# distances
# ----------------------------------------------------------------------

def test_sphere_orthogonal_distance():
    m = sphere(2)
    x = m.point([1.0, 0.0, 0.0])
    y = m.point([0.0, 1.0, 0.0])
    assert geodesic_distance(m, x, y) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_distance_zero_on_identical(m):
    x = m.point(m._sample(stream(3, "t"), 1)[0])
    assert geodesic_distance(m, x, x) == 0.0


def test_torus_wraparound_distance():
    m = flat_torus(1)
    assert geodesic_distance(m, m.point([0.1]), m.point([0.9])) == pytest.approx(0.2, abs=1e-15)


def test_distance_rejects_bad_points():
    m = sphere(2)
    with pytest.raises(InputError):
        m.point([1.0, 0.0])
    with pytest.raises(InputError):
        m.point([math.nan, 0.0, 0.0])
    with pytest.raises(InputError):
        m.point([5.0, 0.0, 0.0])


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_triangle_inequality(m):
    rng = stream(11, "triangle")
    pts = m._sample(rng, 3000)
    for k in range(1000):
        x, y, z = pts[3 * k], pts[3 * k + 1], pts[3 * k + 2]
        dxz = m.distances_from(x, z[None, :])[0]
        dxy = m.distances_from(x, y[None, :])[0]
        dyz = m.distances_from(y, z[None, :])[0]
        assert dxz <= dxy + dyz + 1e-12


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_distance_symmetry_and_range(m):
    rng = stream(12, "symmetry")
    a = m._sample(rng, 64)
    b = m._sample(rng, 64)
    dab = m.pairwise_block(a, b)
    dba = m.pairwise_block(b, a)
    assert np.allclose(dab, dba.T, atol=1e-14)
    assert np.all(dab >= 0.0)
    assert np.all(dab <= m.diameter + 1e-12)


# ----------------------------------------------------------------------
# ball volumes
# ----------------------------------------------------------------------

def test_sphere2_whole_manifold():
    assert ball_volume(sphere(2), math.pi) == 1.0


def test_sphere2_cap_third():
    assert ball_volume(sphere(2), math.pi / 3) == pytest.approx(0.25, abs=1e-12)


def test_torus2_small_disc():
    assert ball_volume(flat_torus(2), 0.25) == math.pi * 0.0625


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_ball_volume_one_at_diameter(m):
    assert ball_volume(m, m.diameter) == 1.0
    assert ball_volume(m, m.diameter * 2) == 1.0


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_ball_volume_monotone(m):
    radii = np.linspace(1e-6, m.diameter, 1000)
    v = ball_volume(m, radii)
    assert np.all(np.diff(v) >= -1e-15)
    assert np.all((v >= 0) & (v <= 1))


def test_sphere2_closed_form_grid():
    m = sphere(2)
    radii = np.linspace(0.0, math.pi, 1000)
    v = ball_volume(m, radii)
    assert np.max(np.abs(v - (1 - np.cos(radii)) / 2)) <= 1e-10


@pytest.mark.parametrize("d", [1, 2, 3])
def test_torus_flat_volume_exact_below_half(d):
    m = flat_torus(d)
    radii = np.linspace(0.01, 0.5, 50)
    assert np.array_equal(ball_volume(m, radii), euclidean_ball_volume(d, radii))


@pytest.mark.parametrize("d", [2, 3])
def test_torus_large_radius_against_grid_oracle(d):
    m = flat_torus(d)
    vol = grid_torus_ball_volume(d, cells=256 if d == 2 else 96)
    for r in np.linspace(0.51, m.diameter - 0.01, 7):
        assert ball_volume(m, r) == pytest.approx(vol(r), abs=2e-3)


def test_torus_large_radius_unsupported_dimension():
    with pytest.raises(InputError):
        ball_volume(flat_torus(4), 0.75)


def test_sphere3_zonal_quadrature_matches_reference():
    # independent reference: quad of sin^2 on (0, r) over its value on (0, pi)
    from scipy.integrate import quad
    m = sphere(3)
    for r in (0.3, 1.0, 2.0, 3.0):
        num = quad(lambda t: math.sin(t) ** 2, 0, r)[0]
        den = quad(lambda t: math.sin(t) ** 2, 0, math.pi)[0]
        assert ball_volume(m, r) == pytest.approx(num / den, abs=1e-10)


def test_negative_radius_rejected():
    with pytest.raises(InputError):
        ball_volume(sphere(2), -0.1)


def test_euclidean_ball_volumes():
    assert euclidean_ball_volume(1, 3.0) == pytest.approx(6.0, abs=1e-14)
    assert euclidean_ball_volume(2, 1.0) == pytest.approx(math.pi, abs=1e-14)
    assert euclidean_ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3, abs=1e-12)
    with pytest.raises(InputError):
        euclidean_ball_volume(0, 1.0)
    with pytest.raises(InputError):
        euclidean_ball_volume(2, -1.0)


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------

def test_sampling_deterministic():
    m = sphere(2)
    a = sample_uniform(m, 7, 3)
    b = sample_uniform(m, 7, 3)
    assert np.array_equal(a.coords, b.coords)
    c = sample_uniform(m, 8, 3)
    assert not np.array_equal(a.coords, c.coords)


def test_sampling_rejects_zero():
    with pytest.raises(InputError):
        sample_uniform(sphere(2), 1, 0)


def test_sphere_sample_mean_near_zero():
    X = sample_uniform(sphere(2), 1, 10_000)
    mean = X.coords.mean(axis=0)
    # component std is ~ 1/sqrt(3n)
    assert np.all(np.abs(mean) <= 3.0 / math.sqrt(3 * 10_000))


def test_torus_sample_ball_fraction():
    m = flat_torus(2)
    X = sample_uniform(m, 1, 10_000)
    o = m.origin()
    r = 0.25
    frac = np.count_nonzero(m.distances_from(o.coords, X.coords) <= r) / X.n
    v = ball_volume(m, r)
    assert abs(frac - v) <= 3.0 * math.sqrt(v * (1 - v) / X.n)


@pytest.mark.parametrize("m,r", [
    (sphere(1), 1.0),
    (sphere(2), 1.0),
    (flat_torus(2), 0.6),   # wrapped-ball branch
    (flat_torus(3), 0.8),   # edge-overlap branch
])
def test_monte_carlo_volume_consistency(m, r):
    n = 100_000
    X = sample_uniform(m, 5, n)
    frac = np.count_nonzero(m.distances_from(m.origin().coords, X.coords) <= r) / n
    v = ball_volume(m, r)
    assert abs(frac - v) <= 4.0 * math.sqrt(v * (1 - v) / n)


# ----------------------------------------------------------------------
# exp / log maps
# ----------------------------------------------------------------------

def test_exp_quarter_great_circle():
    m = sphere(2)
    base = m.point([1.0, 0.0, 0.0])
    v = m.tangent(base, [0.0, math.pi / 2, 0.0])
    out = exp_map(m, v)
    assert np.allclose(out.coords, [0.0, 1.0, 0.0], atol=1e-15)


def test_exp_torus_wrap():
    m = flat_torus(1)
    base = m.point([0.9])
    out = exp_map(m, m.tangent(base, [0.3]))
    assert out.coords[0] == pytest.approx(0.2, abs=1e-15)


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_exp_zero_vector_is_identity(m):
    x = m.point(m._sample(stream(4, "exp0"), 1)[0])
    out = exp_map(m, m.tangent(x, np.zeros(m.ambient_dim)))
    assert np.allclose(out.coords, x.coords, atol=1e-15)


def test_exp_rejects_nonfinite():
    m = sphere(2)
    base = m.point([1.0, 0.0, 0.0])
    with pytest.raises(InputError):
        m.tangent(base, [math.inf, 0.0, 0.0])


def test_log_shorter_arc_torus():
    m = flat_torus(1)
    v = log_map(m, m.point([0.2]), m.point([0.1]))
    assert v.components[0] == pytest.approx(-0.1, abs=1e-15)


def test_log_inverse_of_exp_example():
    m = sphere(2)
    v = log_map(m, m.point([1.0, 0.0, 0.0]), m.point([0.0, 1.0, 0.0]))
    assert np.allclose(v.components, [0.0, math.pi / 2, 0.0], atol=1e-12)


@pytest.mark.parametrize("m", ALL_MANIFOLDS)
def test_log_exp_roundtrip(m):
    rng = stream(9, "roundtrip")
    for _ in range(50):
        x = m.point(m._sample(rng, 1)[0])
        raw = rng.standard_normal(m.ambient_dim)
        v = m._project_tangent(x.coords, raw)
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        v = v / norm * (0.3 * m.injectivity_radius * rng.random())
        tv = m.tangent(x, v)
        y = exp_map(m, tv)
        back = log_map(m, x, y)
        assert np.allclose(back.components, tv.components, atol=1e-10)
        assert back.norm() == pytest.approx(geodesic_distance(m, x, y), abs=1e-12)


def test_log_identical_points_zero_vector():
    m = sphere(2)
    x = m.point([0.0, 0.0, 1.0])
    assert log_map(m, x, x).norm() == 0.0


def test_log_cut_locus_errors():
    m = sphere(2)
    with pytest.raises(DomainError):
        log_map(m, m.point([1.0, 0.0, 0.0]), m.point([-1.0, 0.0, 0.0]))
    t = flat_torus(1)
    with pytest.raises(DomainError):
        log_map(t, t.point([0.0]), t.point([0.5]))


# ----------------------------------------------------------------------
# construction / metadata
# ----------------------------------------------------------------------

def test_manifold_metadata():
    s2, t3 = sphere(2), flat_torus(3)
    assert s2.diameter == math.pi and s2.injectivity_radius == math.pi
    assert s2.total_volume == pytest.approx(4 * math.pi, abs=1e-12)
    assert t3.diameter == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert t3.injectivity_radius == 0.5
    assert t3.total_volume == 1.0
    for m in ALL_MANIFOLDS:
        assert m.injectivity_radius <= m.diameter + 1e-15
        assert m.dim >= 1


def test_make_manifold_names():
    assert make_manifold("sphere", 2) == sphere(2)
    assert make_manifold("torus", 2) == flat_torus(2)
    assert make_manifold("flat-torus", 1) == flat_torus(1)
    with pytest.raises(InputError):
        make_manifold("klein", 2)
    with pytest.raises(InputError):
        make_manifold("sphere", 0)


def test_point_wrapping_and_renormalization():
    t = flat_torus(2)
    p = t.point([1.25, -0.5])
    assert np.allclose(p.coords, [0.25, 0.5], atol=1e-15)
    s = sphere(2)
    p = s.point(np.array([1.0 + 1e-13, 0.0, 0.0]))
    assert np.linalg.norm(p.coords) == pytest.approx(1.0, abs=1e-12)
