import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geodec.manifolds import SPD, GeodesicBall, Hyperboloid, InvalidInput, zeta
from oracles import zeta_mp

MANIFOLDS = [Hyperboloid(2), Hyperboloid(4), SPD(2), SPD(3)]
ids = [repr(M) for M in MANIFOLDS]


def test_zeta_is_one_at_zero():
    assert zeta(-1.0, 0.0) == 1.0


def test_zeta_known_value():
    assert zeta(-4.0, 1.0) == pytest.approx(2.0 / math.tanh(2.0), rel=1e-15)
    assert zeta(-4.0, 1.0) == pytest.approx(2.07463, abs=1e-5)


@given(
    kappa=st.floats(-10.0, -1e-3),
    c=st.floats(0.0, 50.0),
)
def test_zeta_matches_high_precision(kappa, c):
    assert zeta(kappa, c) == pytest.approx(zeta_mp(kappa, c), rel=1e-13)


@given(kappa=st.floats(-10.0, -1e-3), c1=st.floats(0.0, 30.0), c2=st.floats(0.0, 30.0))
def test_zeta_monotone_in_c(kappa, c1, c2):
    lo, hi = sorted((c1, c2))
    assert zeta(kappa, lo) <= zeta(kappa, hi) + 1e-15


def test_zeta_series_branch_is_continuous_at_cutoff():
    below = zeta(-1.0, 1e-4 * (1 - 1e-9))
    above = zeta(-1.0, 1e-4 * (1 + 1e-9))
    assert abs(below - above) < 1e-14


@pytest.mark.parametrize("kappa,c", [(0.0, 1.0), (1.0, 1.0), (-1.0, -0.5)])
def test_zeta_rejects_bad_arguments(kappa, c):
    with pytest.raises(InvalidInput):
        zeta(kappa, c)


@pytest.mark.parametrize("radius", [0.0, -1.0, float("nan"), float("inf")])
def test_ball_rejects_bad_radius(radius):
    with pytest.raises(InvalidInput):
        GeodesicBall(np.array([1.0, 0.0, 0.0]), radius)


def test_ball_diameter_is_twice_radius():
    assert GeodesicBall(np.eye(3), 1.25).diameter == 2.5


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_exp_zero_returns_base_exactly(M, rng):
    x = M.random_point(rng, 1.0)
    np.testing.assert_array_equal(M.exp(x, M.zero_tangent(x)), x)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_log_of_same_point_is_zero(M, rng):
    x = M.random_point(rng, 1.0)
    assert float(M.norm(x, M.log(x, x))) < 1e-7


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_exp_moves_by_tangent_norm(M, rng):
    for _ in range(50):
        x = M.random_point(rng, 1.0)
        v = M.log(x, M.random_point(rng, 2.0))
        assert float(M.dist(x, M.exp(x, v))) == pytest.approx(float(M.norm(x, v)), abs=1e-8)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_log_norm_equals_distance(M, rng):
    for _ in range(50):
        x, y = M.random_point(rng, 1.5), M.random_point(rng, 1.5)
        assert float(M.norm(x, M.log(x, y))) == pytest.approx(float(M.dist(x, y)), abs=1e-8)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_distance_symmetric_and_triangle(M, rng):
    for _ in range(100):
        x, y, z = (M.random_point(rng, 1.5) for _ in range(3))
        assert float(M.dist(x, y)) == pytest.approx(float(M.dist(y, x)), abs=1e-10)
        assert M.dist(x, z) <= M.dist(x, y) + M.dist(y, z) + 1e-9


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_geodesic_point_endpoints_and_midpoint(M, rng):
    x, y = M.random_point(rng, 1.0), M.random_point(rng, 1.0)
    np.testing.assert_array_equal(M.geodesic_point(x, y, 0.0), x)
    np.testing.assert_array_equal(M.geodesic_point(x, y, 1.0), y)
    mid = M.geodesic_point(x, y, 0.5)
    d = float(M.dist(x, y))
    assert float(M.dist(x, mid)) == pytest.approx(d / 2, abs=1e-8)
    assert float(M.dist(mid, y)) == pytest.approx(d / 2, abs=1e-8)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
@pytest.mark.parametrize("t", [0.1, 0.37, 0.9])
def test_geodesic_point_distance_scales_linearly(M, t, rng):
    x, y = M.random_point(rng, 1.0), M.random_point(rng, 1.0)
    p = M.geodesic_point(x, y, t)
    assert float(M.dist(x, p)) == pytest.approx(t * float(M.dist(x, y)), abs=1e-8)


@pytest.mark.parametrize("t", [-0.01, 1.01, float("nan")])
def test_geodesic_point_rejects_t_outside_unit_interval(t):
    M = Hyperboloid(2)
    with pytest.raises(InvalidInput):
        M.geodesic_point(M.origin(), M.origin(), t)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_projection_is_identity_inside_ball(M, rng):
    ball = GeodesicBall(M.random_point(rng, 1.0), 2.0)
    for _ in range(20):
        z = M.exp_in_basis(ball.center, rng.normal(size=M.dim) * 0.3)
        if M.dist(ball.center, z) <= ball.radius:
            np.testing.assert_array_equal(M.project_ball(ball, z), z)


def test_projection_lands_on_geodesic_at_radius():
    M = Hyperboloid(2)
    ball = GeodesicBall(M.origin(), 1.0)
    z = M.exp(M.origin(), np.array([0.0, 2.0 * np.cos(0.3), 2.0 * np.sin(0.3)]))
    p = M.project_ball(ball, z)
    expected = M.exp(M.origin(), np.array([0.0, np.cos(0.3), np.sin(0.3)]))
    np.testing.assert_allclose(p, expected, atol=1e-12)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_projection_is_nonexpansive_and_lands_in_ball(M, rng):
    for _ in range(200):
        ball = GeodesicBall(M.random_point(rng, 1.0), rng.uniform(0.1, 2.0))
        u, w = M.random_point(rng, 2.5), M.random_point(rng, 2.5)
        pu, pw = M.project_ball(ball, u), M.project_ball(ball, w)
        assert M.dist(pu, pw) <= M.dist(u, w) + 1e-9
        assert M.dist(ball.center, pu) <= ball.radius + 1e-9


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_projection_batched_matches_single(M, rng):
    ball = GeodesicBall(M.random_point(rng, 1.0), 0.8)
    zs = np.stack([M.random_point(rng, 2.0) for _ in range(7)])
    batched = M.project_ball(ball, zs)
    for z, p in zip(zs, batched):
        np.testing.assert_allclose(M.project_ball(ball, z), p, atol=1e-14)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_exp_log_broadcast_over_batches(M, rng):
    x = np.stack([M.random_point(rng, 1.0) for _ in range(4)])
    y = np.stack([M.random_point(rng, 1.0) for _ in range(4)])
    v = M.log(x, y)
    for i in range(4):
        np.testing.assert_allclose(v[i], M.log(x[i], y[i]), atol=1e-12)
    np.testing.assert_allclose(M.exp(x, v), y, atol=1e-9)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_exp_rejects_non_finite(M):
    x = M.origin()
    v = np.full(M.point_shape, np.nan)
    with pytest.raises(InvalidInput):
        M.exp(x, v)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_tangent_basis_reconstructs_tangent_vectors(M, rng):
    x = M.random_point(rng, 1.0)
    basis = M.tangent_basis(x)
    v = M.log(x, M.random_point(rng, 1.0))
    coeffs = np.array([float(M.inner(x, e, v)) for e in basis])
    np.testing.assert_allclose(np.tensordot(coeffs, basis, axes=(0, 0)), v, atol=1e-9)


@pytest.mark.parametrize("M", MANIFOLDS, ids=ids)
def test_flatten_round_trip(M, rng):
    x = np.stack([M.random_point(rng, 1.0) for _ in range(3)])
    np.testing.assert_array_equal(M.unflatten(M.flatten(x)), x)
