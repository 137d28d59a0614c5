import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geodec.manifolds import Hyperboloid, InvalidInput, minkowski_form, to_poincare_disk
from geodec.manifolds.hyperbolic import acosh1p, from_poincare_disk, lift
from oracles import hyp_dist_mp, hyp_exp_mp, hyp_exp_reference, poincare_dist

H = Hyperboloid(2)
O = np.array([1.0, 0.0, 0.0])
P1 = np.array([np.cosh(1.0), np.sinh(1.0), 0.0])

spatial = arrays(np.float64, 2, elements=st.floats(-200.0, 200.0))


def test_minkowski_form_examples():
    assert minkowski_form(O, O) == -1.0
    assert minkowski_form(O, np.array([0.0, 1.0, 0.0])) == 0.0
    assert minkowski_form(P1, O) == pytest.approx(-np.cosh(1.0), rel=1e-15)


def test_minkowski_form_rejects_dimension_mismatch():
    with pytest.raises(InvalidInput):
        minkowski_form(np.zeros(3), np.zeros(4))


def test_exp_examples():
    np.testing.assert_allclose(H.exp(O, np.array([0.0, 1.0, 0.0])), P1, atol=1e-15)
    np.testing.assert_allclose(
        H.exp(O, np.array([0.0, 0.0, 2.0])), [np.cosh(2.0), 0.0, np.sinh(2.0)], rtol=1e-15
    )


def test_log_examples():
    np.testing.assert_allclose(H.log(O, P1), [0.0, 1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(H.log(O, np.array([np.cosh(2.0), 0.0, np.sinh(2.0)])), [0.0, 0.0, 2.0], atol=1e-14)


def test_distance_examples():
    assert H.dist(O, O) == 0.0
    assert H.dist(O, P1) == pytest.approx(1.0, abs=1e-15)


def test_poincare_examples():
    np.testing.assert_array_equal(to_poincare_disk(O), [0.0, 0.0])
    t = to_poincare_disk(P1)
    assert t[0] == pytest.approx(np.tanh(0.5), abs=1e-15)
    assert t[0] == pytest.approx(0.46212, abs=1e-5)
    assert t[1] == 0.0


@given(spatial)
def test_poincare_image_inside_unit_disk(s):
    t = to_poincare_disk(lift(s))
    assert np.sum(t * t) < 1.0 or np.isclose(np.sum(t * t), 1.0)


@given(arrays(np.float64, 2, elements=st.floats(-0.9, 0.9)))
def test_poincare_round_trip(p):
    if np.sum(p * p) >= 0.99:
        return
    np.testing.assert_allclose(to_poincare_disk(from_poincare_disk(p)), p, atol=1e-12)


@given(spatial, spatial)
def test_distance_matches_high_precision_oracle(a, b):
    x, y = lift(a), lift(b)
    ref = hyp_dist_mp(x, y)
    # a few ulps of the coordinates translate into ~1e-15 relative in cosh d
    assert float(H.dist(x, y)) == pytest.approx(ref, abs=1e-9, rel=1e-12)


@given(arrays(np.float64, 2, elements=st.floats(-3.0, 3.0)), arrays(np.float64, 2, elements=st.floats(-3.0, 3.0)))
def test_distance_matches_poincare_formula(a, b):
    x, y = lift(a), lift(b)
    assert float(H.dist(x, y)) == pytest.approx(poincare_dist(to_poincare_disk(x), to_poincare_disk(y)), abs=1e-8)


def test_distance_far_point_against_near_origin_point_is_accurate():
    # the configuration that defeats the chordal formula alone
    x = lift(np.array([0.04, -0.11]))
    y = lift(np.array([1.2e8, -7.5e7]))
    assert float(H.dist(x, y)) == pytest.approx(hyp_dist_mp(x, y), abs=1e-12)


def test_stable_acosh_for_nearby_points():
    x = lift(np.array([0.3, -0.2]))
    v = np.array([0.0, 1e-9, 2e-9])
    v = v + minkowski_form(x, v) * x
    y = H.exp(x, v)
    d = float(H.dist(x, y))
    assert d == pytest.approx(float(H.norm(x, H.log(x, y))), rel=1e-6)
    assert d == pytest.approx(float(H.norm(x, v)), rel=1e-6)
    assert acosh1p(np.array(0.0)) == 0.0


def test_distance_two_ways_agree_for_spread_pairs(rng):
    for _ in range(1000):
        x = H.random_point(rng, 2.0)
        v = H.log(x, H.random_point(rng, 2.0))
        v = v * (rng.uniform(0.0, 20.0) / max(float(H.norm(x, v)), 1e-12))
        y = H.exp(x, v)
        assert float(H.dist(x, y)) == pytest.approx(float(H.norm(x, H.log(x, y))), abs=1e-8)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_exp_matches_reference_formula(m, rng):
    M = Hyperboloid(m)
    # ambient coordinates lose about eps * x0^2 * e^d far out, so stay near the apex
    for _ in range(100):
        x = M.random_point(rng, 1.0)
        v = M.log(x, M.random_point(rng, 1.0))
        np.testing.assert_allclose(M.exp(x, v), hyp_exp_reference(x, v), rtol=1e-7)
        # a float tangent vector is tangent only to ~eps * |x| * |v|; exp amplifies that by cosh |v|
        tol = 1e-13 * x[0] ** 2 * np.cosh(float(M.norm(x, v)))
        assert hyp_dist_mp(M.exp(x, v), hyp_exp_mp(x, v)) < tol


@pytest.mark.parametrize("m", [1, 2, 5])
def test_round_trip_log_exp(m, rng):
    M = Hyperboloid(m)
    for _ in range(300):
        x = M.random_point(rng, 2.0)
        c = rng.normal(size=m)
        c *= rng.uniform(0, 5) / np.linalg.norm(c)
        v = np.tensordot(c, M.tangent_basis(x), axes=(0, 0))
        err = float(M.norm(x, M.log(x, M.exp(x, v)) - v))
        assert err <= 1e-7 * (1 + float(M.norm(x, v)))


@pytest.mark.parametrize("m", [1, 2, 3, 6])
def test_tangent_basis_is_orthonormal_and_tangent(m, rng):
    M = Hyperboloid(m)
    for _ in range(50):
        x = M.random_point(rng, 3.0)
        E = M.tangent_basis(x)
        gram = np.array([[minkowski_form(a, b) for b in E] for a in E])
        np.testing.assert_allclose(gram, np.eye(m), atol=1e-10 * max(1.0, x[0] ** 2))
        assert np.all(np.abs(minkowski_form(E, x)) <= 1e-10 * max(1.0, x[0] ** 2))


def test_tangent_basis_at_apex_is_standard():
    np.testing.assert_array_equal(H.tangent_basis(O), [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def test_exp_in_basis_matches_exp_of_combination(rng):
    for _ in range(50):
        x = H.random_point(rng, 2.0)
        c = rng.normal(size=2)
        v = np.tensordot(c, H.tangent_basis(x), axes=(0, 0))
        np.testing.assert_allclose(H.exp_in_basis(x, c), H.exp(x, v), rtol=1e-9, atol=1e-9)


def test_points_stay_on_hyperboloid_after_many_steps(rng):
    x = O
    for _ in range(5000):
        x = H.exp(x, 0.3 * H.log(x, H.random_point(rng, 3.0)))
    H.check_point(x, tol=1e-12)


def test_check_point_rejects_off_sheet_and_lower_sheet():
    with pytest.raises(InvalidInput):
        H.check_point(np.array([2.0, 0.0, 0.0]))
    with pytest.raises(InvalidInput):
        H.check_point(np.array([-1.0, 0.0, 0.0]))
    with pytest.raises(InvalidInput):
        H.check_point(np.array([1.0, 0.0]))


def test_check_tangent_rejects_non_tangent():
    with pytest.raises(InvalidInput):
        H.check_tangent(O, np.array([1.0, 0.0, 0.0]))
    H.check_tangent(O, np.array([0.0, 3.0, -1.0]))


def test_invalid_dimension():
    with pytest.raises(InvalidInput):
        Hyperboloid(0)


def test_boost_carries_apex_to_point(rng):
    for _ in range(20):
        x = H.random_point(rng, 3.0)
        np.testing.assert_allclose(H.boost(x, O), x, rtol=1e-12)


def test_boost_is_an_isometry(rng):
    for _ in range(50):
        x = H.random_point(rng, 1.5)
        p, q = H.random_point(rng, 1.0), H.random_point(rng, 1.0)
        assert float(H.dist(H.boost(x, p), H.boost(x, q))) == pytest.approx(float(H.dist(p, q)), abs=1e-9)
