import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geodec.manifolds import SPD, InvalidInput, expm_sym, inv_sqrt_spd, logm_spd, sqrt_spd
from oracles import spd_dist, spd_exp, spd_log, spd_sqrt

S = SPD(3)
I3 = np.eye(3)


def random_spd(rng, m=3, log_cond=4.0):
    q, _ = np.linalg.qr(rng.normal(size=(m, m)))
    w = np.exp(rng.uniform(-log_cond / 2, log_cond / 2, size=m))
    return (q * w) @ q.T


def test_exp_examples():
    np.testing.assert_allclose(S.exp(I3, I3), np.e * I3, rtol=1e-15)
    np.testing.assert_allclose(S.exp(I3, np.diag([1.0, 2.0, 3.0])), np.diag(np.exp([1.0, 2.0, 3.0])), rtol=1e-14)
    X = np.diag([2.0, 3.0, 5.0])
    np.testing.assert_array_equal(S.exp(X, np.zeros((3, 3))), X)


def test_log_and_distance_examples():
    np.testing.assert_allclose(S.log(I3, np.exp(2.0) * I3), 2.0 * I3, atol=1e-14)
    assert float(S.dist(I3, np.exp(2.0) * I3)) == pytest.approx(2.0 * np.sqrt(3.0), rel=1e-15)
    assert float(S.dist(I3, I3)) == 0.0


def test_sqrt_examples():
    np.testing.assert_allclose(sqrt_spd(I3), I3, atol=1e-15)
    np.testing.assert_allclose(sqrt_spd(4 * I3), 2 * I3, atol=1e-15)
    np.testing.assert_allclose(sqrt_spd(np.diag([1.0, 4.0, 9.0])), np.diag([1.0, 2.0, 3.0]), atol=1e-14)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_sqrt_and_inverse_sqrt(m, rng):
    for _ in range(50):
        X = random_spd(rng, m, log_cond=9.0)
        s, si = sqrt_spd(X), inv_sqrt_spd(X)
        np.testing.assert_allclose(s @ s, X, atol=1e-9 * np.linalg.norm(X))
        np.testing.assert_allclose(s @ si, np.eye(m), atol=1e-9)
        np.testing.assert_allclose(s, spd_sqrt(X), atol=1e-9 * np.linalg.norm(s))


def test_matrix_functions_are_symmetric_and_inverse(rng):
    X = random_spd(rng, 4)
    L = logm_spd(X)
    np.testing.assert_array_equal(L, L.T)
    np.testing.assert_allclose(expm_sym(L), X, rtol=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_exp_log_distance_match_scipy(m, rng):
    M = SPD(m)
    for _ in range(30):
        X, Y = random_spd(rng, m), random_spd(rng, m)
        V = M.log(X, Y)
        np.testing.assert_allclose(V, spd_log(X, Y), atol=1e-9 * max(1.0, np.linalg.norm(V)))
        np.testing.assert_allclose(M.exp(X, V), spd_exp(X, V), atol=1e-9 * np.linalg.norm(Y))
        assert float(M.dist(X, Y)) == pytest.approx(spd_dist(X, Y), rel=1e-10, abs=1e-12)


def test_round_trip_on_condition_number_up_to_1e4(rng):
    for _ in range(200):
        X, Y = random_spd(rng, 3, log_cond=np.log(1e4)), random_spd(rng, 3, log_cond=np.log(1e4))
        back = S.exp(X, S.log(X, Y))
        assert np.linalg.norm(back - Y) <= 1e-7 * np.linalg.norm(Y)


def test_affine_invariance(rng):
    for _ in range(100):
        X, Y = random_spd(rng), random_spd(rng)
        A = rng.normal(size=(3, 3))
        if abs(np.linalg.det(A)) < 1e-2:
            continue
        d = float(S.dist(X, Y))
        assert float(S.dist(A @ X @ A.T, A @ Y @ A.T)) == pytest.approx(d, abs=1e-8)


def test_distance_symmetric(rng):
    for _ in range(100):
        X, Y = random_spd(rng), random_spd(rng)
        assert abs(float(S.dist(X, Y)) - float(S.dist(Y, X))) <= 1e-10


@given(st.integers(1, 5))
def test_tangent_basis_dimension_and_orthonormality(m):
    M = SPD(m)
    rng = np.random.default_rng(m)
    X = random_spd(rng, m)
    E = M.tangent_basis(X)
    assert len(E) == m * (m + 1) // 2 == M.dim
    gram = np.array([[float(M.inner(X, a, b)) for b in E] for a in E])
    np.testing.assert_allclose(gram, np.eye(M.dim), atol=1e-9)
    for e in E:
        np.testing.assert_array_equal(e, e.T)


def test_tangent_basis_at_identity():
    E = S.tangent_basis(I3)
    expected = []
    for i in range(3):
        e = np.zeros((3, 3))
        e[i, i] = 1.0
        expected.append(e)
    for i in range(3):
        for j in range(i + 1, 3):
            e = np.zeros((3, 3))
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            expected.append(e)
    got = sorted(E.reshape(6, -1).tolist())
    assert np.allclose(got, sorted(np.array(expected).reshape(6, -1).tolist()), atol=1e-15)


def test_inner_product_is_affine_invariant_form(rng):
    X = random_spd(rng)
    U, V = rng.normal(size=(2, 3, 3))
    U, V = U + U.T, V + V.T
    Xi = np.linalg.inv(X)
    assert float(S.inner(X, U, V)) == pytest.approx(np.trace(Xi @ U @ Xi @ V), rel=1e-10)


def test_check_point_rejects_bad_matrices():
    with pytest.raises(InvalidInput):
        S.check_point(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(InvalidInput):
        S.check_point(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(InvalidInput):
        S.check_point(np.eye(2))


def test_log_rejects_indefinite_input():
    with pytest.raises(InvalidInput):
        S.log(I3, np.diag([1.0, -1.0, 1.0]))


def test_check_tangent_requires_symmetry():
    with pytest.raises(InvalidInput):
        S.check_tangent(I3, np.triu(np.ones((3, 3))))


def test_outputs_are_exactly_symmetric(rng):
    X, Y = random_spd(rng), random_spd(rng)
    for out in (S.exp(X, S.log(X, Y)), S.log(X, Y)):
        np.testing.assert_array_equal(out, out.T)


def test_kappa_must_be_negative():
    with pytest.raises(InvalidInput):
        SPD(3, kappa=0.0)
    assert SPD(3).kappa == -0.5
