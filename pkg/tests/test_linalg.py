import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bandit_routing import SingularMatrix, enumerate_paths, grid_network
from bandit_routing.linalg import (cofactor_vector, cofactor_vector_minors, det,
                                   is_nonsingular, pinv, solve)
from bandit_routing.oracles import exact_det
from bandit_routing.spanner import general_basis


def test_det_simple():
    assert det(np.eye(4)) == 1.0
    assert det(np.diag([2.0, 3.0])) == pytest.approx(6.0)
    assert det(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(-1.0)
    assert det(np.zeros((3, 3))) == 0.0


def test_det_matches_cofactor_expansion():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = rng.standard_normal((6, 6))
        ref = float(exact_det(m))
        assert abs(det(m) - ref) <= 1e-8 * abs(ref)


def test_det_exact_on_01_matrices():
    rng = np.random.default_rng(1)
    for n in range(1, 11):
        for _ in range(5):
            m = rng.integers(0, 2, (n, n)).astype(float)
            assert round(det(m)) == exact_det(m)


def test_det_rejects_nonsquare():
    with pytest.raises(ValueError):
        det(np.ones((2, 3)))


def test_cofactor_identity():
    np.testing.assert_array_equal(cofactor_vector(np.eye(2), 0), [1.0, 0.0])
    np.testing.assert_array_equal(cofactor_vector(np.eye(2), 1), [0.0, 1.0])


def _substituted(c, j, a):
    m = c.copy()
    m[:, j] = a
    return m


def test_laplace_identity_5x5():
    rng = np.random.default_rng(2)
    c = rng.standard_normal((5, 5))
    for j in range(5):
        cof = cofactor_vector(c, j)
        for _ in range(20):
            a = rng.standard_normal(5)
            ref = det(_substituted(c, j, a))
            assert abs(cof @ a - ref) <= 1e-8 * max(1.0, abs(ref))


def test_adjugate_matches_minors():
    rng = np.random.default_rng(3)
    for n in range(1, 8):
        c = rng.standard_normal((n, n))
        for j in range(n):
            np.testing.assert_allclose(cofactor_vector(c, j), cofactor_vector_minors(c, j),
                                       rtol=1e-8, atol=1e-10)


def test_cofactor_singular_raises_and_minors_work():
    c = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
    with pytest.raises(SingularMatrix):
        cofactor_vector(c, 0)
    cof = cofactor_vector_minors(c, 0)
    a = np.array([0.3, -1.0, 2.0])
    assert cof @ a == pytest.approx(det(_substituted(c, 0, a)), abs=1e-12)


def test_is_nonsingular():
    assert is_nonsingular(np.eye(3))
    m = np.array([[1.0, 1.0], [2.0, 2.0]]).T
    assert not is_nonsingular(m)
    assert not is_nonsingular(np.array([[np.inf, 0.0], [0.0, 1.0]]))


@pytest.mark.parametrize("p", [2, 4, 6, 8])
def test_is_nonsingular_on_grid_completions(p):
    basis = general_basis(grid_network(p))
    assert is_nonsingular(basis.completion)
    if p == 2:
        assert exact_det(basis.completion) != 0


def test_is_nonsingular_scale_free():
    m = np.array([[1.0, 0.5], [0.2, 1.0]])
    assert is_nonsingular(m * 1e-12) and is_nonsingular(m * 1e12)


def test_solve():
    b = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(solve(np.eye(3), b), b)
    np.testing.assert_allclose(solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1.0, 1.0])
    rng = np.random.default_rng(4)
    a = rng.standard_normal((8, 8))
    spd = a @ a.T + 8 * np.eye(8)
    rhs = rng.standard_normal(8)
    x = solve(spd, rhs)
    assert np.linalg.norm(spd @ x - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))


def test_solve_singular():
    with pytest.raises(SingularMatrix):
        solve(np.ones((3, 3)), np.array([1.0, 0.0, 0.0]))


def test_pinv_examples():
    np.testing.assert_allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    np.testing.assert_allclose(pinv(np.eye(3)), np.eye(3))
    u = np.array([1.0, 2.0, -1.0])
    v = np.array([0.5, 3.0])
    m = np.outer(u, v)
    np.testing.assert_allclose(pinv(m), np.outer(v, u) / (u @ u * (v @ v)), atol=1e-12)


def test_pinv_bad_tol():
    with pytest.raises(ValueError):
        pinv(np.eye(2), rel_tol=0.0)


def test_pinv_penrose_on_path_gram():
    paths = enumerate_paths(grid_network(4))
    a = np.array([p.coords for p in paths]).T
    m = a @ a.T
    x = pinv(m)
    for lhs, rhs in [(m @ x @ m, m), (x @ m @ x, x), ((m @ x).T, m @ x), ((x @ m).T, x @ m)]:
        np.testing.assert_allclose(lhs, rhs, atol=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    arrays(np.float64, (n, n), elements=st.floats(-5, 5)),
    st.integers(0, n - 1),
    arrays(np.float64, n, elements=st.floats(-5, 5)))))
def test_laplace_property(case):
    c, j, a = case
    if not is_nonsingular(c):
        cof = cofactor_vector_minors(c, j)
    else:
        cof = cofactor_vector(c, j)
    ref = det(_substituted(c, j, a))
    assert abs(cof @ a - ref) / max(1.0, abs(ref)) < 1e-8


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-3, 3)))
def test_pinv_involution(m):
    if np.linalg.matrix_rank(m) < 4 or np.linalg.cond(m) > 1e6:
        return
    np.testing.assert_allclose(pinv(pinv(m)), m, atol=1e-7)
