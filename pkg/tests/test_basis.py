import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsstokes.basis import diff_matrix, gauss_nodes, gll_nodes, interp_matrix
from lsstokes.errors import InvalidOrderError


def test_gll_two_points():
    r = gll_nodes(2)
    np.testing.assert_array_equal(r.nodes, [-1.0, 1.0])
    np.testing.assert_allclose(r.weights, [1.0, 1.0], atol=1e-15)


def test_gll_three_points():
    r = gll_nodes(3)
    np.testing.assert_allclose(r.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(r.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-15)


def test_gll_four_points():
    r = gll_nodes(4)
    s = 1 / np.sqrt(5)
    np.testing.assert_allclose(r.nodes, [-1, -s, s, 1], atol=1e-15)
    np.testing.assert_allclose(r.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6], atol=1e-15)
    # interior nodes are the roots of P3'(x) = (15 x^2 - 3) / 2
    np.testing.assert_allclose(np.sort(np.roots([7.5, 0, -1.5])), r.nodes[1:3], atol=1e-15)
    for k in range(6):
        exact = 0.0 if k % 2 else 2 / (k + 1)
        assert abs(r.weights @ r.nodes**k - exact) < 1e-15


def test_gauss_small_rules():
    r1 = gauss_nodes(1)
    np.testing.assert_allclose(r1.nodes, [0.0], atol=1e-16)
    np.testing.assert_allclose(r1.weights, [2.0])
    r2 = gauss_nodes(2)
    np.testing.assert_allclose(r2.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r2.weights, [1.0, 1.0], atol=1e-15)


def test_gauss_integrates_x6():
    r = gauss_nodes(4)
    assert abs(r.weights @ r.nodes**6 - 2 / 7) < 1e-15


@pytest.mark.parametrize("n", [0, 1, -3])
def test_gll_order_error(n):
    with pytest.raises(InvalidOrderError):
        gll_nodes(n)


@pytest.mark.parametrize("n", [0, -1])
def test_gauss_order_error(n):
    with pytest.raises(InvalidOrderError):
        gauss_nodes(n)


@pytest.mark.parametrize("n", [2, 5, 9, 17, 33, 64])
def test_node_invariants(n):
    for r in (gll_nodes(n), gauss_nodes(n)):
        assert np.all(np.diff(r.nodes) > 0)
        assert np.all(r.weights > 0)
        assert abs(r.weights.sum() - 2) < 1e-13
        np.testing.assert_allclose(r.nodes, -r.nodes[::-1], atol=1e-15)
        np.testing.assert_allclose(r.weights, r.weights[::-1], atol=1e-15)
    g = gll_nodes(n)
    assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0
    assert -1 < gauss_nodes(n).nodes[0] and gauss_nodes(n).nodes[-1] < 1


def test_nodes_are_read_only():
    r = gll_nodes(5)
    with pytest.raises(ValueError):
        r.nodes[0] = 0.0


def test_diff_matrix_three_points():
    D = diff_matrix(gll_nodes(3))
    expected = [[-1.5, 2, -0.5], [-0.5, 0, 0.5], [0.5, -2, 1.5]]
    np.testing.assert_allclose(D, expected, atol=1e-14)
    np.testing.assert_allclose(D @ [1, 0, 1], [-2, 0, 2], atol=1e-14)
    np.testing.assert_allclose(D @ [3.0, 3.0, 3.0], 0, atol=1e-14)


@pytest.mark.parametrize("n", [2, 4, 8, 12, 17])
def test_diff_matrix_monomials(n):
    x = gll_nodes(n).nodes
    D = diff_matrix(gll_nodes(n))
    np.testing.assert_allclose(D.sum(axis=1), 0, atol=1e-12)
    for k in range(1, n):
        np.testing.assert_allclose(D @ x**k, k * x ** (k - 1), atol=1e-12 * max(1, k * k))


def test_interp_examples():
    src = gll_nodes(3)
    np.testing.assert_allclose(interp_matrix(src, src), np.eye(3), atol=1e-15)
    tgt = gauss_nodes(2)
    np.testing.assert_allclose(interp_matrix(src, tgt) @ [1, 0, 1], [1 / 3, 1 / 3], atol=1e-15)
    np.testing.assert_allclose(interp_matrix(gll_nodes(7), gauss_nodes(11)) @ np.ones(7), 1, atol=1e-14)


def test_interp_accepts_arrays_and_exact_nodes():
    src = gll_nodes(5)
    t = np.array([-1.0, 0.3, src.nodes[1]])
    M = interp_matrix(src, t)
    np.testing.assert_array_equal(M[0], np.eye(5)[0])
    np.testing.assert_array_equal(M[2], np.eye(5)[1])
    np.testing.assert_allclose(M @ src.nodes**4, t**4, atol=1e-14)


def test_duplicate_nodes_rejected():
    with pytest.raises(ValueError):
        diff_matrix(np.array([0.0, 0.0, 1.0]))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 20), seed=st.integers(0, 2**31 - 1))
def test_quadrature_exactness(n, seed):
    rng = np.random.default_rng(seed)
    for rule, deg in ((gll_nodes(n), 2 * n - 3), (gauss_nodes(n), 2 * n - 1)):
        c = rng.standard_normal(deg + 1)
        poly = np.polynomial.Polynomial(c)
        anti = poly.integ()
        exact = anti(1) - anti(-1)
        approx = rule.weights @ poly(rule.nodes)
        assert abs(approx - exact) <= 1e-13 * max(1.0, np.abs(c).sum())


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 24), m=st.integers(1, 30), seed=st.integers(0, 2**31 - 1))
def test_interp_reproduces_polynomials(n, m, seed):
    rng = np.random.default_rng(seed)
    # Legendre coefficients keep the test well scaled for large n
    poly = np.polynomial.Legendre(rng.standard_normal(n))
    src = gll_nodes(n)
    tgt = gauss_nodes(m)
    err = interp_matrix(src, tgt) @ poly(src.nodes) - poly(tgt.nodes)
    assert np.max(np.abs(err)) <= 1e-12 * max(1.0, np.max(np.abs(poly(src.nodes))))
