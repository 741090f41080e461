import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mavaltk.forms import ConstantForm, gl_pullback, is_primitive, one_form, primitive_basis, primitive_dimension, wedge
from mavaltk.minors import (NOT_IN_SPAN, elementary_symmetric_poly, expand_squares, express_in_minors, form_from_minors,
                            form_from_q, hessian_form, minor_basis, minor_product_basis, nonneg_decomposition, p_eval,
                            p_of_form, phi_map, principal_minor_form, q_eval, q_lie_oracle, q_of_form, q_span_rank,
                            square_poly, sym_to_vector, sym_variables, tuple_minors, tuple_variables)
from mavaltk.poly import MultiPoly


def tau21():
    return ConstantForm.monomial(2, (2,), (1,))


def random_form(n, k, rng):
    out = ConstantForm.zero(n)
    for b in primitive_basis(n, k):
        out = out + rng.standard_normal() * b
    return out


def random_sym(n, rng):
    a = rng.standard_normal((n, n))
    return a + a.T


def substitution_oracle(tau, q):
    """Replace every dy_j by sum_l q[j, l] dx_l and wedge the factors out in order."""
    n = tau.n
    total = 0j
    for m, c in tau.items():
        prod = ConstantForm.monomial(n, (), (), c)
        for i in m.dx:
            prod = wedge(prod, ConstantForm.monomial(n, (i,)))
        for j in m.dy:
            prod = wedge(prod, one_form(dx=q[j - 1], n=n))
        total += prod.coefficient(tuple(range(1, n + 1)), ())
    return total


def test_p_eval_example():
    rng = np.random.default_rng(0)
    for _ in range(5):
        Q = random_sym(2, rng)
        assert np.isclose(p_eval(tau21(), Q), -Q[0, 0])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_p_eval_matches_substitution(n):
    rng = np.random.default_rng(n)
    for k in range(n + 1):
        tau = random_form(n, k, rng)
        Q = random_sym(n, rng)
        assert np.isclose(p_eval(tau, Q), substitution_oracle(tau, Q), rtol=1e-10, atol=1e-10)


def test_p_vanishes_below_rank_k():
    rng = np.random.default_rng(1)
    for n, k in [(3, 2), (3, 3), (4, 3)]:
        w = rng.standard_normal((k - 1, n))
        assert abs(p_eval(random_form(n, k, rng), w.T @ w)) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_top_form_is_det(n):
    tau = ConstantForm.monomial(n, (), tuple(range(1, n + 1)))
    sign = p_eval(tau, np.eye(n)).real
    assert sign in (1.0, -1.0)
    Q = random_sym(n, np.random.default_rng(n))
    assert np.isclose(p_eval(tau, Q), sign * np.linalg.det(Q))


def test_p_of_form_examples():
    assert p_of_form(ConstantForm.zero(2)).is_zero()
    names = sym_variables(2)
    assert p_of_form(tau21()) == -MultiPoly.variable(names, "a11")
    for n in (2, 3):
        for k in range(n + 1):
            assert p_of_form(hessian_form(n, k)).allclose(elementary_symmetric_poly(n, k), 1e-9)


def test_p_of_form_agrees_with_p_eval():
    rng = np.random.default_rng(5)
    tau = random_form(3, 2, rng)
    mats = np.stack([random_sym(3, rng) for _ in range(6)])
    assert np.allclose(p_of_form(tau).evaluate(sym_to_vector(mats)), p_eval(tau, mats))


def test_phi_map():
    assert np.array_equal(phi_map(np.array([[1.0, 0, 0]])), np.diag([1.0, 0, 0]))
    assert np.array_equal(phi_map(np.eye(3)[:2]), np.diag([1.0, 1, 0]))
    rng = np.random.default_rng(2)
    w = rng.standard_normal((2, 4))
    assert np.linalg.matrix_rank(phi_map(w)) == 2
    w[1] = 3 * w[0]
    assert np.linalg.matrix_rank(phi_map(w)) == 1


def test_q_examples():
    w = np.array([[1.3, -0.4]])
    q = q_of_form(tau21())
    assert np.isclose(q.evaluate(w.reshape(1, -1))[0], -1.69)
    assert np.isclose(q_lie_oracle(tau21(), w), -1.69)
    for n in (2, 3):
        for k in range(1, n + 1):
            assert np.isclose(q_eval(hessian_form(n, k), np.eye(n)[:k]), 1.0)


def test_q_vanishes_on_dependent_tuples():
    rng = np.random.default_rng(3)
    tau = random_form(3, 2, rng)
    w = rng.standard_normal((2, 3))
    w[1] = -2 * w[0]
    assert abs(q_eval(tau, w)) < 1e-12
    assert abs(q_lie_oracle(tau, w)) < 1e-12


def test_q_lie_oracle_k0():
    tau = ConstantForm.monomial(3, (1, 2, 3), (), 2.5)
    assert q_lie_oracle(tau, np.zeros((0, 3))) == 2.5


def test_q_of_form_rejects_non_primitive():
    from mavaltk.forms import symplectic_form
    with pytest.raises(ValueError):
        q_of_form(symplectic_form(2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_q_of_form_symmetric_in_tuple(n):
    rng = np.random.default_rng(n)
    for k in range(2, n + 1):
        tau = random_form(n, k, rng)
        w = rng.standard_normal((k, n))
        for perm in itertools.permutations(range(k)):
            assert np.isclose(q_eval(tau, w[list(perm)]), q_eval(tau, w))
        assert q_of_form(tau).multidegree([list(range(i * n, (i + 1) * n)) for i in range(k)]) == {(2,) * k}


def test_minor_basis_examples():
    mb = minor_basis(2, 1)
    names = sym_variables(2)
    assert mb.rank == 3
    assert {tuple(p.terms) for p in mb.polys} == {tuple(MultiPoly.variable(names, v).terms) for v in ("a11", "a12", "a22")}
    for n in (1, 2, 3, 4):
        assert minor_basis(n, n).rank == 1
        for k in range(n + 1):
            assert minor_basis(n, k).rank == primitive_dimension(n, k) == q_span_rank(n, k)


def test_express_in_minors_examples():
    names = sym_variables(2)
    a11, a12, a22 = (MultiPoly.variable(names, v) for v in ("a11", "a12", "a22"))
    coef = express_in_minors(a11 * a22 - a12 * a12, 2)
    assert np.allclose(coef, [1.0])
    assert express_in_minors(a11 * a11, 1) is NOT_IN_SPAN
    assert express_in_minors(a11 * a11, 2) is NOT_IN_SPAN
    rng = np.random.default_rng(4)
    for n, k in [(2, 1), (3, 1), (3, 2), (4, 2)]:
        p = p_of_form(random_form(n, k, rng))
        coef = express_in_minors(p, k)
        assert coef is not NOT_IN_SPAN
        rebuilt = MultiPoly(p.variables)
        for c, b in zip(coef, minor_basis(n, k).polys):
            rebuilt = rebuilt + c * b
        assert rebuilt.allclose(p, 1e-8)


def test_form_from_minors_examples():
    names = sym_variables(2)
    tau = form_from_minors(-MultiPoly.variable(names, "a11"))
    assert is_primitive(tau, 1e-10) and tau.allclose(tau21(), 1e-9)
    for n in (2, 3):
        det = p_of_form(ConstantForm.monomial(n, (), tuple(range(1, n + 1))))
        top = form_from_minors(elementary_symmetric_poly(n, n))
        assert np.isclose(p_eval(top, np.eye(n)), 1.0)
        assert top.allclose(ConstantForm.monomial(n, (), tuple(range(1, n + 1))) * det.terms[next(iter(det.terms))].real, 1e-9)
    assert form_from_minors(MultiPoly.variable(names, "a11") ** 2) is NOT_IN_SPAN


@pytest.mark.parametrize("n", [2, 3])
def test_round_trips(n):
    rng = np.random.default_rng(10 + n)
    for k in range(n + 1):
        tau = random_form(n, k, rng)
        assert form_from_minors(p_of_form(tau)).allclose(tau, 1e-8)
        if k:
            assert form_from_q(q_of_form(tau)).allclose(tau, 1e-8)


def test_hessian_form_coefficients():
    expected = ConstantForm.monomial(2, (1,), (2,)) - ConstantForm.monomial(2, (2,), (1,))
    assert hessian_form(2, 1).allclose(expected, 1e-10)
    with pytest.raises(ValueError):
        hessian_form(2, 3)


def test_principal_minor_form():
    rng = np.random.default_rng(6)
    Q = random_sym(3, rng)
    for rows in ([1], [2, 3], [1, 2, 3]):
        tau = principal_minor_form(3, rows)
        assert is_primitive(tau)
        idx = [r - 1 for r in rows]
        assert np.isclose(abs(p_eval(tau, Q)), abs(np.linalg.det(Q[np.ix_(idx, idx)])))


def test_nonneg_decomposition_single_square_and_product():
    n, k = 3, 2
    minors = tuple_minors(n, k).polys
    sq = nonneg_decomposition(minors[0] * minors[0])
    assert len(sq) == 1 and np.isclose(sq[0].coefficient, 1.0)
    prod = minors[0] * minors[1]
    parts = nonneg_decomposition(prod)
    assert sorted(round(float(np.real(p.coefficient)), 12) for p in parts) == [-0.25, 0.25]
    assert expand_squares(parts, n, k).allclose(prod, 1e-10)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2)])
def test_nonneg_decomposition_random(n, k):
    rng = np.random.default_rng(n * 7 + k)
    basis = minor_product_basis(n, k).polys
    q = MultiPoly(tuple_variables(n, k))
    for b in basis:
        q = q + rng.standard_normal() * b
    parts = nonneg_decomposition(q)
    assert all(np.isreal(p.coefficient) for p in parts)
    assert expand_squares(parts, n, k).allclose(q, 1e-9)


def test_square_poly_is_nonnegative():
    rng = np.random.default_rng(8)
    sq = square_poly(rng.standard_normal(len(tuple_minors(3, 2).polys)), 3, 2)
    pts = rng.standard_normal((50, 6))
    assert (sq.evaluate(pts).real >= -1e-12).all()


def test_p_equivariance_and_hypothesis_style():
    rng = np.random.default_rng(9)
    for n in (2, 3):
        for k in range(n + 1):
            tau = random_form(n, k, rng)
            g = rng.standard_normal((n, n)) + np.eye(n)
            Q = random_sym(n, rng)
            lhs = p_eval(gl_pullback(g, tau), Q)
            rhs = p_eval(tau, g.T @ Q @ g) / np.linalg.det(g)
            assert np.isclose(lhs, rhs, rtol=1e-9, atol=1e-9)


vec = st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3)


@given(st.lists(vec, min_size=2, max_size=2), st.floats(-3, 3, allow_nan=False))
def test_q_is_quadratic_in_each_vector(ws, t):
    tau = hessian_form(3, 2) + 0.3 * principal_minor_form(3, [1, 2])
    w = np.array(ws)
    scaled = w.copy()
    scaled[0] *= t
    assert np.isclose(q_eval(tau, scaled), t**2 * q_eval(tau, w), atol=1e-9)
    assert np.isclose(q_eval(tau, w), q_lie_oracle(tau, w), atol=1e-9)


def test_dimension_counts_small():
    assert [primitive_dimension(4, k) for k in range(5)] == [1, 10, 20, 10, 1]
    assert len(minor_basis(4, 2).polys) == 21 and minor_basis(4, 2).rank == 20
    assert math.comb(4, 2) ** 2 - math.comb(4, 1) ** 2 == 20
