import math

import numpy as np
import pytest
import sympy as sp

from mavaltk.convex import Frame, MaxAffine, Quadratic, SmoothConvex, ball_polytope, hull_volume, random_polytope, support_function
from mavaltk.forms import ConstantForm, primitive_basis, symplectic_form
from mavaltk.maops import (decompose_homogeneous, elementary_symmetric, extract_density, gw_fourier_check, hessian_measure,
                           hessian_valuation, klain, klain_quadrature, lebesgue_valuation, ma_c2, ma_pl, ma_valuation,
                           mixed_discriminant, mixed_ma, mixed_ma_quadratic_type, mixed_quadratic_density_poly, psi_tau,
                           psi_tau_valuation, smoothing_comparison, weighted_valuation)
from mavaltk.measures import Box, TestFunction, mass_on_box
from mavaltk.minors import NOT_IN_SPAN, express_in_minors, hessian_form, principal_minor_form, q_eval, sym_to_vector

UNIT2 = Box(np.zeros(2), np.ones(2))


def density(m):
    return m.densities[0].values


def test_ma_pl_examples():
    mu = ma_pl(MaxAffine([[1.0], [-1.0]], [0.0, 0.0]), Box.cube(1, 1.0))
    assert np.allclose(mu.atoms, [[0.0]]) and np.isclose(mu.masses[0], 2.0)
    square = np.array([[-1.0, -1], [1, -1], [1, 1], [-1, 1]])
    x = np.array([0.3, -0.2])
    mu = ma_pl(support_function(square, x), Box.cube(2, 2.0))
    assert np.allclose(mu.atoms, [x]) and np.isclose(mu.masses[0], 4.0)
    assert ma_pl(MaxAffine([[1.0, 2.0]], [3.0]), Box.cube(2, 1.0)).total_mass == 0


def test_ma_pl_window_is_half_open():
    f = support_function(np.array([[-1.0, -1], [1, -1], [1, 1], [-1, 1]]), [1.0, 0.0])
    assert ma_pl(f, Box(np.zeros(2), np.ones(2))).total_mass == 0
    assert np.isclose(ma_pl(f, Box(np.array([1.0, 0.0]), np.array([2.0, 1.0]))).total_mass, 4.0)


def test_ma_pl_mass_is_gradient_image():
    # total mass of MA(f) equals the volume of the hull of all gradients when every cell vertex is in the window
    rng = np.random.default_rng(0)
    for _ in range(5):
        A = rng.standard_normal((7, 2))
        f = MaxAffine(A, rng.standard_normal(7)).pruned()
        assert np.isclose(ma_pl(f, Box.cube(2, 1e3)).total_mass, hull_volume(f.slopes))


def test_ma_c2_examples():
    assert np.isclose(mass_on_box(ma_c2(Quadratic.identity(2), UNIT2, 4), UNIT2), 1.0)
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert np.allclose(density(ma_c2(Quadratic(A), UNIT2, 4)), np.linalg.det(A))


def test_ma_c2_radial_oracle():
    # f = r^4/4: D^2 f has eigenvalues r^2 (tangential) and 3 r^2 (radial), det = 3 r^4
    f = SmoothConvex(2, lambda p: np.sum(p**2, axis=1) ** 2 / 4,
                     lambda p: np.sum(p**2, axis=1)[:, None] * p)
    box = Box.cube(2, 1.0)
    mu = ma_c2(f, box, 64)
    r = np.linalg.norm(mu.densities[0].midpoints(), axis=-1)
    assert np.allclose(density(mu), 3 * r**4, atol=1e-3)
    # mass of the gradient image of the disc of radius 1 is the area of the disc of radius 1
    disc = mu.densities[0].values * (r <= 1.0)
    assert abs(disc.sum().real * mu.densities[0].cell_volume - math.pi) < 0.1


def test_hessian_measure_examples():
    q = Quadratic(np.diag([1.0, 2.0, 3.0]))
    box = Box(np.zeros(3), np.ones(3))
    assert np.allclose(density(hessian_measure(0, q, box, 2)), 1.0)
    assert np.allclose(density(hessian_measure(1, q, box, 2)), 6.0)
    assert np.allclose(density(hessian_measure(2, q, box, 2)), 11.0)
    assert np.allclose(density(hessian_measure(3, q, box, 2)), density(ma_c2(q, box, 2)))
    assert np.isclose(mass_on_box(hessian_measure(1, Quadratic.identity(2), UNIT2, 4), UNIT2), 2.0)
    assert np.allclose(elementary_symmetric(np.array([1.0, 2.0, 3.0, 4.0]), 2), 35.0)


def test_psi_tau_examples():
    f = Quadratic(np.array([[1.0, 0.2, 0.0], [0.2, 2.0, 0.1], [0.0, 0.1, 0.5]]))
    box = Box.cube(3, 1.0)
    for k in range(4):
        assert np.allclose(density(psi_tau(hessian_form(3, k), f, box, 3)), density(hessian_measure(k, f, box, 3)), atol=1e-10)
    tau = ConstantForm.monomial(2, (2,), (1,))
    assert np.allclose(density(psi_tau(tau, Quadratic.identity(2), UNIT2, 4)), -1.0)
    assert np.allclose(density(psi_tau(ConstantForm.zero(2), Quadratic.identity(2), UNIT2, 4)), 0.0)
    with pytest.raises(ValueError):
        psi_tau(symplectic_form(2), Quadratic.identity(2), UNIT2, 4)


def sympy_mixed_discriminant(mats):
    n = len(mats)
    lam = sp.symbols(f"l0:{n}")
    M = sum((lam[i] * sp.Matrix(mats[i]) for i in range(n)), sp.zeros(n, n))
    poly = sp.Poly(sp.expand(M.det()), *lam)
    return float(poly.coeff_monomial(sp.Mul(*lam))) / math.factorial(n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mixed_discriminant_symbolic(n):
    rng = np.random.default_rng(n)
    mats = []
    for _ in range(n):
        a = rng.integers(-3, 4, (n, n)).astype(float)
        mats.append(a @ a.T + np.eye(n))
    assert np.isclose(mixed_discriminant(mats), sympy_mixed_discriminant(mats))
    box = Box(np.zeros(n), np.ones(n))
    mu = mixed_ma([Quadratic(m) for m in mats], box, 2)
    assert np.allclose(density(mu), sympy_mixed_discriminant(mats))


def test_mixed_ma_diagonal_and_affine_slot():
    rng = np.random.default_rng(3)
    f = Quadratic(np.array([[2.0, 0.5], [0.5, 1.0]]))
    assert np.allclose(density(mixed_ma([f, f], UNIT2, 4)), density(ma_c2(f, UNIT2, 4)))
    affine = SmoothConvex(2, lambda p: p @ [1.0, -2.0] + 0.3, lambda p: np.tile([1.0, -2.0], (len(p), 1)),
                          lambda p: np.zeros((len(p), 2, 2)))
    assert np.allclose(density(mixed_ma([f, affine], UNIT2, 4)), 0.0)
    P, Q = random_polytope(2, 5, rng), random_polytope(2, 4, rng)
    pl = mixed_ma([support_function(P), support_function(Q)], Box.cube(2, 1.0))
    mink = (P[:, None] + Q[None]).reshape(-1, 2)
    mixed_volume = (hull_volume(mink) - hull_volume(P) - hull_volume(Q)) / 2
    assert np.isclose(pl.total_mass, mixed_volume)


def test_mixed_ma_quadratic_type_examples():
    f = Quadratic(np.array([[2.0, 0.5], [0.5, 1.0]]))
    half = Quadratic.identity(2)
    assert np.allclose(density(mixed_ma_quadratic_type(2, f, [], UNIT2, 4)), density(ma_c2(f, UNIT2, 4)))
    assert np.allclose(density(mixed_ma_quadratic_type(0, f, [half, half], UNIT2, 4)), 1.0)
    assert np.allclose(density(mixed_ma_quadratic_type(1, f, [half], UNIT2, 4)),
                       0.5 * density(hessian_measure(1, f, UNIT2, 4)))


@pytest.mark.parametrize("n", [2, 3])
def test_mixed_quadratic_density_poly_in_minor_span(n):
    rng = np.random.default_rng(n)
    for k in range(n + 1):
        mats = []
        for _ in range(n - k):
            a = rng.standard_normal((n, n))
            mats.append(a @ a.T)
        p = mixed_quadratic_density_poly(k, mats, n)
        assert express_in_minors(p, k) is not NOT_IN_SPAN
        a = rng.standard_normal((n, n))
        H = a @ a.T
        f = Quadratic(H)
        box = Box(np.zeros(n), np.ones(n))
        dens = density(mixed_ma_quadratic_type(k, f, [Quadratic(m) for m in mats], box, 2))
        assert np.allclose(dens, p.evaluate(sym_to_vector(H[None]))[0])


def test_decompose_homogeneous():
    box = Box(np.zeros(2), np.ones(2))
    f = Quadratic(np.array([[2.0, 0.5], [0.5, 1.0]]))
    parts = decompose_homogeneous(ma_valuation(box, 4), f, 2)
    assert np.allclose([p.total_mass for p in parts], [0, 0, np.linalg.det(f.A)], atol=1e-9)
    parts = decompose_homogeneous(ma_valuation(box, 4) + lebesgue_valuation(box, 4), f, 2)
    assert np.allclose([p.total_mass for p in parts], [1, 0, np.linalg.det(f.A)], atol=1e-9)
    parts = decompose_homogeneous(hessian_valuation(1, box, 4), f, 2)
    assert np.allclose([p.total_mass for p in parts], [0, 3, 0], atol=1e-9)
    with pytest.raises(ValueError):
        decompose_homogeneous(hessian_valuation(1, box, 4), f, 2, nodes=[0, 1, 1])


def test_extract_density():
    box = Box.cube(2, 4.0)
    for x in ([0.0, 0.0], [1.2, -0.7]):
        for m in (8, 64):
            est = extract_density(ma_valuation(box, 8), np.array(x), m)
            assert np.isclose(est.value, 1.0)
            assert np.isclose(est.volume_ratio, hull_volume(ball_polytope(2, m)) / math.pi)
    weight = lambda p: 1.0 + 0.5 * p[:, 0] ** 2  # noqa: E731
    psi = weighted_valuation(ma_valuation(box, 8), weight)
    x = np.array([1.5, 0.2])
    assert np.isclose(extract_density(psi, x, 64).value, 1 + 0.5 * 1.5**2)


def test_klain_examples():
    for n in (2, 3):
        for k in range(n + 1):
            frame = Frame.random(n, k, np.random.default_rng(k))
            assert np.isclose(klain(hessian_form(n, k), frame), 1.0)
    tau = ConstantForm.monomial(2, (2,), (1,))
    assert np.isclose(klain(tau, Frame.coordinate(2, [1])), -1.0)
    assert np.isclose(klain(tau, Frame.coordinate(2, [2])), 0.0)
    with pytest.raises(ValueError):
        klain(tau, Frame.coordinate(2, [1, 2]))


def test_klain_detects_nonzero_forms():
    rng = np.random.default_rng(4)
    for n, k in [(2, 1), (3, 1), (3, 2)]:
        for tau in primitive_basis(n, k):
            vals = [klain(tau, Frame.random(n, k, rng)) for _ in range(200)]
            assert max(abs(v) for v in vals) > 1e-6


def test_klain_quadrature_matches_exact():
    rng = np.random.default_rng(5)
    frame = Frame.random(2, 1, rng)
    tau = hessian_form(2, 1) + 0.7 * principal_minor_form(2, [1])
    exact = klain(tau, frame)
    assert abs(klain_quadrature(tau, frame, 64) - exact) < 1e-2


def test_gw_dependent_and_gram_cases():
    phi = TestFunction.tent(Box.cube(2, 1.0))
    tau = hessian_form(2, 2)
    xs = np.array([[0.3, -0.4], [0.6, -0.8]])
    chk = gw_fourier_check(tau, phi, xs, 32)
    assert abs(chk.lhs) < 1e-10 and abs(chk.rhs) < 1e-10
    xs = np.array([[0.5, 0.1], [-0.2, 0.4]])
    top = principal_minor_form(2, [1, 2])
    assert np.isclose(q_eval(top, xs), np.linalg.det(xs @ xs.T))
    chk = gw_fourier_check(top, phi, xs, 64)
    assert chk.rel_error < 1e-2


def test_gw_rejects_overflow():
    phi = TestFunction.tent(Box.cube(2, 1.0))
    with pytest.raises(ValueError):
        gw_fourier_check(hessian_form(2, 1), phi, np.array([[700.0, 0.0]]))


def test_valuation_arithmetic():
    box = Box(np.zeros(2), np.ones(2))
    f = Quadratic.identity(2)
    v = 2.0 * psi_tau_valuation(hessian_form(2, 1), box, 4)
    assert v.degree == 1 and np.isclose(v(f).total_mass, 4.0)
    assert (ma_valuation(box) + lebesgue_valuation(box)).degree is None


def test_smoothing_comparison_single_polygon():
    rng = np.random.default_rng(6)
    f = support_function(rng.standard_normal((6, 2)), [0.1, -0.2])
    out = smoothing_comparison(f, Box.cube(2, 2.0), beta=1e3, grid=128)
    assert len(out) == 1 and out[0].rel_error < 0.02
    with pytest.raises(ValueError):
        smoothing_comparison(support_function(rng.standard_normal((5, 3))), Box.cube(3, 1.0), 1e3)
