"""Monge-Ampere type valuations: Alexandrov MA, C^2 operators, mixed MA, decompositions, Klain functions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .convex import (Frame, MaxAffine, Quadratic, SmoothConvex, ball_polytope, exp_linear, hull_volume, pullback_subspace,
                     smooth_sum, softmax_smoothing, support_function)
from .forms import ConstantForm, is_primitive
from .measures import Box, DensityGrid, RadonMeasure, TestFunction, fourier_laplace, integrate, mass_on_box, unit_ball_volume
from .minors import _sym_entry_polys, p_eval, q_eval, sym_variables
from .poly import MultiPoly, leibniz_det

MERGE_RADIUS = 1e-9

Convex = MaxAffine | SmoothConvex


# valuations ----------------------------------------------------------------

@dataclass(frozen=True)
class Valuation:
    """f -> RadonMeasure with optional declared homogeneity degree and generating form."""

    fn: Callable[[Convex], RadonMeasure]
    degree: int | None = None
    form: ConstantForm | None = None
    name: str = field(default="valuation")

    def __call__(self, f: Convex) -> RadonMeasure:
        return self.fn(f)

    def __add__(self, other: Valuation) -> Valuation:
        deg = self.degree if self.degree == other.degree else None
        return Valuation(lambda f: self(f) + other(f), deg, None, f"{self.name}+{other.name}")

    def __mul__(self, c: complex) -> Valuation:
        return Valuation(lambda f: c * self(f), self.degree, None if self.form is None else self.form * c, f"{c}*{self.name}")

    __rmul__ = __mul__


def ma_valuation(box: Box, grid=64) -> Valuation:
    """MA on max-affine inputs (atoms in the window) and on smooth inputs (grid density)."""
    def fn(f):
        return ma_pl(f, box) if isinstance(f, MaxAffine) else ma_c2(f, box, grid)
    return Valuation(fn, degree=box.n, name="MA")


def lebesgue_valuation(box: Box, grid=64) -> Valuation:
    return Valuation(lambda f: RadonMeasure.lebesgue(box, grid), degree=0, name="Lebesgue")


def hessian_valuation(k: int, box: Box, grid=64) -> Valuation:
    return Valuation(lambda f: hessian_measure(k, f, box, grid), degree=k, name=f"Hessian{k}")


def psi_tau_valuation(tau: ConstantForm, box: Box, grid=64) -> Valuation:
    k = 0 if tau.is_zero() else tau.fiber_degree()
    return Valuation(lambda f: psi_tau(tau, f, box, grid), degree=k, form=tau, name="Psi_tau")


def weighted_valuation(psi: Valuation, weight: Callable[[np.ndarray], np.ndarray]) -> Valuation:
    """f -> weight * psi(f); locally determined when psi is, no longer translation equivariant."""
    def fn(f):
        m = psi(f)
        dens = [DensityGrid(d.box, d.values * weight(d.midpoints().reshape(-1, m.n)).reshape(d.grid))
                for d in m.densities]
        masses = m.masses * weight(m.atoms) if len(m.atoms) else m.masses
        return RadonMeasure(m.n, m.atoms, masses, dens)
    return Valuation(fn, psi.degree, None, f"weighted {psi.name}")


# Monge-Ampere --------------------------------------------------------------

def ma_pl(f: MaxAffine, window: Box) -> RadonMeasure:
    """Alexandrov MA of a max-affine function: atoms at the vertices of its cell complex.

    Vertices come from solving <a_i, x> + b_i = t for every (n+1)-subset of pieces and
    keeping solutions where those pieces are maximal. The mass at a vertex is the
    volume of the convex hull of all active gradients.
    """
    n, m = f.n, len(f)
    if window.n != n:
        raise ValueError("window dimension mismatch")
    if m < n + 1:
        return RadonMeasure.zero(n)
    A, b = f.slopes, f.offsets
    scale = max(1.0, float(np.abs(A).max()), float(np.abs(b).max()))
    subsets = np.array(list(itertools.combinations(range(m), n + 1)))
    mats = np.concatenate([A[subsets], -np.ones(subsets.shape + (1,))], axis=2)
    rhs = -b[subsets]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-12 * scale ** (n + 1)
    if not ok.any():
        return RadonMeasure.zero(n)
    sol = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    xs, ts = sol[:, :n], sol[:, n]
    vals = xs @ A.T + b
    fx = vals.max(axis=1)
    tol = 1e-9 * np.maximum(scale, np.abs(fx))
    maximal = np.all(np.abs(np.take_along_axis(vals, subsets[ok], axis=1) - fx[:, None]) <= tol[:, None], axis=1)
    maximal &= np.abs(ts - fx) <= tol
    verts: list[np.ndarray] = []
    for x in xs[maximal]:
        if not any(np.linalg.norm(v - x) <= MERGE_RADIUS * max(1.0, np.linalg.norm(x)) for v in verts):
            verts.append(x)
    atoms, masses = [], []
    for x in verts:
        if not window.contains(x):
            continue
        v = x @ A.T + b
        active = v >= v.max() - 1e-9 * max(scale, abs(v.max()))
        vol = hull_volume(A[active])
        if vol > 0:
            atoms.append(x)
            masses.append(vol)
    return RadonMeasure(n, np.array(atoms).reshape(-1, n), np.array(masses, dtype=complex))


def _hessians(f: SmoothConvex, box: Box, grid) -> tuple[np.ndarray, tuple[int, ...]]:
    mids = box.midpoints(grid)
    shape = mids.shape[:-1]
    return f.hessian(mids.reshape(-1, box.n)), shape


def ma_c2(f: SmoothConvex, box: Box, grid=64) -> RadonMeasure:
    """Density det(D^2 f) sampled at cell midpoints."""
    H, shape = _hessians(f, box, grid)
    return RadonMeasure.from_density(box, np.linalg.det(H).reshape(shape))


def elementary_symmetric(eigs: np.ndarray, k: int) -> np.ndarray:
    """e_k of the last axis, from the coefficients of prod_i (1 + lambda_i t)."""
    coeffs = np.zeros(eigs.shape[:-1] + (k + 1,), dtype=eigs.dtype)
    coeffs[..., 0] = 1
    for i in range(eigs.shape[-1]):
        lam = eigs[..., i : i + 1]
        coeffs[..., 1:] = coeffs[..., 1:] + lam * coeffs[..., :-1]
    return coeffs[..., k]


def hessian_measure(k: int, f: SmoothConvex, box: Box, grid=64) -> RadonMeasure:
    """Density e_k(eigenvalues of D^2 f)."""
    if not 0 <= k <= box.n:
        raise ValueError("need 0 <= k <= n")
    H, shape = _hessians(f, box, grid)
    eigs = np.linalg.eigvalsh(H)
    return RadonMeasure.from_density(box, elementary_symmetric(eigs, k).reshape(shape))


def psi_tau(tau: ConstantForm, f: SmoothConvex, box: Box, grid=64) -> RadonMeasure:
    """Density P_tau(D^2 f) for a primitive form tau."""
    if tau.n != box.n:
        raise ValueError("form and box dimensions differ")
    if tau.is_zero():
        return RadonMeasure.from_density(box, np.zeros(box.midpoints(grid).shape[:-1]))
    tau.fiber_degree()
    if not is_primitive(tau, tol=1e-12 * max(1.0, max(abs(c) for _, c in tau.items()))):
        raise ValueError("form is not primitive")
    H, shape = _hessians(f, box, grid)
    return RadonMeasure.from_density(box, np.asarray(p_eval(tau, H)).reshape(shape))


# mixed Monge-Ampere --------------------------------------------------------

def _sum(fs: Sequence[Convex]) -> Convex:
    out = fs[0]
    for g in fs[1:]:
        out = out + g
    return out


def mixed_ma(fs: Sequence[Convex], box: Box, grid=64) -> RadonMeasure:
    """(1/n!) sum_S (-1)^(n-|S|) MA(sum_{i in S} f_i), exact for the degree-n polynomial lambda -> MA(sum lambda_i f_i)."""
    n = box.n
    if len(fs) != n:
        raise ValueError(f"mixed MA needs exactly {n} functions")
    pl = all(isinstance(f, MaxAffine) for f in fs)
    if not pl and not all(isinstance(f, SmoothConvex) for f in fs):
        raise ValueError("all arguments must be max-affine or all smooth")
    ma = (lambda g: ma_pl(g, box)) if pl else (lambda g: ma_c2(g, box, grid))
    total = RadonMeasure.zero(n)
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            total = total + (-1) ** (n - r) * ma(_sum([fs[i] for i in S]))
    return total * (1.0 / math.factorial(n))


def mixed_ma_quadratic_type(k: int, f: SmoothConvex, quads: Sequence[Quadratic], box: Box, grid=64) -> RadonMeasure:
    """MA(f[k], Q_1, ..., Q_{n-k}) with f repeated in k slots."""
    n = box.n
    if len(quads) != n - k:
        raise ValueError(f"need {n - k} quadratics for k={k}")
    return mixed_ma([f] * k + list(quads), box, grid)


def mixed_quadratic_density_poly(k: int, quad_matrices: Sequence[np.ndarray], n: int | None = None) -> MultiPoly:
    """Density of MA(f[k], Q_1..Q_{n-k}) as a polynomial in the entries of D^2 f."""
    mats = [np.asarray(q, dtype=float) for q in quad_matrices]
    if n is None:
        if not mats:
            raise ValueError("pass n when there are no quadratics")
        n = mats[0].shape[0]
    if len(mats) != n - k:
        raise ValueError(f"need {n - k} quadratics for k={k}")
    names = sym_variables(n)
    A = _sym_entry_polys(n)
    total = MultiPoly(names)
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            c = sum(1 for i in S if i < k)
            M = sum((mats[i - k] for i in S if i >= k), np.zeros((n, n)))
            entries = [[c * A[i][j] + M[i, j] for j in range(n)] for i in range(n)]
            total = total + (-1) ** (n - r) * leibniz_det(entries, names)
    return (total / math.factorial(n)).chop(1e-12)


def mixed_discriminant(mats: Sequence[np.ndarray]) -> float:
    """D(A_1..A_n) = (1/n!) sum_S (-1)^(n-|S|) det(sum_S A_i)."""
    n = len(mats)
    total = 0.0
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            total += (-1) ** (n - r) * np.linalg.det(sum(mats[i] for i in S))
    return total / math.factorial(n)


# homogeneous decomposition -------------------------------------------------

def _scale(f: Convex, t: float) -> Convex:
    return f.scaled(t)


def decompose_homogeneous(psi: Valuation, f: Convex, n: int, nodes: Sequence[float] | None = None) -> list[RadonMeasure]:
    """Components psi_k(f), k = 0..n, from psi(t_j f) and the inverse Vandermonde matrix."""
    t = np.arange(n + 1, dtype=float) if nodes is None else np.asarray(nodes, dtype=float)
    if len(t) != n + 1 or len(np.unique(t)) != len(t):
        raise ValueError("need n+1 distinct nodes")
    V = np.vander(t, n + 1, increasing=True)
    Vinv = np.linalg.inv(V)
    samples = [psi(_scale(f, tj)) for tj in t]
    comps = []
    for k in range(n + 1):
        comp = RadonMeasure.zero(samples[0].n)
        for j in range(n + 1):
            comp = comp + Vinv[k, j] * samples[j]
        comps.append(comp)
    return comps


# density extraction --------------------------------------------------------

class DensityEstimate(NamedTuple):
    value: complex
    volume_ratio: float


def extract_density(psi: Valuation, x: np.ndarray, m: int, n: int | None = None) -> DensityEstimate:
    """psi(h_P(. - x))({x}) / vol(P) for an m-vertex polytope P inscribed in the unit ball."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = n or len(x)
    P = ball_polytope(n, m)
    vol = hull_volume(P)
    mu = psi(support_function(P, shift=x))
    return DensityEstimate(mu.atom_mass_at(x, MERGE_RADIUS) / vol, vol / unit_ball_volume(n))


# Klain function ------------------------------------------------------------

def klain(tau: ConstantForm, frame: Frame) -> complex:
    """KL(E) = P_tau(Pi_E): psi_tau of 1/2 |pi_E x|^2 is KL(E) times Lebesgue."""
    k = 0 if tau.is_zero() else tau.fiber_degree()
    if frame.k != k and not tau.is_zero():
        raise ValueError(f"frame dimension {frame.k} differs from the form's degree {k}")
    return complex(p_eval(tau, frame.projector))


def klain_quadrature(tau: ConstantForm, frame: Frame, grid=32, radius: float = 1.0) -> complex:
    """KL(E) from a product test function: int phi d psi_tau(pi_E^* 1/2|u|^2) / (int phi_E * int phi_perp)."""
    n, k = frame.n, frame.k
    comp = frame.complement()
    f = pullback_subspace(Quadratic.identity(k), frame) if k else SmoothConvex(n, lambda p: np.zeros(len(p)))
    half = radius * math.sqrt(n)
    box = Box.cube(n, half)

    def tent1(t):
        return np.prod(np.clip(1 - (t / radius) ** 2, 0, None), axis=-1)

    phi = TestFunction(lambda p: tent1(p @ frame.columns) * tent1(p @ comp.columns), box, "product")
    num = integrate(psi_tau(tau, f, box, grid), phi)

    def factor(d):
        if d == 0:
            return 1.0
        sub = Box.cube(d, radius)
        pts = sub.midpoints(grid).reshape(-1, d)
        return float(tent1(pts).sum() * sub.cell_volume(grid))

    return num / (factor(k) * factor(n - k))


# Fourier factorization -----------------------------------------------------

class GWCheck(NamedTuple):
    lhs: complex
    rhs: complex
    rel_error: float


def gw_lhs(tau: ConstantForm, phi: TestFunction, xs: np.ndarray, grid=64) -> complex:
    """Polarized value (1/k!) sum_S (-1)^(k-|S|) int phi P_tau(D^2 sum_{i in S} exp(-<x_i, .>))."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    k = len(xs)
    box = phi.support
    total = 0j
    for r in range(1, k + 1):
        for S in itertools.combinations(range(k), r):
            g = smooth_sum([exp_linear(xs[i]) for i in S])
            total += (-1) ** (k - r) * integrate(psi_tau(tau, g, box, grid), phi)
    return total / math.factorial(k)


def gw_fourier_check(tau: ConstantForm, phi: TestFunction, xs: np.ndarray, grid=64, rhs_grid=None) -> GWCheck:
    """Compare the polarized valuation with ((-1)^k/k!) Q_tau(i x) F(phi)[i sum x].

    The right side is evaluated on a finer grid (default 8x) so the reported error is
    dominated by the quadrature of the left side.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    k = tau.fiber_degree()
    if len(xs) != k:
        raise ValueError(f"need {k} vectors")
    box = phi.support
    corners = np.array(list(itertools.product(*zip(box.lo, box.hi))))
    if np.abs(corners @ xs.T).max() * max(1, k) > 600:
        raise ValueError("exponentials overflow on the support of phi")
    rhs_grid = rhs_grid or 8 * (grid if np.isscalar(grid) else max(grid))
    lhs = gw_lhs(tau, phi, xs, grid)
    q = complex(q_eval(tau, 1j * xs))
    rhs = (-1) ** k / math.factorial(k) * q * fourier_laplace(phi, 1j * xs.sum(axis=0), rhs_grid)
    denom = abs(rhs)
    rel = abs(lhs - rhs) / denom if denom > 0 else abs(lhs - rhs)
    return GWCheck(lhs, rhs, float(rel))


# smoothing consistency -----------------------------------------------------

class AtomComparison(NamedTuple):
    x: np.ndarray
    pl_mass: float
    smooth_mass: float
    half_width: float

    @property
    def rel_error(self) -> float:
        return abs(self.smooth_mass - self.pl_mass) / abs(self.pl_mass)


def smoothing_comparison(f: MaxAffine, window: Box, beta: float, grid=128, width: float = 20.0) -> list[AtomComparison]:
    """Atom masses of MA(f) against box masses of MA(softmax_beta f).

    Around each atom the box half-width is ``width / (beta * r)`` with r = 2 area / perimeter
    of the active gradient hull (n = 2), the length scale on which the softmax spreads the atom.
    """
    if f.n != 2:
        raise ValueError("the smoothing window rule is set up for n = 2")
    mu = ma_pl(f, window)
    g = softmax_smoothing(f, beta)
    out = []
    for x, m in zip(mu.atoms, mu.masses):
        v = f.affine_values(x)
        act = f.slopes[v >= v.max() - 1e-9 * max(1.0, abs(v.max()))]
        hull = act[ConvexHull(act).vertices]
        perim = float(np.linalg.norm(np.roll(hull, -1, axis=0) - hull, axis=1).sum())
        r = 2 * m.real / perim
        hw = width / (beta * r)
        box = Box.cube(2, hw, x)
        out.append(AtomComparison(x, m.real, mass_on_box(ma_c2(g, box, grid), box).real, hw))
    return out

