"""Polynomials attached to primitive forms and the spaces spanned by k x k minors.

Two variable sets are used throughout:

* ``sym_variables(n)``: the upper-triangular entries ``a{i}{j}`` (i <= j) of a
  symmetric n x n matrix, for polynomials on symmetric matrices;
* ``tuple_variables(n, k)``: coordinates ``w{i}_{a}`` of k vectors in C^n,
  for polynomials on k-tuples.

Membership and rank questions are answered by least squares on random
evaluation points drawn from a fixed seed.
"""
from __future__ import annotations

import enum
import itertools
import math
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .forms import ConstantForm, FormMonomial, _sort_sign, interior, is_primitive, one_form, primitive_basis
from .poly import MultiPoly, leibniz_det

EVAL_SEED = 20240917
SPAN_RTOL = 1e-8


class Span(enum.Enum):
    NOT_IN_SPAN = "NOT_IN_SPAN"

    def __bool__(self) -> bool:
        return False


NOT_IN_SPAN = Span.NOT_IN_SPAN


# variables -----------------------------------------------------------------

@lru_cache(maxsize=None)
def sym_variables(n: int) -> tuple[str, ...]:
    return tuple(f"a{i}{j}" for i in range(1, n + 1) for j in range(i, n + 1))


@lru_cache(maxsize=None)
def tuple_variables(n: int, k: int) -> tuple[str, ...]:
    return tuple(f"w{i}_{a}" for i in range(1, k + 1) for a in range(1, n + 1))


def _sym_index(n: int) -> dict[tuple[int, int], int]:
    out = {}
    pos = 0
    for i in range(n):
        for j in range(i, n):
            out[(i, j)] = out[(j, i)] = pos
            pos += 1
    return out


def sym_to_vector(mats: np.ndarray) -> np.ndarray:
    """Upper-triangular entries of symmetric matrices ``(..., n, n)`` in variable order."""
    mats = np.asarray(mats)
    n = mats.shape[-1]
    iu = np.triu_indices(n)
    return mats[..., iu[0], iu[1]]


def vector_to_sym(vec: np.ndarray, n: int) -> np.ndarray:
    vec = np.asarray(vec)
    out = np.zeros(vec.shape[:-1] + (n, n), dtype=vec.dtype)
    iu = np.triu_indices(n)
    out[..., iu[0], iu[1]] = vec
    out[..., iu[1], iu[0]] = vec
    return out


def detect_space(p: MultiPoly) -> tuple[str, int, int | None]:
    """Classify ``p.variables``: ("sym", n, None) or ("tuple", n, k)."""
    names = p.variables
    for n in range(1, 10):
        if names == sym_variables(n):
            return "sym", n, None
        for k in range(1, n + 1):
            if names == tuple_variables(n, k):
                return "tuple", n, k
    raise ValueError("polynomial is not over symmetric-matrix or vector-tuple variables")


def check_symmetric(q: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Validate and exactly symmetrize a stack of matrices."""
    q = np.asarray(q)
    if q.shape[-1] != q.shape[-2]:
        raise ValueError("matrix must be square")
    qt = np.swapaxes(q, -1, -2)
    scale = max(1.0, float(np.abs(q).max(initial=0.0)))
    if np.abs(q - qt).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (q + qt)


def _rng() -> np.random.Generator:
    return np.random.default_rng(EVAL_SEED)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# P_tau ---------------------------------------------------------------------

def _p_terms(tau: ConstantForm) -> list[tuple[complex, tuple[int, ...], tuple[int, ...]]]:
    """(coefficient * sign, rows J, cols I^c) for every monomial of tau."""
    n = tau.n
    out = []
    for m, c in tau.items():
        comp = tuple(i for i in range(1, n + 1) if i not in m.dx)
        sign, _ = _sort_sign([i - 1 for i in m.dx] + [i - 1 for i in comp])
        out.append((c * sign, m.dy, comp))
    return out


def p_eval(tau: ConstantForm, q: np.ndarray) -> np.ndarray | complex:
    """Coefficient of dx_1^...^dx_n after substituting dy_j -> sum_l q[j, l] dx_l.

    ``q`` may be a single matrix or a stack ``(..., n, n)``.
    """
    q = np.asarray(q)
    if q.shape[-2:] != (tau.n, tau.n):
        raise ValueError(f"expected {tau.n}x{tau.n} matrices, got {q.shape}")
    if not tau.is_zero():
        tau.fiber_degree()
    q = check_symmetric(q)
    out = np.zeros(q.shape[:-2], dtype=complex)
    for c, rows, cols in _p_terms(tau):
        if not rows:
            out = out + c
            continue
        sub = q[..., [r - 1 for r in rows], :][..., [s - 1 for s in cols]]
        with np.errstate(divide="ignore", invalid="ignore"):  # exactly singular blocks give 0
            out = out + c * np.linalg.det(sub)
    return out if out.ndim else complex(out)


def _sym_entry_polys(n: int) -> list[list[MultiPoly]]:
    names = sym_variables(n)
    idx = _sym_index(n)
    return [[MultiPoly.variable(names, idx[(i, j)]) for j in range(n)] for i in range(n)]


def p_of_form(tau: ConstantForm) -> MultiPoly:
    """P_tau as a polynomial in ``sym_variables(n)``."""
    n = tau.n
    names = sym_variables(n)
    if tau.is_zero():
        return MultiPoly(names)
    tau.fiber_degree()
    entries = _sym_entry_polys(n)
    out = MultiPoly(names)
    for c, rows, cols in _p_terms(tau):
        sub = [[entries[r - 1][s - 1] for s in cols] for r in rows]
        out = out + c * leibniz_det(sub, names)
    return out.chop(1e-13)


# Phi and Q_tau -------------------------------------------------------------

def phi_map(ws: np.ndarray) -> np.ndarray:
    """sum_i w_i w_i^T for the rows ``w_i`` of ``ws`` (bilinear, no conjugation)."""
    ws = np.atleast_2d(np.asarray(ws))
    return np.einsum("...ia,...ib->...ab", ws, ws)


def _require_primitive(tau: ConstantForm) -> int:
    if tau.is_zero():
        return 0
    k = tau.fiber_degree()
    if not is_primitive(tau, tol=1e-12 * max(1.0, max(abs(c) for _, c in tau.items()))):
        raise ValueError("form is not primitive")
    return k


def q_eval(tau: ConstantForm, ws: np.ndarray) -> np.ndarray | complex:
    """Q_tau at k-tuples ``ws`` of shape ``(..., k, n)``; equals P_tau(Phi(ws))."""
    return p_eval(tau, phi_map(ws))


def q_of_form(tau: ConstantForm) -> MultiPoly:
    """Q_tau = P_tau o Phi as a polynomial in ``tuple_variables(n, k)``.

    The normalization matches the iterated Lie derivative, see ``q_lie_oracle``.
    """
    k = _require_primitive(tau)
    n = tau.n
    if tau.is_zero():
        return MultiPoly(tuple_variables(n, max(k, 1)))
    wnames = tuple_variables(n, k) if k else ()
    if k == 0:
        c = tau.coefficient(tuple(range(1, n + 1)), ())
        return MultiPoly.constant(wnames, c)
    w = [[MultiPoly.variable(wnames, i * n + a) for a in range(n)] for i in range(k)]
    subs = []
    for a in range(n):
        for b in range(a, n):
            entry = MultiPoly(wnames)
            for i in range(k):
                entry = entry + w[i][a] * w[i][b]
            subs.append(entry)
    return p_of_form(tau).compose(subs).chop(1e-12)


def q_lie_oracle(tau: ConstantForm, ws: np.ndarray) -> complex:
    """Q_tau(w_1..w_k) via iterated Lie derivatives along X_j = <w_j,x> sum_l w_{j,l} d/dy_l.

    For a constant form beta, L_X beta = d(<w,x> i_Y beta) = alpha_w ^ i_Y beta with
    Y = sum_l w_l d/dy_l and alpha_w = sum_a w_a dx_a, so every step stays constant.
    """
    n = tau.n
    ws = np.asarray(ws, dtype=complex).reshape(-1, n) if np.size(ws) else np.zeros((0, n))
    beta = tau
    for w in ws[::-1]:
        y = np.concatenate([np.zeros(n), w])
        beta = one_form(dx=w, n=n) ^ interior(y, beta)
    return beta.coefficient(tuple(range(1, n + 1)), ())


# minor spaces --------------------------------------------------------------

class MinorBasis(NamedTuple):
    polys: list[MultiPoly]
    labels: list[tuple]
    rank: int


def _numeric_rank(mat: np.ndarray, rtol: float = SPAN_RTOL) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def span_rank(polys: Sequence[MultiPoly], samples: int | None = None) -> int:
    """Numeric rank of the span of ``polys`` from random complex evaluations."""
    if not polys:
        return 0
    nv = len(polys[0].variables)
    rng = _rng()
    m = samples or 3 * len(polys) + 10
    pts = _complex_normal(rng, (m, nv))
    mat = np.stack([p.evaluate(pts) for p in polys], axis=1)
    return _numeric_rank(mat)


@lru_cache(maxsize=None)
def minor_basis(n: int, k: int) -> MinorBasis:
    """The k x k minors det(A[I, J]) of a symmetric matrix, I <= J, plus the rank of their span.

    ``k = 0`` gives the constant 1.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    names = sym_variables(n)
    if k == 0:
        return MinorBasis([MultiPoly.constant(names, 1.0)], [((), ())], 1)
    entries = _sym_entry_polys(n)
    subsets = list(itertools.combinations(range(1, n + 1), k))
    polys, labels = [], []
    for a, rows in enumerate(subsets):
        for cols in subsets[a:]:
            polys.append(leibniz_det([[entries[r - 1][c - 1] for c in cols] for r in rows], names))
            labels.append((rows, cols))
    return MinorBasis(polys, labels, span_rank(polys))


@lru_cache(maxsize=None)
def tuple_minors(n: int, k: int) -> MinorBasis:
    """k x k minors of the n x k matrix with columns w_1..w_k (rows I, |I| = k)."""
    names = tuple_variables(n, k)
    w = [[MultiPoly.variable(names, i * n + a) for a in range(n)] for i in range(k)]
    polys, labels = [], []
    for rows in itertools.combinations(range(1, n + 1), k):
        polys.append(leibniz_det([[w[i][r - 1] for i in range(k)] for r in rows], names))
        labels.append(rows)
    return MinorBasis(polys, labels, span_rank(polys))


@lru_cache(maxsize=None)
def minor_product_basis(n: int, k: int) -> MinorBasis:
    """Quadratic products Delta_a * Delta_b (a <= b) of the minors of ``tuple_minors``."""
    base = tuple_minors(n, k)
    polys, labels = [], []
    for a in range(len(base.polys)):
        for b in range(a, len(base.polys)):
            polys.append(base.polys[a] * base.polys[b])
            labels.append((a, b))
    return MinorBasis(polys, labels, span_rank(polys))


def _solve_in_span(polys: Sequence[MultiPoly], p: MultiPoly) -> np.ndarray | Span:
    rng = _rng()
    m = 3 * len(polys) + 10
    pts = _complex_normal(rng, (m, len(p.variables)))
    mat = np.stack([b.evaluate(pts) for b in polys], axis=1)
    rhs = p.evaluate(pts)
    norm = np.linalg.norm(rhs)
    if norm == 0:
        return np.zeros(len(polys), dtype=complex)
    coef, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    if np.linalg.norm(mat @ coef - rhs) > SPAN_RTOL * norm:
        return NOT_IN_SPAN
    return coef


def express_in_minors(p: MultiPoly, k: int) -> np.ndarray | Span:
    """Coefficients of ``p`` in ``minor_basis`` (symmetric-matrix variables) or in
    ``minor_product_basis`` (vector-tuple variables); NOT_IN_SPAN otherwise."""
    kind, n, kk = detect_space(p)
    if kind == "sym":
        if k > n:
            return NOT_IN_SPAN
        basis, degree = minor_basis(n, k), k
    else:
        if kk != k:
            return NOT_IN_SPAN
        basis, degree = minor_product_basis(n, k), 2 * k
    if not p.is_zero() and p.degrees() != {degree}:
        return NOT_IN_SPAN
    return _solve_in_span(basis.polys, p)


# inverse maps --------------------------------------------------------------

def _solve_over_primitive(n: int, k: int, target: np.ndarray, evaluate, real: bool = False) -> ConstantForm | Span:
    basis = primitive_basis(n, k)
    mat = np.stack([evaluate(b) for b in basis], axis=1)
    norm = np.linalg.norm(target)
    if norm == 0:
        return ConstantForm.zero(n)
    coef, *_ = np.linalg.lstsq(mat, target, rcond=None)
    if np.linalg.norm(mat @ coef - target) > SPAN_RTOL * norm:
        return NOT_IN_SPAN
    if real and np.abs(coef.imag).max() <= 1e-9 * max(1.0, float(np.abs(coef).max())):
        coef = coef.real
    out = ConstantForm.zero(n)
    for c, b in zip(coef, basis):
        out = out + c * b
    return out.chop(1e-12 * max(1.0, float(np.abs(coef).max())))


def _real_coefficients(p: MultiPoly) -> bool:
    return all(c.imag == 0 for c in p.terms.values())


def form_from_minors(p: MultiPoly) -> ConstantForm | Span:
    """The unique primitive tau of bidegree (n-k, k) with P_tau = p."""
    kind, n, _ = detect_space(p)
    if kind != "sym":
        raise ValueError("expected a polynomial on symmetric matrices")
    if p.is_zero():
        return ConstantForm.zero(n)
    if not p.is_homogeneous():
        return NOT_IN_SPAN
    k = p.degree()
    if k > n or express_in_minors(p, k) is NOT_IN_SPAN:
        return NOT_IN_SPAN
    rng = _rng()
    mats = _complex_normal(rng, (4 * math.comb(n, k) ** 2 + 10, n, n))
    mats = mats + np.swapaxes(mats, -1, -2)
    target = p.evaluate(sym_to_vector(mats))
    return _solve_over_primitive(n, k, target, lambda b: p_eval(b, mats), _real_coefficients(p))


def form_from_q(q: MultiPoly) -> ConstantForm | Span:
    """The unique primitive tau with Q_tau = q (q in the span of products of minors)."""
    kind, n, k = detect_space(q)
    if kind != "tuple":
        raise ValueError("expected a polynomial on vector tuples")
    if express_in_minors(q, k) is NOT_IN_SPAN:
        return NOT_IN_SPAN
    rng = _rng()
    ws = _complex_normal(rng, (4 * math.comb(n, k) ** 2 + 10, k, n))
    target = q.evaluate(ws.reshape(len(ws), -1))
    return _solve_over_primitive(n, k, target, lambda b: q_eval(b, ws), _real_coefficients(q))


def elementary_symmetric_poly(n: int, k: int) -> MultiPoly:
    """Sum of the principal k x k minors, i.e. e_k of the eigenvalues."""
    names = sym_variables(n)
    if k == 0:
        return MultiPoly.constant(names, 1.0)
    entries = _sym_entry_polys(n)
    out = MultiPoly(names)
    for s in itertools.combinations(range(n), k):
        out = out + leibniz_det([[entries[i][j] for j in s] for i in s], names)
    return out


@lru_cache(maxsize=None)
def _hessian_form_cached(n: int, k: int) -> ConstantForm:
    tau = form_from_minors(elementary_symmetric_poly(n, k))
    assert isinstance(tau, ConstantForm)
    return tau


def hessian_form(n: int, k: int) -> ConstantForm:
    """The primitive form whose polynomial is e_k; generates the k-th Hessian measure."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return _hessian_form_cached(n, k)


# sums of squares -----------------------------------------------------------

class Square(NamedTuple):
    coefficient: complex
    weights: np.ndarray  # over tuple_minors(n, k).polys


def nonneg_decomposition(q: MultiPoly) -> list[Square] | Span:
    """Write q in the span of products of minors as sum c_i * (sum_a weights_ia Delta_a)^2.

    Cross terms use Delta_a Delta_b = (Delta_a + Delta_b)^2 / 4 - (Delta_a - Delta_b)^2 / 4.
    Coefficients are real whenever q has real coefficients.
    """
    kind, n, k = detect_space(q)
    if kind != "tuple":
        raise ValueError("expected a polynomial on vector tuples")
    coef = express_in_minors(q, k)
    if coef is NOT_IN_SPAN:
        return NOT_IN_SPAN
    basis = minor_product_basis(n, k)
    size = len(tuple_minors(n, k).polys)
    scale = max(1.0, float(np.abs(coef).max(initial=0.0)))
    if all(abs(c.imag) <= 1e-10 * scale for c in q.terms.values()):
        coef = coef.real
    out: list[Square] = []
    for c, (a, b) in zip(coef, basis.labels):
        if abs(c) <= 1e-12 * scale:
            continue
        if a == b:
            out.append(Square(c, np.eye(size)[a]))
        else:
            e_a, e_b = np.eye(size)[a], np.eye(size)[b]
            out.append(Square(c / 4, e_a + e_b))
            out.append(Square(-c / 4, e_a - e_b))
    return out


def square_poly(weights: np.ndarray, n: int, k: int) -> MultiPoly:
    minors = tuple_minors(n, k).polys
    lin = MultiPoly(tuple_variables(n, k))
    for w, d in zip(weights, minors):
        if w != 0:
            lin = lin + w * d
    return lin * lin


def expand_squares(squares: Sequence[Square], n: int, k: int) -> MultiPoly:
    out = MultiPoly(tuple_variables(n, k))
    for sq in squares:
        out = out + sq.coefficient * square_poly(sq.weights, n, k)
    return out


def q_span_rank(n: int, k: int, samples: int | None = None) -> int:
    """Rank of span{Q_tau : tau in a basis of primitive forms}, from numeric evaluations."""
    basis = primitive_basis(n, k)
    if k == 0:
        return _numeric_rank(np.array([[b.coefficient(tuple(range(1, n + 1)), ())] for b in basis]).T)
    rng = _rng()
    ws = _complex_normal(rng, (samples or 3 * len(basis) + 10, k, n))
    return _numeric_rank(np.stack([q_eval(b, ws) for b in basis], axis=1))


def principal_minor_form(n: int, rows: Sequence[int]) -> ConstantForm:
    """dx_{I^c} ^ dy_I with I = rows (1-based); primitive, P = +-det(Q[I, I])."""
    rows = tuple(sorted(rows))
    comp = tuple(i for i in range(1, n + 1) if i not in rows)
    return ConstantForm.monomial(n, comp, rows)
