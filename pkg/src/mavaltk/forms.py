"""Constant complex differential forms on R^n x (R^n)*.

A monomial ``dx_I ^ dy_J`` is stored as a pair of strictly increasing
1-based index tuples, dx block first.  Generators are numbered
``dx_1..dx_n -> 0..n-1`` and ``dy_1..dy_n -> n..2n-1`` so that the canonical
order of a monomial is simply the sorted order of its generator word.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np


class FormMonomial(NamedTuple):
    dx: tuple[int, ...]
    dy: tuple[int, ...]

    @property
    def bidegree(self) -> tuple[int, int]:
        return len(self.dx), len(self.dy)


def _sort_sign(word: list[int]) -> tuple[int, list[int]]:
    """Sign of the permutation sorting ``word``; 0 if a generator repeats."""
    if len(set(word)) != len(word):
        return 0, []
    inversions = sum(1 for i, j in itertools.combinations(range(len(word)), 2) if word[i] > word[j])
    return (-1 if inversions % 2 else 1), sorted(word)


def _monomial_word(m: FormMonomial, n: int) -> list[int]:
    return [i - 1 for i in m.dx] + [n + j - 1 for j in m.dy]


def _word_monomial(word: Iterable[int], n: int) -> FormMonomial:
    dx = tuple(g + 1 for g in word if g < n)
    dy = tuple(g - n + 1 for g in word if g >= n)
    return FormMonomial(dx, dy)


class ConstantForm:
    """Finite linear combination of form monomials with complex coefficients.

    Instances are treated as immutable; every operation returns a new form.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[FormMonomial, complex] | None = None):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.n = int(n)
        clean: dict[FormMonomial, complex] = {}
        for key, c in (terms or {}).items():
            m = FormMonomial(tuple(key[0]), tuple(key[1]))
            for idx in (m.dx, m.dy):
                if list(idx) != sorted(set(idx)) or any(i < 1 or i > n for i in idx):
                    raise ValueError(f"non-canonical monomial {key} for n={n}")
            c = complex(c)
            if c != 0:
                clean[m] = clean.get(m, 0) + c
        self._terms = {m: c for m, c in clean.items() if c != 0}

    # construction helpers
    @classmethod
    def monomial(cls, n: int, dx: Iterable[int] = (), dy: Iterable[int] = (), coeff: complex = 1.0) -> ConstantForm:
        """Build ``coeff * dx_{dx} ^ dy_{dy}``; indices may be in any order (sign is applied)."""
        word = [i - 1 for i in dx] + [n + j - 1 for j in dy]
        sign, word = _sort_sign(word)
        if sign == 0:
            return cls(n)
        return cls(n, {_word_monomial(word, n): sign * coeff})

    @classmethod
    def zero(cls, n: int) -> ConstantForm:
        return cls(n)

    @property
    def terms(self) -> dict[FormMonomial, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[FormMonomial, complex]]:
        return iter(sorted(self._terms.items()))

    def coefficient(self, dx: Iterable[int] = (), dy: Iterable[int] = ()) -> complex:
        return self._terms.get(FormMonomial(tuple(dx), tuple(dy)), 0j)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self._terms.values())

    def bidegrees(self) -> set[tuple[int, int]]:
        return {m.bidegree for m in self._terms}

    def bidegree(self) -> tuple[int, int]:
        """The common bidegree; raises if the form mixes bidegrees or is zero."""
        degs = self.bidegrees()
        if len(degs) != 1:
            raise ValueError(f"form is not homogeneous (bidegrees {sorted(degs)})")
        return degs.pop()

    def fiber_degree(self) -> int:
        """The ``k`` of bidegree ``(n-k, k)``; validates the total degree."""
        p, k = self.bidegree()
        if p + k != self.n:
            raise ValueError(f"bidegree {(p, k)} is not of the form (n-k, k) for n={self.n}")
        return k

    # arithmetic
    def __add__(self, other: ConstantForm) -> ConstantForm:
        _same_n(self, other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return ConstantForm(self.n, out)

    def __neg__(self) -> ConstantForm:
        return ConstantForm(self.n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other: ConstantForm) -> ConstantForm:
        return self + (-other)

    def __mul__(self, s: complex) -> ConstantForm:
        return ConstantForm(self.n, {m: s * c for m, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, s: complex) -> ConstantForm:
        return self * (1.0 / s)

    def __xor__(self, other: ConstantForm) -> ConstantForm:
        return wedge(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstantForm):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def allclose(self, other: ConstantForm, tol: float = 1e-12) -> bool:
        _same_n(self, other)
        return (self - other).is_zero(tol)

    def chop(self, tol: float = 1e-13) -> ConstantForm:
        return ConstantForm(self.n, {m: c for m, c in self._terms.items() if abs(c) > tol})

    def __repr__(self) -> str:
        if not self._terms:
            return f"ConstantForm(n={self.n}, 0)"
        parts = []
        for m, c in self.items():
            factors = [f"dx{i}" for i in m.dx] + [f"dy{j}" for j in m.dy]
            parts.append(f"({c:.6g})" + ("*" + "^".join(factors) if factors else ""))
        return f"ConstantForm(n={self.n}, " + " + ".join(parts) + ")"

    # vectors in the monomial basis of a fixed bidegree
    def to_vector(self, bidegree: tuple[int, int]) -> np.ndarray:
        basis = monomial_basis(self.n, *bidegree)
        index = {m: i for i, m in enumerate(basis)}
        v = np.zeros(len(basis), dtype=complex)
        for m, c in self._terms.items():
            if m.bidegree != tuple(bidegree):
                raise ValueError(f"monomial {m} not of bidegree {bidegree}")
            v[index[m]] = c
        return v

    @classmethod
    def from_vector(cls, n: int, bidegree: tuple[int, int], v: np.ndarray) -> ConstantForm:
        basis = monomial_basis(n, *bidegree)
        return cls(n, {m: complex(c) for m, c in zip(basis, np.asarray(v))})

    # JSON
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"dx": list(m.dx), "dy": list(m.dy), "re": c.real, "im": c.imag} for m, c in self.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ConstantForm:
        n = int(data["n"])
        out = cls(n)
        for t in data.get("terms", []):
            out = out + cls.monomial(n, t.get("dx", []), t.get("dy", []), complex(t.get("re", 0.0), t.get("im", 0.0)))
        return out


def _same_n(a: ConstantForm, b: ConstantForm) -> None:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


@lru_cache(maxsize=None)
def monomial_basis(n: int, p: int, q: int) -> tuple[FormMonomial, ...]:
    """Canonical monomials with ``p`` dx factors and ``q`` dy factors."""
    idx = range(1, n + 1)
    return tuple(
        FormMonomial(I, J) for I in itertools.combinations(idx, p) for J in itertools.combinations(idx, q)
    )


def wedge(a: ConstantForm, b: ConstantForm) -> ConstantForm:
    _same_n(a, b)
    n = a.n
    out: dict[FormMonomial, complex] = {}
    for ma, ca in a._terms.items():
        wa = _monomial_word(ma, n)
        for mb, cb in b._terms.items():
            sign, word = _sort_sign(wa + _monomial_word(mb, n))
            if sign:
                m = _word_monomial(word, n)
                out[m] = out.get(m, 0) + sign * ca * cb
    return ConstantForm(n, out)


def symplectic_form(n: int) -> ConstantForm:
    """sum_i dx_i ^ dy_i."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ConstantForm(n, {FormMonomial((i,), (i,)): 1.0 for i in range(1, n + 1)})


def interior(v: np.ndarray, tau: ConstantForm) -> ConstantForm:
    """Contraction with the constant vector ``v`` (length 2n; base then fiber components)."""
    n = tau.n
    v = np.asarray(v)
    if v.shape != (2 * n,):
        raise ValueError(f"vector must have length {2 * n}")
    out: dict[FormMonomial, complex] = {}
    for m, c in tau._terms.items():
        word = _monomial_word(m, n)
        for pos, g in enumerate(word):
            if v[g] == 0:
                continue
            rest = _word_monomial(word[:pos] + word[pos + 1:], n)
            out[rest] = out.get(rest, 0) + (-1) ** pos * v[g] * c
    return ConstantForm(n, out)


def one_form(dx: np.ndarray | None = None, dy: np.ndarray | None = None, n: int | None = None) -> ConstantForm:
    """sum_i dx_coef[i] dx_i + sum_j dy_coef[j] dy_j."""
    if n is None:
        n = len(dx if dx is not None else dy)
    terms: dict[FormMonomial, complex] = {}
    if dx is not None:
        for i, c in enumerate(dx, 1):
            terms[FormMonomial((i,), ())] = c
    if dy is not None:
        for j, c in enumerate(dy, 1):
            terms[FormMonomial((), (j,))] = c
    return ConstantForm(n, terms)


@lru_cache(maxsize=None)
def lefschetz_matrix(n: int, p: int, q: int) -> np.ndarray:
    """Matrix of ``omega ^ .`` from bidegree (p, q) to (p+1, q+1), integer entries."""
    src = monomial_basis(n, p, q)
    dst = monomial_basis(n, p + 1, q + 1)
    index = {m: i for i, m in enumerate(dst)}
    omega = symplectic_form(n)
    mat = np.zeros((len(dst), len(src)))
    for j, m in enumerate(src):
        img = wedge(omega, ConstantForm(n, {m: 1.0}))
        for mm, c in img._terms.items():
            mat[index[mm], j] = c.real
    mat.flags.writeable = False
    return mat


def is_primitive(tau: ConstantForm, tol: float = 0.0) -> bool:
    if not tau.is_zero():
        tau.fiber_degree()
    return wedge(symplectic_form(tau.n), tau).is_zero(tol)


def lefschetz_project(tau: ConstantForm) -> tuple[ConstantForm, ConstantForm]:
    """Split ``tau = primitive + omega ^ sigma``; returns ``(primitive, omega ^ sigma)``."""
    n = tau.n
    if tau.is_zero():
        return tau, tau
    k = tau.fiber_degree()
    p = n - k
    if k == 0 or k == n:
        # no room for an omega multiple: every form of this bidegree is primitive
        return tau, ConstantForm.zero(n)
    l1 = lefschetz_matrix(n, p - 1, k - 1)
    l2 = lefschetz_matrix(n, p, k)
    square = l2 @ l1
    if np.linalg.matrix_rank(square) != square.shape[1]:
        raise ArithmeticError("omega^2 is not injective on the complementary bidegree")
    rhs = l2 @ tau.to_vector((p, k))
    sigma, *_ = np.linalg.lstsq(square.astype(complex), rhs, rcond=None)
    if np.linalg.norm(square @ sigma - rhs) > 1e-9 * max(1.0, np.linalg.norm(rhs)):
        raise ArithmeticError("Lefschetz system is inconsistent")
    remainder = ConstantForm.from_vector(n, (p, k), l1 @ sigma).chop(1e-14)
    primitive = (tau - remainder).chop(1e-14)
    return primitive, remainder


@lru_cache(maxsize=None)
def _primitive_basis_matrix(n: int, k: int) -> np.ndarray:
    import sympy

    p = n - k
    mat = lefschetz_matrix(n, p, k)
    if mat.shape[0] == 0:
        null = np.eye(mat.shape[1])
    else:
        vecs = sympy.Matrix(mat.astype(int)).nullspace()
        null = np.array([[float(x) for x in v] for v in vecs]).T if vecs else np.zeros((mat.shape[1], 0))
    null.flags.writeable = False
    return null


def primitive_basis(n: int, k: int) -> list[ConstantForm]:
    """A rational basis of the primitive forms of bidegree (n-k, k)."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    null = _primitive_basis_matrix(n, k)
    return [ConstantForm.from_vector(n, (n - k, k), null[:, j]) for j in range(null.shape[1])]


def primitive_dimension(n: int, k: int) -> int:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return math.comb(n, k) ** 2 - _comb(n, k - 1) * _comb(n, n - k - 1)


def lefschetz_kernel_dimension(n: int, k: int) -> int:
    mat = lefschetz_matrix(n, n - k, k)
    if mat.size == 0:
        return mat.shape[1]
    return mat.shape[1] - int(np.linalg.matrix_rank(mat))


def _comb(n: int, r: int) -> int:
    return math.comb(n, r) if 0 <= r <= n else 0


def _minor(m: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]) -> complex:
    if not rows:
        return 1.0
    return np.linalg.det(m[np.ix_([r - 1 for r in rows], [c - 1 for c in cols])])


def _linear_image(n: int, mat: np.ndarray, idx: tuple[int, ...]) -> dict[tuple[int, ...], complex]:
    """Image of ``d_{idx}`` under ``d_i -> sum_j mat[i, j] d_j``, as {sorted L: coefficient}."""
    out = {}
    for cols in itertools.combinations(range(1, n + 1), len(idx)):
        c = _minor(mat, idx, cols)
        if c != 0:
            out[cols] = c
    return out


def gl_pullback(g: np.ndarray, tau: ConstantForm) -> ConstantForm:
    """Pullback by ``(x, y) -> (g^{-1} x, g^T y)``: dx transforms by g^{-1}, dy by g^T.

    Composition: ``gl_pullback(g @ h, tau) == gl_pullback(g, gl_pullback(h, tau))``.
    """
    g = np.asarray(g, dtype=float)
    n = tau.n
    if g.shape != (n, n):
        raise ValueError(f"g must be {n}x{n}")
    if abs(np.linalg.det(g)) < 1e-14 * max(1.0, np.abs(g).max()) ** n:
        raise ValueError("g is singular")
    ginv = np.linalg.inv(g)
    gt = g.T
    out: dict[FormMonomial, complex] = {}
    for m, c in tau._terms.items():
        for L, cx in _linear_image(n, ginv, m.dx).items():
            for M, cy in _linear_image(n, gt, m.dy).items():
                key = FormMonomial(L, M)
                out[key] = out.get(key, 0) + c * cx * cy
    return ConstantForm(n, out)
