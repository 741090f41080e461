"""Convex functions on R^n: max-affine, smooth with Hessian, quadratic; frames and polytopes."""
from __future__ import annotations

import enum
import math
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError


class Convexity(enum.Enum):
    NOT_CONVEX = "NOT_CONVEX"

    def __bool__(self) -> bool:
        return False


NOT_CONVEX = Convexity.NOT_CONVEX


def _points(x: np.ndarray, n: int) -> tuple[np.ndarray, tuple[int, ...]]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise ValueError(f"points must have trailing dimension {n}, got {x.shape}")
    return x.reshape(-1, n), x.shape[:-1]


# max-affine ----------------------------------------------------------------

class MaxAffine:
    """f(x) = max_i <a_i, x> + b_i."""

    def __init__(self, slopes: np.ndarray, offsets: np.ndarray):
        slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
        offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
        if slopes.shape[0] == 0:
            raise ValueError("need at least one affine piece")
        if offsets.shape != (slopes.shape[0],):
            raise ValueError("one offset per slope")
        self.slopes = slopes
        self.offsets = offsets
        self.slopes.flags.writeable = False
        self.offsets.flags.writeable = False

    @property
    def n(self) -> int:
        return self.slopes.shape[1]

    @property
    def pieces(self) -> list[tuple[np.ndarray, float]]:
        return [(a.copy(), float(b)) for a, b in zip(self.slopes, self.offsets)]

    def __len__(self) -> int:
        return len(self.offsets)

    def affine_values(self, x: np.ndarray) -> np.ndarray:
        pts, shape = _points(x, self.n)
        return (pts @ self.slopes.T + self.offsets).reshape(shape + (len(self),))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.affine_values(x).max(axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of a maximal piece (a subgradient where several are active)."""
        return self.slopes[self.affine_values(x).argmax(axis=-1)]

    def scaled(self, t: float) -> MaxAffine:
        if t < 0:
            raise ValueError("scaling a convex function needs t >= 0")
        return MaxAffine(t * self.slopes, t * self.offsets)

    def plus_affine(self, a: np.ndarray, b: float = 0.0) -> MaxAffine:
        return MaxAffine(self.slopes + np.asarray(a, dtype=float), self.offsets + b)

    def translated(self, x0: np.ndarray) -> MaxAffine:
        """x -> f(x - x0)."""
        return MaxAffine(self.slopes, self.offsets - self.slopes @ np.asarray(x0, dtype=float))

    def compose_linear(self, g: np.ndarray) -> MaxAffine:
        """x -> f(g x)."""
        return MaxAffine(self.slopes @ np.asarray(g, dtype=float), self.offsets)

    def __add__(self, other):
        if isinstance(other, MaxAffine):
            if other.n != self.n:
                raise ValueError("dimension mismatch")
            a = (self.slopes[:, None, :] + other.slopes[None, :, :]).reshape(-1, self.n)
            b = (self.offsets[:, None] + other.offsets[None, :]).ravel()
            return MaxAffine(a, b).pruned()
        return MaxAffine(self.slopes, self.offsets + float(other))

    __radd__ = __add__

    def pruned(self, tol: float = 1e-10) -> MaxAffine:
        """Drop duplicate pieces and pieces that never attain the maximum."""
        keyed: dict[tuple, float] = {}
        step = tol * max(float(np.abs(self.slopes).max()), np.finfo(float).tiny)
        for a, b in zip(self.slopes, self.offsets):
            key = tuple(np.round(a / step)) if tol else tuple(a)
            if key not in keyed or b > keyed[key][1]:
                keyed[key] = (a, b)
        items = list(keyed.values())
        alive = list(range(len(items)))
        for p in range(len(items)):
            # compare only with pieces still present, so one of a near-equal group survives
            others = [items[q] for q in alive if q != p]
            if _dominated(*items[p], others, tol):
                alive.remove(p)
        keep = [items[q] for q in alive]
        return MaxAffine(np.array([a for a, _ in keep]), np.array([b for _, b in keep]))

    def dominated_by(self, a: np.ndarray, b: float, tol: float = 1e-10) -> bool:
        """Whether the affine function <a,x>+b is <= f everywhere."""
        return _dominated(np.asarray(a, float), float(b), list(zip(self.slopes, self.offsets)), tol)

    def to_dict(self) -> dict:
        return {"pieces": [{"a": a.tolist(), "b": float(b)} for a, b in zip(self.slopes, self.offsets)]}

    @classmethod
    def from_dict(cls, data: Mapping) -> MaxAffine:
        pieces = data["pieces"]
        return cls(np.array([p["a"] for p in pieces], dtype=float), np.array([p.get("b", 0.0) for p in pieces], dtype=float))

    def __repr__(self) -> str:
        return f"MaxAffine(n={self.n}, pieces={len(self)})"


def _dominated(a: np.ndarray, b: float, others: Sequence[tuple[np.ndarray, float]], tol: float) -> bool:
    """<a,x>+b <= max(others) on R^n  iff  a = sum l_i a_i, b <= sum l_i b_i for some convex weights l."""
    if not others:
        return False
    A = np.array([o[0] for o in others]).T
    B = np.array([o[1] for o in others])
    # the condition is invariant under separate rescaling of slopes and offsets
    sa = max(float(np.abs(A).max()), float(np.abs(a).max()))
    sb = max(float(np.abs(B).max()), abs(b))
    if sa > 0:
        A, a = A / sa, a / sa
    if sb > 0:
        B, b = B / sb, b / sb
    m = A.shape[1]
    for i in range(m):
        if np.allclose(A[:, i], a, atol=tol) and B[i] >= b - tol:
            return True
    a_eq = np.vstack([A, np.ones((1, m))])
    b_eq = np.concatenate([a, [1.0]])
    res = linprog(-B, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs")
    if res.status != 0:
        return False
    return -res.fun >= b - tol * max(1.0, abs(b))


# smooth --------------------------------------------------------------------

VecFn = Callable[[np.ndarray], np.ndarray]


class SmoothConvex:
    """C^2 convex function given by vectorized callbacks on arrays of shape (m, n).

    ``value`` returns (m,), ``gradient`` (m, n) and ``hessian`` (m, n, n). Missing
    derivatives fall back to central differences with step 1e-4 * (1 + |x|).
    """

    def __init__(self, n: int, value: VecFn, gradient: VecFn | None = None, hessian: VecFn | None = None):
        self.n = n
        self._value = value
        self._gradient = gradient
        self._hessian = hessian

    def __call__(self, x: np.ndarray) -> np.ndarray:
        pts, shape = _points(x, self.n)
        return np.asarray(self._value(pts)).reshape(shape)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        pts, shape = _points(x, self.n)
        if self._gradient is not None:
            g = np.asarray(self._gradient(pts))
        else:
            g = self._fd_gradient(pts)
        return g.reshape(shape + (self.n,))

    def hessian(self, x: np.ndarray) -> np.ndarray:
        pts, shape = _points(x, self.n)
        if self._hessian is not None:
            h = np.asarray(self._hessian(pts))
        elif self._gradient is not None:
            h = self._fd_hessian_from_gradient(pts)
        else:
            h = self._fd_hessian_from_value(pts)
        h = 0.5 * (h + np.swapaxes(h, -1, -2))
        return h.reshape(shape + (self.n, self.n))

    def _steps(self, pts: np.ndarray) -> np.ndarray:
        return 1e-4 * (1.0 + np.linalg.norm(pts, axis=1))

    def _fd_gradient(self, pts):
        h = self._steps(pts)
        out = np.empty_like(pts)
        for j in range(self.n):
            e = np.zeros(self.n)
            e[j] = 1.0
            out[:, j] = (self._value(pts + h[:, None] * e) - self._value(pts - h[:, None] * e)) / (2 * h)
        return out

    def _fd_hessian_from_gradient(self, pts):
        h = self._steps(pts)
        out = np.empty((len(pts), self.n, self.n))
        for j in range(self.n):
            e = np.zeros(self.n)
            e[j] = 1.0
            out[:, :, j] = (self._gradient(pts + h[:, None] * e) - self._gradient(pts - h[:, None] * e)) / (2 * h)[:, None]
        return out

    def _fd_hessian_from_value(self, pts):
        h = self._steps(pts)
        f0 = self._value(pts)
        eye = np.eye(self.n)
        out = np.empty((len(pts), self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                if i == j:
                    d = h[:, None] * eye[i]
                    v = (self._value(pts + d) - 2 * f0 + self._value(pts - d)) / h**2
                else:
                    di, dj = h[:, None] * eye[i], h[:, None] * eye[j]
                    v = (self._value(pts + di + dj) - self._value(pts + di - dj)
                         - self._value(pts - di + dj) + self._value(pts - di - dj)) / (4 * h**2)
                out[:, i, j] = out[:, j, i] = v
        return out

    def check_convex(self, points: np.ndarray, tol: float = 1e-6) -> bool:
        """Spot-check that the Hessian is PSD at the given points."""
        ev = np.linalg.eigvalsh(self.hessian(points))
        scale = np.maximum(1.0, np.abs(ev).max(axis=-1, keepdims=True))
        return bool(np.all(ev >= -tol * scale))

    def scaled(self, t: float) -> SmoothConvex:
        return _combine([self], [t])

    def __add__(self, other):
        if isinstance(other, SmoothConvex):
            return _combine([self, other], [1.0, 1.0])
        c = float(other)
        return SmoothConvex(self.n, lambda p: self._value(p) + c, self.gradient_fn(), self.hessian_fn())

    __radd__ = __add__

    def plus_affine(self, a: np.ndarray, b: float = 0.0) -> SmoothConvex:
        a = np.asarray(a, dtype=float)
        hess = self.hessian_fn()
        return SmoothConvex(self.n, lambda p: self._value(p) + p @ a + b,
                            lambda p: self.gradient(p) + a, hess)

    def translated(self, x0: np.ndarray) -> SmoothConvex:
        """x -> f(x - x0)."""
        x0 = np.asarray(x0, dtype=float)
        return SmoothConvex(self.n, lambda p: self._value(p - x0),
                            lambda p: self.gradient(p - x0), lambda p: self.hessian(p - x0))

    def compose_linear(self, g: np.ndarray) -> SmoothConvex:
        """x -> f(g x)."""
        g = np.asarray(g, dtype=float)
        return SmoothConvex(self.n, lambda p: self._value(p @ g.T),
                            lambda p: self.gradient(p @ g.T) @ g,
                            lambda p: np.einsum("ai,mab,bj->mij", g, self.hessian(p @ g.T), g))

    def gradient_fn(self) -> VecFn:
        return lambda p: self.gradient(p)

    def hessian_fn(self) -> VecFn:
        return lambda p: self.hessian(p)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


def _combine(fs: Sequence[SmoothConvex], ts: Sequence[float]) -> SmoothConvex:
    n = fs[0].n
    if any(f.n != n for f in fs):
        raise ValueError("dimension mismatch")
    return SmoothConvex(
        n,
        lambda p: sum(t * f._value(p) for f, t in zip(fs, ts)),
        lambda p: sum(t * f.gradient(p) for f, t in zip(fs, ts)),
        lambda p: sum(t * f.hessian(p) for f, t in zip(fs, ts)),
    )


class Quadratic(SmoothConvex):
    """f(x) = 1/2 x^T A x + <c, x> + d with A symmetric PSD."""

    def __init__(self, A: np.ndarray, c: np.ndarray | None = None, d: float = 0.0, check: bool = True):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("A must be symmetric")
        if check and np.linalg.eigvalsh(A).min() < -1e-12 * max(1.0, np.abs(A).max()):
            raise ValueError("A must be positive semi-definite")
        self.A = 0.5 * (A + A.T)
        self.c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
        self.d = float(d)
        super().__init__(
            n,
            lambda p: 0.5 * np.einsum("mi,ij,mj->m", p, self.A, p) + p @ self.c + self.d,
            lambda p: p @ self.A + self.c,
            lambda p: np.broadcast_to(self.A, (len(p), n, n)).copy(),
        )

    @classmethod
    def identity(cls, n: int) -> Quadratic:
        return cls(np.eye(n))

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "c": self.c.tolist(), "d": self.d}

    @classmethod
    def from_dict(cls, data: Mapping) -> Quadratic:
        return cls(np.array(data["A"], dtype=float), np.array(data.get("c") or np.zeros(len(data["A"]))), data.get("d", 0.0))


def softmax_smoothing(f: MaxAffine, beta: float) -> SmoothConvex:
    """(1/beta) log sum_i exp(beta (<a_i,x> + b_i)); tends to f as beta grows."""
    A, b = f.slopes, f.offsets

    def weights(p):
        z = beta * (p @ A.T + b)
        zmax = z.max(axis=1, keepdims=True)
        w = np.exp(z - zmax)
        s = w.sum(axis=1, keepdims=True)
        return w / s, zmax[:, 0] + np.log(s[:, 0])

    def value(p):
        return weights(p)[1] / beta

    def grad(p):
        return weights(p)[0] @ A

    def hess(p):
        w = weights(p)[0]
        mean = w @ A
        second = np.einsum("mi,ia,ib->mab", w, A, A)
        return beta * (second - np.einsum("ma,mb->mab", mean, mean))

    return SmoothConvex(f.n, value, grad, hess)


def exp_linear(x: np.ndarray) -> SmoothConvex:
    """y -> exp(-<x, y>)."""
    x = np.asarray(x, dtype=float)

    def value(p):
        return np.exp(-(p @ x))

    return SmoothConvex(
        len(x), value,
        lambda p: -value(p)[:, None] * x,
        lambda p: value(p)[:, None, None] * np.outer(x, x),
    )


def smooth_sum(fs: Sequence[SmoothConvex]) -> SmoothConvex:
    return _combine(list(fs), [1.0] * len(fs))


# frames --------------------------------------------------------------------

class Frame:
    """Orthonormal columns spanning a subspace E of R^n."""

    def __init__(self, columns: np.ndarray, tol: float = 1e-12):
        cols = np.asarray(columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        n, k = cols.shape
        if k > n:
            raise ValueError("more columns than the ambient dimension")
        if k and np.abs(cols.T @ cols - np.eye(k)).max() > tol:
            raise ValueError("frame columns are not orthonormal")
        self.columns = cols
        self.columns.flags.writeable = False

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.columns @ self.columns.T

    def complement(self) -> Frame:
        if self.k == 0:
            return Frame(np.eye(self.n))
        q, _ = np.linalg.qr(self.columns, mode="complete")
        return Frame(q[:, self.k:])

    def rotated(self, R: np.ndarray) -> Frame:
        return Frame(np.asarray(R) @ self.columns, tol=1e-10)

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.columns

    @classmethod
    def random(cls, n: int, k: int, rng: np.random.Generator) -> Frame:
        if k == 0:
            return cls(np.zeros((n, 0)))
        q, r = np.linalg.qr(rng.standard_normal((n, k)))
        return cls(q * np.sign(np.diag(r)))

    @classmethod
    def coordinate(cls, n: int, axes: Sequence[int]) -> Frame:
        """Frame of the coordinate axes (1-based)."""
        return cls(np.eye(n)[:, [a - 1 for a in axes]])

    def to_dict(self) -> dict:
        return {"columns": self.columns.T.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> Frame:
        cols = np.array(data["columns"], dtype=float)
        return cls(cols.T if cols.ndim == 2 else cols)

    def __repr__(self) -> str:
        return f"Frame(n={self.n}, k={self.k})"


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def pullback_subspace(f, frame: Frame):
    """x -> f(frame^T x) for f given in the frame's coordinates."""
    if f.n != frame.k:
        raise ValueError("function dimension must equal the frame dimension")
    F = frame.columns
    if isinstance(f, MaxAffine):
        return MaxAffine(f.slopes @ F.T, f.offsets)
    return SmoothConvex(
        frame.n,
        lambda p: f(p @ F),
        lambda p: f.gradient(p @ F) @ F.T,
        lambda p: np.einsum("ia,mab,jb->mij", F, f.hessian(p @ F), F),
    )


# polytopes -----------------------------------------------------------------

def support_function(vertices: np.ndarray, shift: np.ndarray | None = None) -> MaxAffine:
    """h_K(. - shift) for K the convex hull of the vertices."""
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    if v.size == 0:
        raise ValueError("empty vertex list")
    b = np.zeros(len(v)) if shift is None else -(v @ np.asarray(shift, dtype=float))
    return MaxAffine(v, b)


def hull_volume(points: np.ndarray) -> float:
    """n-volume of the convex hull, by summing simplices over the hull facets; 0 if degenerate."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = pts.shape
    if n == 1:
        return float(pts.max() - pts.min())
    if m <= n:
        return 0.0
    centered = pts - pts.mean(axis=0)
    scale = np.abs(centered).max()
    if scale == 0 or np.linalg.matrix_rank(centered, tol=1e-12 * scale) < n:
        return 0.0
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return 0.0
    c = pts[hull.vertices].mean(axis=0)
    simp = pts[hull.simplices] - c
    return float(np.abs(np.linalg.det(simp)).sum() / math.factorial(n))


def ball_polytope(n: int, m: int) -> np.ndarray:
    """Vertices of a polytope inscribed in the unit ball: an m-gon (n=2), a Fibonacci sphere (n=3)."""
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        t = 2 * np.pi * np.arange(m) / m
        return np.column_stack([np.cos(t), np.sin(t)])
    if n == 3:
        i = np.arange(m) + 0.5
        z = 1 - 2 * i / m
        r = np.sqrt(1 - z**2)
        phi = np.pi * (3 - np.sqrt(5)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise ValueError("ball approximations are provided for n <= 3")


def random_polytope(n: int, m: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return scale * rng.standard_normal((m, n))


def polytope_to_dict(vertices: np.ndarray) -> dict:
    return {"vertices": np.asarray(vertices).tolist()}


def polytope_from_dict(data: Mapping) -> np.ndarray:
    v = np.array(data["vertices"], dtype=float)
    if v.size == 0:
        raise ValueError("empty vertex list")
    return np.atleast_2d(v)


# lattice -------------------------------------------------------------------

def _midpoint_convex(fn, n: int, box: tuple[np.ndarray, np.ndarray], rng: np.random.Generator,
                     samples: int, tol: float) -> bool:
    lo, hi = box
    x = rng.uniform(lo, hi, size=(samples, n))
    y = rng.uniform(lo, hi, size=(samples, n))
    fx, fy, fm = fn(x), fn(y), fn(0.5 * (x + y))
    scale = np.maximum(1.0, np.abs(fx) + np.abs(fy))
    return bool(np.all(fm <= 0.5 * (fx + fy) + tol * scale))


def pointwise_max(f, h):
    if isinstance(f, MaxAffine) and isinstance(h, MaxAffine):
        return MaxAffine(np.vstack([f.slopes, h.slopes]), np.concatenate([f.offsets, h.offsets])).pruned()
    return SmoothConvex(f.n, lambda p: np.maximum(f(p), h(p)),
                        lambda p: np.where((f(p) >= h(p))[:, None], f.gradient(p), h.gradient(p)),
                        lambda p: np.where((f(p) >= h(p))[:, None, None], f.hessian(p), h.hessian(p)))


def pointwise_min(f, h):
    if isinstance(f, MaxAffine) and isinstance(h, MaxAffine):
        pieces = [(a, b) for a, b in zip(np.vstack([f.slopes, h.slopes]), np.concatenate([f.offsets, h.offsets]))
                  if f.dominated_by(a, b) and h.dominated_by(a, b)]
        if not pieces:
            return None
        return MaxAffine(np.array([a for a, _ in pieces]), np.array([b for _, b in pieces])).pruned()
    return SmoothConvex(f.n, lambda p: np.minimum(f(p), h(p)),
                        lambda p: np.where((f(p) <= h(p))[:, None], f.gradient(p), h.gradient(p)),
                        lambda p: np.where((f(p) <= h(p))[:, None, None], f.hessian(p), h.hessian(p)))


def lattice_pair_check(f, h, box=None, rng: np.random.Generator | None = None,
                       samples: int = 4000, tol: float = 1e-9):
    """(f v h, f ^ h), with the minimum replaced by NOT_CONVEX when it fails midpoint convexity.

    For max-affine inputs the minimum is the max of the pieces lying below both
    functions; it is accepted only if it agrees with min(f, h) on the sample cloud.
    """
    if f.n != h.n:
        raise ValueError("dimension mismatch")
    n = f.n
    if box is None:
        box = (-2.0 * np.ones(n), 2.0 * np.ones(n))
    rng = rng or np.random.default_rng(0)
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    fmax = pointwise_max(f, h)
    if not _midpoint_convex(lambda p: np.minimum(f(p), h(p)), n, (lo, hi), rng, samples, tol):
        return fmax, NOT_CONVEX
    fmin = pointwise_min(f, h)
    if isinstance(f, MaxAffine) and isinstance(h, MaxAffine):
        x = rng.uniform(lo, hi, size=(samples, n))
        if fmin is None or np.abs(fmin(x) - np.minimum(f(x), h(x))).max() > tol * max(1.0, np.abs(f(x)).max()):
            return fmax, NOT_CONVEX
    return fmax, fmin
