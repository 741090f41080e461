"""Sparse multivariate polynomials with complex coefficients."""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np


class MultiPoly:
    """Polynomial over named variables, stored as ``{exponent tuple: coefficient}``."""

    __slots__ = ("variables", "_terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], complex] | None = None):
        self.variables = tuple(variables)
        nv = len(self.variables)
        clean: dict[tuple[int, ...], complex] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nv or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent {exp} for {nv} variables")
            c = complex(c)
            if c != 0:
                clean[exp] = clean.get(exp, 0) + c
        self._terms = {e: c for e, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, variables: Sequence[str], c: complex) -> MultiPoly:
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str | int) -> MultiPoly:
        i = variables.index(name) if isinstance(name, str) else name
        exp = [0] * len(variables)
        exp[i] = 1
        return cls(variables, {tuple(exp): 1.0})

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return dict(self._terms)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self._terms.values())

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degrees(self) -> set[int]:
        return {sum(e) for e in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def multidegree(self, groups: Sequence[Sequence[int]]) -> set[tuple[int, ...]]:
        """Degrees with respect to each group of variable indices, over all terms."""
        return {tuple(sum(e[i] for i in g) for g in groups) for e in self._terms}

    def chop(self, tol: float = 1e-13) -> MultiPoly:
        return MultiPoly(self.variables, {e: c for e, c in self._terms.items() if abs(c) > tol})

    def _check(self, other: MultiPoly) -> None:
        if self.variables != other.variables:
            raise ValueError("polynomials live on different variable sets")

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.variables, other)
        self._check(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.variables, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.variables, {e: other * c for e, c in self._terms.items()})
        self._check(other)
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.variables, out)

    __rmul__ = __mul__

    def __truediv__(self, s: complex) -> MultiPoly:
        return self * (1.0 / s)

    def __pow__(self, k: int) -> MultiPoly:
        out = MultiPoly.constant(self.variables, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.variables == other.variables and self._terms == other._terms

    def allclose(self, other: MultiPoly, tol: float = 1e-10) -> bool:
        """Coefficientwise comparison relative to the larger coefficient scale."""
        diff = self - other
        scale = max([abs(c) for c in self._terms.values()] + [abs(c) for c in other._terms.values()] + [1.0])
        return diff.is_zero(tol * scale)

    def __call__(self, point: Iterable[complex]) -> complex:
        return complex(self.evaluate(np.asarray(point)[None, :])[0])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``points`` (shape ``(m, nvars)``)."""
        points = np.asarray(points)
        if points.ndim != 2 or points.shape[1] != len(self.variables):
            raise ValueError(f"points must have shape (m, {len(self.variables)})")
        if not self._terms:
            return np.zeros(points.shape[0], dtype=complex)
        exps = np.array(list(self._terms.keys()))
        coeffs = np.array(list(self._terms.values()))
        out = np.zeros(points.shape[0], dtype=complex)
        for exp, c in zip(exps, coeffs):
            nz = np.nonzero(exp)[0]
            out += c * np.prod(points[:, nz] ** exp[nz], axis=1)
        return out

    def compose(self, subs: Sequence[MultiPoly]) -> MultiPoly:
        """Substitute ``subs[i]`` for the i-th variable."""
        if len(subs) != len(self.variables):
            raise ValueError("need one substitution per variable")
        target = subs[0].variables if subs else ()
        powers: dict[tuple[int, int], MultiPoly] = {}

        def power(i: int, e: int) -> MultiPoly:
            if (i, e) not in powers:
                powers[(i, e)] = MultiPoly.constant(target, 1.0) if e == 0 else power(i, e - 1) * subs[i]
            return powers[(i, e)]

        out = MultiPoly(target)
        for exp, c in self._terms.items():
            term = MultiPoly.constant(target, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            out = out + term
        return out

    def __repr__(self) -> str:
        if not self._terms:
            return "MultiPoly(0)"
        parts = []
        for e, c in sorted(self._terms.items(), reverse=True):
            mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(self.variables, e) if k)
            parts.append(f"({c:.6g})" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"

    def to_dict(self) -> dict:
        return {
            "vars": list(self.variables),
            "terms": [{"exp": list(e), "re": c.real, "im": c.imag} for e, c in sorted(self._terms.items())],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> MultiPoly:
        return cls(
            data["vars"],
            {tuple(t["exp"]): complex(t.get("re", 0.0), t.get("im", 0.0)) for t in data.get("terms", [])},
        )


def leibniz_det(entries: Sequence[Sequence[MultiPoly]], variables: Sequence[str]) -> MultiPoly:
    """Determinant of a small square matrix of polynomials by cofactor expansion."""
    k = len(entries)
    if k == 0:
        return MultiPoly.constant(variables, 1.0)
    if k == 1:
        return entries[0][0]
    out = MultiPoly(variables)
    for j in range(k):
        if entries[0][j].is_zero():
            continue
        sub = [row[:j] + row[j + 1:] for row in entries[1:]]
        term = entries[0][j] * leibniz_det(sub, variables)
        out = out + term if j % 2 == 0 else out - term
    return out
