"""Complex Radon measures made of atoms and piecewise-constant grid densities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .convex import Frame

ATOM_RADIUS = 1e-9


def unit_ball_volume(n: int) -> float:
    """omega_n, the volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("box needs lo <= hi of equal length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n: int, half: float = 1.0, center=None) -> Box:
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        return cls(c - half, c + half)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Half-open membership lo <= x < hi."""
        x = np.asarray(x)
        return np.all((x >= self.lo) & (x < self.hi), axis=-1)

    def contains_closed(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        return np.all((x >= self.lo) & (x <= self.hi), axis=-1)

    def midpoints(self, grid: Sequence[int] | int) -> np.ndarray:
        """Cell midpoints of a uniform grid, shape grid + (n,)."""
        grid = _grid(grid, self.n)
        axes = [lo + (np.arange(g) + 0.5) * (hi - lo) / g for lo, hi, g in zip(self.lo, self.hi, grid)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def cell_volume(self, grid) -> float:
        return self.volume / float(np.prod(_grid(grid, self.n)))

    def translated(self, x) -> Box:
        return Box(self.lo + x, self.hi + x)

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> Box:
        return cls(np.array(data["lo"], dtype=float), np.array(data["hi"], dtype=float))


def _grid(grid, n: int) -> tuple[int, ...]:
    if np.isscalar(grid):
        return (int(grid),) * n
    g = tuple(int(v) for v in grid)
    if len(g) != n:
        raise ValueError("one grid size per axis")
    return g


@dataclass(frozen=True)
class DensityGrid:
    """Piecewise-constant density: ``values[idx]`` on the cell with that index."""

    box: Box
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != self.box.n:
            raise ValueError("density values need one axis per dimension")
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return self.box.cell_volume(self.grid)

    def midpoints(self) -> np.ndarray:
        return self.box.midpoints(self.grid)

    def same_grid(self, other: DensityGrid) -> bool:
        return (self.grid == other.grid and np.array_equal(self.box.lo, other.box.lo)
                and np.array_equal(self.box.hi, other.box.hi))

    def overlap_fractions(self, box: Box) -> np.ndarray:
        """Fraction of every cell lying inside ``box``."""
        frac = np.ones(self.grid)
        for ax, (lo, hi, g) in enumerate(zip(self.box.lo, self.box.hi, self.grid)):
            edges = lo + np.arange(g + 1) * (hi - lo) / g
            left = np.maximum(edges[:-1], box.lo[ax])
            right = np.minimum(edges[1:], box.hi[ax])
            f = np.clip(right - left, 0, None) / ((hi - lo) / g) if hi > lo else np.zeros(g)
            shape = [1] * len(self.grid)
            shape[ax] = g
            frac = frac * f.reshape(shape)
        return frac


class RadonMeasure:
    """Atoms plus a sum of grid densities on R^n."""

    def __init__(self, n: int, atoms: np.ndarray | None = None, masses: np.ndarray | None = None,
                 densities: Sequence[DensityGrid] = ()):
        self.n = n
        if atoms is None:
            self.atoms = np.zeros((0, n))
        elif n == 0:
            # the projection onto {0}: one point, shape (count, 0)
            self.atoms = np.zeros((len(np.atleast_1d(masses)), 0))
        else:
            self.atoms = np.asarray(atoms, dtype=float).reshape(-1, n)
        self.masses = np.zeros(0, dtype=complex) if masses is None else np.asarray(masses, dtype=complex).ravel()
        if len(self.atoms) != len(self.masses):
            raise ValueError("one mass per atom")
        self.densities = tuple(densities)

    @classmethod
    def zero(cls, n: int) -> RadonMeasure:
        return cls(n)

    @classmethod
    def dirac(cls, x, mass: complex = 1.0) -> RadonMeasure:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(len(x), x[None, :], np.array([mass]))

    @classmethod
    def lebesgue(cls, box: Box, grid=1) -> RadonMeasure:
        return cls(box.n, densities=[DensityGrid(box, np.ones(_grid(grid, box.n)))])

    @classmethod
    def from_density(cls, box: Box, values: np.ndarray) -> RadonMeasure:
        return cls(box.n, densities=[DensityGrid(box, values)])

    def _check(self, other: RadonMeasure) -> None:
        if other.n != self.n:
            raise ValueError("dimension mismatch")

    def __add__(self, other: RadonMeasure) -> RadonMeasure:
        self._check(other)
        dens = list(self.densities)
        for d in other.densities:
            for i, e in enumerate(dens):
                if e.same_grid(d):
                    dens[i] = DensityGrid(e.box, e.values + d.values)
                    break
            else:
                dens.append(d)
        return RadonMeasure(self.n, np.vstack([self.atoms, other.atoms]),
                            np.concatenate([self.masses, other.masses]), dens).merged()

    def __mul__(self, s: complex) -> RadonMeasure:
        return RadonMeasure(self.n, self.atoms, s * self.masses, [DensityGrid(d.box, s * d.values) for d in self.densities])

    __rmul__ = __mul__

    def __neg__(self) -> RadonMeasure:
        return self * -1

    def __sub__(self, other: RadonMeasure) -> RadonMeasure:
        return self + (-other)

    def merged(self, radius: float = ATOM_RADIUS) -> RadonMeasure:
        """Combine atoms closer than ``radius`` and drop exactly-zero masses."""
        pts, ms = [], []
        for x, m in zip(self.atoms, self.masses):
            for i, p in enumerate(pts):
                if np.linalg.norm(p - x) <= radius:
                    ms[i] += m
                    break
            else:
                pts.append(x.copy())
                ms.append(m)
        keep = [i for i, m in enumerate(ms) if m != 0]
        return RadonMeasure(self.n, np.array([pts[i] for i in keep]).reshape(-1, self.n),
                            np.array([ms[i] for i in keep], dtype=complex), self.densities)

    def atom_mass_at(self, x, radius: float = ATOM_RADIUS) -> complex:
        if not len(self.atoms):
            return 0j
        d = np.linalg.norm(self.atoms - np.asarray(x, dtype=float), axis=1)
        return complex(self.masses[d <= radius].sum())

    @property
    def total_mass(self) -> complex:
        return complex(self.masses.sum() + sum(d.values.sum() * d.cell_volume for d in self.densities))

    @property
    def is_atomic(self) -> bool:
        return not self.densities

    def to_dict(self) -> dict:
        out: dict = {"n": self.n, "atoms": [{"x": x.tolist(), "re": m.real, "im": m.imag}
                                            for x, m in zip(self.atoms, self.masses)]}
        dens = [{"box": d.box.to_dict(), "grid": list(d.grid),
                 "values": {"re": d.values.real.ravel().tolist(), "im": d.values.imag.ravel().tolist()}}
                for d in self.densities]
        if len(dens) == 1:
            out["density"] = dens[0]
        elif dens:
            out["densities"] = dens
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> RadonMeasure:
        atoms = data.get("atoms", [])
        dens_raw = list(data.get("densities", []))
        if data.get("density"):
            dens_raw.insert(0, data["density"])
        n = data.get("n")
        if n is None:
            n = len(atoms[0]["x"]) if atoms else len(dens_raw[0]["box"]["lo"])
        dens = []
        for d in dens_raw:
            vals = d["values"]
            if isinstance(vals, Mapping):
                arr = np.asarray(vals["re"], dtype=float) + 1j * np.asarray(vals.get("im", np.zeros(len(vals["re"]))), dtype=float)
            else:
                arr = np.asarray(vals, dtype=complex)
            dens.append(DensityGrid(Box.from_dict(d["box"]), arr.reshape(tuple(d["grid"]))))
        return cls(n, np.array([a["x"] for a in atoms], dtype=float).reshape(-1, n),
                   np.array([complex(a.get("re", 0.0), a.get("im", 0.0)) for a in atoms], dtype=complex), dens)

    def __repr__(self) -> str:
        return f"RadonMeasure(n={self.n}, atoms={len(self.atoms)}, densities={[d.grid for d in self.densities]})"


@dataclass(frozen=True)
class TestFunction:
    """Vectorized callback on (m, n) points, vanishing outside ``support``."""

    fn: Callable[[np.ndarray], np.ndarray]
    support: Box
    name: str = field(default="phi")

    __test__ = False  # not a pytest class

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.support.n)
        inside = self.support.contains_closed(flat)
        out = np.zeros(len(flat), dtype=complex)
        if inside.any():
            out[inside] = self.fn(flat[inside])
        return out.reshape(x.shape[:-1])

    def translated(self, x) -> TestFunction:
        """y -> phi(y - x)."""
        x = np.asarray(x, dtype=float)
        return TestFunction(lambda p: self.fn(p - x), self.support.translated(x), self.name)

    def __add__(self, other: TestFunction) -> TestFunction:
        box = Box(np.minimum(self.support.lo, other.support.lo), np.maximum(self.support.hi, other.support.hi))
        return TestFunction(lambda p: self(p) + other(p), box, f"{self.name}+{other.name}")

    def __mul__(self, s: complex) -> TestFunction:
        return TestFunction(lambda p: s * self.fn(p), self.support, self.name)

    __rmul__ = __mul__

    @classmethod
    def constant(cls, box: Box, c: complex = 1.0) -> TestFunction:
        return cls(lambda p: np.full(len(p), c, dtype=complex), box, "const")

    @classmethod
    def tent(cls, box: Box) -> TestFunction:
        """prod_i (1 - t_i^2) in coordinates t in [-1, 1] mapped onto the box; continuous, compact support."""
        c, r = 0.5 * (box.lo + box.hi), 0.5 * (box.hi - box.lo)

        def fn(p):
            t = (p - c) / r
            return np.prod(np.clip(1 - t**2, 0, None), axis=1)

        return cls(fn, box, "tent")

    @classmethod
    def bump(cls, box: Box) -> TestFunction:
        """Smooth bump prod_i exp(1 - 1/(1 - t_i^2)) on the box."""
        c, r = 0.5 * (box.lo + box.hi), 0.5 * (box.hi - box.lo)

        def fn(p):
            t = (p - c) / r
            with np.errstate(divide="ignore", over="ignore"):
                v = np.where(np.abs(t) < 1, np.exp(1 - 1 / np.clip(1 - t**2, 1e-300, None)), 0.0)
            return np.prod(v, axis=1)

        return cls(fn, box, "bump")

    @classmethod
    def random_tent(cls, n: int, rng: np.random.Generator, half: float = 1.0) -> TestFunction:
        """Tent on a random sub-box of [-half, half]^n times a random linear weight."""
        a = rng.uniform(-half, 0.2 * half, n)
        b = rng.uniform(np.maximum(a + 0.3 * half, -0.2 * half), half)
        box = Box(a, b)
        tent = cls.tent(box)
        w = rng.standard_normal(n)
        c0 = rng.standard_normal()
        return cls(lambda p: tent.fn(p) * (c0 + p @ w), box, "random-tent")


def integrate(m: RadonMeasure, phi: TestFunction) -> complex:
    """sum over atoms of phi * mass plus the midpoint rule on every density."""
    total = complex(np.sum(phi(m.atoms) * m.masses)) if len(m.atoms) else 0j
    for d in m.densities:
        vals = phi(d.midpoints())
        total += complex(np.sum(vals * d.values) * d.cell_volume)
    return total


def mass_on_box(m: RadonMeasure, box: Box) -> complex:
    """Measure of the half-open box: atoms in [lo, hi), densities by exact cell overlap."""
    total = complex(m.masses[box.contains(m.atoms)].sum()) if len(m.atoms) else 0j
    for d in m.densities:
        total += complex(np.sum(d.values * d.overlap_fractions(box)) * d.cell_volume)
    return total


def pushforward_projection(m: RadonMeasure, frame: Frame, onto: str = "E", grid=None) -> RadonMeasure:
    """Image measure under orthogonal projection, in the coordinates of E (or of its complement).

    Density cells are sent to their projected midpoints and re-binned on a uniform grid
    over the projected density box; total mass is preserved exactly.
    """
    if onto not in ("E", "perp"):
        raise ValueError("onto must be 'E' or 'perp'")
    target = frame if onto == "E" else frame.complement()
    F = target.columns
    k = target.k
    if k == 0:
        return RadonMeasure(0, np.zeros((1, 0)), np.array([m.total_mass]))
    out = RadonMeasure(k, m.atoms @ F, m.masses)
    dens = []
    for d in m.densities:
        corners = np.array(np.meshgrid(*zip(d.box.lo, d.box.hi), indexing="ij")).reshape(d.box.n, -1).T @ F
        lo, hi = corners.min(axis=0), corners.max(axis=0)
        g = _grid(grid if grid is not None else max(d.grid), k)
        hi = np.where(hi > lo, hi, lo + 1.0)
        pts = d.midpoints().reshape(-1, d.box.n) @ F
        w = d.values.ravel() * d.cell_volume
        edges = [np.linspace(l, h, gi + 1) for l, h, gi in zip(lo, hi, g)]
        re, _ = np.histogramdd(pts, bins=edges, weights=w.real)
        im, _ = np.histogramdd(pts, bins=edges, weights=w.imag)
        newbox = Box(lo, hi)
        dens.append(DensityGrid(newbox, (re + 1j * im) / newbox.cell_volume(g)))
    return out + RadonMeasure(k, densities=dens)


def fourier_laplace(phi: TestFunction, z: np.ndarray, grid=64) -> complex:
    """Midpoint-rule value of int phi(x) exp(i <z, x>) dx (bilinear pairing, no conjugation)."""
    z = np.asarray(z, dtype=complex)
    box = phi.support
    pts = box.midpoints(grid).reshape(-1, box.n)
    return complex(np.sum(phi(pts) * np.exp(1j * (pts @ z))) * box.cell_volume(grid))
