"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest
from scipy.spatial import Delaunay

from conftest import record
from mavaltk.convex import Frame, MaxAffine, random_polytope, random_rotation, support_function
from mavaltk.forms import lefschetz_matrix, primitive_basis, primitive_dimension
from mavaltk.maops import extract_density, klain, ma_pl, ma_valuation, smoothing_comparison
from mavaltk.measures import Box
from mavaltk.poly import MultiPoly
from mavaltk.minors import hessian_form, principal_minor_form, q_lie_oracle, q_of_form, q_span_rank
from mavaltk.report import case_rngs
from mavaltk.suites import suite_classification, suite_equivariance, suite_fourier, suite_positivity, suite_valuation_axioms

SEED = 20240601


def delaunay_volume(points):
    tri = Delaunay(points)
    simplices = points[tri.simplices]
    edges = simplices[:, 1:] - simplices[:, :1]
    return float(np.abs(np.linalg.det(edges)).sum() / math.factorial(points.shape[1]))


def test_criterion_01_q_matches_lie_oracle():
    # error is measured against sum |c_a w^a|, the size of the terms that cancel in Q_tau(w)
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst, pointwise = 0.0, 0.0
    count = 0
    for n in range(1, 4):
        for k in range(n + 1):
            for tau in primitive_basis(n, k):
                q = q_of_form(tau)
                magnitude = MultiPoly(q.variables, {e: abs(c) for e, c in q.terms.items()})
                ws = rng.standard_normal((100, k, n))
                flat = ws.reshape(100, -1)
                fast = q.evaluate(flat) if k else np.full(100, complex(q.terms.get((), 0)))
                scale = magnitude.evaluate(np.abs(flat)).real if k else np.full(100, abs(q.terms.get((), 0)))
                for w, v, s in zip(ws, fast, scale):
                    ref = q_lie_oracle(tau, w)
                    worst = max(worst, abs(v - ref) / s)
                    pointwise = max(pointwise, abs(v - ref) / abs(ref))
                count += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 30
    record(1, ok, f"Q_tau vs Lie-algebra oracle, {count} basis forms x 100 tuples, max rel err {worst:.1e} "
                  f"(pointwise {pointwise:.1e}), {elapsed:.1f}s")
    assert ok


def test_criterion_02_dimension_formula():
    rows = []
    for n in range(1, 5):
        for k in range(n + 1):
            formula = math.comb(n, k) ** 2 - (math.comb(n, k - 1) * math.comb(n, n - k - 1) if k >= 1 and n - k - 1 >= 0 else 0)
            L = lefschetz_matrix(n, n - k, k)
            kernel = L.shape[1] - (np.linalg.matrix_rank(L) if L.size else 0)
            rows.append((n, k, formula, kernel, q_span_rank(n, k), primitive_dimension(n, k)))
    bad = [r for r in rows if len(set(r[2:])) != 1]
    record(2, not bad, f"kernel rank = Q-span rank = formula for all 0<=k<=n<=4 ({len(rows)} pairs, {len(bad)} mismatches)")
    assert not bad, bad


def test_criterion_03_atom_formula():
    worst, failures = 0.0, []
    for n in (2, 3):
        for i, rng in enumerate(case_rngs(SEED + n, 20)):
            P = random_polytope(n, 6 + 2 * n, rng)
            x = rng.uniform(-1, 1, n)
            mu = ma_pl(support_function(P, shift=x), Box.cube(n, 3.0))
            vol = delaunay_volume(P)
            if len(mu.atoms) != 1 or not np.allclose(mu.atoms[0], x, atol=1e-9):
                failures.append((n, i))
                continue
            worst = max(worst, abs(mu.masses[0] - vol) / vol)
    ok = not failures and worst < 1e-9
    record(3, ok, f"single atom at x with mass vol(K) on 40 polytopes (n=2,3), max rel err {worst:.1e}")
    assert ok, failures


def test_criterion_04_smoothing_consistency():
    worst = 0.0
    for rng in case_rngs(SEED + 4, 20):
        P = rng.standard_normal((6, 2))
        x = rng.uniform(-0.5, 0.5, 2)
        f = support_function(P, shift=x)
        for cmp in smoothing_comparison(f, Box.cube(2, 2.0), beta=1e3, grid=128):
            worst = max(worst, cmp.rel_error)
    record(4, worst < 0.02, f"softmax beta=1e3 box masses vs PL atoms on 20 polygons, grid 128^2, max rel err {worst:.2%}")
    assert worst < 0.02


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_05_classification(n):
    rep = suite_classification(n, seed=SEED)
    record(5, rep.passed, f"classification suite n={n}: {len(rep.cases) - len(rep.failures)}/{len(rep.cases)} cases")
    assert rep.passed, rep.table()


def test_criterion_06_fourier():
    rep = suite_fourier(2, seed=SEED, cases=10, grid=64)
    worst = max(float(c.detail.split("err@64=")[1].split()[0]) for c in rep.cases if "err@64" in c.detail)
    record(6, rep.passed, f"Fourier factorization n=2, 10 cases, max rel err {worst:.1e} at 64^2, error halves on doubling")
    assert rep.passed, rep.table()


def test_criterion_07_klain_rigidity():
    rng = np.random.default_rng(SEED + 7)
    spreads = []
    for n in (2, 3):
        for k in range(n + 1):
            base = Frame.random(n, k, rng)
            vals = np.array([klain(hessian_form(n, k), base.rotated(random_rotation(n, rng))) for _ in range(100)])
            spreads.append(float(np.ptp(vals.real) + np.abs(vals.imag).max()))
    pm = principal_minor_form(2, [1])
    witness = abs(klain(pm, Frame.coordinate(2, [1])) - klain(pm, Frame.coordinate(2, [2])))
    rep = suite_equivariance(2, seed=SEED)
    ok = max(spreads) < 1e-9 and witness > 0.5 and rep.passed
    record(7, ok, f"Hessian-form Klain spread {max(spreads):.1e} over 100 frames; minor-form witness gap {witness:.2f}")
    assert ok, rep.table()


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_08_positivity(n):
    rep = suite_positivity(n, seed=SEED, panel_size=20)
    record(8, rep.passed, f"positivity verdicts agree n={n}: {len(rep.failures)} disagreements in {len(rep.cases)} cases")
    assert rep.passed, rep.table()


def test_criterion_09_uniqueness_of_ma():
    results = []
    for c in (1.0, 2.5, -1.0):
        for n in (2, 3):
            x = np.full(n, 0.3)
            est = extract_density(c * ma_valuation(Box.cube(n, 3.0), 8), x, 64, n)
            bound = abs(c) * (1 - est.volume_ratio)
            results.append((c, n, abs(est.value - c), bound))
    ok = all(err < bound for _, _, err, bound in results)
    worst = max(r[2] for r in results)
    record(9, ok, f"density of c*MA recovered for c in (1, 2.5, -1), n=2,3, max err {worst:.1e} below vol-ratio bound")
    assert ok, results


@pytest.mark.parametrize("n", [2, 3])
def test_criterion_10_valuation_axioms(n):
    rep = suite_valuation_axioms(n, seed=SEED)
    record(10, rep.passed, f"valuation axioms n={n}: {len(rep.cases) - len(rep.failures)}/{len(rep.cases)} cases")
    assert rep.passed, rep.table()
