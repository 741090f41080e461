"""Named check suites tying the modules together; each returns a SuiteReport."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .convex import (NOT_CONVEX, Frame, MaxAffine, Quadratic, SmoothConvex, exp_linear, lattice_pair_check,
                     pullback_subspace, random_rotation, smooth_sum, support_function)
from .forms import ConstantForm, gl_pullback, is_primitive, lefschetz_kernel_dimension, primitive_basis, primitive_dimension
from .maops import (gw_fourier_check, hessian_measure, hessian_valuation, klain, klain_quadrature, lebesgue_valuation,
                    ma_c2, ma_pl, ma_valuation, mixed_ma_quadratic_type, mixed_quadratic_density_poly, psi_tau,
                    decompose_homogeneous)
from .measures import Box, RadonMeasure, TestFunction, integrate, mass_on_box
from .minors import (NOT_IN_SPAN, express_in_minors, form_from_minors, form_from_q, hessian_form, minor_basis, p_eval,
                     p_of_form, principal_minor_form, q_eval, q_span_rank, square_poly, sym_to_vector, tuple_minors)
from .report import SuiteReport, case_rngs, default_seed

EXACT_TOL = 1e-9
QUAD_TOL = 1e-2


# shared generators ---------------------------------------------------------

def random_primitive(n: int, k: int, rng: np.random.Generator) -> ConstantForm:
    out = ConstantForm.zero(n)
    for b in primitive_basis(n, k):
        out = out + rng.standard_normal() * b
    return out


def random_pd(n: int, rng: np.random.Generator, floor: float = 0.2) -> np.ndarray:
    m = rng.standard_normal((n, n))
    return m @ m.T / n + floor * np.eye(n)


def random_smooth(n: int, rng: np.random.Generator) -> SmoothConvex:
    """A positive definite quadratic plus two tame exponentials of linear forms."""
    parts = [Quadratic(random_pd(n, rng), rng.standard_normal(n))]
    parts += [exp_linear(0.6 * rng.standard_normal(n)).scaled(0.3) for _ in range(2)]
    return smooth_sum(parts)


def _rel_err(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def _density(m: RadonMeasure) -> np.ndarray:
    return sum(d.values for d in m.densities)


def _sampled_verdicts(tau: ConstantForm, n: int, k: int, rng: np.random.Generator,
                      q_samples: int, p_samples: int, kl_samples: int) -> tuple[bool, bool, bool]:
    def nonneg(vals):
        vals = np.asarray(vals)
        scale = max(1e-300, float(np.abs(vals).max()))
        return bool(vals.real.min() >= -1e-9 * scale)

    ws = rng.standard_normal((q_samples, k, n))
    q_ok = nonneg(q_eval(tau, ws))
    r = rng.integers(k, n + 1, size=p_samples)
    V = rng.standard_normal((p_samples, n, n))
    V = V * (np.arange(n)[None, :, None] < r[:, None, None])
    p_ok = nonneg(p_eval(tau, np.einsum("mai,maj->mij", V, V)))
    projs = np.stack([Frame.random(n, k, rng).projector for _ in range(kl_samples)])
    kl_ok = nonneg(p_eval(tau, projs))
    return q_ok, p_ok, kl_ok


def positivity_panel(n: int, k: int, rng: np.random.Generator, size: int = 20) -> list[tuple[str, ConstantForm, bool | None]]:
    """Forms with known or unknown sign: Hessian form, principal-minor forms, sums of squares, differences, random."""
    tk = hessian_form(n, k)
    pm = principal_minor_form(n, range(1, k + 1))
    s = 1 if p_eval(pm, np.eye(n)).real > 0 else -1
    panel: list[tuple[str, ConstantForm, bool | None]] = [
        ("hessian form", tk, True),
        ("-hessian form", -tk, False),
        ("principal-minor form", pm, s > 0),
        ("-principal-minor form", -pm, s < 0),
    ]
    nminors = len(tuple_minors(n, k).polys)

    def sos(terms: int):
        q = None
        for _ in range(terms):
            sq = square_poly(rng.standard_normal(nminors), n, k)
            q = sq if q is None else q + sq
        return form_from_q(q)

    rest = size - len(panel)
    n_sos, n_neg, n_diff = rest * 3 // 8, rest // 8, rest // 4
    for i in range(n_sos):
        panel.append((f"sum of {i % 3 + 1} squares", sos(i % 3 + 1), True))
    for _ in range(n_neg):
        panel.append(("negated square", -sos(1), False))
    for _ in range(n_diff):
        L1 = square_poly(rng.standard_normal(nminors), n, k)
        L2 = square_poly(rng.standard_normal(nminors), n, k)
        panel.append(("difference of squares", form_from_q(L1 - L2), None))
    while len(panel) < size:
        panel.append(("random primitive", random_primitive(n, k, rng), None))
    return panel


# suites --------------------------------------------------------------------

def suite_positivity(n: int = 2, k: int | None = None, seed: int | None = None, panel_size: int = 20,
                     q_samples: int = 500, p_samples: int = 500, kl_samples: int = 200) -> SuiteReport:
    """Q >= 0 on real tuples, P >= 0 on PSD matrices and KL >= 0 on frames must agree for every form."""
    seed = default_seed() if seed is None else seed
    ks = list(range(1, n + 1)) if k is None else [k]
    rep = SuiteReport("positivity", seed, {"n": n, "k": ks, "panel": panel_size})
    for kk, rng in zip(ks, case_rngs(seed, len(ks))):
        panel_rng, sample_rng = rng.spawn(2)
        for name, tau, expected in positivity_panel(n, kk, panel_rng, panel_size):
            q_ok, p_ok, kl_ok = _sampled_verdicts(tau, n, kk, sample_rng, q_samples, p_samples, kl_samples)
            agree = q_ok == p_ok == kl_ok
            ok = agree and (expected is None or q_ok == expected)
            rep.add(f"k={kk} {name}: Q,P,KL verdicts agree", expected if expected is not None else "agree",
                    [q_ok, p_ok, kl_ok], None, ok, f"Q>=0:{q_ok} P>=0:{p_ok} KL>=0:{kl_ok}")
    return rep.close()


def suite_classification(n: int = 2, seed: int | None = None, grid: int = 12) -> SuiteReport:
    """Hessian forms, quadratic-type mixed MA, minor round trips and dimension counts."""
    seed = default_seed() if seed is None else seed
    rep = SuiteReport("classification", seed, {"n": n, "grid": grid})
    box = Box.cube(n, 1.0)
    for k, rng in zip(range(n + 1), case_rngs(seed, n + 1)):
        f = random_smooth(n, rng)
        H = f.hessian(box.midpoints(grid).reshape(-1, n))
        tk = hessian_form(n, k)
        a = _density(psi_tau(tk, f, box, grid))
        b = _density(hessian_measure(k, f, box, grid))
        rep.add(f"k={k} psi_tau(hessian form) == hessian measure cellwise", 0.0, _rel_err(a, b), 1e-10,
                _rel_err(a, b) < 1e-10, f"err={_rel_err(a, b):.2e}")

        quads = [Quadratic(random_pd(n, rng)) for _ in range(n - k)]
        poly = mixed_quadratic_density_poly(k, [q.A for q in quads], n)
        coef = express_in_minors(poly, k)
        rep.add(f"k={k} quadratic-type mixed MA density lies in the minor span", "in span",
                "NOT_IN_SPAN" if coef is NOT_IN_SPAN else "in span", 1e-8, coef is not NOT_IN_SPAN)
        mixed = _density(mixed_ma_quadratic_type(k, f, quads, box, grid)).ravel()
        predicted = poly.evaluate(sym_to_vector(H))
        err = _rel_err(mixed, predicted)
        rep.add(f"k={k} quadratic-type mixed MA density == minor polynomial of D^2 f", 0.0, err, 1e-8, err < 1e-8,
                f"err={err:.2e}")

        basis = minor_basis(n, k)
        p = basis.polys[0] * 0.0
        for poly_b in basis.polys:
            p = p + rng.standard_normal() * poly_b
        tau = form_from_minors(p)
        round_trip = tau is not NOT_IN_SPAN and is_primitive(tau, 1e-9) and p_of_form(tau).allclose(p, 1e-8)
        rep.add(f"k={k} form_from_minors then p_of_form is the identity", True, round_trip, 1e-8, round_trip)
        if tau is not NOT_IN_SPAN:
            dens = _density(psi_tau(tau, f, box, grid)).ravel()
            err = _rel_err(dens, p.evaluate(sym_to_vector(H)))
            rep.add(f"k={k} psi_tau(form_from_minors(P)) integrates P(D^2 f)", 0.0, err, 1e-8, err < 1e-8,
                    f"err={err:.2e}")

        dim = primitive_dimension(n, k)
        got = (lefschetz_kernel_dimension(n, k), basis.rank, q_span_rank(n, k))
        rep.add(f"k={k} kernel, minor-span and Q-span ranks equal {dim}", dim, list(got), 0, all(g == dim for g in got))
    return rep.close()


def _convergence_order(e1: float, e2: float) -> float:
    return math.log2(e1 / e2) if e1 > 0 and e2 > 0 else float("inf")


def suite_equivariance(n: int = 2, seed: int | None = None, frames: int = 100, grid: int = 32,
                       quad_tol: float = QUAD_TOL) -> SuiteReport:
    """Rotation invariance of Hessian-form Klain functions and GL weights of the basic valuations."""
    seed = default_seed() if seed is None else seed
    rep = SuiteReport("equivariance", seed, {"n": n, "frames": frames, "grid": grid})
    rngs = case_rngs(seed, n + 4)
    for k in range(n + 1):
        rng = rngs[k]
        tk = hessian_form(n, k)
        base = Frame.random(n, k, rng)
        vals = np.array([klain(tk, base.rotated(random_rotation(n, rng))) for _ in range(frames)])
        spread = float(np.ptp(vals.real) + np.abs(vals.imag).max())
        rep.add(f"k={k} Klain function of the Hessian form is constant over {frames} rotated frames", 1.0,
                [float(vals.real.min()), float(vals.real.max())], 1e-9,
                spread < 1e-9 and abs(vals[0] - 1) < 1e-9, f"spread={spread:.2e}")
        if 1 <= k <= n - 1:
            pm = principal_minor_form(n, range(1, k + 1))
            a = klain(pm, Frame.coordinate(n, range(1, k + 1)))
            b = klain(pm, Frame.coordinate(n, range(2, k + 2)))
            rep.add(f"k={k} principal-minor form has non-constant Klain function", "different",
                    [a, b], None, abs(a - b) > 0.5, f"KL(E1)={a.real:+.3f} KL(E2)={b.real:+.3f}")
            tau = random_primitive(n, k, rng)
            frame = Frame.random(n, k, rng)
            exact = klain(tau, frame)
            errs = [abs(klain_quadrature(tau, frame, g) - exact) / max(1.0, abs(exact)) for g in (grid, 2 * grid)]
            order = _convergence_order(*errs)
            rep.add(f"k={k} Klain value by quadrature at grid {2 * grid}", exact, errs[1], quad_tol,
                    errs[1] < quad_tol, f"err={errs[1]:.2e} order={order:.2f}")

    rng = rngs[n + 1]
    A = random_pd(n, rng)
    f = Quadratic(A)
    B = Box(np.full(n, 0.1), np.full(n, 0.6))
    t = 2.0
    half = n // 2 if n > 1 else 1
    probes = {"t*Id": np.full(n, t), "diag(1..1,t..t)": np.array([1.0] * (n - half) + [t] * half)}
    for label, diag in probes.items():
        g = np.diag(diag)
        gB = Box(B.lo / diag, B.hi / diag)
        det = float(np.prod(diag))

        def ratio(measure: Callable[[SmoothConvex, Box], RadonMeasure]) -> float:
            return (mass_on_box(measure(f.compose_linear(g), gB), gB) / mass_on_box(measure(f, B), B)).real

        leb = ratio(lambda h, box: RadonMeasure.lebesgue(box, 4))
        rep.add(f"{label}: Lebesgue weight |det g|^-1", 1 / det, leb, EXACT_TOL, abs(leb - 1 / det) < EXACT_TOL * (1 / det))
        ma = ratio(lambda h, box: ma_c2(h, box, 4))
        rep.add(f"{label}: MA weight |det g|", det, ma, EXACT_TOL, abs(ma - det) < EXACT_TOL * det)
        for k in range(1, n):
            hk = ratio(lambda h, box, k=k: hessian_measure(k, h, box, 4))
            neither = abs(hk - det) > 1e-6 and abs(hk - 1 / det) > 1e-6
            detail = f"ratio={hk:.6g}"
            if label == "t*Id":
                neither = neither and abs(hk - t ** (2 * k - n)) < 1e-9 * t ** abs(2 * k - n)
                detail += f" expected t^(2k-n)={t ** (2 * k - n):.6g}"
            rep.add(f"{label}: Hessian measure k={k} matches neither weight", "neither", hk, 1e-6, neither, detail)

    rng = rngs[n + 2]
    for k in range(n + 1):
        tau = random_primitive(n, k, rng)
        g = rng.standard_normal((n, n)) + 0.5 * np.eye(n)
        lhs = psi_tau(gl_pullback(g, tau), f, B, 2).total_mass
        dens = psi_tau(tau, f.compose_linear(g), B, 2).total_mass / B.volume
        rhs = np.sign(np.linalg.det(g)) * dens * B.volume / abs(np.linalg.det(g))
        err = abs(lhs - rhs) / max(1.0, abs(rhs))
        rep.add(f"k={k} psi_tau GL equivariance sign(det g) psi_tau(f o g)[g^-1 B]", rhs, lhs, EXACT_TOL,
                err < EXACT_TOL, f"err={err:.2e}")
        Q = random_pd(n, rng)
        lhs = p_eval(gl_pullback(g, tau), Q)
        rhs = p_eval(tau, g.T @ Q @ g) / np.linalg.det(g)
        err = abs(lhs - rhs) / max(1.0, abs(rhs))
        rep.add(f"k={k} P equivariance P_(g.tau)(Q) = det(g)^-1 P_tau(g^T Q g)", rhs, lhs, EXACT_TOL,
                err < EXACT_TOL, f"err={err:.2e}")
    return rep.close()


def _box_split_pair(n: int, rng: np.random.Generator):
    """Two parallelotopes whose union is convex (a box cut along the first axis, then mapped linearly)."""
    s1, s2 = sorted(rng.uniform(-0.5, 0.5, 2))
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
    K = corners.copy()
    K[:, 0] = np.where(K[:, 0] > 0, s2, -1.0)
    L = corners.copy()
    L[:, 0] = np.where(L[:, 0] < 0, s1, 1.0)
    M = rng.standard_normal((n, n)) + 2 * np.eye(n)
    return K @ M.T, L @ M.T


def _measures_agree(rep: SuiteReport, label: str, lhs: RadonMeasure, rhs: RadonMeasure,
                    tests: list[TestFunction], tol: float) -> None:
    a = np.array([integrate(lhs, phi) for phi in tests])
    b = np.array([integrate(rhs, phi) for phi in tests])
    err = float(np.max(np.abs(a - b)) / max(1e-300, float(np.max(np.abs(b))), float(np.max(np.abs(a))), 1e-12))
    rep.add(label, b, a, tol, err <= tol, f"rel err={err:.2e}")


def _smooth_lattice_pair(n: int, rng: np.random.Generator):
    """h = 1/2|x|^2 and f = h + eps <u,x>^3/6; their max and min are C^2 and convex on [-1,1]^n."""
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    eps = 0.5 / math.sqrt(n)
    h = Quadratic.identity(n)

    def val(p):
        return h(p) + eps * (p @ u) ** 3 / 6

    f = SmoothConvex(n, val, lambda p: h.gradient(p) + eps * ((p @ u) ** 2 / 2)[:, None] * u,
                     lambda p: h.hessian(p) + eps * (p @ u)[:, None, None] * np.outer(u, u))
    return f, h


def _kink_bump(n: int, c: float, kappa: float) -> SmoothConvex:
    """kappa * max(x_1 - c, 0)^4, C^2 and convex, zero on {x_1 < c}."""
    def val(p):
        return kappa * np.clip(p[:, 0] - c, 0, None) ** 4

    def grad(p):
        g = np.zeros_like(p)
        g[:, 0] = 4 * kappa * np.clip(p[:, 0] - c, 0, None) ** 3
        return g

    def hess(p):
        H = np.zeros((len(p), n, n))
        H[:, 0, 0] = 12 * kappa * np.clip(p[:, 0] - c, 0, None) ** 2
        return H

    return SmoothConvex(n, val, grad, hess)


def suite_valuation_axioms(n: int = 2, seed: int | None = None, grid: int = 16) -> SuiteReport:
    """Valuation identity, invariances, locality, homogeneous decomposition and vanishing on pullbacks."""
    seed = default_seed() if seed is None else seed
    rep = SuiteReport("valuation_axioms", seed, {"n": n, "grid": grid})
    rngs = case_rngs(seed, 12)
    window = Box.cube(n, 4.0)
    box = Box.cube(n, 1.0)
    tests = [TestFunction.random_tent(n, r) for r in rngs[0].spawn(5)]
    ma = lambda f: ma_pl(f, window)  # noqa: E731

    # lattice identity, polyhedral
    rng = rngs[1]
    for i in range(3):
        K, L = _box_split_pair(n, rng)
        x = rng.uniform(-0.5, 0.5, n)
        f, h = support_function(K, x), support_function(L, x)
        fmax, fmin = lattice_pair_check(f, h, rng=rng)
        if fmin is NOT_CONVEX:
            rep.add(f"split-box pair {i}: minimum is convex", "convex", "NOT_CONVEX", None, False)
            continue
        lhs, rhs = ma(f) + ma(h), ma(fmax) + ma(fmin)
        _measures_agree(rep, f"split-box pair {i}: MA(f)+MA(h) == MA(f max h)+MA(f min h)", lhs, rhs, tests, 1e-6)
        err = abs(lhs.atom_mass_at(x) - rhs.atom_mass_at(x))
        rep.add(f"split-box pair {i}: atom masses at the shift", lhs.atom_mass_at(x), rhs.atom_mass_at(x), EXACT_TOL,
                err <= EXACT_TOL * max(1.0, abs(lhs.atom_mass_at(x))), f"err={err:.2e}")
    f1, h1 = MaxAffine([[1.0], [0.0]], [0.0, 0.0]), MaxAffine([[-1.0], [0.0]], [0.0, 0.0])
    fmax, fmin = lattice_pair_check(f1, h1)
    w1 = Box.cube(1, 4.0)
    ok = fmin is not NOT_CONVEX
    if ok:
        lhs = ma_pl(f1, w1) + ma_pl(h1, w1)
        rhs = ma_pl(fmax, w1) + ma_pl(fmin, w1)
        ok = abs(lhs.total_mass - rhs.total_mass) < EXACT_TOL and abs(lhs.atom_mass_at([0.0]) - 2) < EXACT_TOL
    rep.add("1-d max(x,0), max(-x,0): valuation identity", 2.0, "exact" if ok else "mismatch", EXACT_TOL, ok)
    P = support_function(np.vstack([np.eye(n), -np.eye(n)]))
    _, bad = lattice_pair_check(P.translated(np.full(n, -0.5)), P.translated(np.full(n, 0.5)), rng=rng)
    rep.add("min of two shifted support functions is rejected", "NOT_CONVEX", str(bad.value if bad is NOT_CONVEX else "convex"),
            None, bad is NOT_CONVEX)

    # lattice identity, smooth
    rng = rngs[2]
    f, h = _smooth_lattice_pair(n, rng)
    fmax, fmin = lattice_pair_check(f, h, box=(box.lo, box.hi), rng=rng)
    rep.add("smooth pair: minimum passes the convexity test", "convex", "NOT_CONVEX" if fmin is NOT_CONVEX else "convex",
            None, fmin is not NOT_CONVEX)
    if fmin is not NOT_CONVEX:
        for k in range(n + 1):
            for label, op in (("hessian", lambda g, k=k: hessian_measure(k, g, box, grid)),
                              ("psi_tau", lambda g, tau=random_primitive(n, k, rng): psi_tau(tau, g, box, grid))):
                _measures_agree(rep, f"smooth pair k={k}: {label} valuation identity", op(f) + op(h), op(fmax) + op(fmin), tests, 1e-6)

    # dually epi-translation invariance
    rng = rngs[3]
    fpl = MaxAffine(rng.standard_normal((8, n)), rng.standard_normal(8))
    a, b = rng.standard_normal(n), rng.standard_normal()
    _measures_agree(rep, "MA of max-affine unchanged by adding an affine function", ma(fpl.plus_affine(a, b)), ma(fpl), tests, 1e-9)
    fs = random_smooth(n, rng)
    for k in range(n + 1):
        tau = random_primitive(n, k, rng)
        _measures_agree(rep, f"k={k} psi_tau unchanged by adding an affine function",
                        psi_tau(tau, fs.plus_affine(a, b), box, grid), psi_tau(tau, fs, box, grid), tests, 1e-9)

    # translation equivariance
    rng = rngs[4]
    x = rng.uniform(-0.3, 0.3, n)
    lhs = [integrate(ma(fpl.translated(-x)), phi) for phi in tests]
    rhs = [integrate(ma(fpl), phi.translated(x)) for phi in tests]
    rep.add("MA translation equivariance on max-affine input", rhs, lhs, 1e-9, _rel_err(lhs, rhs) < 1e-9,
            f"err={_rel_err(lhs, rhs):.2e}")
    for k in range(n + 1):
        tau = random_primitive(n, k, rng)
        lhs = [integrate(psi_tau(tau, fs.translated(-x), box, grid), phi) for phi in tests]
        rhs = [integrate(psi_tau(tau, fs, box.translated(x), grid), phi.translated(x)) for phi in tests]
        rep.add(f"k={k} psi_tau translation equivariance", rhs, lhs, 1e-9, _rel_err(lhs, rhs) < 1e-9,
                f"err={_rel_err(lhs, rhs):.2e}")

    # locality
    rng = rngs[5]
    V = Box(np.full(n, -1.0), np.concatenate([[0.0], np.full(n - 1, 1.0)]))
    local_tests = [TestFunction.tent(Box(np.full(n, -0.9), np.concatenate([[-0.1], np.full(n - 1, 0.9)])))]
    corners = np.array(np.meshgrid(*[[-4.0, 4.0]] * n, indexing="ij")).reshape(n, -1).T
    floor = float((corners @ fpl.slopes[0] + fpl.offsets[0]).min()) - 1.0
    M = 50.0
    hpl = MaxAffine(np.vstack([fpl.slopes, M * np.eye(n)[0]]), np.append(fpl.offsets, floor))
    ok = abs(mass_on_box(ma(fpl), V) - mass_on_box(ma(hpl), V)) <= EXACT_TOL * max(1.0, abs(mass_on_box(ma(fpl), V)))
    rep.add("MA locality: max-affine functions equal on V give equal mass on V", mass_on_box(ma(fpl), V),
            mass_on_box(ma(hpl), V), EXACT_TOL, ok)
    hs = fs + _kink_bump(n, 0.0, 2.0)
    for k in range(n + 1):
        tau = random_primitive(n, k, rng)
        _measures_agree(rep, f"k={k} psi_tau locality on V", psi_tau(tau, hs, box, grid), psi_tau(tau, fs, box, grid),
                        local_tests, 1e-9)

    # homogeneous decomposition
    rng = rngs[6]
    psi = ma_valuation(box, grid) + lebesgue_valuation(box, grid) + hessian_valuation(1, box, grid)
    comps = decompose_homogeneous(psi, fs, n)
    total = comps[0]
    for c in comps[1:]:
        total = total + c
    err = _rel_err(_density(total), _density(psi(fs)))
    rep.add("MA + Lebesgue + Hessian_1: components sum to the valuation", 0.0, err, 1e-8, err < 1e-8, f"err={err:.2e}")
    expect = {0: _density(RadonMeasure.lebesgue(box, grid)), n: _density(ma_c2(fs, box, grid))}
    expect[1] = expect.get(1, 0) + _density(hessian_measure(1, fs, box, grid))
    for k in range(n + 1):
        target = expect.get(k, np.zeros_like(expect[0]))
        err = float(np.max(np.abs(_density(comps[k]) - target))) / max(1.0, float(np.max(np.abs(_density(psi(fs))))))
        rep.add(f"component k={k} matches the expected homogeneous part", 0.0, err, 1e-8, err < 1e-8, f"err={err:.2e}")
    t = 1.7
    comps_t = decompose_homogeneous(psi, fs.scaled(t), n)
    for k in range(n + 1):
        err = _rel_err(_density(comps_t[k]), t**k * _density(comps[k]))
        rep.add(f"component k={k} is {k}-homogeneous", 0.0, err, 1e-8, err < 1e-8, f"err={err:.2e}")
    comps_pl = decompose_homogeneous(ma_valuation(window), fpl, n)
    lower = max(abs(c.total_mass) for c in comps_pl[:n]) if n else 0.0
    top = abs(comps_pl[n].total_mass - ma(fpl).total_mass)
    rep.add("MA on max-affine input is purely top-degree", 0.0, [lower, top], 1e-8, lower < 1e-8 and top < 1e-8)

    # nonnegative iff components nonnegative
    rng = rngs[7]
    samples = [random_smooth(n, r) for r in rng.spawn(3)]
    psi_ok = all(_density(psi(g)).real.min() >= -1e-12 for g in samples)
    comp_ok = all(_density(c).real.min() >= -1e-9 for g in samples for c in decompose_homogeneous(psi, g, n))
    rep.add("MA + Lebesgue + Hessian_1 and all its components are non-negative", True, [psi_ok, comp_ok], None,
            psi_ok and comp_ok)
    psi_neg = ma_valuation(box, grid) + (-1.0) * lebesgue_valuation(box, grid)
    comps_neg = decompose_homogeneous(psi_neg, samples[0], n)
    neg_comp = _density(comps_neg[0]).real.min() < 0
    neg_val = _density(psi_neg(samples[0].scaled(0.0))).real.min() < 0
    rep.add("MA - Lebesgue: negative component and negative value", True, [neg_comp, neg_val], None, neg_comp and neg_val)

    # vanishing on pullbacks from lower-dimensional subspaces
    rng = rngs[8]
    if n >= 2:
        frame = Frame.random(n, n - 1, rng)
        sub = MaxAffine(rng.standard_normal((6, n - 1)), rng.standard_normal(6))
        mu = ma(pullback_subspace(sub, frame))
        rep.add("MA of a pullback from a hyperplane vanishes", 0.0, abs(mu.total_mass), EXACT_TOL,
                abs(mu.total_mass) < EXACT_TOL and len(mu.atoms) == 0)
    for k in range(1, n + 1):
        frame = Frame.random(n, k - 1, rng)
        fsub = random_smooth(k - 1, rng) if k > 1 else None
        g = pullback_subspace(fsub, frame) if fsub is not None else SmoothConvex(n, lambda p: np.zeros(len(p)),
                                                                                  lambda p: np.zeros_like(p),
                                                                                  lambda p: np.zeros((len(p), n, n)))
        tau = random_primitive(n, k, rng)
        dens = _density(psi_tau(tau, g, box, grid))
        err = float(np.abs(dens).max())
        rep.add(f"k={k} psi_tau vanishes on pullbacks from a {k - 1}-dimensional subspace", 0.0, err, 1e-10,
                err < 1e-10, f"max|density|={err:.2e}")

    # declared degrees
    rng = rngs[9]
    g = random_smooth(n, rng)
    for k in range(n + 1):
        val = hessian_valuation(k, box, grid)
        t = 1.3
        err = _rel_err(_density(val(g.scaled(t))), t ** val.degree * _density(val(g)))
        rep.add(f"Hessian_{k} has declared degree {k}", 0.0, err, 1e-6, err < 1e-6, f"err={err:.2e}")
    return rep.close()


def suite_fourier(n: int = 2, seed: int | None = None, cases: int = 10, grid: int = 64,
                  quad_tol: float = QUAD_TOL) -> SuiteReport:
    """Polarized psi_tau against Q_tau times the Fourier-Laplace transform of the test function."""
    seed = default_seed() if seed is None else seed
    rep = SuiteReport("fourier", seed, {"n": n, "cases": cases, "grid": grid})
    phi = TestFunction.tent(Box.cube(n, 1.0))
    rngs = case_rngs(seed, cases + 2)
    for i in range(cases):
        rng = rngs[i]
        k = 1 + i % n
        tau = random_primitive(n, k, rng)
        xs = rng.uniform(-1.0, 1.0, (k, n))
        coarse = gw_fourier_check(tau, phi, xs, grid)
        fine = gw_fourier_check(tau, phi, xs, 2 * grid)
        order = _convergence_order(coarse.rel_error, fine.rel_error)
        ok = coarse.rel_error < quad_tol and fine.rel_error <= coarse.rel_error / 2
        rep.add(f"case {i} k={k}: polarized psi_tau vs Q_tau F(phi)", coarse.rhs, coarse.lhs, quad_tol, ok,
                f"err@{grid}={coarse.rel_error:.2e} err@{2 * grid}={fine.rel_error:.2e} order={order:.2f}")
    rng = rngs[cases]
    for k in range(1, n + 1):
        tau = random_primitive(n, k, rng)
        xs = rng.uniform(-1.0, 1.0, (k, n))
        if k > 1:
            xs[-1] = 0.7 * xs[0]
        else:
            xs[0] = 0.0
        chk = gw_fourier_check(tau, phi, xs, grid)
        ok = abs(chk.lhs) < 1e-10 and abs(chk.rhs) < 1e-10
        rep.add(f"k={k} linearly dependent vectors: both sides vanish", 0.0, [chk.lhs, chk.rhs], 1e-10, ok)
    rng = rngs[cases + 1]
    top = principal_minor_form(n, range(1, n + 1))
    xs = rng.standard_normal((n, n))
    q = q_eval(top, xs)
    gram = np.linalg.det(xs @ xs.T)
    rep.add("k=n: Q of the top form is the Gram determinant", gram, q, EXACT_TOL, abs(q - gram) < EXACT_TOL * max(1, abs(gram)))
    return rep.close()


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "positivity": suite_positivity,
    "classification": suite_classification,
    "equivariance": suite_equivariance,
    "valuation_axioms": suite_valuation_axioms,
    "fourier": suite_fourier,
}
