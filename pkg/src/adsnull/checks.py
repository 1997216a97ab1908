"""Property suites behind ``adsnull verify``.

Each check is a function of a perturbation ``eps`` returning the worst
residual; ``eps`` is injected into the checked quantity itself so the
debug flag exercises the real comparison path.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import elliptic as el
from . import frames as fr
from . import momentum as mo
from . import periodic as pe
from . import potential as po

INJECT_EPS = 1e-3


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool

    def as_dict(self):
        return asdict(self)


def _sample_invariants(rng, n):
    out = []
    while len(out) < n:
        g2, g3 = rng.uniform(-10, 10, 2)
        inv = el.Invariants(float(g2), float(g3))
        if abs(inv.discriminant) > 1e-3:
            out.append(inv)
    return out


def _random_points(rng, inv, count):
    hp = el.half_periods(inv)
    fn = el.weierstrass(inv)
    pts = []
    while len(pts) < count:
        a, b = rng.uniform(0, 1, 2)
        z = 2 * a * hp.omega1 + 2 * b * hp.omega3
        if fn.lattice_distance(z) > 0.05 * abs(hp.omega1):
            pts.append(z)
    return pts


def elliptic_checks(rng, n_inv=20, n_pts=10):
    invs = _sample_invariants(rng, n_inv)

    def ode(eps):
        worst = 0.0
        for inv in invs:
            fn = el.weierstrass(inv)
            for z in _random_points(rng, inv, n_pts):
                p, p1 = fn.wp_pair(z)
                p = p * (1 + eps)
                scale = abs(4 * p**3) + abs(inv.g2 * p) + abs(inv.g3) + abs(p1) ** 2
                worst = max(worst, abs(p1 * p1 - inv.cubic(p)) / scale)
        return worst

    def zeta_fd(eps):
        worst, h = 0.0, 1e-5
        for inv in invs:
            fn = el.weierstrass(inv)
            for z in _random_points(rng, inv, n_pts):
                d = (fn.zeta(z + h) - fn.zeta(z - h)) / (2 * h)
                worst = max(worst, abs(d + fn.wp(z) * (1 + eps)) / max(1.0, abs(fn.wp(z))))
        return worst

    def sigma_fd(eps):
        worst, h = 0.0, 1e-5
        for inv in invs:
            fn = el.weierstrass(inv)
            for z in _random_points(rng, inv, n_pts):
                d = (fn.log_sigma(z + h) - fn.log_sigma(z - h)) / (2 * h)
                worst = max(worst, abs(d - fn.zeta(z) * (1 + eps)) / max(1.0, abs(fn.zeta(z))))
        return worst

    def legendre(eps):
        worst = 0.0
        for inv in invs:
            hp = el.half_periods(inv)
            e1, e3 = el.weierstrass(inv).etas
            worst = max(worst, abs(e1 * hp.omega3 - e3 * hp.omega1 - 0.5j * math.pi * (1 - eps)))
        return worst

    def agm_k(eps):
        from scipy.integrate import quad

        worst = 0.0
        for ell in np.arange(0.1, 0.95, 0.1):
            ref = quad(lambda t: 1 / math.sqrt(1 - (ell * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)[0]
            worst = max(worst, abs(el.elliptic_K(ell) * (1 + eps) - ref))
        return worst

    return [
        ("wp_ode_residual", ode, 1e-8),
        ("zeta_derivative", zeta_fd, 1e-6),
        ("sigma_log_derivative", sigma_fd, 1e-6),
        ("legendre_relation", legendre, 1e-10),
        ("agm_vs_quadrature", agm_k, 1e-12),
    ]


def potential_cases():
    """(potential, sample grid) for the six real cases."""
    cases = []
    for g, tag, span in (
        ((5.0, 0.0), po.CaseTag.WP_NEG_DISC, None),
        ((5.0, 0.0), po.CaseTag.WP3_NEG_DISC, (-3.0, 3.0)),
        ((0.0, 4.0), po.CaseTag.WP_POS_DISC, None),
        ((12.0, 8.0), po.CaseTag.TAN_DEGENERATE, None),
        ((12.0, -8.0), po.CaseTag.TANH_DEGENERATE, (-3.0, 3.0)),
        ((0.0, 0.0), po.CaseTag.RATIONAL_DEGENERATE, (0.3, 3.0)),
    ):
        p = po.potential_for(el.Invariants(*g), tag, None if span is None else span[0])
        if span is None:
            lo, hi = p.domain
            pad = 0.1 * (hi - lo)
            span = (lo + pad, hi - pad)
        cases.append((p, np.linspace(span[0], span[1], 100)))
    return cases


def potential_checks(rng):
    cases = potential_cases()

    def ode(eps):
        worst = 0.0
        for p, s in cases:
            h, dh, _, _ = po.h_eval(p, s)
            h = h + eps
            worst = max(worst, float(np.max(np.abs(dh * dh - p.invariants.cubic(h)) / (1 + np.abs(h) ** 3))))
        return worst

    def el_eq(eps):
        worst = 0.0
        for p, s in cases:
            for m in (-5.0, 0.0, 3.0, 7.0):
                r = po.el_residual(m, p, s, perturb=eps)
                h = po.h_eval(p, s)[0]
                worst = max(worst, float(np.max(np.abs(r) / (1 + np.abs(h) ** 2.5))))
        return worst

    def fd(eps):
        worst = 0.0
        for p, s in cases:
            step = 1e-3
            inner = s[(s - 2 * step > p.safe_domain()[0]) & (s + 2 * step < p.safe_domain()[1])]
            vals = [np.array(po.h_eval(p, inner + k * step)) for k in (-2, -1, 1, 2)]
            d = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
            exact = np.array(po.h_eval(p, inner))
            exact[1] = exact[1] * (1 + eps)
            for j in range(3):
                worst = max(worst, float(np.max(np.abs(d[j] - exact[j + 1]) / (1 + np.abs(exact[j + 1])))))
        return worst

    return [
        ("weierstrass_ode", ode, 1e-9),
        ("euler_lagrange", el_eq, 1e-7),
        ("derivatives_vs_fd", fd, 1e-5),
    ]


FRAME_CASES = [
    # (g2, g3, case, m, s0, lo, hi)
    (5.0, 0.0, po.CaseTag.WP_NEG_DISC, 0.0, 0.9, 0.3, 1.5),
    (0.0, 4.0, po.CaseTag.WP_POS_DISC, -3.0, 1.0, 0.4, 1.8),
    (4.0, 0.0, po.CaseTag.WP_NEG_DISC, -3.0, 1.0, 0.4, 1.6),
    (12.0, -8.0, po.CaseTag.TANH_DEGENERATE, 7.0, 0.0, -1.5, 1.5),
    (0.0, 0.0, po.CaseTag.RATIONAL_DEGENERATE, -3.0, 1.0, 0.5, 2.0),
]


def frame_checks(rng, samples=801):
    data = []
    for g2, g3, tag, m, s0, lo, hi in FRAME_CASES:
        p = po.potential_for(el.Invariants(g2, g3), tag, s0)
        s = np.linspace(lo, hi, samples)
        data.append((fr.gamma_frame(m, p, s0, s), fr.ode_frame_oracle(m, p, s0, s)))

    def oracle(eps):
        return max(fr.max_deviation(a, b) for a, b in data) + eps

    def geometry(key):
        def run(eps):
            worst = 0.0
            for a, _ in data:
                fp = a
                if eps:
                    shear = np.zeros_like(a.gamma_plus)
                    shear[:, 0, 0] = shear[:, 1, 1] = 1.0
                    shear[:, 0, 1] = eps * a.s
                    gp = a.gamma_plus @ shear
                    gamma = (gp @ fr.sl2_inverse(a.gamma_minus)) * (1 + eps)
                    fp = fr.FramePair(a.s, gp, a.gamma_minus, gamma, a.k + eps, a.m, a.s0)
                worst = max(worst, fr.verify_geometry(fp)[key])
            return worst

        return run

    return [
        ("oracle_equivalence", oracle, 1e-6),
        ("det_gamma", geometry("det_gamma"), 1e-9),
        ("nullity", geometry("nullity"), 1e-7),
        ("pseudo_arc", geometry("omega"), 1e-5),
        ("curvature_recovery", geometry("curvature"), 1e-5),
    ]


def periodic_checks(rng):
    ell, e1 = 0.25, 10.0

    def factor(eps):
        r1, r2, r3 = po.qp_roots(ell, e1)
        t = rng.uniform(-20, 20, 200)
        q = pe.q_cubic(t, ell, e1) + eps * (1 + np.abs(t) ** 3)
        return float(np.max(np.abs(q - 4 * (t - r1) * (t - r2) * (t - r3)) / (1 + np.abs(t) ** 3)))

    def bridge(eps):
        p = po.quasi_periodic(ell, e1)
        s = np.linspace(0, pe.period_p(ell, e1), 200)
        wp = np.array([el.weierstrass(p.invariants).wp(x + p.shift).real for x in s])
        return float(np.max(np.abs(pe.h_qp(s, ell, e1)[0] + eps - wp)))

    def period(eps):
        p = pe.period_p(ell, e1) * (1 + eps)
        s = rng.uniform(0, 1, 50)
        return float(np.max(np.abs(pe.h_qp(s + p, ell, e1)[0] - pe.h_qp(s, ell, e1)[0])))

    def phase(eps):
        qp = pe.QuasiPeriodicParams(0.0, ell, e1)
        pm = pe.period_map(qp)
        worst = 0.0
        for sign, val in zip(fr.SIGNS, pm.pi):
            phi = fr.phi_pm(qp.m, qp.potential(), 0.0, pm.period, sign)
            worst = max(worst, abs(phi.imag - val * (1 + eps)))
        return worst

    return [
        ("q_factorization", factor, 1e-9),
        ("h_qp_equals_wp3", bridge, 1e-8),
        ("period_p", period, 1e-9),
        ("phase_matches_period_map", phase, 1e-7),
    ]


def momentum_checks(rng):
    cases = potential_cases()

    def residuals(eps):
        worst = 0.0
        for p, s in cases:
            for m in (-5.0, 0.0, 3.0, 7.0):
                lift = mo.momentum_lift(m, p, s)
                lift.x1 = lift.x1 + eps
                k = lift.k
                scale = 1 + np.abs(k) ** 2.5
                worst = max(worst, max(float(np.max(np.abs(r) / scale)) for r in mo.el_system_residuals(lift, m)))
        return worst

    return [("sigma_residuals", residuals, 1e-7)]


SUITES = {
    "elliptic": elliptic_checks,
    "potential": potential_checks,
    "frames": frame_checks,
    "periodic": periodic_checks,
    "momentum": momentum_checks,
}


def run_suite(name: str, seed: int = 0, inject: str | None = None) -> list:
    """Run one suite; ``inject`` names a check (or "all") to perturb."""
    rng = np.random.default_rng(seed)
    out = []
    for check, fn, tol in SUITES[name](rng):
        eps = INJECT_EPS if inject in (check, "all") else 0.0
        val = float(fn(eps))
        out.append(Check(name, check, val, tol, bool(val < tol)))
    return out


def run_suites(names, seed: int = 0, inject: str | None = None) -> list:
    if "all" in names:
        names = list(SUITES)
    out = []
    for name in names:
        out.extend(run_suite(name, seed, inject))
    return out
