"""Quasi-periodic trajectories: period map, closure, the Jacobian Psi and f(m)."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .elliptic import elliptic_K
from .errors import AdsNullError, NewtonDivergence, NoSeed, NotInW, StencilLeavesW
from .frames import gamma_frame
from .potential import Potential, check_qp_params, h_quasi, qp_invariants, quasi_periodic

log = logging.getLogger(__name__)

QUAD_TOL = 1e-12


@dataclass(frozen=True)
class QuasiPeriodicParams:
    m: float
    ell: float
    e1: float

    def __post_init__(self):
        check_qp_params(self.ell, self.e1)

    @property
    def levels(self) -> tuple:
        return self.m / 3.0 + 1.0, self.m / 3.0 - 1.0

    @property
    def in_w(self) -> bool:
        return all(q_cubic(c, self.ell, self.e1) < 0 for c in self.levels)

    def potential(self) -> Potential:
        return quasi_periodic(self.ell, self.e1)

    def require_w(self):
        if not self.in_w:
            raise NotInW(f"(m, ell, e1) = ({self.m}, {self.ell}, {self.e1}) is not in W")


@dataclass
class PeriodMapValue:
    pi_plus: float
    pi_minus: float
    period: float
    error: float = 0.0
    nodes: int = 0
    closure: tuple | None = None

    @property
    def pi(self) -> np.ndarray:
        return np.array([self.pi_plus, self.pi_minus])


def q_cubic(t, ell: float, e1: float):
    """Q(t) = 4t^3 - g2 t - g3 for the quasi-periodic invariants."""
    inv = qp_invariants(ell, e1)
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    return 4.0 * t**3 - inv.g2 * t - inv.g3


def h_qp(s, ell: float, e1: float):
    """(h, h') of the sn^2 potential."""
    return h_quasi(s, ell, e1)


def period_p(ell: float, e1: float) -> float:
    check_qp_params(ell, e1)
    return 2.0 * math.sqrt((2.0 - ell * ell) / (3.0 * e1)) * elliptic_K(ell)


def rho_pm(qp: QuasiPeriodicParams) -> tuple:
    qp.require_w()
    return tuple(0.5 * math.sqrt(-q_cubic(c, qp.ell, qp.e1)) for c in qp.levels)


def _integrand(qp: QuasiPeriodicParams, rho: float, c: float):
    def f(u):
        return rho / (h_quasi(u, qp.ell, qp.e1)[0] - c)

    return f


def script_p(s: float, qp: QuasiPeriodicParams) -> tuple:
    """(P_+(s), P_-(s)) = int_0^s rho/(h - c) du by adaptive quadrature."""
    rhos = rho_pm(qp)
    p = period_p(qp.ell, qp.e1)
    turns = math.floor(s / p)
    rest = s - turns * p
    full = period_map(qp) if turns else None
    out = []
    for i, (rho, c) in enumerate(zip(rhos, qp.levels)):
        val, _ = quad(_integrand(qp, rho, c), 0.0, rest, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
        if turns:
            val += turns * full.pi[i]
        out.append(val)
    return tuple(out)


def _trapezoid(qp, rhos, p, n):
    u = p * np.arange(n) / n
    h = h_quasi(u, qp.ell, qp.e1)[0]
    return np.array([rho * p * np.mean(1.0 / (h - c)) for rho, c in zip(rhos, qp.levels)])


def period_map(qp: QuasiPeriodicParams, nodes: int | None = None, tol: float = 1e-13) -> PeriodMapValue:
    """Pi = P(p) by the periodic trapezoid rule.

    With ``nodes`` given the rule is applied once at that size; otherwise
    nodes are doubled until successive values agree to ``tol`` (relative).
    """
    rhos = rho_pm(qp)
    p = period_p(qp.ell, qp.e1)
    if nodes is not None:
        val = _trapezoid(qp, rhos, p, nodes)
        return PeriodMapValue(float(val[0]), float(val[1]), p, math.nan, nodes)
    n = 16
    prev = _trapezoid(qp, rhos, p, n)
    while True:
        n *= 2
        val = _trapezoid(qp, rhos, p, n)
        err = float(np.max(np.abs(val - prev)))
        if err <= tol * max(1.0, float(np.max(np.abs(val)))) or n >= 1 << 16:
            break
        prev = val
    return PeriodMapValue(float(val[0]), float(val[1]), p, err, n)


def closure_test(qp: QuasiPeriodicParams, n_max: int = 200, tol: float = 1e-5, s0: float = 0.0, method: str = "closed-form"):
    """Smallest N <= n_max with max|gamma(s0 + N p) - gamma(s0)| < tol, as (N, error), else None."""
    from .frames import ode_frame_oracle

    qp.require_w()
    p = period_p(qp.ell, qp.e1)
    pot = qp.potential()
    grid = s0 + p * np.arange(0, n_max + 1)
    if method == "closed-form":
        fp = gamma_frame(qp.m, pot, s0, grid)
    elif method == "ode":
        fp = ode_frame_oracle(qp.m, pot, s0, grid)
    else:
        raise ValueError(f"unknown method {method!r}")
    errs = np.abs(fp.gamma[1:] - fp.gamma[0]).max(axis=(1, 2))
    hits = np.nonzero(errs < tol)[0]
    if len(hits) == 0:
        return None
    return int(hits[0] + 1), float(errs[hits[0]])


# ---------------------------------------------------------------------------
# Jacobian and f


def _pi_vec(m, ell, e1):
    return period_map(QuasiPeriodicParams(m, ell, e1)).pi


def _jacobian(qp, dl, de):
    for ell, e1 in ((qp.ell - dl, qp.e1), (qp.ell + dl, qp.e1), (qp.ell, qp.e1 - de), (qp.ell, qp.e1 + de)):
        if not (0.0 < ell < 1.0 and e1 > 0.0) or not QuasiPeriodicParams(qp.m, ell, e1).in_w:
            raise StencilLeavesW(f"stencil point ({qp.m}, {ell}, {e1}) leaves W")
    col_l = (_pi_vec(qp.m, qp.ell + dl, qp.e1) - _pi_vec(qp.m, qp.ell - dl, qp.e1)) / (2 * dl)
    col_e = (_pi_vec(qp.m, qp.ell, qp.e1 + de) - _pi_vec(qp.m, qp.ell, qp.e1 - de)) / (2 * de)
    return np.column_stack([col_l, col_e])


def jacobian_matrix(qp: QuasiPeriodicParams, step: float = 1e-5):
    """Richardson-extrapolated d(Pi+, Pi-)/d(ell, e1) and an error estimate."""
    qp.require_w()
    dl, de = step, step * qp.e1
    coarse = _jacobian(qp, dl, de)
    fine = _jacobian(qp, dl / 2, de / 2)
    jac = (4.0 * fine - coarse) / 3.0
    return jac, float(np.max(np.abs(jac - fine)))


def jacobian_psi(qp: QuasiPeriodicParams, step: float = 1e-5, with_error: bool = False):
    """Psi = det d(Pi+, Pi-)/d(ell, e1) by centred differences with Richardson extrapolation."""
    jac, err = jacobian_matrix(qp, step)
    psi = float(np.linalg.det(jac))
    if not with_error:
        return psi
    # first-order propagation of the entrywise error through the determinant
    psi_err = err * float(np.sum(np.abs(jac))) + 1e-14 * max(1.0, abs(psi))
    return psi, psi_err


@dataclass
class FRow:
    m: float
    f: float
    in_w: bool
    error: float
    note: str = ""


F_ELL = 0.25
F_SCALE = 400.0


def f_value(m: float, step: float = 1e-5) -> FRow:
    """f(m) = 400 Psi(m, 1/4, |m| + 10)."""
    qp = QuasiPeriodicParams(m, F_ELL, abs(m) + 10.0)
    if not qp.in_w:
        return FRow(m, math.nan, False, math.nan, "not in W")
    try:
        psi, err = jacobian_psi(qp, step, with_error=True)
    except AdsNullError as exc:
        return FRow(m, math.nan, True, math.nan, type(exc).__name__)
    return FRow(m, F_SCALE * psi, True, F_SCALE * err)


def f_scan(m_grid, jobs: int = 1, step: float = 1e-5) -> list:
    """f over a grid of multipliers, rows sorted by m."""
    grid = sorted(float(m) for m in m_grid)
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(f_value, grid, [step] * len(grid), chunksize=max(1, len(grid) // (4 * jobs))))
    else:
        rows = [f_value(m, step) for m in grid]
    return rows


def figure_grid(samples: int = 400, lo: float = -10.0, hi: float = 10.0, gap: float = 0.1) -> np.ndarray:
    """Uniform grids on [lo, -gap] and [gap, hi] with ``samples`` points in total."""
    left = samples // 2
    return np.concatenate([np.linspace(lo, -gap, left), np.linspace(gap, hi, samples - left)])


def zero_runs(rows, factor: float = 10.0) -> int:
    """Longest run of consecutive rows with |f| within ``factor`` times its error."""
    best = run = 0
    for r in rows:
        near = r.in_w and math.isfinite(r.f) and abs(r.f) <= factor * r.error
        run = run + 1 if near else 0
        best = max(best, run)
    return best


# ---------------------------------------------------------------------------
# closed-trajectory search


@dataclass
class ClosedHit:
    params: QuasiPeriodicParams
    pi_plus: float
    pi_minus: float
    target: tuple
    normalization: str
    n: int
    error: float
    residual: float


def rational_targets(pi_vec, denom_bound: int, normalization: str, spread: int = 1) -> list:
    """Targets (Pi+, Pi-) = unit * (a, b)/q, q <= denom_bound, near pi_vec.

    unit is pi for the "pi" normalization and 1 for "plain".  Returns
    (distance, target, q) sorted by max-norm distance, in lowest terms.
    """
    unit = math.pi if normalization == "pi" else 1.0
    x = np.asarray(pi_vec, dtype=float) / unit
    seen = {}
    for q in range(1, denom_bound + 1):
        base = np.floor(x * q).astype(int)
        for a in range(base[0] - spread + 1, base[0] + spread + 1):
            for b in range(base[1] - spread + 1, base[1] + spread + 1):
                g = math.gcd(math.gcd(a, b), q)
                key = (a // g, b // g, q // g)
                if key not in seen:
                    tgt = np.array(key[:2], dtype=float) / key[2]
                    seen[key] = float(np.max(np.abs(tgt - x))) * unit
    ranked = sorted((d, k) for k, d in seen.items())
    return [(d, unit * np.array([a, b], dtype=float) / q, q) for d, (a, b, q) in ranked]


def _newton(m, seed, target, tol=1e-11, accept=1e-9, max_iter=30, step=1e-6):
    """Damped Newton on Pi_m(ell, e1) = target with a finite-difference Jacobian.

    Iterates towards ``tol``; a stalled iteration is still accepted when the
    residual is below ``accept``.
    """
    ell, e1 = seed
    val = _pi_vec(m, ell, e1) - target
    res = float(np.max(np.abs(val)))
    for _ in range(max_iter):
        if res < tol:
            return (ell, e1), res
        jac = _jacobian(QuasiPeriodicParams(m, ell, e1), step, step * e1)
        delta = np.linalg.solve(jac, -val)
        # trust region: keep ell in (0, 1) and e1 within a factor of 2
        lam = min(1.0, 0.1 / max(abs(delta[0]), 1e-300), 0.5 * e1 / max(abs(delta[1]), 1e-300))
        while lam > 1e-6:
            cand = (ell + lam * delta[0], e1 + lam * delta[1])
            if 0.0 < cand[0] < 1.0 and cand[1] > 0.0 and QuasiPeriodicParams(m, *cand).in_w:
                cval = _pi_vec(m, *cand) - target
                cres = float(np.max(np.abs(cval)))
                if cres < res:
                    ell, e1, val, res = cand[0], cand[1], cval, cres
                    break
            lam *= 0.5
        else:
            break
    if res < accept:
        return (ell, e1), res
    raise NewtonDivergence(f"no convergence at ({ell}, {e1}), residual {res:.3e}")


def seed_grid(m: float, n_ell: int = 12, n_e1: int = 24) -> list:
    """(ell, e1, Pi) over a coarse grid of W for fixed m."""
    out = []
    top = 20.0 * (abs(m) / 3.0 + 2.0)
    for ell in np.linspace(0.05, 0.95, n_ell):
        for e1 in np.geomspace(0.1, top, n_e1):
            qp = QuasiPeriodicParams(m, float(ell), float(e1))
            if qp.in_w:
                out.append((float(ell), float(e1), period_map(qp).pi))
    return out


def find_closed(
    m: float,
    denom_bound: int = 8,
    n_max: int = 200,
    seed: tuple | None = None,
    normalization: str = "both",
    tol: float = 1e-5,
    max_targets: int = 8,
) -> list:
    """Closed trajectories with multiplier m, validated by closure_test.

    With an explicit seed, rational targets are taken near Pi_m(seed).
    Without one, a coarse grid over W supplies, for every target, the
    nearest grid point as its Newton seed.
    """
    if seed is not None:
        try:
            qp0 = QuasiPeriodicParams(m, *seed)
        except AdsNullError as exc:
            raise NoSeed(str(exc)) from exc
        if not qp0.in_w:
            raise NoSeed(f"seed {seed} is not in W for m = {m}")
        seeds = [(float(seed[0]), float(seed[1]), period_map(qp0).pi)]
    else:
        seeds = seed_grid(m)
    usable = []
    for ell, e1, pi in seeds:
        try:
            if abs(jacobian_psi(QuasiPeriodicParams(m, ell, e1))) > 1e-10:
                usable.append((ell, e1, pi))
        except StencilLeavesW:
            continue
    if not usable:
        raise NoSeed(f"no seed in W with nonzero Psi for m = {m}")

    norms = ("pi", "plain") if normalization == "both" else (normalization,)
    hits = []
    for norm in norms:
        best = {}
        for ell, e1, pi in usable:
            for dist, target, q in rational_targets(pi, denom_bound, norm):
                key = (tuple(np.round(target, 12)), q)
                if key not in best or dist < best[key][0]:
                    best[key] = (dist, target, (ell, e1))
        ranked = sorted(best.values(), key=lambda t: t[0])[:max_targets]
        for dist, target, start in ranked:
            try:
                (ell, e1), res = _newton(m, start, target)
            except (NewtonDivergence, np.linalg.LinAlgError, StencilLeavesW) as exc:
                log.info("m=%s target=%s (%s): %s", m, target, norm, exc)
                continue
            qp = QuasiPeriodicParams(m, ell, e1)
            try:
                closed = closure_test(qp, n_max, tol)
            except AdsNullError as exc:
                log.info("closure test failed for %s: %s", qp, exc)
                continue
            log.info("m=%s target=%s (%s) at %s -> %s", m, target, norm, qp, closed)
            if closed is None:
                continue
            pm = period_map(qp)
            hits.append(ClosedHit(qp, pm.pi_plus, pm.pi_minus, tuple(float(t) for t in target), norm, closed[0], closed[1], res))
    hits.sort(key=lambda h: (h.normalization, h.params.ell, h.params.e1))
    return hits
