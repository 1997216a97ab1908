"""Spinor frames of extremal trajectories.

Closed-form frames built from Weierstrass sigma/zeta, an independent
Runge-Kutta integration of Gamma' = Gamma H, and finite-difference
geometry checks (unimodularity, nullity, curvature recovery).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import Invariants, inverse_wp, weierstrass
from .errors import (
    BranchPointProximity,
    DoubleRootSingularity,
    GridTooCoarse,
    InfiniteW,
    NoFiniteSolution,
)
from .odeint import dopri5
from .potential import Potential, h_eval

SIGNS = (1, -1)
BRANCH_TOL = 1e-8
IMAG_TOL = 1e-8
_MAX_DEPTH = 40


@dataclass(frozen=True)
class MuPair:
    plus: complex
    minus: complex

    def __getitem__(self, sign):
        return self.plus if sign > 0 else self.minus


def _cubic_scale(inv: Invariants, c: float) -> float:
    return max(1.0, 4.0 * abs(c) ** 3 + abs(inv.g2 * c) + abs(inv.g3))


def _mu(inv: Invariants, c: float) -> complex:
    val = inv.cubic(c)
    if abs(val) <= 1e-12 * _cubic_scale(inv, c):
        return 0j
    return 0.5 * cmath.sqrt(complex(val))


def mu_pm(m: float, inv: Invariants) -> MuPair:
    """mu_+- = sqrt(P(m/3 +- 1)) / 2 with the principal square root."""
    return MuPair(_mu(inv, m / 3.0 + 1.0), _mu(inv, m / 3.0 - 1.0))


def hamiltonians(m: float, p: Potential, s):
    """H_+ and H_- evaluated at s, shape (..., 2, 2)."""
    h = np.asarray(h_eval(p, s)[0], dtype=float)
    out = []
    for sign in SIGNS:
        mat = np.zeros(h.shape + (2, 2))
        mat[..., 0, 1] = 1.0
        mat[..., 1, 0] = 2.0 * h + m / 3.0 + sign
        out.append(mat)
    return tuple(out)


# ---------------------------------------------------------------------------
# per-sign data


@dataclass
class _Branch:
    sign: int
    c: float
    mu: complex
    case: str
    W: complex | None = None
    zeta_w: complex = 0j
    denom: float = 0.0


def _branch(m: float, p: Potential, sign: int) -> _Branch:
    inv = p.invariants
    c = m / 3.0 + sign
    mu = _mu(inv, c)
    if mu != 0:
        W = inverse_wp(complex(c), 1, inv)
        return _Branch(sign, c, mu, "I", W, weierstrass(inv).zeta(W))
    if inv.is_zero:
        return _Branch(sign, c, mu, "III")
    denom = 3.0 * c * c - inv.g2 / 4.0
    if abs(denom) <= 1e-12 * max(1.0, 3.0 * c * c + abs(inv.g2)):
        raise DoubleRootSingularity(f"m/3 {'+' if sign > 0 else '-'} 1 = {c} is a double root of P")
    W = inverse_wp(complex(c), 1, inv)
    return _Branch(sign, c, mu, "II", W, denom=denom)


def find_w_pm(m: float, p: Potential) -> tuple:
    """Points w_+- of the period parallelogram with h(w) = m/3 +- 1, h'(w) = 2 mu_+-."""
    fn = weierstrass(p.invariants)
    out = []
    for sign in SIGNS:
        c = m / 3.0 + sign
        if p.invariants.is_zero and c == 0.0:
            raise InfiniteW(f"w_{'+' if sign > 0 else '-'} is at infinity for m = {m}")
        try:
            W = inverse_wp(complex(c), 1, p.invariants)
        except NoFiniteSolution as exc:
            raise InfiniteW(str(exc)) from exc
        out.append(fn.reduce_to_cell(W - p.shift))
    return tuple(out)


# ---------------------------------------------------------------------------
# phase functions


def _raw_log_ratio(fn, br: _Branch, u: complex) -> complex:
    return fn.log_sigma(u - br.W) - fn.log_sigma(u + br.W) + 2.0 * u * br.zeta_w


def _check_path(p: Potential, br: _Branch, points):
    """Raise when h - c vanishes or changes sign along the sampled path."""
    pts = np.asarray(points, dtype=float)
    lo, hi = float(pts.min()), float(pts.max())
    tol = BRANCH_TOL * max(1.0, abs(br.c))
    for _, hv in p.critical_points(lo, hi):
        if abs(hv - br.c) <= tol:
            raise BranchPointProximity(f"h reaches {br.c} at a critical point in [{lo}, {hi}]")
    diff = np.atleast_1d(h_eval(p, pts)[0]) - br.c
    if np.any(np.abs(diff) < tol) or np.any(np.sign(diff) != np.sign(diff[0])):
        raise BranchPointProximity(f"h crosses m/3 {'+' if br.sign > 0 else '-'} 1 = {br.c} on [{lo}, {hi}]")
    return math.copysign(1.0, diff[0])


def _continued_log_ratio(p: Potential, br: _Branch, s0: float, svals):
    """Log of the sigma ratio continued along the real axis from s0."""
    fn = weierstrass(p.invariants)
    shift = p.shift
    ref_sign = _check_path(p, br, [s0])
    cache = {}

    def deriv(s):
        if s not in cache:
            hv = h_eval(p, s)[0]
            if abs(hv - br.c) < BRANCH_TOL * max(1.0, abs(br.c)) or math.copysign(1.0, hv - br.c) != ref_sign:
                raise BranchPointProximity(f"h crosses {br.c} near s = {s}")
            cache[s] = 2.0 * br.mu / (hv - br.c)
        return cache[s]

    def walk(a, la, b, depth):
        mid = 0.5 * (a + b)
        da, dm, db = deriv(a), deriv(mid), deriv(b)
        simpson = (b - a) / 6.0 * (da + 4.0 * dm + db)
        trap = 0.5 * (b - a) * (da + db)
        if abs(simpson) > 1.0 or abs(simpson - trap) > 0.1:
            if depth >= _MAX_DEPTH:
                raise BranchPointProximity(f"phase continuation failed between {a} and {b}")
            lm = walk(a, la, mid, depth + 1)
            return walk(mid, lm, b, depth + 1)
        raw = _raw_log_ratio(fn, br, b + shift)
        turns = round((la.imag + simpson.imag - raw.imag) / (2.0 * math.pi))
        return raw + 2j * math.pi * turns

    svals = np.asarray(svals, dtype=float)
    out = np.empty(len(svals), dtype=complex)
    l0 = _raw_log_ratio(fn, br, s0 + shift)
    for direction in (1.0, -1.0):
        idx = np.where(direction * (svals - s0) > 0)[0]
        idx = idx[np.argsort(direction * svals[idx])]
        a, la = s0, l0
        for j in idx:
            la = walk(a, la, float(svals[j]), 0)
            a = float(svals[j])
            out[j] = la
    out[svals == s0] = l0
    return out, l0


def _phi_branch(p: Potential, br: _Branch, s0: float, svals):
    svals = np.atleast_1d(np.asarray(svals, dtype=float))
    if br.case == "I":
        vals, l0 = _continued_log_ratio(p, br, s0, svals)
        return 0.5 * (vals - l0)
    _check_path(p, br, np.append(svals, s0))
    if br.case == "III":
        return (svals**3 - s0**3) / 3.0 + 0j
    fn = weierstrass(p.invariants)
    shift = p.shift

    def prim(s):
        u = s + shift
        return -(fn.zeta(u + br.W) + br.c * u) / br.denom

    base = prim(s0)
    return np.array([prim(float(s)) - base for s in svals], dtype=complex)


def phi_pm(m: float, p: Potential, s0: float, s, sign: int):
    """Closed-form phase phi_+- normalised by phi(s0) = 0 (complex)."""
    scalar = np.ndim(s) == 0
    out = _phi_branch(p, _branch(m, p, sign), float(s0), s)
    return complex(out[0]) if scalar else out


def phi_integrand(m: float, p: Potential, s, sign: int):
    """Derivative of phi_+- : mu/(h - c), or 1/(h - c) when mu = 0."""
    c = m / 3.0 + sign
    mu = _mu(p.invariants, c)
    h = h_eval(p, s)[0]
    return (mu if mu != 0 else 1.0) / (h - c)


# ---------------------------------------------------------------------------
# matrices


def _r_matrix(br: _Branch, h, dh):
    h = np.atleast_1d(h)
    dh = np.atleast_1d(dh)
    sq = np.sqrt((h - br.c).astype(complex))
    if np.any(np.abs(h - br.c) < BRANCH_TOL * max(1.0, abs(br.c))):
        raise BranchPointProximity(f"h = {br.c} where R is evaluated")
    out = np.zeros((len(h), 2, 2), dtype=complex)
    if br.case == "I":
        mu = br.mu
        out[:, 0, 0] = -(dh - 2 * mu) / (2 * sq)
        out[:, 0, 1] = -sq
        out[:, 1, 0] = (dh + 2 * mu) / (2 * sq)
        out[:, 1, 1] = sq
        out /= 2 * mu
    else:
        out[:, 0, 0] = 1.0
        out[:, 1, 0] = dh / (2 * sq)
        out[:, 1, 1] = sq
    return out


def _d_matrix(br: _Branch, h, phi):
    phi = np.atleast_1d(phi)
    out = np.zeros((len(phi), 2, 2), dtype=complex)
    if br.case == "I":
        out[:, 0, 0] = np.exp(-phi)
        out[:, 1, 1] = np.exp(phi)
    else:
        out[:, 0, 0] = 1.0 / np.sqrt((np.atleast_1d(h) - br.c).astype(complex))
        out[:, 0, 1] = phi
        out[:, 1, 1] = 1.0
    return out


def R_pm(m: float, p: Potential, s, sign: int):
    br = _branch(m, p, sign)
    h, dh, _, _ = h_eval(p, s)
    out = _r_matrix(br, h, dh)
    return out[0] if np.ndim(s) == 0 else out


def D_pm(m: float, p: Potential, s0: float, s, sign: int):
    br = _branch(m, p, sign)
    phi = _phi_branch(p, br, float(s0), s)
    out = _d_matrix(br, h_eval(p, s)[0], phi)
    return out[0] if np.ndim(s) == 0 else out


# ---------------------------------------------------------------------------
# frames


@dataclass
class FramePair:
    s: np.ndarray
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    gamma: np.ndarray
    k: np.ndarray
    m: float
    s0: float
    method: str = "closed-form"
    max_imag: float = 0.0
    meta: dict = field(default_factory=dict)


def sl2_inverse(a):
    inv = np.empty_like(a)
    inv[..., 0, 0] = a[..., 1, 1]
    inv[..., 1, 1] = a[..., 0, 0]
    inv[..., 0, 1] = -a[..., 0, 1]
    inv[..., 1, 0] = -a[..., 1, 0]
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return inv / det[..., None, None]


def det2(a):
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def _check_grid(p: Potential, s0, sgrid):
    # h_eval raises OutOfDomain for points outside I
    h_eval(p, np.append(np.asarray(sgrid, dtype=float), s0))


def _curvature(m, p, s):
    return 2.0 * np.atleast_1d(h_eval(p, s)[0]) + m / 3.0


def closed_form_spinor(m: float, p: Potential, s0: float, sgrid, sign: int):
    """Complex product R(s0)^-1 D(s0)^-1 D(s) R(s) for one sign."""
    sgrid = np.atleast_1d(np.asarray(sgrid, dtype=float))
    br = _branch(m, p, sign)
    phi = _phi_branch(p, br, s0, sgrid)
    h, dh, _, _ = h_eval(p, sgrid)
    h0, dh0, _, _ = h_eval(p, np.array([s0]))
    r = _r_matrix(br, h, dh)
    d = _d_matrix(br, h, phi)
    r0 = _r_matrix(br, h0, dh0)[0]
    d0 = _d_matrix(br, h0, np.zeros(1, dtype=complex))[0]
    left = np.linalg.inv(d0 @ r0)
    return left[None] @ d @ r


def gamma_frame(m: float, p: Potential, s0: float, sgrid) -> FramePair:
    """Trajectory from the closed-form spinor frames."""
    s0 = float(s0)
    sgrid = np.atleast_1d(np.asarray(sgrid, dtype=float))
    _check_grid(p, s0, sgrid)
    frames = []
    worst = 0.0
    for sign in SIGNS:
        g = closed_form_spinor(m, p, s0, sgrid, sign)
        mag = np.maximum(1.0, np.abs(g).max(axis=(1, 2)))
        imag = float((np.abs(g.imag).max(axis=(1, 2)) / mag).max())
        worst = max(worst, imag)
        if imag > IMAG_TOL:
            raise BranchPointProximity(
                f"closed-form frame has imaginary part {imag:.3e}; branch continuation failed"
            )
        frames.append(g.real)
    gp, gm = frames
    return FramePair(sgrid, gp, gm, gp @ sl2_inverse(gm), _curvature(m, p, sgrid), m, s0, "closed-form", worst)


def _project_sl2(y):
    out = y.copy()
    for off in (0, 4):
        det = out[off] * out[off + 3] - out[off + 1] * out[off + 2]
        out[off : off + 4] /= math.sqrt(det)
    return out


def ode_frame_oracle(m: float, p: Potential, s0: float, sgrid, rtol: float = 1e-10, atol: float = 1e-12) -> FramePair:
    """Frames by adaptive Runge-Kutta integration of Gamma' = Gamma H from the identity."""
    s0 = float(s0)
    sgrid = np.atleast_1d(np.asarray(sgrid, dtype=float))
    _check_grid(p, s0, sgrid)
    shift = m / 3.0

    def rhs(t, y):
        h = h_eval(p, t)[0]
        qp = 2.0 * h + shift + 1.0
        qm = 2.0 * h + shift - 1.0
        a, b, c, d, e, f, g, k = y
        return np.array([b * qp, a, d * qp, c, f * qm, e, k * qm, g])

    y0 = np.array([1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0])
    ys = dopri5(rhs, s0, y0, sgrid, rtol=rtol, atol=atol, project=_project_sl2)
    gp = ys[:, :4].reshape(-1, 2, 2)
    gm = ys[:, 4:].reshape(-1, 2, 2)
    return FramePair(sgrid, gp, gm, gp @ sl2_inverse(gm), _curvature(m, p, sgrid), m, s0, "ode")


# ---------------------------------------------------------------------------
# geometry


def derivative(s, values):
    """Fourth-order finite-difference derivative along axis 0 on a uniform grid."""
    s = np.asarray(s, dtype=float)
    n = len(s)
    if n < 5:
        raise GridTooCoarse(f"need at least 5 samples, got {n}")
    steps = np.diff(s)
    ds = steps.mean()
    if ds <= 0 or np.max(np.abs(steps - ds)) > 1e-8 * abs(ds):
        raise GridTooCoarse("finite differences need a uniform increasing grid")
    f = np.asarray(values)
    d = np.empty_like(f)
    d[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * ds)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * ds)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * ds)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * ds)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * ds)
    return d


def nullity_series(s, gamma):
    """det(gamma^-1 gamma') per sample."""
    return det2(sl2_inverse(gamma) @ derivative(s, gamma))


def verify_geometry(fp: FramePair) -> dict:
    """Unimodularity, nullity and curvature recovered from the frames."""
    s = fp.s
    rep = {
        "det_gamma": float(np.max(np.abs(det2(fp.gamma) - 1.0))),
        "det_gamma_plus": float(np.max(np.abs(det2(fp.gamma_plus) - 1.0))),
        "det_gamma_minus": float(np.max(np.abs(det2(fp.gamma_minus) - 1.0))),
    }
    inner = slice(2, -2)
    rep["nullity"] = float(np.max(np.abs(nullity_series(s, fp.gamma)[inner])))
    log_p = sl2_inverse(fp.gamma_plus) @ derivative(s, fp.gamma_plus)
    log_m = sl2_inverse(fp.gamma_minus) @ derivative(s, fp.gamma_minus)
    omega = log_p[:, 0, 1]
    k_plus = log_p[:, 1, 0] / omega - 1.0
    k_minus = log_m[:, 1, 0] / log_m[:, 0, 1] + 1.0
    rep["omega"] = float(np.max(np.abs(omega[inner] - 1.0)))
    rep["omega_minus"] = float(np.max(np.abs(log_m[inner, 0, 1] - 1.0)))
    rep["diag"] = float(max(np.abs(log_p[inner, 0, 0]).max(), np.abs(log_m[inner, 0, 0]).max()))
    rep["curvature"] = float(
        max(np.abs(k_plus[inner] - fp.k[inner]).max(), np.abs(k_minus[inner] - fp.k[inner]).max())
    )
    return rep


def max_deviation(a: FramePair, b: FramePair) -> float:
    return float(
        max(
            np.abs(a.gamma_plus - b.gamma_plus).max(),
            np.abs(a.gamma_minus - b.gamma_minus).max(),
            np.abs(a.gamma - b.gamma).max(),
        )
    )
