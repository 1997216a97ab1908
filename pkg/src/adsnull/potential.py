"""Reduced-curvature potentials h solving (h')^2 = 4h^3 - g2 h - g3."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .elliptic import Invariants, cubic_roots, discriminant, ellipj, half_periods, weierstrass
from .errors import ClassificationError, OutOfDomain, ParamOutOfRange, PoleProximity

ENDPOINT_MARGIN = 1e-4


class CaseTag(str, Enum):
    WP_NEG_DISC = "WpNegDisc"
    WP3_NEG_DISC = "Wp3NegDisc"
    WP_POS_DISC = "WpPosDisc"
    TAN_DEGENERATE = "TanDegenerate"
    TANH_DEGENERATE = "TanhDegenerate"
    RATIONAL_DEGENERATE = "RationalDegenerate"
    QUASI_PERIODIC = "QuasiPeriodic"


@dataclass(frozen=True)
class Potential:
    """One real solution branch h : I -> R of the Weierstrass equation.

    ``a`` is set for the tan/tanh cases, ``ell``/``e1`` for the
    quasi-periodic family.  ``shift`` is the complex offset with
    h(s) = wp(s + shift; g2, g3).
    """

    case: CaseTag
    invariants: Invariants
    domain: tuple
    a: float | None = None
    ell: float | None = None
    e1: float | None = None

    @property
    def g2(self):
        return self.invariants.g2

    @property
    def g3(self):
        return self.invariants.g3

    @property
    def shift(self) -> complex:
        hp = half_periods(self.invariants)
        if self.case in (CaseTag.WP3_NEG_DISC, CaseTag.QUASI_PERIODIC, CaseTag.TANH_DEGENERATE):
            return hp.omega3
        if self.case is CaseTag.TAN_DEGENERATE:
            return hp.omega1
        return 0j

    @property
    def periodic(self) -> bool:
        return self.case in (CaseTag.WP3_NEG_DISC, CaseTag.QUASI_PERIODIC)

    @property
    def real_period(self) -> float:
        """Smallest positive real period of h (inf when h is not periodic)."""
        if not self.periodic:
            return math.inf
        return 2.0 * half_periods(self.invariants).omega1.real

    def safe_domain(self) -> tuple:
        """Domain shrunk away from poles at finite endpoints."""
        lo, hi = self.domain
        if math.isfinite(lo) and math.isfinite(hi):
            pad = ENDPOINT_MARGIN * (hi - lo)
            return lo + pad, hi - pad
        return lo, hi

    def critical_points(self, lo: float, hi: float) -> list:
        """(s, h(s)) for the points of [lo, hi] where h' = 0."""
        out = []
        if self.case in (CaseTag.WP_NEG_DISC, CaseTag.WP_POS_DISC):
            w1 = half_periods(self.invariants).omega1.real
            if lo <= w1 <= hi:
                out.append((w1, float(h_eval(self, w1)[0])))
        elif self.periodic:
            w1 = half_periods(self.invariants).omega1.real
            for k in range(math.ceil(lo / w1), math.floor(hi / w1) + 1):
                out.append((k * w1, float(h_eval(self, k * w1)[0])))
        elif self.case in (CaseTag.TAN_DEGENERATE, CaseTag.TANH_DEGENERATE):
            if lo <= 0.0 <= hi:
                out.append((0.0, -2.0 * self.a))
        return out

    def h_eval(self, s):
        return h_eval(self, s)

    def with_domain(self, domain) -> "Potential":
        return Potential(self.case, self.invariants, tuple(domain), self.a, self.ell, self.e1)


def _degenerate_a(inv: Invariants) -> float:
    a = float(inv.degenerate_a)
    if abs(inv.g2 - 12.0 * a * a) > 1e-9 * max(1.0, abs(inv.g2)):
        raise ClassificationError(f"g2 = {inv.g2} inconsistent with a = {a} from g3 = {inv.g3}")
    return a


def classify(inv: Invariants) -> list:
    """All potentials with the given invariants, one per domain component."""
    hp = half_periods(inv)
    if inv.is_zero:
        return [
            Potential(CaseTag.RATIONAL_DEGENERATE, inv, (-math.inf, 0.0)),
            Potential(CaseTag.RATIONAL_DEGENERATE, inv, (0.0, math.inf)),
        ]
    if inv.is_degenerate:
        a = _degenerate_a(inv)
        if a < 0:
            half = math.pi / math.sqrt(-12.0 * a)
            return [Potential(CaseTag.TAN_DEGENERATE, inv, (-half, half), a=a)]
        return [Potential(CaseTag.TANH_DEGENERATE, inv, (-math.inf, math.inf), a=a)]
    w1 = hp.omega1.real
    if discriminant(inv) < 0:
        return [
            Potential(CaseTag.WP_NEG_DISC, inv, (0.0, 2.0 * w1)),
            Potential(CaseTag.WP3_NEG_DISC, inv, (-math.inf, math.inf)),
        ]
    return [Potential(CaseTag.WP_POS_DISC, inv, (0.0, 2.0 * w1))]


def potential_for(inv: Invariants, case, point: float | None = None) -> Potential:
    """The potential of the given case tag among ``classify(inv)``.

    ``point`` picks the domain component containing it (the rational case
    has one component on each side of the pole).
    """
    case = CaseTag(case)
    for p in classify(inv):
        if p.case is case and (point is None or p.domain[0] < point < p.domain[1]):
            return p
    where = "" if point is None else f" containing s={point}"
    raise ClassificationError(f"invariants {inv} admit no {case.value} potential{where}")


# ---------------------------------------------------------------------------
# quasi-periodic family


def check_qp_params(ell: float, e1: float):
    if not (0.0 < ell < 1.0) or not (e1 > 0.0) or not math.isfinite(e1):
        raise ParamOutOfRange(f"need ell in (0, 1) and e1 > 0, got ell={ell}, e1={e1}")


def qp_roots(ell: float, e1: float) -> tuple:
    """(e1, e2, e3) of the quasi-periodic cubic."""
    check_qp_params(ell, e1)
    d = 2.0 - ell * ell
    return e1, e1 * (2.0 * ell * ell - 1.0) / d, -e1 * (1.0 + ell * ell) / d


def qp_invariants(ell: float, e1: float) -> Invariants:
    check_qp_params(ell, e1)
    l2 = ell * ell
    d2 = (2.0 - l2) ** 2
    g2 = 12.0 * (l2 * l2 - l2 + 1.0) * e1 * e1 / d2
    g3 = -4.0 * (2.0 * l2 * l2 + l2 - 1.0) * e1**3 / d2
    return Invariants(g2, g3)


def quasi_periodic(ell: float, e1: float) -> Potential:
    inv = qp_invariants(ell, e1)
    return Potential(CaseTag.QUASI_PERIODIC, inv, (-math.inf, math.inf), ell=float(ell), e1=float(e1))


def h_quasi(s, ell: float, e1: float):
    """(h, h') of the sn^2 representation."""
    check_qp_params(ell, e1)
    d = 2.0 - ell * ell
    rate = math.sqrt(3.0 * e1 / d)
    sn, cn, dn = ellipj(rate * np.asarray(s, dtype=float), ell)
    amp = 3.0 * e1 * ell * ell / d
    h = amp * sn * sn - e1 * (1.0 + ell * ell) / d
    dh = 2.0 * amp * rate * sn * cn * dn
    return h, dh


# ---------------------------------------------------------------------------
# evaluation


def _check_domain(p: Potential, s: np.ndarray):
    lo, hi = p.safe_domain()
    if np.any(~np.isfinite(s)) or np.any(s <= lo) or np.any(s >= hi):
        bad = s[(s <= lo) | (s >= hi) | ~np.isfinite(s)]
        raise OutOfDomain(f"{p.case.value}: s={bad[0]!r} outside domain {p.domain}")
    if p.case is CaseTag.RATIONAL_DEGENERATE and np.any(np.abs(s) < 1e-6):
        raise PoleProximity("s too close to the pole of 1/s^2")


def h_eval(p: Potential, s):
    """(h, h', h'', h''') at s; the two higher derivatives come from the ODE."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    _check_domain(p, s)
    g2 = p.g2
    if p.case is CaseTag.RATIONAL_DEGENERATE:
        h = 1.0 / s**2
        dh = -2.0 / s**3
    elif p.case is CaseTag.TAN_DEGENERATE:
        rate = math.sqrt(-3.0 * p.a)
        t = np.tan(rate * s)
        h = -3.0 * p.a * t * t - 2.0 * p.a
        dh = -6.0 * p.a * rate * t * (1.0 + t * t)
    elif p.case is CaseTag.TANH_DEGENERATE:
        rate = math.sqrt(3.0 * p.a)
        t = np.tanh(rate * s)
        h = 3.0 * p.a * t * t - 2.0 * p.a
        dh = 6.0 * p.a * rate * t * (1.0 - t * t)
    elif p.case is CaseTag.QUASI_PERIODIC:
        h, dh = h_quasi(s, p.ell, p.e1)
    else:
        fn = weierstrass(p.invariants)
        shift = p.shift
        vals = [fn.wp_pair(x + shift) for x in s]
        h = np.array([v[0].real for v in vals])
        dh = np.array([v[1].real for v in vals])
    d2h = 6.0 * h * h - 0.5 * g2
    d3h = 12.0 * h * dh
    if scalar:
        return float(h[0]), float(dh[0]), float(d2h[0]), float(d3h[0])
    return h, dh, d2h, d3h


def weierstrass_residual(p: Potential, s):
    """(h')^2 - (4h^3 - g2 h - g3)."""
    h, dh, _, _ = h_eval(p, s)
    return dh * dh - (4.0 * h**3 - p.g2 * h - p.g3)


def el_residual_from_derivatives(m: float, h, dh, d2h, d3h):
    """k''' - 6 k k' + 2 m k' for k = 2h + m/3."""
    k = 2.0 * h + m / 3.0
    k1, k3 = 2.0 * dh, 2.0 * d3h
    return k3 - 6.0 * k * k1 + 2.0 * m * k1


def h_derivatives(p: Potential, s, nodes: int = 32):
    """(h, h', h'', h''') from Cauchy integrals of wp(s + shift) on a small circle.

    Independent of the ODE identities used by ``h_eval``; the quasi-periodic
    case goes through wp rather than sn, so it also exercises that bridge.
    """
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    _check_domain(p, s)
    fn = weierstrass(p.invariants)
    shift = p.shift
    circle = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    out = np.empty((4, len(s)))
    for i, x in enumerate(s):
        z = x + shift
        r = min(0.25 * fn.lattice_distance(z), 0.5)
        vals = np.array([fn.wp(z + r * c) for c in circle])
        for k in range(4):
            out[k, i] = (np.mean(vals * circle ** (-k)) * math.factorial(k) / r**k).real
    if scalar:
        return tuple(float(v[0]) for v in out)
    return tuple(out)


def el_residual(m: float, p: Potential, s, perturb: float = 0.0):
    """EL residual of k = 2h + m/3, derivatives taken from ``h_derivatives``.

    ``perturb`` is added to h (a non-solution control).  The ODE-derived
    derivatives of ``h_eval`` would make this check vacuous.
    """
    h, dh, d2h, d3h = h_derivatives(p, s)
    return el_residual_from_derivatives(m, h + perturb, dh, d2h, d3h)


def range_bounds(p: Potential) -> tuple:
    """Closure of h(I)."""
    if p.case is CaseTag.RATIONAL_DEGENERATE:
        return 0.0, math.inf
    if p.case is CaseTag.TAN_DEGENERATE:
        return -2.0 * p.a, math.inf
    if p.case is CaseTag.TANH_DEGENERATE:
        return -2.0 * p.a, p.a
    roots = cubic_roots(p.invariants).real_roots
    if p.case in (CaseTag.WP3_NEG_DISC, CaseTag.QUASI_PERIODIC):
        return roots[2], roots[1]
    return roots[0], math.inf
