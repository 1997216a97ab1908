"""Elliptic function kernel.

Weierstrass functions with real invariants (complex arguments), the
half-period lattice, Jacobi sn/cn/dn, the complete integral K and an
inverse of the Weierstrass function.

Non-degenerate lattices are evaluated with a scaled Laurent expansion near
the origin followed by repeated argument duplication; the three degenerate
lattices (g2 = 12a^2, g3 = -8a^3) use their trigonometric, hyperbolic or
rational closed forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ModulusOutOfRange, NoFiniteSolution, NonConvergence, PoleProximity

INF = math.inf
IINF = complex(0.0, math.inf)

POLE_RADIUS = 1e-6
DEGENERATE_RTOL = 1e-12
_LAURENT_TERMS = 48
_LAURENT_RADIUS = 0.4


@dataclass(frozen=True)
class Invariants:
    g2: float
    g3: float

    def __post_init__(self):
        object.__setattr__(self, "g2", float(self.g2))
        object.__setattr__(self, "g3", float(self.g3))

    @property
    def discriminant(self) -> float:
        return discriminant(self)

    def cubic(self, t):
        """P(t) = 4t^3 - g2 t - g3."""
        return 4.0 * t**3 - self.g2 * t - self.g3

    @property
    def is_zero(self) -> bool:
        return self.g2 == 0.0 and self.g3 == 0.0

    @property
    def is_degenerate(self) -> bool:
        scale = abs(self.g2) ** 3 + 27.0 * self.g3**2
        return scale == 0.0 or abs(discriminant(self)) <= DEGENERATE_RTOL * scale

    @property
    def degenerate_a(self) -> float:
        """Parameter a with g2 = 12a^2, g3 = -8a^3 (meaningful only when degenerate)."""
        return -np.cbrt(self.g3 / 8.0)


def discriminant(inv: Invariants) -> float:
    return 27.0 * inv.g3**2 - inv.g2**3


@dataclass(frozen=True)
class RootSet:
    roots: tuple
    real_roots: tuple


def _polish(t, inv, steps=3):
    for _ in range(steps):
        d = 12.0 * t * t - inv.g2
        if d == 0:
            break
        t = t - inv.cubic(t) / d
    return t


def cubic_roots(inv: Invariants) -> RootSet:
    """Roots of 4t^3 - g2 t - g3, real ones sorted in descending order."""
    g2, g3 = inv.g2, inv.g3
    if inv.is_zero:
        return RootSet((0j, 0j, 0j), (0.0, 0.0, 0.0))
    if inv.is_degenerate:
        a = inv.degenerate_a
        r = sorted([a, a, -2.0 * a], reverse=True)
        return RootSet(tuple(complex(x) for x in r), tuple(r))
    delta = discriminant(inv)
    if delta < 0:
        # three real roots, trigonometric form of t^3 - (g2/4) t - g3/4
        rho = math.sqrt(g2 / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * math.sqrt(3.0) * g3 / (g2 * math.sqrt(g2))))
        theta = math.acos(arg) / 3.0
        r = [rho * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
        r = sorted((_polish(x, inv) for x in r), reverse=True)
        return RootSet(tuple(complex(x) for x in r), tuple(r))
    # one real root: Cardano with a cancellation-free branch
    q = -g3 / 4.0
    root_d = math.sqrt(delta / 1728.0)
    big = -math.copysign(1.0, q) * np.cbrt(abs(q) / 2.0 + root_d)
    r = big + (g2 / 12.0) / big if big != 0 else 0.0
    r = _polish(r, inv)
    im = math.sqrt(max(3.0 * r * r - g2, 0.0)) / 2.0
    pair = complex(-r / 2.0, im)
    return RootSet((pair, complex(r), pair.conjugate()), (r,))


@dataclass(frozen=True)
class HalfPeriods:
    """Primitive half-periods in the normal form of the real classification.

    Infinite half-periods are the markers INF (for omega1) and IINF (for
    omega3); they are never replaced by large finite numbers.
    """

    omega1: complex
    omega3: complex
    nu: float | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(abs(self.omega1)) and math.isfinite(abs(self.omega3))


def agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 1e-16 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


@lru_cache(maxsize=256)
def half_periods(inv: Invariants) -> HalfPeriods:
    if inv.is_zero:
        return HalfPeriods(INF, IINF)
    if inv.is_degenerate:
        a = inv.degenerate_a
        if a < 0:  # g3 > 0
            return HalfPeriods(complex(math.pi / (2.0 * math.sqrt(-3.0 * a))), IINF)
        return HalfPeriods(INF, complex(0.0, math.pi / (2.0 * math.sqrt(3.0 * a))))
    rs = cubic_roots(inv)
    if discriminant(inv) < 0:
        e1, e2, e3 = rs.real_roots
        w1 = math.pi / (2.0 * agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2)))
        w3 = math.pi / (2.0 * agm(math.sqrt(e1 - e3), math.sqrt(e2 - e3)))
        return HalfPeriods(complex(w1), complex(0.0, w3), w3 / w1)
    r = rs.real_roots[0]
    big_h = math.sqrt(3.0 * r * r - inv.g2 / 4.0)
    kp2 = 0.5 + 0.75 * r / big_h
    k2 = 0.5 - 0.75 * r / big_h
    w_real = math.pi / (2.0 * agm(math.sqrt(big_h), math.sqrt(big_h * kp2)))
    w_imag = math.pi / (2.0 * agm(math.sqrt(big_h), math.sqrt(big_h * k2)))
    nu = w_imag / w_real
    return HalfPeriods(complex(w_real), 0.5 * complex(w_real, w_imag), nu)


# ---------------------------------------------------------------------------
# Weierstrass functions


def _laurent_coefficients(g2: float, g3: float, n: int) -> list:
    c = [0.0, 0.0, g2 / 20.0, g3 / 28.0]
    for k in range(4, n + 2):
        acc = sum(c[j] * c[k - j] for j in range(2, k - 1))
        c.append(3.0 * acc / ((2 * k + 1) * (k - 3)))
    return c[2:]


def _log_sinh(w: complex) -> complex:
    # log(sinh w) on some branch, without overflow for large |Re w|
    if w.real < 0:
        return _log_sinh(-w) + 1j * math.pi
    e = cmath.exp(-2.0 * w)
    return w + cmath.log(1.0 - e) - math.log(2.0)


def _sinh_parts(w: complex):
    """(1/sinh^2 w, coth w), stable for large |Re w|."""
    if w.real < 0:
        inv2, coth = _sinh_parts(-w)
        return inv2, -coth
    e = cmath.exp(-2.0 * w)
    one_m = 1.0 - e
    return 4.0 * e / (one_m * one_m), (1.0 + e) / one_m


class Weierstrass:
    """Weierstrass wp, wp', zeta and sigma for one pair of real invariants."""

    def __init__(self, inv: Invariants):
        self.inv = inv
        self.periods = half_periods(inv)
        if inv.is_zero:
            self.kind = "zero"
        elif inv.is_degenerate:
            a = inv.degenerate_a
            self.a = a
            if a < 0:
                self.kind = "trig"
                self.rate = math.sqrt(-3.0 * a)
            else:
                self.kind = "hyp"
                self.rate = math.sqrt(3.0 * a)
        else:
            self.kind = "lattice"
            self._setup_lattice()

    # -- lattice bookkeeping ------------------------------------------------
    def _setup_lattice(self):
        w1, w3 = self.periods.omega1, self.periods.omega3
        v1, v2 = 2 * w1, 2 * w3
        m1, m2 = (1, 0), (0, 1)  # coordinates in the (2w1, 2w3) basis
        for _ in range(100):
            if abs(v1) > abs(v2):
                v1, v2, m1, m2 = v2, v1, m2, m1
            mu = round((v2 * v1.conjugate()).real / abs(v1) ** 2)
            if mu == 0:
                break
            v2 = v2 - mu * v1
            m2 = (m2[0] - mu * m1[0], m2[1] - mu * m1[1])
        self._basis = (v1, v2)
        self._coords = (m1, m2)
        self._basis_inv = np.linalg.inv(np.array([[v1.real, v2.real], [v1.imag, v2.imag]]))
        self.scale = min(abs(v1), abs(v2))
        s = self.scale
        self._g2s = self.inv.g2 * s**4
        self._g3s = self.inv.g3 * s**6
        coef = _laurent_coefficients(self._g2s, self._g3s, _LAURENT_TERMS)
        # drop the tail that cannot matter inside the Laurent disk
        keep = [k for k, c in enumerate(coef) if abs(c) * _LAURENT_RADIUS ** (2 * k + 4) > 1e-20]
        self._coef = coef[: (keep[-1] + 1) if keep else 0]
        self.eta1 = self._core(w1 / s)[2] / s
        self.eta3 = self._core(w3 / s)[2] / s

    def _reduce(self, z: complex):
        """Split z = zr + 2a w1 + 2b w3 with zr near the origin."""
        x, y = self._basis_inv @ np.array([z.real, z.imag])
        v1, v2 = self._basis
        best = None
        for i in (math.floor(x), math.floor(x) + 1):
            for j in (math.floor(y), math.floor(y) + 1):
                d = abs(z - i * v1 - j * v2)
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        (p1, q1), (p2, q2) = self._coords
        a = i * p1 + j * p2
        b = i * q1 + j * q2
        lam = 2 * a * self.periods.omega1 + 2 * b * self.periods.omega3
        return z - lam, a, b, lam

    def _core(self, t: complex):
        """(wp, wp', zeta, log sigma) in scaled units, no lattice reduction."""
        n = 0
        r = abs(t)
        while r > _LAURENT_RADIUS:
            r *= 0.5
            n += 1
        t0 = t / 2**n
        t2 = t0 * t0
        p = 1.0 / t2
        p1 = -2.0 / (t2 * t0)
        z = 1.0 / t0
        lg = cmath.log(t0)
        pw = t2  # t0^(2k-2)
        for k, c in enumerate(self._coef, start=2):
            term = c * pw
            p += term
            p1 += (2 * k - 2) * term / t0
            z -= term * t0 / (2 * k - 1)
            lg -= term * t2 / ((2 * k - 1) * 2 * k)
            pw *= t2
        g2 = self._g2s
        for _ in range(n):
            pp = 6.0 * p * p - 0.5 * g2
            d = pp / (2.0 * p1)
            dd = (12.0 * p * p1 * p1 - pp * pp) / (2.0 * p1 * p1)
            lg = cmath.log(-p1) + 4.0 * lg
            z = 2.0 * z + d
            p, p1 = -2.0 * p + d * d, -p1 + d * dd
        return p, p1, z, lg

    def lattice_distance(self, z: complex) -> float:
        if self.kind == "zero":
            return abs(z)
        if self.kind == "lattice":
            return abs(self._reduce(z)[0])
        if self.kind == "trig":
            per = 2.0 * self.periods.omega1.real
            return abs(z - per * round(z.real / per))
        per = 2.0 * self.periods.omega3.imag
        return abs(z - 1j * per * round(z.imag / per))

    def _check_pole(self, z):
        if self.lattice_distance(z) < POLE_RADIUS:
            raise PoleProximity(f"argument {z!r} is within {POLE_RADIUS} of a lattice point")

    # -- public evaluation -----------------------------------------------------
    def wp_pair(self, z) -> tuple:
        """(wp(z), wp'(z))."""
        z = complex(z)
        self._check_pole(z)
        if self.kind == "zero":
            return 1.0 / z**2, -2.0 / z**3
        if self.kind == "lattice":
            zr = self._reduce(z)[0]
            s = self.scale
            p, p1, _, _ = self._core(zr / s)
            return p / s**2, p1 / s**3
        a, c = self.a, self.rate
        if self.kind == "hyp":
            inv2, coth = _sinh_parts(c * z)
            return a + c * c * inv2, -2.0 * c**3 * coth * inv2
        inv2, coth = _sinh_parts(1j * c * z)
        return a - c * c * inv2, 2.0 * c**3 * 1j * coth * inv2

    def wp(self, z) -> complex:
        return self.wp_pair(z)[0]

    def wp_prime(self, z) -> complex:
        return self.wp_pair(z)[1]

    def zeta(self, z) -> complex:
        z = complex(z)
        self._check_pole(z)
        if self.kind == "zero":
            return 1.0 / z
        if self.kind == "lattice":
            zr, a, b, _ = self._reduce(z)
            s = self.scale
            return self._core(zr / s)[2] / s + 2 * a * self.eta1 + 2 * b * self.eta3
        a, c = self.a, self.rate
        if self.kind == "hyp":
            return -a * z + c * _sinh_parts(c * z)[1]
        return -a * z + 1j * c * _sinh_parts(1j * c * z)[1]

    def log_sigma(self, z) -> complex:
        """A logarithm of sigma(z); the imaginary part is defined modulo 2 pi."""
        z = complex(z)
        if z == 0:
            return complex(-math.inf)
        if self.kind == "zero":
            return cmath.log(z)
        if self.kind == "lattice":
            zr, a, b, lam = self._reduce(z)
            if zr == 0:
                return complex(-math.inf)
            s = self.scale
            lg = self._core(zr / s)[3] + math.log(s)
            eta = 2 * a * self.eta1 + 2 * b * self.eta3
            lg += eta * (zr + 0.5 * lam)
            if a % 2 or b % 2:
                lg += 1j * math.pi
            return lg
        a, c = self.a, self.rate
        if self.kind == "hyp":
            return -0.5 * a * z * z + _log_sinh(c * z) - math.log(c)
        # sin(cz) = -i sinh(icz)
        return -0.5 * a * z * z + _log_sinh(1j * c * z) - 0.5j * math.pi - math.log(c)

    def sigma(self, z) -> complex:
        lg = self.log_sigma(z)
        if lg.real == -math.inf:
            return 0j
        return cmath.exp(lg)

    @property
    def etas(self):
        """(eta1, eta3) = (zeta(w1), zeta(w3)) for finite lattices."""
        if self.kind != "lattice":
            raise ValueError("quasi-periods are only tabulated for finite lattices")
        return self.eta1, self.eta3

    def reduce_to_cell(self, z: complex) -> complex:
        """Representative of z in the parallelogram {2 w1 x + 2 w3 y : 0 <= x, y < 1}."""
        w1, w3 = self.periods.omega1, self.periods.omega3
        if self.kind == "zero":
            return z
        if self.kind == "trig":
            per = 2.0 * w1.real
            return complex(z.real % per, z.imag)
        if self.kind == "hyp":
            per = 2.0 * w3.imag
            return complex(z.real, z.imag % per)
        mat = np.array([[2 * w1.real, 2 * w3.real], [2 * w1.imag, 2 * w3.imag]])
        x, y = np.linalg.solve(mat, [z.real, z.imag])
        x -= math.floor(x)
        y -= math.floor(y)
        if x > 1 - 1e-13:
            x = 0.0
        if y > 1 - 1e-13:
            y = 0.0
        return 2 * w1 * x + 2 * w3 * y


@lru_cache(maxsize=256)
def weierstrass(inv: Invariants) -> Weierstrass:
    return Weierstrass(inv)


def wp(z, inv: Invariants) -> complex:
    return weierstrass(inv).wp(z)


def wp_prime(z, inv: Invariants) -> complex:
    return weierstrass(inv).wp_prime(z)


def weierstrass_zeta(z, inv: Invariants) -> complex:
    return weierstrass(inv).zeta(z)


def weierstrass_sigma(z, inv: Invariants) -> complex:
    return weierstrass(inv).sigma(z)


def log_sigma(z, inv: Invariants) -> complex:
    return weierstrass(inv).log_sigma(z)


# ---------------------------------------------------------------------------
# inverse of wp


def _pick_sign(fn: Weierstrass, w: complex, target: complex) -> complex:
    d = fn.wp_prime(w)
    return w if abs(d - target) <= abs(d + target) else -w


@lru_cache(maxsize=1024)
def inverse_wp(c: complex, sign: int, inv: Invariants, grid: int = 32) -> complex:
    """Point w of the period parallelogram with wp(w) = c and wp'(w) = sign*sqrt(P(c)).

    The square root is the principal one.
    """
    c = complex(c)
    fn = weierstrass(inv)
    target = sign * cmath.sqrt(inv.cubic(c))
    scale = max(1.0, abs(c))
    if fn.kind == "zero":
        if c == 0:
            raise NoFiniteSolution("wp = 1/z^2 never vanishes")
        w = 1.0 / cmath.sqrt(c)
        return _pick_sign(fn, w, target)
    if fn.kind in ("hyp", "trig"):
        a, rate = fn.a, fn.rate
        if abs(c - a) <= 1e-14 * scale:
            raise NoFiniteSolution("double root of P is attained only at infinity")
        if fn.kind == "hyp":
            w = cmath.asinh(rate / cmath.sqrt(c - a)) / rate
        else:
            w = cmath.asin(rate / cmath.sqrt(c - a)) / rate
        w = _pick_sign(fn, w, target)
        return fn.reduce_to_cell(w)
    # finite lattice: half-periods first, then Newton from a seed grid
    w1, w3 = fn.periods.omega1, fn.periods.omega3
    if abs(target) <= 1e-7 * scale ** 1.5:
        for w in (w1, w3, w1 + w3):
            if abs(fn.wp(w) - c) <= 1e-9 * scale:
                return fn.reduce_to_cell(w)
    # near a critical value wp(w) - c has a near-double root; solve wp'(w) = target instead
    for w0 in (w1, w3, w1 + w3):
        if abs(fn.wp(w0) - c) <= 1e-3 * scale:
            w = _newton_wp_prime(fn, w0, target)
            if w is not None and abs(fn.wp(w) - c) <= 1e-9 * scale:
                return fn.reduce_to_cell(w)
    xs = (np.arange(grid) + 0.5) / grid
    seeds = []
    for x in xs:
        for y in xs:
            z = 2 * w1 * x + 2 * w3 * y
            try:
                seeds.append((abs(fn.wp(z) - c), z))
            except PoleProximity:
                continue
    seeds.sort(key=lambda item: item[0])
    for _, z in seeds[:64]:
        w = _newton_wp(fn, z, c)
        if w is None:
            continue
        w = _pick_sign(fn, w, target)
        if abs(fn.wp_prime(w) - target) <= 1e-6 * max(1.0, abs(target)):
            return fn.reduce_to_cell(w)
    raise NonConvergence(f"no solution of wp(w) = {c} found from {grid}x{grid} seeds")


def _newton_wp_prime(fn: Weierstrass, z: complex, target: complex, iters: int = 40):
    g2 = fn.inv.g2
    tol = 1e-13 * max(1.0, abs(target), abs(fn.wp(z)) ** 1.5)
    for _ in range(iters):
        p, p1 = fn.wp_pair(z)
        r = p1 - target
        if abs(r) < tol:
            return z
        z = z - r / (6.0 * p * p - 0.5 * g2)
    return None


def _newton_wp(fn: Weierstrass, z: complex, c: complex, iters: int = 60):
    tol = 1e-10 * max(1.0, abs(c))
    for _ in range(iters):
        try:
            p, p1 = fn.wp_pair(z)
        except PoleProximity:
            return None
        r = p - c
        if abs(r) < tol:
            # one more step for full accuracy
            if p1 != 0:
                z2 = z - r / p1
                try:
                    if abs(fn.wp(z2) - c) < abs(r):
                        z = z2
                except PoleProximity:
                    pass
            return z
        if p1 == 0:
            return None
        step = r / p1
        lim = 0.25 * fn.scale
        if abs(step) > lim:
            step *= lim / abs(step)
        z = z - step
    return None


# ---------------------------------------------------------------------------
# Jacobi functions and K


def _check_modulus(ell):
    if not (0.0 <= ell < 1.0):
        raise ModulusOutOfRange(f"modulus must lie in [0, 1), got {ell}")


def elliptic_K(ell: float) -> float:
    """Complete elliptic integral of the first kind, modulus ell, by AGM."""
    _check_modulus(ell)
    return math.pi / (2.0 * agm(1.0, math.sqrt((1.0 - ell) * (1.0 + ell))))


def ellipj(u, ell: float):
    """Jacobi (sn, cn, dn) for real u and modulus ell (descending Landen / AGM)."""
    _check_modulus(ell)
    u = np.asarray(u, dtype=float)
    if ell == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    quarter = elliptic_K(ell)
    ur = np.remainder(u + 2.0 * quarter, 4.0 * quarter) - 2.0 * quarter
    a = [1.0]
    c = [ell]
    b = math.sqrt((1.0 - ell) * (1.0 + ell))
    while abs(c[-1]) > 1e-17 and len(a) < 40:
        an, bn = a[-1], b
        a.append(0.5 * (an + bn))
        c.append(0.5 * (an - bn))
        b = math.sqrt(an * bn)
    n = len(a) - 1
    phi = 2.0**n * a[n] * ur
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(1.0 - (ell * sn) ** 2)
    return sn, cn, dn


def jacobi_sn(u, ell):
    return ellipj(u, ell)[0]


def jacobi_cn(u, ell):
    return ellipj(u, ell)[1]


def jacobi_dn(u, ell):
    return ellipj(u, ell)[2]
