"""Momentum-space lift of a trajectory and the Euler-Lagrange Pfaffian residuals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import derivative
from .potential import Potential, h_derivatives


@dataclass
class MomentumLift:
    """Samples of (s, k, x1, x2, x4, x5); x3 = -x2 is implied.

    ``dx1``/``dx2`` hold derivatives of x1, x2 when known analytically,
    otherwise None and the residuals fall back to finite differences.
    """

    s: np.ndarray
    k: np.ndarray
    dk: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x4: np.ndarray
    x5: np.ndarray
    dx1: np.ndarray | None = None
    dx2: np.ndarray | None = None

    @property
    def x3(self):
        return -self.x2


def _lift(m, s, k, dk, d2k, d3k=None):
    x1 = d2k / 4.0 - k * k / 2.0 + m * k / 2.0 + 1.0
    x2 = -dk / 4.0
    dx1 = None if d3k is None else d3k / 4.0 - k * dk + m * dk / 2.0
    dx2 = -d2k / 4.0
    return MomentumLift(s, k, dk, x1, x2, (m + k) / 2.0, np.ones_like(k), dx1, dx2)


def momentum_lift(m: float, p: Potential, s_grid) -> MomentumLift:
    """Lift of the trajectory with k = 2h + m/3, using analytic derivatives of h."""
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    h, dh, d2h, d3h = h_derivatives(p, s)
    return _lift(m, s, 2.0 * h + m / 3.0, 2.0 * dh, 2.0 * d2h, 2.0 * d3h)


def lift_from_curvature(m: float, s_grid, k, dk=None, d2k=None, d3k=None) -> MomentumLift:
    """Lift of an arbitrary curvature sample; missing derivatives come from finite differences."""
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    k = np.asarray(k, dtype=float)
    dk = derivative(s, k) if dk is None else np.asarray(dk, dtype=float)
    d2k = derivative(s, dk) if d2k is None else np.asarray(d2k, dtype=float)
    return _lift(m, s, k, dk, d2k, None if d3k is None else np.asarray(d3k, dtype=float))


def el_system_residuals(lift: MomentumLift, m: float):
    """(r1, r2, r3) of sigma_1, sigma_2, sigma_3 evaluated on the lift."""
    k = lift.k
    dx1 = lift.dx1 if lift.dx1 is not None else derivative(lift.s, lift.x1)
    dx2 = lift.dx2 if lift.dx2 is not None else derivative(lift.s, lift.x2)
    r1 = dx1 + 2.0 * k * lift.x2
    r2 = dx2 + k * k / 2.0 - m * k / 2.0 - 1.0 + lift.x1
    r3 = lift.dk + 4.0 * lift.x2
    return r1, r2, r3
