"""Adaptive Dormand-Prince 5(4) integrator with an optional per-step projection."""

from __future__ import annotations

import numpy as np

from .errors import StepSizeUnderflow

# Dormand & Prince (1980) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _step(f, t, y, h, k0):
    k = [k0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(f(t + _C[i] * h, yi))
    y5 = y + h * sum(b * kj for b, kj in zip(_B5, k) if b != 0.0)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
    return y5, err, k[6]


def dopri5(f, t0, y0, t_eval, rtol=1e-10, atol=1e-12, project=None, max_steps=200000):
    """Integrate y' = f(t, y) from (t0, y0), returning y at every point of t_eval.

    Points on either side of t0 are allowed; each direction is integrated
    separately and lands exactly on the requested points.  ``project`` maps
    an accepted state back onto the constraint manifold.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    out = np.empty((len(t_eval),) + y0.shape)
    for direction in (1.0, -1.0):
        idx = np.where(direction * (t_eval - t0) >= 0)[0] if direction > 0 else np.where(t_eval < t0)[0]
        if len(idx) == 0:
            continue
        order = idx[np.argsort(direction * t_eval[idx])]
        t, y = float(t0), y0.copy()
        span = abs(t_eval[order[-1]] - t0)
        h = direction * min(1e-2, max(span, 1e-8) * 1e-2)
        fy = f(t, y)
        steps = 0
        for j in order:
            target = t_eval[j]
            while direction * (target - t) > 0:
                steps += 1
                if steps > max_steps:
                    raise StepSizeUnderflow("step budget exhausted")
                last = direction * (t + h - target) >= 0
                hh = target - t if last else h
                if abs(hh) < 1e-14 * max(1.0, abs(t)):
                    if last:
                        t = target
                        break
                    raise StepSizeUnderflow(f"step size underflow at t={t}")
                y_new, err, f_new = _step(f, t, y, hh, fy)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                en = float(np.sqrt(np.mean((err / scale) ** 2)))
                if en <= 1.0:
                    t = target if last else t + hh
                    y = project(y_new) if project is not None else y_new
                    fy = f(t, y) if project is not None else f_new
                    fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
                    if not last:
                        h = hh * fac
                else:
                    fac = 0.2 if not np.isfinite(en) else max(0.2, 0.9 * en ** -0.2)
                    h = hh * fac
            out[j] = y
    return out
