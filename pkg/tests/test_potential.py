import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adsnull.checks import potential_cases
from adsnull.elliptic import Invariants, cubic_roots, half_periods
from adsnull.errors import ClassificationError, OutOfDomain, PoleProximity
from adsnull.potential import (
    CaseTag,
    classify,
    el_residual,
    el_residual_from_derivatives,
    h_derivatives,
    h_eval,
    potential_for,
    quasi_periodic,
    range_bounds,
    weierstrass_residual,
)

CASES = potential_cases()


def test_classify_examples():
    ps = classify(Invariants(0, 0))
    assert [p.case for p in ps] == [CaseTag.RATIONAL_DEGENERATE] * 2
    assert ps[0].domain == (-math.inf, 0.0) and ps[1].domain == (0.0, math.inf)
    (p,) = classify(Invariants(12, 8))
    assert p.case is CaseTag.TAN_DEGENERATE and p.a == -1.0
    assert np.allclose(p.domain, (-math.pi / math.sqrt(12), math.pi / math.sqrt(12)))
    (p,) = classify(Invariants(12, -8))
    assert p.case is CaseTag.TANH_DEGENERATE and p.a == 1.0 and p.domain == (-math.inf, math.inf)
    assert [p.case for p in classify(Invariants(4, 0))] == [CaseTag.WP_NEG_DISC, CaseTag.WP3_NEG_DISC]
    assert [p.case for p in classify(Invariants(0, 4))] == [CaseTag.WP_POS_DISC]


def test_classify_idempotent():
    for g in ((4, 0), (0, 4), (12, 8), (12, -8), (0, 0), (-3, 2)):
        for p in classify(Invariants(*g)):
            assert p in classify(p.invariants)


def test_inconsistent_degenerate_invariants():
    # |Delta| tiny relative to scale but g2 != 12 a^2 beyond 1e-9
    with pytest.raises(ClassificationError):
        from adsnull.potential import _degenerate_a

        _degenerate_a(Invariants(12.001, 8))


def test_h_eval_examples():
    p = potential_for(Invariants(0, 0), CaseTag.RATIONAL_DEGENERATE, 2.0)
    assert np.allclose(h_eval(p, 2.0), (0.25, -0.25, 0.375, -0.75), atol=1e-15)
    p = potential_for(Invariants(12, -8), CaseTag.TANH_DEGENERATE)
    h, dh, _, _ = h_eval(p, 0.0)
    assert h == -2.0 and dh == 0.0
    inv = Invariants(4, 0)
    p = potential_for(inv, CaseTag.WP_NEG_DISC)
    w1 = half_periods(inv).omega1.real
    h, dh, _, _ = h_eval(p, w1)
    assert abs(h - 1.0) < 1e-12 and abs(dh) < 1e-10


def test_domain_errors():
    p = potential_for(Invariants(4, 0), CaseTag.WP_NEG_DISC)
    with pytest.raises(OutOfDomain):
        h_eval(p, -0.1)
    with pytest.raises(OutOfDomain):
        h_eval(p, 1e-6)  # inside the endpoint margin
    p = potential_for(Invariants(12, 8), CaseTag.TAN_DEGENERATE)
    with pytest.raises(OutOfDomain):
        h_eval(p, 1.0)
    p = potential_for(Invariants(0, 0), CaseTag.RATIONAL_DEGENERATE, 1.0)
    with pytest.raises(OutOfDomain):
        h_eval(p, -1.0)
    with pytest.raises(PoleProximity):
        from adsnull.potential import _check_domain

        _check_domain(p.with_domain((-1.0, 1.0)), np.array([1e-8]))


def test_weierstrass_residual_examples():
    p = potential_for(Invariants(12, 8), CaseTag.TAN_DEGENERATE)
    assert abs(weierstrass_residual(p, 0.3)) < 1e-9
    q = quasi_periodic(0.25, 10.0)
    assert abs(weierstrass_residual(q, 0.2)) < 1e-9


@pytest.mark.parametrize("idx", range(len(CASES)))
def test_residuals_on_grid(idx):
    p, s = CASES[idx]
    h = h_eval(p, s)[0]
    assert np.max(np.abs(weierstrass_residual(p, s)) / (1 + np.abs(h) ** 3)) < 1e-9
    for m in (-5, 0, 3, 7):
        assert np.max(np.abs(el_residual(m, p, s))) < 1e-7


def test_el_rational_cancellation():
    p = potential_for(Invariants(0, 0), CaseTag.RATIONAL_DEGENERATE, 1.0)
    # k = 2/s^2: k''' = -48/s^5 and 6kk' = -48/s^5
    assert abs(el_residual(0, p, 1.0)) < 1e-10
    assert abs(el_residual_from_derivatives(0, 1.0, -2.0, 6.0, -24.0)) == 0.0


def test_el_negative_control():
    p = potential_for(Invariants(5, 0), CaseTag.WP_NEG_DISC)
    s = np.linspace(0.3, 1.0, 20)
    assert np.max(np.abs(el_residual(0, p, s, perturb=0.1))) > 1e-2


@pytest.mark.parametrize("idx", range(len(CASES)))
def test_derivatives_vs_finite_differences(idx):
    p, s = CASES[idx]
    step = 1e-3
    s = s[5:-5]
    vals = [np.array(h_eval(p, s + k * step)) for k in (-2, -1, 1, 2)]
    fd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step)
    exact = np.array(h_eval(p, s))
    for j in range(3):
        assert np.max(np.abs(fd[j] - exact[j + 1]) / (1 + np.abs(exact[j + 1]))) < 1e-5


@pytest.mark.parametrize("idx", range(len(CASES)))
def test_cauchy_derivatives_match_ode_identities(idx):
    p, s = CASES[idx]
    a = np.array(h_eval(p, s))
    b = np.array(h_derivatives(p, s))
    assert np.max(np.abs(a - b) / (1 + np.abs(a))) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 8), st.floats(-1.0, 1.0), st.floats(-30, 30))
def test_wp3_branch_bounded(g2, ratio, s):
    # three real roots need g3^2 < g2^3/27
    g3 = ratio * math.sqrt(g2**3 / 27) * 0.99
    inv = Invariants(g2, g3)
    p = potential_for(inv, CaseTag.WP3_NEG_DISC)
    e1, e2, e3 = cubic_roots(inv).real_roots
    h = h_eval(p, s)[0]
    assert e3 - 1e-9 <= h <= e2 + 1e-9
    lo, hi = range_bounds(p)
    assert (lo, hi) == (e3, e2)


def test_periodic_branch_period():
    inv = Invariants(5, 0)
    p = potential_for(inv, CaseTag.WP3_NEG_DISC)
    per = p.real_period
    s = np.linspace(-2, 2, 33)
    assert np.max(np.abs(h_eval(p, s + per)[0] - h_eval(p, s)[0])) < 1e-10
