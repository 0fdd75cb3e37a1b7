import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sioshift.so_core import (INF, ZERO, FiberConfig, SODomainError,
                              SOFunction, SORejectedError,
                              estimate_fiber_points, estimate_joint_clusters,
                              oscillation_modulus, require_so, verify_so)

E = math.e


def real_range_diameter(fn, lo, hi, n=20000):
    """Independent 1-D oracle: diameter of a real function over [lo, hi]."""
    vals = fn(np.linspace(lo, hi, n))
    return float(vals.max() - vals.min())


@pytest.fixture
def sin_log():
    return SOFunction.from_text("sin(log(t))")


@pytest.fixture
def sin_log_log():
    return SOFunction.from_text("2+sin(log(log(t)))", domain=(E, INF),
                                limits={ZERO: 2.0})


# --------------------------------------------------------------------------
# oscillation modulus
# --------------------------------------------------------------------------

def test_modulus_of_constant_is_zero():
    f = SOFunction.constant(7.0)
    assert oscillation_modulus(f, 0.5, 10.0) == 0.0
    assert oscillation_modulus(f, 0.25, 1e-6) == 0.0


def test_modulus_sin_log_matches_dense_oracle(sin_log):
    r = math.exp(10.0)
    got = oscillation_modulus(sin_log, 0.5, r)
    want = real_range_diameter(np.sin, 10.0 - math.log(2.0), 10.0)
    assert got == pytest.approx(want, abs=1e-3)
    # and it does not fade as r grows: a non-SO witness
    deep = oscillation_modulus(sin_log, 0.5, math.exp(200.0))
    assert deep > 0.05


def test_modulus_sin_log_log_shrinks(sin_log_log):
    # window [r/2, r] maps to a log-log interval of width ~ log(2)/log(r)
    for logr in (math.exp(4.0), math.exp(6.0)):
        r = math.exp(logr)
        got = oscillation_modulus(sin_log_log, 0.5, r)
        assert got <= math.log(2.0) / logr * 1.05 + 1e-12
    shallow = oscillation_modulus(sin_log_log, 0.5, math.exp(math.exp(4.0)))
    deep = oscillation_modulus(sin_log_log, 0.5, math.exp(math.exp(6.0)))
    assert deep < shallow


def test_modulus_requires_window_inside_domain(sin_log_log):
    with pytest.raises(SODomainError):
        oscillation_modulus(sin_log_log, 0.5, 2.0 * E)  # lam*r < e


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.25, max_value=0.85),
       st.floats(min_value=2.0, max_value=80.0))
def test_modulus_scale_subadditivity(lam, logr):
    # over [lam^2 r, r] the oscillation is bounded by the two half windows
    f = SOFunction.from_text("sin(log(t))+atan(log(t))")
    r = math.exp(logr)
    whole = oscillation_modulus(f, lam * lam, r)
    upper = oscillation_modulus(f, lam, r)
    lower = oscillation_modulus(f, lam, lam * r)
    assert whole <= upper + lower + 0.05 * (upper + lower) + 1e-9


# --------------------------------------------------------------------------
# the slowly-oscillating test
# --------------------------------------------------------------------------

def test_constant_accepted_with_zero_trace():
    diag = verify_so(SOFunction.constant(3.0 + 1.0j))
    assert diag.accepted
    assert all(m == 0.0 for m in diag.at_inf.moduli)


def test_sin_log_rejected_both_endpoints(sin_log):
    diag = verify_so(sin_log)
    assert not diag.at_zero.accepted
    assert not diag.at_inf.accepted


def test_sin_log_log_accepted(sin_log_log):
    diag = verify_so(sin_log_log)
    assert diag.accepted
    assert diag.at_inf.accepted
    assert diag.at_zero.reason == "accepted via declared limit"


def test_atan_log_accepted():
    assert verify_so(SOFunction.from_text("atan(log(t))")).accepted


def test_undeclared_unreachable_endpoint_rejected():
    f = SOFunction.from_text("2+sin(log(log(t)))", domain=(E, INF))
    diag = verify_so(f)
    assert not diag.at_zero.accepted
    with pytest.raises(SORejectedError):
        require_so(f)


# --------------------------------------------------------------------------
# joint partial limits
# --------------------------------------------------------------------------

def test_constants_give_one_exact_fiber_per_endpoint():
    fns = [SOFunction.constant(v) for v in (2.0, 1.0, 2.0, 1.0)]
    omega = SOFunction.constant(1.0)
    for endpoint in (ZERO, INF):
        pts = estimate_fiber_points(*fns, omega, endpoint)
        assert len(pts) == 1
        assert pts[0].values == (2.0, 1.0, 2.0, 1.0, 1.0)
        assert pts[0].is_exact


def test_oscillating_coefficient_fills_its_band(sin_log_log):
    ones = SOFunction.constant(1.0)
    pts = estimate_fiber_points(sin_log_log, ones, ones, ones, ones, INF)
    avals = [fp.a.real for fp in pts]
    assert min(avals) == pytest.approx(1.0, abs=0.05)
    assert max(avals) == pytest.approx(3.0, abs=0.05)
    assert min(avals) >= 0.95 and max(avals) <= 3.05


def test_declared_limit_gives_single_cluster():
    lying = SOFunction.from_text("2+sin(log(log(t)))", domain=(E, INF),
                                 limits={ZERO: 2.0, INF: 3.0})
    ones = SOFunction.constant(1.0)
    pts = estimate_fiber_points(lying, ones, ones, ones, ones, INF)
    assert len(pts) == 1
    assert pts[0].a == pytest.approx(3.0)


def test_clusters_respect_radius_and_replay(sin_log_log):
    cfg = FiberConfig()
    clusters = estimate_joint_clusters(
        [sin_log_log, SOFunction.constant(1.0)], INF, cfg)
    assert len(clusters) > 5
    for cl in clusters:
        assert cl.radius <= cfg.eps_cluster
        # replaying the source sequence stays within the recorded radius
        replay = sin_log_log(cl.source)
        assert np.abs(replay - cl.values[0]).max() <= cl.radius + 1e-12


def test_cluster_values_stay_in_sample_hull(sin_log_log):
    clusters = estimate_joint_clusters(
        [sin_log_log, SOFunction.constant(1.0)], INF)
    for cl in clusters:
        assert 1.0 - 1e-9 <= cl.values[0].real <= 3.0 + 1e-9


def test_sources_ordered_nearest_endpoint_first(sin_log_log):
    clusters = estimate_joint_clusters([sin_log_log], INF)
    for cl in clusters:
        src = cl.source
        assert all(src[i] >= src[i + 1] for i in range(len(src) - 1))
    clusters0 = estimate_joint_clusters([SOFunction.from_text("atan(log(t))")],
                                        ZERO)
    src = clusters0[0].source
    assert all(src[i] <= src[i + 1] for i in range(len(src) - 1))


def test_nonreal_shift_exponent_rejected():
    fns = [SOFunction.constant(1.0)] * 4
    with pytest.raises(Exception):
        estimate_fiber_points(*fns, SOFunction.constant(1.0 + 0.5j), INF)
