import math

import numpy as np
import pytest

from sioshift.mellin import LogGridFunction, log_gaussian
from sioshift.shifts import (SOSShift, ShiftInvariantError, ShiftRangeError,
                             fiber_shift_derivative)
from sioshift.so_core import INF, ZERO, FiberPoint, SOFunction, verify_so


@pytest.fixture
def atan_shift():
    return SOSShift.from_text("atan(log(t))/4")


def central_diff(fn, t, rel=1e-6):
    h = rel * t
    return (fn(t + h) - fn(t - h)) / (2.0 * h)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def test_multiplicative_alpha():
    sh = SOSShift.from_text("log(2)")
    assert sh.alpha(3.0) == pytest.approx(6.0)
    assert sh.alpha_prime(5.0) == pytest.approx(2.0)


def test_constant_exponent_alpha():
    sh = SOSShift.from_text("0.5")
    assert sh.alpha(1.0) == pytest.approx(math.exp(0.5))


def test_atan_shift_values(atan_shift):
    assert atan_shift.alpha(1.0) == pytest.approx(1.0)
    assert atan_shift.alpha_prime(1.0) == pytest.approx(1.25)


def test_alpha_prime_matches_central_differences(atan_shift):
    for t in (0.3, 1.0, 7.0, 123.0):
        assert atan_shift.alpha_prime(t) == pytest.approx(
            central_diff(atan_shift.alpha, t), rel=1e-6)


def test_alpha_strictly_increasing(atan_shift):
    t = np.exp(np.linspace(-200.0, 200.0, 10_000))
    assert np.all(np.diff(atan_shift.alpha(t)) > 0)


# --------------------------------------------------------------------------
# inverse and iterates
# --------------------------------------------------------------------------

def test_beta_of_multiplicative_shift():
    sh = SOSShift.multiplicative(2.0)
    assert sh.beta(7.0) == pytest.approx(3.5, rel=1e-12)
    sh2 = SOSShift.from_text("0.5")
    assert sh2.beta(2.0) == pytest.approx(2.0 * math.exp(-0.5), rel=1e-12)


def test_beta_residual_on_probe_grid(atan_shift):
    t = np.exp(np.linspace(-100.0, 100.0, 2000))
    resid = np.abs(atan_shift.alpha(atan_shift.beta(t)) - t)
    assert np.all(resid <= 1e-10 * t)


def test_iterate_identity_and_powers():
    sh = SOSShift.multiplicative(2.0)
    assert sh.iterate(0, 1.23) == 1.23
    assert sh.iterate(5, 1.0) == pytest.approx(32.0)
    assert sh.iterate(-3, 8.0) == pytest.approx(1.0)


def test_iterate_round_trip(atan_shift):
    for t in (0.7, 5.0, 41.0):
        back = atan_shift.iterate(-12, atan_shift.iterate(12, t))
        assert back == pytest.approx(t, rel=1e-9)


def test_iterate_cap_and_overflow_guard():
    sh = SOSShift.multiplicative(2.0)
    with pytest.raises(ShiftRangeError):
        sh.iterate(100, 1.0)
    with pytest.raises(ShiftRangeError):
        sh.iterate(64, 1e290)


# --------------------------------------------------------------------------
# construction invariants
# --------------------------------------------------------------------------

def test_nonreal_exponent_rejected():
    with pytest.raises(ShiftInvariantError):
        SOSShift.from_text("0.5*i")


def test_decreasing_alpha_rejected():
    # t omega' dips below -1 near t = 1 while omega still fades at the ends
    with pytest.raises(ShiftInvariantError):
        SOSShift.from_text("-1.2*sin(log(t))*exp(-(log(t)^2)/100)")


def test_exponent_must_be_slowly_oscillating():
    with pytest.raises(Exception):
        SOSShift.from_text("0.01*sin(log(t)^2)")


def test_fixed_point_detection(atan_shift):
    # atan(log t)/4 vanishes at t = 1: an interior fixed point
    assert not atan_shift.fixed_point_free()
    assert SOSShift.multiplicative(2.0).fixed_point_free()


def test_composition_stays_slowly_oscillating(atan_shift):
    # c in SO and alpha a valid shift imply c(alpha(t)) in SO
    from sioshift.exprdsl import parse, substitute
    c = parse("atan(log(t))")
    alpha_expr = parse("t*exp(atan(log(t))/4)")
    composed = SOFunction(substitute(c, alpha_expr))
    assert verify_so(composed).accepted


def test_numerical_inverse_is_again_a_valid_shift(atan_shift):
    # finite differences of zeta(t) = log(beta(t)/t) reproduce the shift
    # invariants for the inverse
    x = np.linspace(-80.0, 80.0, 4001)
    t = np.exp(x)
    zeta = np.log(atan_shift.beta(t) / t)
    assert np.abs(zeta).max() <= atan_shift.sup_abs_omega + 1e-9
    dzeta = np.gradient(zeta, x)  # equals t zeta'(t)
    assert (1.0 + dzeta).min() > 0.0
    assert np.abs(dzeta[:5]).max() < 0.05
    assert np.abs(dzeta[-5:]).max() < 0.05


def test_t_omega_prime_fades_at_endpoints(atan_shift):
    from sioshift.exprdsl import evaluate
    for t in (1e-100, 1e100):
        drift = t * evaluate(atan_shift.omega_prime, t).real
        assert abs(drift) < 1e-3


# --------------------------------------------------------------------------
# the shift operator on grids
# --------------------------------------------------------------------------

def test_shift_operator_on_aligned_indicator():
    # alpha(t) = 2t on a grid aligned with log 2: exact relabeling
    h = math.log(2.0) / 256.0
    n = 1 << 13
    grid = LogGridFunction(-n * h / 2.0, h, np.zeros(n, dtype=complex))
    t = grid.t
    chi = grid.with_values(((t >= 1.0) & (t <= 2.0)).astype(complex))
    sh = SOSShift.multiplicative(2.0)
    out = sh.apply_to_grid(chi)
    assert out.value_at(0.75) == pytest.approx(1.0)
    assert out.value_at(1.5) == pytest.approx(0.0, abs=1e-12)


def test_shift_operator_fixes_constants_locally(atan_shift):
    f = log_gaussian(0.0, 1.0)
    c = f.with_values(np.full(f.n, 2.5, dtype=complex))
    out = atan_shift.apply_to_grid(c, pad_tol=float("inf"))
    interior = slice(f.n // 4, 3 * f.n // 4)
    assert np.abs(out.values[interior] - 2.5).max() < 1e-12


def test_shift_operator_norm_change_of_variables(atan_shift):
    # ||W f||_p^p equals the substitution integral of |f|^p beta'(u) du
    p = 2.0
    f = log_gaussian(0.2, 1.0)
    lhs = atan_shift.apply_to_grid(f).norm_dt(p) ** p
    t = f.t
    beta_prime = 1.0 / atan_shift.alpha_prime(atan_shift.beta(t))
    rhs = float(f.h * np.sum(t * beta_prime * np.abs(f.values) ** p))
    assert lhs == pytest.approx(rhs, rel=1e-6)


# --------------------------------------------------------------------------
# fiber values of the derivative
# --------------------------------------------------------------------------

def test_fiber_shift_derivative_values():
    fp0 = FiberPoint(INF, 1, 0, 1, 0, 0.0)
    assert fiber_shift_derivative(fp0) == 1.0
    fp1 = FiberPoint(INF, 1, 0, 1, 0, 1.0)
    assert fiber_shift_derivative(fp1) == pytest.approx(math.e)


def test_fiber_derivative_consistent_with_sampled_tail():
    # omega -> pi/8 at infinity, so alpha' -> e^{pi/8} along the tail;
    # atan converges like 1/log t, so the probe sits very deep
    sh = SOSShift.from_text("atan(log(t))/4")
    tail = np.exp(np.linspace(600.0, 708.0, 50))
    want = math.exp(math.pi / 8.0)
    assert np.abs(sh.alpha_prime(tail) - want).max() < 1e-3
