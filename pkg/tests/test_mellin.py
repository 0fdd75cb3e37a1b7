import math
import warnings

import numpy as np
import pytest

from sioshift.exprdsl import parse
from sioshift.mellin import (AliasingWarning, DecayError, GridPadError,
                             LogGridFunction, MellinSymbol, TruncationWarning,
                             apply_r, apply_s, cauchy_operator_norm, co_apply,
                             log_gaussian, mellin_inverse, mellin_transform,
                             p_minus, p_plus, phi, phi_inv, relabel,
                             sample_at, stechkin_bound, symbol_mult_shift,
                             symbol_rp, symbol_sp, symbol_sp_deriv,
                             total_variation)
from tests.conftest import random_log_gaussians

TANH = "(exp(2*x)-1)/(exp(2*x)+1)"


# --------------------------------------------------------------------------
# grid plumbing
# --------------------------------------------------------------------------

def test_norm_conventions_and_phi_isometry():
    f = log_gaussian(0.4, 1.2, 1.0 - 0.7j)
    for p in (1.5, 2.0, 3.0):
        assert phi(f, p).norm_dmu(p) == pytest.approx(f.norm_dt(p), rel=1e-13)
        back = phi_inv(phi(f, p), p)
        assert np.abs(back.values - f.values).max() < 1e-14


def test_step_function_norm_matches_closed_form():
    f = LogGridFunction.zeros()
    t = f.t
    chi = f.with_values(((t >= 0.5) & (t <= 3.0)).astype(complex))
    # int_{1/2}^{3} dt = 2.5
    assert chi.norm_dt(2.0) ** 2 == pytest.approx(2.5, rel=1e-3)
    assert phi(chi, 2.0).norm_dmu(2.0) ** 2 == pytest.approx(2.5, rel=1e-3)


def test_interpolation_is_exact_on_knots_and_cubics():
    f = LogGridFunction.zeros(4.0, 10)
    x = f.x
    cubic = f.with_values((0.3 * x ** 3 - x + 2.0).astype(complex))
    assert np.abs(sample_at(cubic, x) - cubic.values).max() < 1e-12
    targets = x[100:-100] + 0.3 * f.h
    exact = 0.3 * targets ** 3 - targets + 2.0
    assert np.abs(sample_at(cubic, targets) - exact).max() < 1e-10


def test_pad_policy():
    f = log_gaussian(0.0, 1.0)
    out = sample_at(f, np.array([f.x0 - 1.0, 0.0]))
    assert out[0] == 0.0
    ridge = f.with_values(np.ones(f.n, dtype=complex))
    with pytest.raises(GridPadError):
        sample_at(ridge, np.array([f.x0 - 1.0]))


def test_relabel_integer_cells_is_exact_roll():
    f = log_gaussian(0.0, 1.0)
    shifted = relabel(f, 7 * f.h)
    assert np.abs(shifted.values[:-7] - f.values[7:]).max() == 0.0


# --------------------------------------------------------------------------
# transform pair
# --------------------------------------------------------------------------

def test_transform_round_trip(rng):
    for f in random_log_gaussians(rng, 4):
        back = mellin_inverse(mellin_transform(f))
        assert (back - f).norm_dmu(2.0) <= 1e-9 * f.norm_dmu(2.0)


def test_transform_of_zero():
    f = LogGridFunction.zeros()
    assert np.abs(mellin_transform(f).values).max() == 0.0


def test_transform_of_aligned_indicator_matches_closed_form():
    f = LogGridFunction.zeros()
    j0 = f.n // 2            # x = 0
    j1 = j0 + 1024           # x = 1024 h = 1.5
    width = 1024 * f.h
    vals = np.zeros(f.n, dtype=complex)
    vals[j0:j1 + 1] = 1.0
    vals[j0] = vals[j1] = 0.5  # trapezoid-consistent jump samples
    md = mellin_transform(f.with_values(vals), decay_tol=1.0)
    # M chi_[1, e^w] (xi) = (1 - e^{-i w xi}) / (i xi), value w at xi = 0
    k0 = int(np.argmin(np.abs(md.xi)))
    assert md.values[k0] == pytest.approx(width, abs=1e-10)
    for xi in (0.7, 2.0, 11.0):
        k = int(np.argmin(np.abs(md.xi - xi)))
        x = md.xi[k]
        expected = (1.0 - np.exp(-1j * width * x)) / (1j * x)
        assert md.values[k] == pytest.approx(expected, abs=1e-5)


def test_transform_of_log_gaussian_matches_closed_form():
    c, s = 0.7, 1.3
    f = log_gaussian(c, s)
    md = mellin_transform(f)
    expected = s * math.sqrt(2.0 * math.pi) * np.exp(
        -1j * md.xi * c - (s * md.xi) ** 2 / 2.0)
    keep = np.abs(md.xi) < 15.0
    err = np.abs(md.values[keep] - expected[keep]).max()
    assert err < 1e-9


def test_parseval_identity(rng):
    for f in random_log_gaussians(rng, 5):
        md = mellin_transform(f)
        dxi = md.xi[1] - md.xi[0]
        lhs = math.sqrt(float(np.sum(np.abs(md.values) ** 2)) * dxi
                        / (2.0 * math.pi))
        assert lhs == pytest.approx(f.norm_dmu(2.0), rel=1e-9)


def test_non_decaying_input_rejected():
    f = LogGridFunction.zeros()
    with pytest.raises(DecayError):
        mellin_transform(f.with_values(np.ones(f.n, dtype=complex)))


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------

def test_symbol_values_at_zero():
    assert symbol_sp(2.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert symbol_rp(2.0, 0.0) == pytest.approx(-1j, abs=1e-15)


def test_symbol_hyperbolic_identity(rng):
    for _ in range(100):
        p = float(rng.uniform(1.05, 8.0))
        x = float(rng.uniform(-40.0, 40.0))
        s = symbol_sp(p, x)
        r = symbol_rp(p, x)
        assert s * s - r * r == pytest.approx(1.0, abs=1e-16 * 32)


def test_symbol_limits_and_stability():
    assert symbol_sp(2.0, 500.0) == pytest.approx(1.0)
    assert symbol_sp(2.0, -500.0) == pytest.approx(-1.0)
    assert abs(symbol_rp(3.0, 700.0)) < 1e-300  # underflows cleanly
    # derivative formula s' = -pi r^2
    x = np.linspace(-3, 3, 11)
    h = 1e-6
    num = (symbol_sp(2.0, x + h) - symbol_sp(2.0, x - h)) / (2 * h)
    assert np.abs(num - symbol_sp_deriv(2.0, x)).max() < 1e-6


def test_cauchy_norm_constant():
    assert cauchy_operator_norm(2.0) == pytest.approx(1.0)
    assert cauchy_operator_norm(4.0) == pytest.approx(cauchy_operator_norm(4.0 / 3.0))
    assert cauchy_operator_norm(4.0) == pytest.approx(1.0 / math.tan(math.pi / 8.0))


# --------------------------------------------------------------------------
# convolution operators
# --------------------------------------------------------------------------

def test_co_identity_symbol_is_identity():
    f = log_gaussian(0.1, 0.8)
    out = co_apply(MellinSymbol.closed_form(lambda xi: np.ones_like(xi)), f)
    assert (out - f).norm_dmu(2.0) < 1e-12


def test_co_composition_matches_product_symbol(rng):
    f = log_gaussian(-0.2, 1.0)
    a = MellinSymbol.closed_form(lambda xi: np.exp(-xi ** 2 / 30.0))
    b = MellinSymbol.closed_form(lambda xi: 1.0 / (1.0 + xi ** 2 / 9.0))
    ab = MellinSymbol.closed_form(
        lambda xi: np.exp(-xi ** 2 / 30.0) / (1.0 + xi ** 2 / 9.0))
    lhs = co_apply(a, co_apply(b, f))
    rhs = co_apply(ab, f)
    assert (lhs - rhs).norm_dmu(2.0) <= 1e-8 * f.norm_dmu(2.0)


def test_unsettled_symbol_warns():
    f = log_gaussian(0.0, 1.0)
    with pytest.warns(AliasingWarning):
        co_apply(MellinSymbol.closed_form(lambda xi: np.sin(xi / 50.0)), f)


def test_ap_symbol_acts_by_exact_relabeling():
    f = log_gaussian(0.0, 1.0)
    lam = 64 * f.h
    sym = MellinSymbol.ap([(2.0, lam)])
    out = co_apply(sym, f)
    assert np.abs(out.values[:-64] - 2.0 * f.values[64:]).max() < 1e-14


def test_mult_shift_symbol_is_weighted_relabel():
    # Co(m_k) applied to Phi f equals Phi (f o (k .)) for every p
    from sioshift.shifts import SOSShift
    f = log_gaussian(0.3, 0.9)
    for p, k in ((2.0, 2.0), (1.5, 0.5), (3.0, math.e)):
        sh = SOSShift.multiplicative(k)
        lhs = phi(sh.apply_to_grid(f), p)
        rhs = co_apply(symbol_mult_shift(p, k), phi(f, p))
        assert (lhs - rhs).norm_dmu(p) <= 1e-8 * f.norm_dt(p)


# --------------------------------------------------------------------------
# S and R: dual routes and brute-force oracle
# --------------------------------------------------------------------------

def brute_force_s(f):
    """O(n^2) replica of the principal-value quadrature (loop form)."""
    n, h = f.n, f.h
    v = f.values
    t = f.t
    T1 = math.exp(f.x0 - h / 2.0)
    T2 = math.exp(f.x0 + (n - 1) * h + h / 2.0)
    dlog = np.gradient(v, h, edge_order=2)
    if n >= 5:
        dlog[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    out = np.empty(n, dtype=complex)
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(n):
            if j == i:
                continue
            g = 1.0 / (1.0 - math.exp(-(j - i) * h))
            acc += (v[j] - v[i]) * g
        acc = h * (acc + dlog[i])
        acc += v[i] * math.log((T2 - t[i]) / (t[i] - T1))
        acc += v[0] * math.log(1.0 - T1 / t[i])
        acc += v[-1] * (T2 / t[i]) * math.log(T2 / (T2 - t[i]))
        out[i] = acc / (1j * math.pi)
    return f.with_values(out)


def test_fast_s_matches_brute_force():
    g = LogGridFunction.zeros(6.0, 9)
    f = g.with_values(np.exp(-(g.x - 0.2) ** 2).astype(complex)
                      * (1.0 + 0.4j))
    fast = apply_s(f, route="direct")
    slow = brute_force_s(f)
    assert np.abs(fast.values - slow.values).max() < 1e-11


def test_s_routes_agree(rng):
    for f in random_log_gaussians(rng, 4):
        direct = apply_s(f, 2.0, "direct")
        via_symbol = apply_s(f, 2.0, "symbol")
        assert (direct - via_symbol).norm_dt(2.0) <= 1e-5 * f.norm_dt(2.0)


def test_r_routes_agree(rng):
    for f in random_log_gaussians(rng, 4):
        direct = apply_r(f, 2.0, "direct")
        via_symbol = apply_r(f, 2.0, "symbol")
        assert (direct - via_symbol).norm_dt(2.0) <= 1e-5 * f.norm_dt(2.0)


def test_s_r_of_zero():
    f = LogGridFunction.zeros()
    assert apply_s(f, route="direct").norm_dt(2.0) == 0.0
    assert apply_r(f, route="direct").norm_dt(2.0) == 0.0


def test_r_linearity(rng):
    f, g = random_log_gaussians(rng, 2)
    lhs = apply_r(f + 2.5 * g, route="direct")
    rhs = apply_r(f, route="direct") + 2.5 * apply_r(g, route="direct")
    assert (lhs - rhs).norm_dt(2.0) <= 1e-12 * (f.norm_dt(2.0) + g.norm_dt(2.0))


def test_operator_identity_both_routes(rng):
    # 4 P+ P- = I - S^2 = -R^2
    for route in ("direct", "symbol"):
        for f in random_log_gaussians(rng, 3):
            pm = p_minus(f, 2.0, route)
            rr = apply_r(apply_r(f, 2.0, route), 2.0, route)
            first = (4.0 * p_plus(pm, 2.0, route) + rr).norm_dt(2.0)
            ss = apply_s(apply_s(f, 2.0, route), 2.0, route)
            second = (ss - rr - f).norm_dt(2.0)
            scale = f.norm_dt(2.0)
            assert first <= 1e-5 * scale
            assert second <= 1e-5 * scale


def test_truncation_warning_for_untamed_tails():
    f = LogGridFunction.zeros()
    ramp = f.with_values(np.exp(f.x / 3.0).astype(complex))  # grows ~ t^{1/3}
    with pytest.warns(TruncationWarning):
        apply_r(ramp, route="direct")


# --------------------------------------------------------------------------
# total variation and the variation-norm bound
# --------------------------------------------------------------------------

def test_total_variation_of_constant():
    assert total_variation(parse("3", variable="x")) == pytest.approx(0.0, abs=1e-12)


def test_total_variation_of_tanh():
    assert total_variation(parse(TANH, variable="x")) == pytest.approx(2.0, rel=1e-6)


def test_total_variation_of_atan():
    assert total_variation(parse("atan(x)", variable="x")) == pytest.approx(
        math.pi, rel=1e-6)


def test_variation_bound_examples():
    assert stechkin_bound(parse("2", variable="x"), 2.0) == pytest.approx(2.0, rel=1e-9)
    assert stechkin_bound(parse(TANH, variable="x"), 2.0) == pytest.approx(3.0, rel=1e-3)


def test_variation_bound_subadditivity():
    a = parse(TANH, variable="x")
    b = parse("atan(x)", variable="x")
    both = parse(f"({TANH})+atan(x)", variable="x")
    assert (stechkin_bound(both, 2.0)
            <= stechkin_bound(a, 2.0) + stechkin_bound(b, 2.0) + 1e-6)
