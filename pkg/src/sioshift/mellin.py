"""Mellin-side numerics on geometric grids.

Functions on the half line are stored by samples at t_j = e^{x_j} with
x_j = x0 + j h uniform.  The substitution u = log t turns the Mellin
transform

    (M f)(xi) = int_0^inf f(t) t^{-i xi} dt/t

into a Fourier integral of u -> f(e^u), computed by FFT with the grid
phase factored in.  The Cauchy singular integral operator

    (S f)(t) = (1/(pi i)) p.v. int_0^inf f(tau) / (tau - t) dtau

and its fixed-singularity companion

    (R f)(t) = (1/(pi i)) int_0^inf f(tau) / (tau + t) dtau

become discrete convolutions in u because both kernels depend only on
tau/t; they are applied in O(n log n).  S needs the principal-value
treatment: the integrand is regularized by subtracting f(t), the
removable diagonal equals the log-derivative df/du, and the exact term
f(t) log((T2 - t)/(t - T1)) restores the p.v. integral over the
truncated domain [T1, T2] (half a cell beyond the extreme nodes, so the
expression stays finite at every node).

Under the weight isometry (Phi f)(t) = t^{1/p} f(t) both operators are
similar to Mellin multipliers,

    Phi S Phi^{-1} = Co(s_p),   s_p(x) = coth(pi (x + i/p)),
    Phi R Phi^{-1} = Co(r_p),   r_p(x) = 1 / sinh(pi (x + i/p)),

which provides an independent route used for cross-validation.  Symbol
multiplication Co(a) is FFT multiplication for symbols that settle at the
frequency-grid edge; almost periodic polynomials sum r_l e^{i l x} act
instead through the exact relabeling Co(e^{i l x}) g (t) = g(t e^l),
avoiding aliasing of non-decaying symbols.

Norms: |f|_{L^p(dt)}^p = h sum t_j |f_j|^p and |g|_{L^p(dmu)}^p =
h sum |g_j|^p, so Phi maps one into the other exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .exprdsl import Expr, differentiate, evaluate

DEFAULT_L = 12.0
DEFAULT_M = 14

_EDGE_CELLS = 16


class GridError(Exception):
    pass


class DecayError(GridError):
    pass


class GridPadError(GridError):
    pass


class AliasingWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass


class DivergenceError(Exception):
    pass


# --------------------------------------------------------------------------
# Log-uniform grid functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LogGridFunction:
    """Complex samples at t_j = exp(x0 + j h)."""

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or len(v) < 8:
            raise GridError("values must be a 1-D array with >= 8 samples")
        object.__setattr__(self, "values", v)

    # -- construction ------------------------------------------------------
    @classmethod
    def zeros(cls, L: float = DEFAULT_L, m: int = DEFAULT_M) -> "LogGridFunction":
        n = 1 << m
        return cls(-L, 2.0 * L / n, np.zeros(n, dtype=complex))

    @classmethod
    def from_function(cls, fn: Callable, L: float = DEFAULT_L,
                      m: int = DEFAULT_M) -> "LogGridFunction":
        g = cls.zeros(L, m)
        return cls(g.x0, g.h, np.asarray(fn(g.t), dtype=complex))

    def with_values(self, values: np.ndarray) -> "LogGridFunction":
        return LogGridFunction(self.x0, self.h, values)

    # -- geometry ----------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    @property
    def t(self) -> np.ndarray:
        return np.exp(self.x)

    def same_grid(self, other: "LogGridFunction") -> bool:
        return (self.n == other.n and abs(self.x0 - other.x0) < 1e-12
                and abs(self.h - other.h) < 1e-15)

    # -- algebra -----------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, LogGridFunction):
            if not self.same_grid(other):
                raise GridError("grid mismatch")
            return self.with_values(op(self.values, other.values))
        return self.with_values(op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    # -- norms and diagnostics ----------------------------------------------
    def norm_dt(self, p: float = 2.0) -> float:
        """L^p(dt) norm of the sampled function."""
        return float((self.h * np.sum(self.t * np.abs(self.values) ** p)) ** (1.0 / p))

    def norm_dmu(self, p: float = 2.0) -> float:
        """L^p(dt/t) norm of the sampled function."""
        return float((self.h * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))

    def edge_levels(self) -> tuple[float, float]:
        """Relative magnitude of the outermost cells on each side."""
        mags = np.abs(self.values)
        peak = float(mags.max())
        if peak == 0.0:
            return (0.0, 0.0)
        k = min(_EDGE_CELLS, self.n // 4)
        return (float(mags[:k].max()) / peak, float(mags[-k:].max()) / peak)

    def value_at(self, t, pad_tol: float = 1e-3):
        """Cubic interpolation in log t; zero beyond the grid when the
        relevant edge has decayed below pad_tol."""
        targets = np.log(np.asarray(t, dtype=float))
        scalar = targets.ndim == 0
        out = sample_at(self, np.atleast_1d(targets), pad_tol)
        return complex(out[0]) if scalar else out


def log_gaussian(center: float = 0.0, width: float = 1.0,
                 amplitude: complex = 1.0, L: float = DEFAULT_L,
                 m: int = DEFAULT_M) -> LogGridFunction:
    """Gaussian bump in the log variable: amp * exp(-(x-c)^2 / (2 w^2))."""
    g = LogGridFunction.zeros(L, m)
    vals = amplitude * np.exp(-((g.x - center) ** 2) / (2.0 * width ** 2))
    return g.with_values(vals.astype(complex))


# --------------------------------------------------------------------------
# Local cubic interpolation on the uniform log grid
# --------------------------------------------------------------------------

def sample_at(f: LogGridFunction, x_targets: np.ndarray,
              pad_tol: float = 1e-3) -> np.ndarray:
    """Evaluate f at arbitrary log-positions by 4-point Lagrange cubic.

    Targets beyond the grid read zero provided the corresponding edge of f
    has decayed below ``pad_tol`` (relative to the peak); otherwise
    :class:`GridPadError` is raised.  Grid-aligned targets reproduce the
    samples exactly.
    """
    v = f.values
    n = f.n
    pos = (x_targets - f.x0) / f.h
    below = pos < -1e-9
    above = pos > (n - 1) + 1e-9
    outside = below | above
    if np.any(outside):
        left, right = f.edge_levels()
        if np.any(below) and left > pad_tol:
            raise GridPadError(
                f"reads below the grid while the left edge level is "
                f"{left:.2e} > pad_tol {pad_tol:.1e}")
        if np.any(above) and right > pad_tol:
            raise GridPadError(
                f"reads above the grid while the right edge level is "
                f"{right:.2e} > pad_tol {pad_tol:.1e}")
    safe_pos = np.clip(pos, 0.0, float(n - 1))
    start = np.clip(np.floor(safe_pos).astype(int) - 1, 0, n - 4)
    o = safe_pos - start
    w0 = -(o - 1) * (o - 2) * (o - 3) / 6.0
    w1 = o * (o - 2) * (o - 3) / 2.0
    w2 = -o * (o - 1) * (o - 3) / 2.0
    w3 = o * (o - 1) * (o - 2) / 6.0
    out = (w0 * v[start] + w1 * v[start + 1] + w2 * v[start + 2]
           + w3 * v[start + 3])
    out[outside] = 0.0
    return out


def relabel(f: LogGridFunction, shift: float,
            pad_tol: float = 1e-3) -> LogGridFunction:
    """g(t) = f(t e^shift): translate by ``shift`` in the log variable.

    Integer multiples of the grid step are applied as an exact roll with
    zero fill.
    """
    cells = shift / f.h
    k = round(cells)
    if abs(cells - k) < 1e-9:
        v = f.values
        out = np.zeros_like(v)
        if k == 0:
            out[:] = v
        elif k > 0:
            if k < f.n:
                out[:-k] = v[k:]
            lev = f.edge_levels()[1]
        else:
            if -k < f.n:
                out[-k:] = v[:k]
            lev = f.edge_levels()[0]
        if k != 0 and lev > pad_tol:
            raise GridPadError(
                f"relabel by {shift!r} discards an edge at level {lev:.2e}")
        return f.with_values(out)
    return f.with_values(sample_at(f, f.x + shift, pad_tol))


# --------------------------------------------------------------------------
# Mellin transform pair
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MellinData:
    """Sampled transform values on the ascending frequency grid."""

    xi: np.ndarray
    values: np.ndarray
    x0: float
    h: float


def mellin_transform(f: LogGridFunction, decay_tol: float = 1e-4) -> MellinData:
    """(M f)(xi) = int f(t) t^{-i xi} dt/t via FFT of the log samples."""
    left, right = f.edge_levels()
    if max(left, right) > decay_tol:
        raise DecayError(
            f"input does not decay at the grid ends (edge levels "
            f"{left:.2e}, {right:.2e} > {decay_tol:.1e})")
    xi = 2.0 * np.pi * np.fft.fftfreq(f.n, d=f.h)
    G = f.h * np.exp(-1j * xi * f.x0) * np.fft.fft(f.values)
    order = np.argsort(xi)
    return MellinData(xi[order], G[order], f.x0, f.h)


def mellin_inverse(md: MellinData) -> LogGridFunction:
    """Inverse transform (1/2 pi) int g(xi) t^{i xi} d xi back to the grid."""
    n = len(md.xi)
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=md.h)
    order = np.argsort(xi)
    G = np.empty(n, dtype=complex)
    G[order] = md.values
    v = np.fft.ifft(G * np.exp(1j * xi * md.x0)) / md.h
    return LogGridFunction(md.x0, md.h, v)


# --------------------------------------------------------------------------
# Mellin symbols and convolution operators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MellinSymbol:
    """A multiplier: closed-form callable, sampled trace, or AP polynomial."""

    kind: str  # "closed-form" | "sampled" | "ap"
    fn: Callable | None = None
    xi: np.ndarray | None = None
    samples: np.ndarray | None = None
    terms: tuple[tuple[complex, float], ...] = ()
    p: float | None = None

    @classmethod
    def closed_form(cls, fn: Callable, p: float | None = None) -> "MellinSymbol":
        return cls("closed-form", fn=fn, p=p)

    @classmethod
    def from_expr(cls, expr: Expr, p: float | None = None) -> "MellinSymbol":
        return cls("closed-form",
                   fn=lambda xi: evaluate(expr, xi, variable="x"), p=p)

    @classmethod
    def sampled(cls, xi: np.ndarray, samples: np.ndarray,
                p: float | None = None) -> "MellinSymbol":
        return cls("sampled", xi=np.asarray(xi, float),
                   samples=np.asarray(samples, complex), p=p)

    @classmethod
    def ap(cls, terms, p: float | None = None) -> "MellinSymbol":
        tt = tuple((complex(r), float(lam)) for r, lam in terms)
        if not tt:
            raise ValueError("an AP polynomial needs at least one term")
        return cls("ap", terms=tt, p=p)

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "closed-form":
            return np.asarray(self.fn(xi), dtype=complex)
        if self.kind == "sampled":
            re = np.interp(xi, self.xi, self.samples.real)
            im = np.interp(xi, self.xi, self.samples.imag)
            return re + 1j * im
        vals = np.zeros(xi.shape, dtype=complex)
        for r, lam in self.terms:
            vals += r * np.exp(1j * lam * xi)
        return vals


def _settled(symbol_vals: np.ndarray, tol: float) -> bool:
    # symbol values in ascending-frequency order; each end must have
    # stopped varying over its outermost band
    k = max(4, len(symbol_vals) // 64)
    for band in (symbol_vals[:k], symbol_vals[-k:]):
        spread = float(np.abs(band - band.mean()).max())
        scale = float(np.abs(symbol_vals).max()) + 1e-300
        if spread > tol * scale:
            return False
    return True


def co_apply(sym: MellinSymbol, f: LogGridFunction, *,
             settled_tol: float = 1e-6,
             pad_tol: float = 1e-3,
             pad_factor: int = 4) -> LogGridFunction:
    """Apply the Mellin convolution Co(a) = M^{-1} a M.

    AP polynomials are applied exactly via relabelings; other symbols act
    by FFT multiplication on a ``pad_factor``-times zero-padded copy (the
    convolution kernels decay exponentially in log t, so padding pushes the
    circular wrap below roundoff) and emit :class:`AliasingWarning` when
    the symbol is still varying at the frequency-grid edge.
    """
    if sym.kind == "ap":
        out = f.with_values(np.zeros(f.n, dtype=complex))
        for r, lam in sym.terms:
            out = out + r * relabel(f, lam, pad_tol)
        return out
    n_pad = f.n * max(1, pad_factor)
    xi = 2.0 * np.pi * np.fft.fftfreq(n_pad, d=f.h)
    a = sym(xi)
    order = np.argsort(xi)
    if not _settled(a[order], settled_tol):
        warnings.warn("symbol is not settled at the frequency-grid edge; "
                      "FFT multiplication may alias", AliasingWarning,
                      stacklevel=2)
    vpad = np.zeros(n_pad, dtype=complex)
    vpad[:f.n] = f.values
    out = np.fft.ifft(np.fft.fft(vpad) * a)[:f.n]
    return f.with_values(out)


# --------------------------------------------------------------------------
# The symbols s_p, r_p, and the multiplicative-shift multiplier
# --------------------------------------------------------------------------

def symbol_sp(p: float, x) -> np.ndarray:
    """s_p(x) = coth(pi (x + i/p)), evaluated without overflow."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xa = np.atleast_1d(x)
    e = np.exp(-2.0 * np.pi * (np.abs(xa) + 1j / p))
    c = (1.0 + e) / (1.0 - e)
    out = np.where(xa >= 0, c, -np.conj(c))
    return complex(out[0]) if scalar else out


def symbol_rp(p: float, x) -> np.ndarray:
    """r_p(x) = 1 / sinh(pi (x + i/p)), evaluated without overflow."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xa = np.atleast_1d(x)
    z = np.pi * (np.abs(xa) + 1j / p)
    r = 2.0 * np.exp(-z) / (1.0 - np.exp(-2.0 * z))
    out = np.where(xa >= 0, r, -np.conj(r))
    return complex(out[0]) if scalar else out


def symbol_sp_deriv(p: float, x) -> np.ndarray:
    """s_p'(x) = -pi / sinh(pi (x + i/p))^2."""
    r = symbol_rp(p, x)
    return -np.pi * r * r


def symbol_mult_shift(p: float, k: float) -> MellinSymbol:
    """Multiplier of t -> k t under the weight isometry:
    m(x) = e^{i (x + i/p) log k} = k^{-1/p} e^{i x log k}."""
    if k <= 0:
        raise ValueError("shift factor must be positive")
    return MellinSymbol.ap([(k ** (-1.0 / p), math.log(k))], p=p)


def cauchy_operator_norm(p: float) -> float:
    """Norm of the Cauchy singular integral operator on L^p of the line:
    cot(pi / (2 max(p, q))) with 1/p + 1/q = 1."""
    if not 1.0 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    q = p / (p - 1.0)
    return 1.0 / math.tan(math.pi / (2.0 * max(p, q)))


# --------------------------------------------------------------------------
# Weight isometry
# --------------------------------------------------------------------------

def phi(f: LogGridFunction, p: float) -> LogGridFunction:
    """(Phi f)(t) = t^{1/p} f(t): isometry L^p(dt) -> L^p(dt/t)."""
    return f.with_values(f.values * np.exp(f.x / p))


def phi_inv(f: LogGridFunction, p: float) -> LogGridFunction:
    return f.with_values(f.values * np.exp(-f.x / p))


# --------------------------------------------------------------------------
# Direct quadrature of S and R
# --------------------------------------------------------------------------

def _correlate(values: np.ndarray, lag_kernel: np.ndarray) -> np.ndarray:
    """out_i = sum_j values_j * kernel[j - i], kernel indexed by lag
    -(n-1) .. n-1 as a length 2n-1 array."""
    n = len(values)
    assert len(lag_kernel) == 2 * n - 1
    M = 1 << (2 * n - 1).bit_length()
    k = np.zeros(M, dtype=complex)
    lags = np.arange(-(n - 1), n)
    # circular convolution pairs values[j] with k[(i - j) mod M]; to read
    # g(j - i) there, store each lag d at index (-d) mod M
    k[(-lags) % M] += lag_kernel
    vpad = np.zeros(M, dtype=complex)
    vpad[:n] = values
    out = np.fft.ifft(np.fft.fft(vpad) * np.fft.fft(k))
    return out[:n]


def _log_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences of the samples in the log variable."""
    d = np.gradient(values, h, edge_order=2)
    if len(values) >= 5:
        interior = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1]
                    - values[4:]) / (12.0 * h)
        d[2:-2] = interior
    return d


def _warn_tail_model(f: LogGridFunction, what: str, tol: float = 1e-4):
    """The quadratures extend the integrand beyond the truncated domain by
    the tail models g = const (toward 0) and g ~ C/tau (toward infinity),
    which is exact for Cauchy-type outputs; warn when a non-decaying input
    visibly deviates from those shapes."""
    left, right = f.edge_levels()
    v = f.values
    peak = float(np.abs(v).max()) + 1e-300
    if left > tol:
        dev = abs(v[1] - v[0]) / (abs(v[0]) + 1e-300)
        if dev > 0.2:
            warnings.warn(
                f"{what}: left tail is neither small nor constant "
                f"(level {left:.1e}); truncation error is uncontrolled",
                TruncationWarning, stacklevel=3)
    if right > tol:
        dev = abs(v[-2] - v[-1] * math.exp(f.h)) / (abs(v[-1]) + 1e-300)
        if dev > 0.2:
            warnings.warn(
                f"{what}: right tail is neither small nor ~1/t "
                f"(level {right:.1e}); truncation error is uncontrolled",
                TruncationWarning, stacklevel=3)
    _ = peak


def apply_s_direct(f: LogGridFunction) -> LogGridFunction:
    """Principal-value quadrature of the Cauchy operator on the log grid.

    Singularity subtraction with the exact truncated-domain term; the
    removable diagonal is the log-derivative of the samples.  The omitted
    tails (0, T1) and (T2, inf) are restored by closed-form models
    g = g(T1) near zero and g = g(T2) T2 / tau near infinity, which match
    the tails the operator itself produces.
    """
    _warn_tail_model(f, "S direct quadrature")
    v = f.values
    n, h = f.n, f.h
    lags = np.arange(-(n - 1), n, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        g = 1.0 / (1.0 - np.exp(-lags * h))
    g[n - 1] = 0.0  # diagonal handled by the log-derivative limit
    conv = _correlate(v, g.astype(complex))
    csum = np.cumsum(g)
    i = np.arange(n)
    # sum of g over lags -i .. n-1-i equals csum[2n-2-i] - csum[n-2-i]
    upper = csum[2 * n - 2 - i]
    lower = np.where(i < n - 1, csum[n - 2 - i], 0.0)
    row_sums = upper - lower
    dlog = _log_derivative(v, h)
    t = f.t
    T1 = math.exp(f.x0 - h / 2.0)
    T2 = math.exp(f.x0 + (n - 1) * h + h / 2.0)
    log_term = v * np.log((T2 - t) / (t - T1))
    # closed-form tail restorations:
    #   int_0^T1 dtau/(tau - t)        = log(1 - T1/t)
    #   int_T2^inf T2 dtau/(tau(tau-t)) = (T2/t) log(T2/(T2 - t))
    tail_left = v[0] * np.log(1.0 - T1 / t)
    tail_right = v[-1] * (T2 / t) * np.log(T2 / (T2 - t))
    pv = h * (conv - v * row_sums + dlog) + log_term + tail_left + tail_right
    return f.with_values(pv / (1j * np.pi))


def apply_r_direct(f: LogGridFunction) -> LogGridFunction:
    """Quadrature of the fixed-singularity operator R (regular kernel),
    with the same closed-form tail restorations as the S quadrature."""
    _warn_tail_model(f, "R quadrature")
    v = f.values
    n, h = f.n, f.h
    lags = np.arange(-(n - 1), n, dtype=float)
    g = 1.0 / (1.0 + np.exp(-lags * h))
    conv = _correlate(v, g.astype(complex))
    t = f.t
    T1 = math.exp(f.x0 - h / 2.0)
    T2 = math.exp(f.x0 + (n - 1) * h + h / 2.0)
    #   int_0^T1 dtau/(tau + t)        = log(1 + T1/t)
    #   int_T2^inf T2 dtau/(tau(tau+t)) = (T2/t) log((T2 + t)/T2)
    tail_left = v[0] * np.log(1.0 + T1 / t)
    tail_right = v[-1] * (T2 / t) * np.log((T2 + t) / T2)
    out = h * conv + tail_left + tail_right
    return f.with_values(out / (1j * np.pi))


# --------------------------------------------------------------------------
# Route-selectable S, R, and the projections P+-
# --------------------------------------------------------------------------

def apply_s(f: LogGridFunction, p: float = 2.0, route: str = "symbol") -> LogGridFunction:
    if route == "direct":
        return apply_s_direct(f)
    if route != "symbol":
        raise ValueError(f"unknown route {route!r}")
    sym = MellinSymbol.closed_form(lambda xi: symbol_sp(p, xi), p=p)
    return phi_inv(co_apply(sym, phi(f, p)), p)


def apply_r(f: LogGridFunction, p: float = 2.0, route: str = "symbol") -> LogGridFunction:
    if route == "direct":
        return apply_r_direct(f)
    if route != "symbol":
        raise ValueError(f"unknown route {route!r}")
    sym = MellinSymbol.closed_form(lambda xi: symbol_rp(p, xi), p=p)
    return phi_inv(co_apply(sym, phi(f, p)), p)


def p_plus(f: LogGridFunction, p: float = 2.0, route: str = "symbol") -> LogGridFunction:
    return 0.5 * (f + apply_s(f, p, route))


def p_minus(f: LogGridFunction, p: float = 2.0, route: str = "symbol") -> LogGridFunction:
    return 0.5 * (f - apply_s(f, p, route))


# --------------------------------------------------------------------------
# Total variation and the variation-norm multiplier bound
# --------------------------------------------------------------------------

def total_variation(expr: Expr, support_hint: tuple[float, float] = (-40.0, 40.0),
                    variable: str = "x") -> float:
    """V(a) = int |a'(x)| dx over the whole line by adaptive quadrature."""
    d = differentiate(expr, variable)

    def integrand(x):
        return abs(evaluate(d, x, variable=variable))

    a, b = support_hint
    total = 0.0
    err = 0.0
    for lo, hi in ((-math.inf, a), (a, b), (b, math.inf)):
        val, e = quad(integrand, lo, hi, limit=200)
        total += val
        err += e
    if not math.isfinite(total) or total > 1e10:
        raise DivergenceError(f"total variation diverges (got {total!r})")
    if err > max(1e-8, 1e-6 * total):
        warnings.warn(f"total variation quadrature error estimate {err:.2e}",
                      UserWarning, stacklevel=2)
    return total


def stechkin_bound(expr: Expr, p: float,
                   support_hint: tuple[float, float] = (-40.0, 40.0),
                   variable: str = "x") -> float:
    """Upper bound for the multiplier norm of a bounded-variation symbol:
    |S|_p (sup |a| + V(a))."""
    V = total_variation(expr, support_hint, variable)
    a, b = support_hint
    pad = max(10.0, b - a)
    grid = np.concatenate([
        np.linspace(a - pad, b + pad, 4001),
        -np.logspace(math.log10(pad + abs(a) + 1.0), 6, 200),
        np.logspace(math.log10(pad + abs(b) + 1.0), 6, 200),
    ])
    sup = float(np.abs(evaluate(expr, grid, variable=variable)).max())
    return cauchy_operator_norm(p) * (sup + V)
