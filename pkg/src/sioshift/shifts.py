"""Slowly oscillating shifts alpha(t) = t e^{omega(t)} of the half line.

A shift is specified by its exponent function omega, which makes the
defining inequalities directly checkable: the derivative is

    alpha'(t) = (1 + t omega'(t)) e^{omega(t)},

so strict monotonicity amounts to inf (1 + t omega'(t)) > 0, boundedness
of log alpha' to boundedness of omega, and t omega'(t) must fade at both
endpoints.  All infima/suprema are estimated on a log-uniform probe grid;
they cannot be certified pointwise on the whole half line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exprdsl import Expr, differentiate, evaluate, pretty
from .mellin import LogGridFunction, sample_at
from .so_core import SOFunction, require_so, FiberPoint

_REAL_TOL = 1e-9


class ShiftError(Exception):
    pass


class ShiftInvariantError(ShiftError):
    pass


class RootFindError(ShiftError):
    pass


class ShiftRangeError(ShiftError):
    pass


def _probe_grid(domain: tuple[float, float], count: int,
                log_span: float) -> np.ndarray:
    lo, hi = domain
    a = max(-log_span, math.log(lo) + 1e-9 if lo > 0 else -log_span)
    b = min(log_span, math.log(hi) - 1e-9 if not math.isinf(hi) else log_span)
    if b - a < 1.0:
        raise ShiftError(f"domain {domain!r} leaves no room for a probe grid")
    return np.exp(np.linspace(a + 1e-6, b - 1e-6, count))


@dataclass(frozen=True)
class SOSShift:
    """A slowly oscillating shift, built and validated from its exponent."""

    omega: SOFunction
    omega_prime: Expr
    inf_drift: float        # inf over the probe grid of 1 + t omega'(t)
    sup_abs_omega: float
    inf_alpha_prime: float
    sup_alpha_prime: float
    probe_count: int

    @classmethod
    def from_omega(cls, omega: SOFunction, probe_points: int = 10_000,
                   log_span: float = 280.0, so_tol: float = 0.05,
                   drift_tol: float = 0.05) -> "SOSShift":
        """Validate omega and cache the probe-grid bounds.

        Checks, all on the probe grid: omega real-valued and bounded,
        1 + t omega'(t) > 0, strict monotonicity of alpha, t omega'(t)
        small at the outermost probes, and the slowly-oscillating property
        of omega itself.
        """
        omega_prime = differentiate(omega.expr)
        t = _probe_grid(omega.domain, probe_points, log_span)
        w = evaluate(omega.expr, t)
        if np.any(np.abs(w.imag) > _REAL_TOL * (1.0 + np.abs(w.real))):
            raise ShiftInvariantError(
                f"exponent {pretty(omega.expr)!r} is not real-valued")
        for ep, val in omega.exact_limits:
            if abs(complex(val).imag) > _REAL_TOL:
                raise ShiftInvariantError("declared exponent limit is not real")
        w = w.real
        sup_w = float(np.abs(w).max())
        if not math.isfinite(sup_w):
            raise ShiftInvariantError("exponent is unbounded on the probe grid")
        drift = 1.0 + t * evaluate(omega_prime, t).real
        inf_drift = float(drift.min())
        if inf_drift <= 1e-9:
            raise ShiftInvariantError(
                f"inf(1 + t omega'(t)) = {inf_drift:.3e} is not positive")
        ap = drift * np.exp(w)
        alpha_vals = t * np.exp(w)
        if np.any(np.diff(alpha_vals) <= 0):
            raise ShiftInvariantError("alpha is not strictly increasing on "
                                      "the probe grid")
        # t omega'(t) must fade toward the endpoints the domain reaches
        tail = max(3, probe_points // 100)
        for side, reaches in ((slice(0, tail), omega.reaches(0.0)),
                              (slice(-tail, None), omega.reaches(math.inf))):
            if reaches and float(np.abs(drift[side] - 1.0).max()) > drift_tol:
                raise ShiftInvariantError(
                    "t omega'(t) does not fade at the probed endpoint")
        require_so(omega, name="shift exponent", tol=so_tol)
        return cls(omega, omega_prime, inf_drift, sup_w,
                   float(ap.min()), float(ap.max()), probe_points)

    @classmethod
    def from_text(cls, source: str, domain=(0.0, math.inf),
                  limits=None, **kwargs) -> "SOSShift":
        return cls.from_omega(SOFunction.from_text(source, domain, limits),
                              **kwargs)

    @classmethod
    def multiplicative(cls, k: float) -> "SOSShift":
        """The shift t -> k t, i.e. omega = log k."""
        if k <= 0:
            raise ValueError("factor must be positive")
        return cls.from_omega(SOFunction.constant(math.log(k)))

    # -- evaluation ----------------------------------------------------------
    def omega_at(self, t) -> np.ndarray:
        return np.asarray(self.omega(t)).real

    def alpha(self, t):
        """alpha(t) = t e^{omega(t)}."""
        arr = np.asarray(t, dtype=float)
        out = arr * np.exp(self.omega_at(arr))
        return float(out) if np.ndim(t) == 0 else out

    def alpha_prime(self, t):
        """alpha'(t) = (1 + t omega'(t)) e^{omega(t)} > 0."""
        arr = np.asarray(t, dtype=float)
        drift = 1.0 + arr * evaluate(self.omega_prime, arr).real
        out = drift * np.exp(self.omega_at(arr))
        if np.any(out <= 0):
            raise ShiftInvariantError("alpha' is not positive at the "
                                      "requested points")
        return float(out) if np.ndim(t) == 0 else out

    def beta(self, t, rtol: float = 1e-12, max_iter: int = 80):
        """Inverse shift: solves alpha(beta(t)) = t by bracketed Newton."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(arr <= 0):
            raise ShiftRangeError("beta requires positive arguments")
        pad = self.sup_abs_omega + 1e-6
        lo = arr * math.exp(-pad)
        hi = arr * math.exp(pad)
        x = arr * np.exp(-self.omega_at(arr))
        x = np.clip(x, lo, hi)
        for _ in range(max_iter):
            resid = self.alpha(x) - arr
            if np.all(np.abs(resid) <= rtol * arr):
                break
            x = np.clip(x - resid / self.alpha_prime(x), lo, hi)
        else:
            raise RootFindError("beta iteration failed to converge")
        return float(x[0]) if np.ndim(t) == 0 else x

    def iterate(self, n: int, t, max_n: int = 64):
        """n-fold composition alpha_n; negative n uses the inverse."""
        if abs(n) > max_n:
            raise ShiftRangeError(f"|n| = {abs(n)} exceeds the cap {max_n}")
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = arr.astype(float)
        for _ in range(abs(n)):
            out = self.alpha(out) if n > 0 else self.beta(out)
            if np.any(out < 1e-300) or np.any(out > 1e300):
                raise ShiftRangeError("shift iterates left the representable "
                                      "range")
        return float(out[0]) if np.ndim(t) == 0 else out

    def fixed_point_free(self) -> bool:
        """Sampled check that alpha(t) != t away from 0 and infinity: the
        exponent must keep a single sign on the probe grid (a sign change
        of the continuous omega forces an interior fixed point)."""
        t = _probe_grid(self.omega.domain, self.probe_count, 280.0)
        w = self.omega_at(t)
        return bool(np.all(w > 1e-12) or np.all(w < -1e-12))

    # -- grid action ----------------------------------------------------------
    def apply_to_grid(self, f: LogGridFunction, inverse: bool = False,
                      pad_tol: float = 1e-3) -> LogGridFunction:
        """W f = f o alpha (or f o beta) by cubic interpolation in log t.

        Exact when the shift is multiplicative and aligned with the grid.
        """
        t = f.t
        if inverse:
            targets = np.log(self.beta(t))
        else:
            targets = f.x + self.omega_at(t)
        shift = targets - f.x
        if float(np.abs(shift - shift[0]).max()) < 1e-12:
            from .mellin import relabel
            return relabel(f, float(shift[0]), pad_tol)
        return f.with_values(sample_at(f, targets, pad_tol))


def fiber_shift_derivative(fp: FiberPoint) -> float:
    """Value of alpha' seen by an endpoint fiber: e^{omega(xi)}."""
    return math.exp(fp.omega)
