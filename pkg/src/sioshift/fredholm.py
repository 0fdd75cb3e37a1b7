"""Fredholm criterion for (aI - bW_alpha)P+ + (cI - dW_alpha)P- on L^p.

The operator is Fredholm exactly when

  (i)  both binomial operators aI - bW_alpha and cI - dW_alpha are
       invertible, and
  (ii) for every endpoint fiber value tuple (a, b, c, d, omega) and every
       real x the symbol

         n(x) = [a - b e^{i omega (x + i/p)}] (1 + coth(pi (x + i/p)))/2
              + [c - d e^{i omega (x + i/p)}] (1 - coth(pi (x + i/p)))/2

       does not vanish.

Condition (ii) is checked on a certified grid: |n| is scanned over
[-X, X] with a Lipschitz-controlled refinement near candidate minima, and
for |x| >= X the coth factor is within 2 e^{-2 pi X} of +-1, so the
infimum over each tail is a circle distance

    inf_theta |a - b e^{-omega/p} e^{i theta}| = | |a| - |b| e^{-omega/p} |

(for omega != 0; a point distance |a - b e^{-omega/p}| when omega = 0)
minus an explicit exponentially small correction.

Verdicts are three-valued.  Margins above tol pass; margins at the
roundoff floor of exactly-known fibers fail decisively (a reproducible
symbol zero); anything inside the band is reported inconclusive, and the
verdict always records whether fiber coverage was exact or sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcops import (BinomialOp, InvertibilityReport, VERDICT_FIRST,
                      VERDICT_NOT, VERDICT_SECOND, check_invertibility)
from .mellin import symbol_sp
from .shifts import SOSShift
from .so_core import (INF, ZERO, FiberConfig, FiberPoint, SOFunction,
                      endpoint_key, estimate_fiber_points, require_so,
                      SORejectedError)

# margins at or below this (scaled) floor witness a symbol zero
ZERO_FLOOR = 1e-9


class FredholmError(Exception):
    pass


class InstanceInvalidError(FredholmError):
    pass


@dataclass(frozen=True)
class ShiftedSIO:
    """Problem instance: coefficients, shift, and the exponent p."""

    a: SOFunction
    b: SOFunction
    c: SOFunction
    d: SOFunction
    shift: SOSShift
    p: float

    def __post_init__(self):
        if not 1.0 < self.p < math.inf:
            raise ValueError("p must lie in (1, inf)")

    @property
    def coefficients(self):
        return (self.a, self.b, self.c, self.d)


# --------------------------------------------------------------------------
# The fiber symbol and its tail control
# --------------------------------------------------------------------------

def fiber_symbol(fp: FiberPoint, p: float, x) -> np.ndarray:
    """n(x) for one fiber value tuple; vectorized over x."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xa = np.atleast_1d(x)
    w = symbol_sp(p, xa)
    z = np.exp(1j * fp.omega * (xa + 1j / p))
    A = fp.a - fp.b * z
    C = fp.c - fp.d * z
    out = A * (1.0 + w) / 2.0 + C * (1.0 - w) / 2.0
    return complex(out[0]) if scalar else out


def _circle_inf(u: complex, v: complex, omega: float, p: float) -> float:
    """inf over the limiting set of |u - v e^{-omega/p} e^{i omega x}|."""
    radius = abs(v) * math.exp(-omega / p)
    if abs(omega) > 1e-12:
        return abs(abs(u) - radius)
    return abs(u - v * math.exp(-omega / p))


@dataclass(frozen=True)
class TailBounds:
    plus: float
    minus: float
    correction: float


def symbol_tail_bounds(fp: FiberPoint, p: float, X: float) -> TailBounds:
    """Lower bounds for |n| on x >= X and x <= -X.

    For x >= X the symbol is within C e^{-2 pi X} of the almost periodic
    function a - b e^{-omega/p} e^{i omega x} (and the c, d analogue on the
    other side); the returned bounds are the closed-form infima over the
    limiting circle (or point, when omega = 0) minus that correction.
    """
    if X < 2.0:
        raise ValueError("tail bounds need X >= 2")
    decay = abs(fp.b) * math.exp(-fp.omega / p)
    decay_d = abs(fp.d) * math.exp(-fp.omega / p)
    C = 2.0 * (abs(fp.a) + decay + abs(fp.c) + decay_d)
    corr = C * math.exp(-2.0 * math.pi * X)
    plus = _circle_inf(fp.a, fp.b, fp.omega, p) - corr
    minus = _circle_inf(fp.c, fp.d, fp.omega, p) - corr
    return TailBounds(plus, minus, corr)


def _lipschitz_bound(fp: FiberPoint, p: float) -> float:
    """Upper bound for |n'(x)| on the real line."""
    q_ratio = math.sin(math.pi / p) ** 2
    w_sup = max(1.0, abs(math.cos(math.pi / p) / math.sin(math.pi / p)))
    w_deriv = math.pi / q_ratio
    decay_b = abs(fp.b) * math.exp(-fp.omega / p)
    decay_d = abs(fp.d) * math.exp(-fp.omega / p)
    MA = abs(fp.a) + decay_b
    MC = abs(fp.c) + decay_d
    return 0.5 * ((decay_b + decay_d) * abs(fp.omega) * (1.0 + w_sup)
                  + (MA + MC) * w_deriv)


# --------------------------------------------------------------------------
# Condition (ii)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionIIReport:
    margin: float
    grid_min: float
    tail_min: float
    witness_fiber: int
    witness_x: float
    witness_endpoint: float
    certified_gap: float
    passes: bool | None
    fiber_count: int


def _grid_min_for_fiber(fp: FiberPoint, p: float, X: float, delta: float,
                        tol: float) -> tuple[float, float, float]:
    """Certified minimum of |n| over [-X, X]: coarse scan plus
    Lipschitz-controlled refinement; returns (min, argmin, certified gap)."""
    lip = max(_lipschitz_bound(fp, p), 1e-30)
    xs = np.arange(-X, X + delta / 2.0, delta)
    vals = np.abs(fiber_symbol(fp, p, xs))
    coarse_min = float(vals.min())
    target_gap = tol / 10.0
    fine = min(delta, 2.0 * target_gap / lip)
    if fine < delta:
        candidates = np.flatnonzero(vals <= coarse_min + lip * delta)
        best, best_x = coarse_min, float(xs[int(vals.argmin())])
        for idx in candidates:
            lo = max(-X, xs[idx] - delta)
            hi = min(X, xs[idx] + delta)
            finegrid = np.arange(lo, hi + fine / 2.0, fine)
            fv = np.abs(fiber_symbol(fp, p, finegrid))
            m = float(fv.min())
            if m < best:
                best, best_x = m, float(finegrid[int(fv.argmin())])
        gap = lip * fine / 2.0
    else:
        best, best_x = coarse_min, float(xs[int(vals.argmin())])
        gap = lip * delta / 2.0
    return best, best_x, gap


def check_condition_ii(fibers: list[FiberPoint], p: float, X: float = 8.0,
                       delta: float = 1.0 / 256.0,
                       tol: float = 1e-3) -> ConditionIIReport:
    """Minimum of |n| over all fibers, the x-grid, and the analytic tails."""
    if not fibers:
        raise FredholmError("no fiber points supplied")
    endpoints = {fp.endpoint for fp in fibers}
    if endpoints != {ZERO, INF}:
        raise FredholmError("fiber points must cover both endpoints")
    best = math.inf
    best_wit = (0, 0.0, fibers[0].endpoint)
    gap = 0.0
    tail_min = math.inf
    grid_min = math.inf
    scale = 0.0
    for k, fp in enumerate(fibers):
        m, mx, g = _grid_min_for_fiber(fp, p, X, delta, tol)
        grid_min = min(grid_min, m)
        tb = symbol_tail_bounds(fp, p, X)
        tail_here = min(tb.plus, tb.minus)
        tail_min = min(tail_min, tail_here)
        scale = max(scale, abs(fp.a) + abs(fp.b) + abs(fp.c) + abs(fp.d))
        local = min(m, tail_here)
        if local < best:
            best = local
            best_wit = (k, mx if m <= tail_here else math.copysign(X, 1.0), fp.endpoint)
            gap = g
    margin = best
    floor = ZERO_FLOOR * (1.0 + scale)
    if margin > tol:
        passes = True
    elif margin <= floor:
        passes = False
    else:
        passes = None
    return ConditionIIReport(margin, grid_min, tail_min, best_wit[0],
                             best_wit[1], best_wit[2], gap, passes,
                             len(fibers))


def sap_invertible(symbol_values: np.ndarray,
                   tail_bounds: tuple[float, float],
                   tol: float = 1e-3) -> tuple[bool | None, float]:
    """Invertibility of a semi-almost-periodic multiplier from its grid
    trace and analytic tail infima: margin = inf |values| combined with the
    tails, compared against tol (None inside the undecidable band)."""
    grid_inf = float(np.abs(np.asarray(symbol_values)).min())
    margin = min(grid_inf, float(tail_bounds[0]), float(tail_bounds[1]))
    scale = float(np.abs(np.asarray(symbol_values)).max())
    floor = ZERO_FLOOR * (1.0 + scale)
    if margin > tol:
        return True, margin
    if margin <= floor:
        return False, margin
    return None, margin


# --------------------------------------------------------------------------
# The assembled verdict
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberCoverage:
    endpoint: float
    count: int
    max_radius: float
    exact: bool
    n_source_samples: int


@dataclass(frozen=True)
class FredholmVerdict:
    overall: str  # "fredholm" | "not-fredholm" | "inconclusive"
    plus_report: InvertibilityReport
    minus_report: InvertibilityReport
    condition_ii: ConditionIIReport
    coverage: tuple[FiberCoverage, FiberCoverage]
    fibers: tuple[FiberPoint, ...]
    tol: float


def _coverage(fibers: list[FiberPoint], endpoint: float) -> FiberCoverage:
    own = [fp for fp in fibers if fp.endpoint == endpoint]
    return FiberCoverage(
        endpoint, len(own),
        max((fp.cluster_radius for fp in own), default=0.0),
        all(fp.is_exact for fp in own),
        sum(len(fp.source_sequence) for fp in own))


def verify_instance(inst: ShiftedSIO, so_tol: float = 0.05) -> None:
    """Raise InstanceInvalidError unless all four coefficients are
    slowly-oscillating-accepted (the shift was validated at build time)."""
    for fn, name in zip(inst.coefficients, "abcd"):
        try:
            require_so(fn, name=f"coefficient {name}", tol=so_tol)
        except SORejectedError as exc:
            raise InstanceInvalidError(str(exc)) from exc


def fredholm_check(inst: ShiftedSIO, tol: float = 1e-3, X: float = 8.0,
                   delta: float = 1.0 / 256.0,
                   fiber_config: FiberConfig = FiberConfig(),
                   so_tol: float = 0.05) -> FredholmVerdict:
    """Run both conditions and assemble the three-valued verdict.

    Fredholm requires condition (i) for both binomial operators and
    condition (ii) with margin above tol; a decisive failure of either
    condition gives "not-fredholm"; everything else is inconclusive.
    """
    verify_instance(inst, so_tol)
    fibers: list[FiberPoint] = []
    for endpoint in (ZERO, INF):
        fibers.extend(estimate_fiber_points(
            inst.a, inst.b, inst.c, inst.d, inst.shift.omega, endpoint,
            fiber_config, require_so_check=False))
    plus = check_invertibility(BinomialOp(inst.a, inst.b, inst.shift, inst.p),
                               tol, fiber_config)
    minus = check_invertibility(BinomialOp(inst.c, inst.d, inst.shift, inst.p),
                                tol, fiber_config)
    cii = check_condition_ii(fibers, inst.p, X, delta, tol)

    i_ok = (plus.verdict in (VERDICT_FIRST, VERDICT_SECOND)
            and minus.verdict in (VERDICT_FIRST, VERDICT_SECOND))
    i_fail = plus.verdict == VERDICT_NOT or minus.verdict == VERDICT_NOT
    if i_ok and cii.passes is True:
        overall = "fredholm"
    elif i_fail or cii.passes is False:
        overall = "not-fredholm"
    else:
        overall = "inconclusive"
    return FredholmVerdict(overall, plus, minus, cii,
                           (_coverage(fibers, ZERO), _coverage(fibers, INF)),
                           tuple(fibers), tol)
