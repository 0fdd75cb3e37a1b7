"""Slowly oscillating functions and their joint partial limits.

A bounded continuous f on the half line is slowly oscillating at an
endpoint s in {0, inf} when the oscillation over geometric windows,

    osc(f, r) = sup_{t, tau in [lam*r, r]} |f(t) - f(tau)|,

tends to zero as r -> s for some (equivalently every) lam in (0, 1).
The joint partial limits of a tuple of such functions along sequences
t_n -> s are the computable stand-ins for the endpoint fibers of their
maximal ideal space; here they are estimated by sweeping a geometric
sequence t_n = exp(+/- sigma n) through the declared domain and greedily
clustering the sampled value tuples.

Coverage is inherently *sampled*: a finite sweep witnesses partial limits,
it cannot enumerate them.  Functions that possess genuine limits at an
endpoint should declare them (``exact_limits``); declared tuples produce a
single exact cluster and bypass sampling noise entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import exprdsl
from .exprdsl import Expr, evaluate, is_constant, parse

ZERO = 0.0
INF = math.inf

_OMEGA_IMAG_TOL = 1e-9


class SOError(Exception):
    """Base class for slowly-oscillating analysis failures."""


class SODomainError(SOError):
    pass


class SORejectedError(SOError):
    pass


def endpoint_key(endpoint: float) -> str:
    if endpoint == ZERO:
        return "0"
    if endpoint == INF:
        return "inf"
    raise ValueError(f"endpoint must be 0 or inf, got {endpoint!r}")


def parse_endpoint(text: str) -> float:
    if text in ("0", "0.0", "zero"):
        return ZERO
    if text in ("inf", "oo", "infinity"):
        return INF
    raise ValueError(f"not an endpoint: {text!r}")


# --------------------------------------------------------------------------
# SOFunction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SOFunction:
    """A function on (0, inf) given by a DSL expression.

    ``domain`` is the open interval on which the expression may be
    evaluated; ``exact_limits`` maps endpoints (0.0 / inf) to asserted
    limit values there.  Variable-free expressions implicitly carry their
    value as the limit at both endpoints.
    """

    expr: Expr
    domain: tuple[float, float] = (0.0, INF)
    exact_limits: tuple[tuple[float, complex], ...] = ()

    def __post_init__(self):
        lo, hi = self.domain
        if not (0.0 <= lo < hi):
            raise ValueError(f"invalid domain {self.domain!r}")
        for ep, _ in self.exact_limits:
            endpoint_key(ep)

    @classmethod
    def from_text(cls, source: str, domain=(0.0, INF),
                  limits: Mapping[float, complex] | None = None) -> "SOFunction":
        lim = tuple(sorted((float(k), complex(v)) for k, v in (limits or {}).items()))
        return cls(parse(source), tuple(domain), lim)

    @classmethod
    def constant(cls, value: complex) -> "SOFunction":
        v = complex(value)
        if v.imag == 0 and v.real >= 0:
            expr = exprdsl.Num(v)
        elif v.imag == 0:
            expr = exprdsl.Neg(exprdsl.Num(-v))
        else:
            expr = exprdsl.Bin("+", exprdsl.Num(complex(v.real)),
                               exprdsl.Bin("*", exprdsl.Num(complex(v.imag)),
                                           exprdsl.IMAG_UNIT))
        return cls(expr)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        lo, hi = self.domain
        if np.any(arr <= lo) or np.any(arr >= hi) or np.any(~np.isfinite(arr)):
            raise SODomainError(
                f"argument outside declared domain ({lo}, {hi})")
        return evaluate(self.expr, t)

    def reaches(self, endpoint: float) -> bool:
        lo, hi = self.domain
        return lo == 0.0 if endpoint == ZERO else math.isinf(hi)

    def limit_at(self, endpoint: float) -> complex | None:
        for ep, val in self.exact_limits:
            if ep == endpoint:
                return val
        if is_constant(self.expr):
            return complex(evaluate(self.expr, 1.0))
        return None

    def is_constant(self) -> bool:
        return is_constant(self.expr)


# --------------------------------------------------------------------------
# Oscillation modulus and the SO test
# --------------------------------------------------------------------------

def oscillation_modulus(f: SOFunction, lam: float, r: float,
                        samples: int = 256) -> float:
    """Exact diameter of the sampled value set of f over [lam*r, r].

    The window is sampled at ``samples`` log-spaced points and the complex
    diameter max |f(t) - f(tau)| over the sample is returned.
    """
    if not (0.0 < lam < 1.0):
        raise ValueError("lam must lie in (0, 1)")
    lo, hi = f.domain
    if not (lam * r > lo and r < hi):
        raise SODomainError(
            f"window [{lam * r!r}, {r!r}] not inside domain ({lo}, {hi})")
    u = np.linspace(math.log(lam * r), math.log(r), samples)
    vals = f(np.exp(u))
    diff = np.abs(vals[:, None] - vals[None, :])
    return float(diff.max())


@dataclass(frozen=True)
class SOEndpointDiagnostic:
    endpoint: float
    accepted: bool
    reason: str
    rs: tuple[float, ...] = ()
    moduli: tuple[float, ...] = ()


@dataclass(frozen=True)
class SODiagnostic:
    accepted: bool
    at_zero: SOEndpointDiagnostic
    at_inf: SOEndpointDiagnostic


def _envelope_ok(moduli: np.ndarray, jitter: float = 1.1) -> bool:
    # quarterly maxima must be non-increasing up to the jitter factor
    quarters = np.array_split(moduli, 4)
    maxima = [float(q.max()) for q in quarters if len(q)]
    for prev, nxt in zip(maxima, maxima[1:]):
        if nxt > jitter * prev + 1e-12:
            return False
    return True


def _verify_endpoint(f: SOFunction, endpoint: float, lam: float, tol: float,
                     n_points: int, log_range: tuple[float, float]) -> SOEndpointDiagnostic:
    lo, hi = f.domain
    declared = f.limit_at(endpoint)
    if not f.reaches(endpoint):
        if declared is not None:
            return SOEndpointDiagnostic(endpoint, True,
                                        "accepted via declared limit")
        return SOEndpointDiagnostic(
            endpoint, False,
            f"domain ({lo}, {hi}) does not reach the endpoint and no limit "
            f"is declared")
    r_lo, r_hi = log_range
    if endpoint == INF:
        # need lam*r > lo, i.e. log r > log(lo/lam)
        floor_log = -math.inf if lo == 0.0 else math.log(lo / lam) + 1e-9
        start = max(r_lo, floor_log + 0.1)
        if start >= r_hi:
            return SOEndpointDiagnostic(endpoint, False,
                                        "declared domain leaves no room for "
                                        "an oscillation sweep")
        logs = np.linspace(start, r_hi, n_points)
        rs = np.exp(logs)
    else:
        # toward 0: r = exp(-u); need r < hi
        ceil_log = math.inf if math.isinf(hi) else math.log(hi) - 1e-9
        start = min(-r_lo, ceil_log - 0.1)
        if start <= -r_hi:
            return SOEndpointDiagnostic(endpoint, False,
                                        "declared domain leaves no room for "
                                        "an oscillation sweep")
        logs = np.linspace(start, -r_hi, n_points)
        rs = np.exp(logs)
    if len(rs) < 8:
        return SOEndpointDiagnostic(endpoint, False, "fewer than 8 sweep points")
    moduli = np.array([oscillation_modulus(f, lam, float(r)) for r in rs])
    final = float(moduli[-1])
    if final >= tol:
        return SOEndpointDiagnostic(
            endpoint, False,
            f"oscillation modulus {final:.3e} at the deepest window "
            f"exceeds tol {tol:.1e}",
            tuple(rs), tuple(moduli))
    if not _envelope_ok(moduli):
        return SOEndpointDiagnostic(
            endpoint, False, "modulus trace is not eventually non-increasing",
            tuple(rs), tuple(moduli))
    return SOEndpointDiagnostic(endpoint, True, "accepted", tuple(rs),
                                tuple(moduli))


def verify_so(f: SOFunction, lam: float = 0.5, tol: float = 0.05,
              n_points: int = 24,
              log_range: tuple[float, float] = (2.0, 280.0)) -> SODiagnostic:
    """Test the slowly-oscillating property numerically at both endpoints.

    An endpoint is accepted when the oscillation modulus at the deepest
    window is below ``tol`` and the modulus trace is eventually
    non-increasing (10% jitter on quarter-envelope maxima), or when the
    function carries a declared limit at an endpoint its domain does not
    reach.
    """
    d0 = _verify_endpoint(f, ZERO, lam, tol, n_points, log_range)
    di = _verify_endpoint(f, INF, lam, tol, n_points, log_range)
    return SODiagnostic(d0.accepted and di.accepted, d0, di)


def require_so(f: SOFunction, name: str = "function", **kwargs) -> SODiagnostic:
    diag = verify_so(f, **kwargs)
    if not diag.accepted:
        bad = diag.at_zero if not diag.at_zero.accepted else diag.at_inf
        raise SORejectedError(
            f"{name} rejected at endpoint {endpoint_key(bad.endpoint)}: "
            f"{bad.reason}")
    return diag


# --------------------------------------------------------------------------
# Joint partial limits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberConfig:
    sigma: float = 0.7
    n_samples: int = 400
    eps_cluster: float = 1e-2
    # fraction of the sweep (taken from the deep end) used for clustering;
    # 1.0 keeps every scale so recurrent oscillations are fully covered
    tail_fraction: float = 1.0


@dataclass(frozen=True)
class JointCluster:
    endpoint: float
    values: tuple[complex, ...]
    source: np.ndarray  # member t's, ordered nearest-endpoint first
    radius: float

    @property
    def is_exact(self) -> bool:
        return self.radius == 0.0 and len(self.source) == 0


def sweep_points(endpoint: float, config: FiberConfig,
                 domain: tuple[float, float]) -> np.ndarray:
    """Geometric test sequence exp(+/- sigma n) clipped to the open domain,
    ordered from the sample nearest the endpoint inward."""
    n = np.arange(1, config.n_samples + 1, dtype=float)
    exponents = config.sigma * n if endpoint == INF else -config.sigma * n
    t = np.exp(exponents)
    lo, hi = domain
    mask = (t > lo * (1.0 + 1e-12)) if lo > 0 else (t > 0)
    if not math.isinf(hi):
        mask &= t < hi * (1.0 - 1e-12)
    t = t[mask]
    if len(t) < 8:
        raise SODomainError(
            f"domain {domain!r} admits only {len(t)} sweep points toward "
            f"{endpoint_key(endpoint)}")
    t = np.sort(t)
    return t[::-1] if endpoint == INF else t


def estimate_joint_clusters(fns: Sequence[SOFunction], endpoint: float,
                            config: FiberConfig = FiberConfig(),
                            require_so_check: bool = True) -> list[JointCluster]:
    """Greedy radius-eps clustering of the sampled value tuples.

    When every function carries a known limit at the endpoint the single
    exact cluster is returned without sampling.  Otherwise a geometric
    sweep toward the endpoint is evaluated (functions with declared limits
    contribute their limit value), processed nearest-endpoint first, and
    clustered with seed representatives; each cluster's radius is the
    maximal distance of its members to the seed, bounded by eps.
    """
    endpoint_key(endpoint)
    limits = [f.limit_at(endpoint) for f in fns]
    if all(v is not None for v in limits):
        return [JointCluster(endpoint, tuple(limits), np.empty(0), 0.0)]
    if require_so_check:
        for k, f in enumerate(fns):
            require_so(f, name=f"component {k}")
    lo = max(f.domain[0] for f in fns)
    hi = min(f.domain[1] for f in fns)
    t = sweep_points(endpoint, config, (lo, hi))
    columns = []
    for f, lim in zip(fns, limits):
        if lim is not None:
            columns.append(np.full(len(t), lim))
        else:
            columns.append(np.asarray(f(t)))
    data = np.stack(columns, axis=1)  # rows: samples, cols: functions
    if config.tail_fraction < 1.0:
        keep = max(8, int(math.ceil(config.tail_fraction * len(t))))
        data, t = data[:keep], t[:keep]

    seeds: list[np.ndarray] = []
    members: list[list[int]] = []
    radii: list[float] = []
    for idx in range(len(t)):
        row = data[idx]
        placed = False
        for ci, seed in enumerate(seeds):
            dist = float(np.abs(row - seed).max())
            if dist <= config.eps_cluster:
                members[ci].append(idx)
                radii[ci] = max(radii[ci], dist)
                placed = True
                break
        if not placed:
            seeds.append(row)
            members.append([idx])
            radii.append(0.0)
    return [
        JointCluster(endpoint, tuple(complex(v) for v in seed),
                     t[np.array(idxs)], rad)
        for seed, idxs, rad in zip(seeds, members, radii)
    ]


# --------------------------------------------------------------------------
# FiberPoint: the five-tuple case used by the Fredholm engine
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberPoint:
    """Joint partial-limit tuple (a, b, c, d, omega) at an endpoint."""

    endpoint: float
    a: complex
    b: complex
    c: complex
    d: complex
    omega: float
    source_sequence: np.ndarray = field(default_factory=lambda: np.empty(0))
    cluster_radius: float = 0.0

    @property
    def values(self) -> tuple[complex, complex, complex, complex, float]:
        return (self.a, self.b, self.c, self.d, self.omega)

    @property
    def is_exact(self) -> bool:
        return self.cluster_radius == 0.0 and len(self.source_sequence) == 0


def estimate_fiber_points(a: SOFunction, b: SOFunction, c: SOFunction,
                          d: SOFunction, omega: SOFunction, endpoint: float,
                          config: FiberConfig = FiberConfig(),
                          require_so_check: bool = True) -> list[FiberPoint]:
    """Fiber points of the coefficient tuple at one endpoint.

    The shift exponent must be real along the sweep; its imaginary part is
    checked against a small tolerance and dropped.
    """
    clusters = estimate_joint_clusters([a, b, c, d, omega], endpoint, config,
                                       require_so_check)
    points = []
    for cl in clusters:
        av, bv, cv, dv, wv = cl.values
        if abs(wv.imag) > _OMEGA_IMAG_TOL * (1.0 + abs(wv.real)):
            raise SOError(f"shift exponent is not real at the fiber: {wv!r}")
        points.append(FiberPoint(endpoint, av, bv, cv, dv, float(wv.real),
                                 cl.source, cl.radius))
    return points
