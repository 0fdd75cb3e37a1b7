"""Limit-operator experiments: dilations, modulations, finite sections.

Dilations (V_x f)(t) = f(t/x) and modulations (E_x f)(t) = t^{ix} f(t) are
pseudoisometries; conjugating the shifted singular integral operator by a
dilation with factor s replaces every coefficient g by g(s t) and the shift
exponent omega by omega(s t) while leaving S untouched, so the conjugated
operator is applied on the original grid without ever representing V_s
itself (which would leave any finite grid for extreme s).  Traces of

    || V_s^{-1} N V_s f  -  N_xi f ||_p / ||f||_p

along a fiber's source sequence witness strong convergence to the
constant-coefficient limit operator; compact perturbations are expected to
wash out, modulations turn S into +-I on functions whose Mellin transform
has compact support.  Finite sections materialize an operator on growing
coarse grids and track the smallest singular value as an empirical
invertibility probe (p = 2 only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fredholm import ShiftedSIO
from .mellin import (LogGridFunction, mellin_transform, p_minus, p_plus,
                     relabel, sample_at, symbol_sp, symbol_sp_deriv)
from .so_core import FiberPoint


class LimitOpError(Exception):
    pass


class NotBandLimitedError(LimitOpError):
    pass


# --------------------------------------------------------------------------
# Pseudoisometries
# --------------------------------------------------------------------------

def apply_dilation(f: LogGridFunction, factor: float,
                   pad_tol: float = 1e-3) -> LogGridFunction:
    """(V_x f)(t) = f(t/x); an exact roll when log x is grid-aligned."""
    if factor <= 0:
        raise ValueError("dilation factor must be positive")
    return relabel(f, -math.log(factor), pad_tol)


def apply_modulation(f: LogGridFunction, mu: float) -> LogGridFunction:
    """(E_mu f)(t) = t^{i mu} f(t); exactly norm-preserving."""
    return f.with_values(f.values * np.exp(1j * mu * f.x))


def snap_to_grid(factor: float, h: float) -> float:
    """Round a dilation factor so log(factor) is a grid-step multiple."""
    return math.exp(round(math.log(factor) / h) * h)


# --------------------------------------------------------------------------
# Applying N and its constant-coefficient limits on the grid
# --------------------------------------------------------------------------

def shift_by_exponent(f: LogGridFunction, omega_vals,
                      pad_tol: float = 1e-3) -> LogGridFunction:
    """(W f)(t) = f(t e^{omega(t)}) for a sampled exponent."""
    omega_vals = np.broadcast_to(np.asarray(omega_vals, float), (f.n,))
    spread = float(np.abs(omega_vals - omega_vals[0]).max())
    if spread < 1e-12:
        return relabel(f, float(omega_vals[0]), pad_tol)
    return f.with_values(sample_at(f, f.x + omega_vals, pad_tol))


def apply_sio(inst: ShiftedSIO, f: LogGridFunction, scale: float = 1.0,
              route: str = "symbol", pad_tol: float = 1e-3) -> LogGridFunction:
    """Apply V_s^{-1} N V_s on the grid (scale = 1 gives N itself).

    Conjugation by the dilation V_s turns multiplication by g into
    multiplication by g(s t), the shift exponent into omega(s t), and
    fixes S, so everything stays on the grid of f.
    """
    ts = scale * f.t
    a_vals = np.asarray(inst.a(ts))
    b_vals = np.asarray(inst.b(ts))
    c_vals = np.asarray(inst.c(ts))
    d_vals = np.asarray(inst.d(ts))
    omega_vals = inst.shift.omega_at(ts)
    fp = p_plus(f, inst.p, route)
    fm = p_minus(f, inst.p, route)
    out = (a_vals * fp.values
           - b_vals * shift_by_exponent(fp, omega_vals, pad_tol).values
           + c_vals * fm.values
           - d_vals * shift_by_exponent(fm, omega_vals, pad_tol).values)
    return f.with_values(out)


def apply_limit_sio(fp: FiberPoint, p: float, f: LogGridFunction,
                    route: str = "symbol",
                    pad_tol: float = 1e-3) -> LogGridFunction:
    """The limit operator of N at a fiber: constant coefficients with the
    multiplicative shift t -> e^{omega(xi)} t."""
    gp = p_plus(f, p, route)
    gm = p_minus(f, p, route)
    wp = shift_by_exponent(gp, fp.omega, pad_tol)
    wm = shift_by_exponent(gm, fp.omega, pad_tol)
    out = (fp.a * gp.values - fp.b * wp.values
           + fp.c * gm.values - fp.d * wm.values)
    return f.with_values(out)


# --------------------------------------------------------------------------
# Dilation experiments
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceRow:
    index: int
    parameter: float
    test_fn: int
    discrepancy: float


def trace_csv(rows: Sequence[TraceRow]) -> str:
    lines = ["n,parameter,testFnId,discrepancyNorm"]
    for r in rows:
        lines.append(f"{r.index},{r.parameter!r},{r.test_fn},{r.discrepancy!r}")
    return "\n".join(lines) + "\n"


def dilation_source(fp: FiberPoint, h_grid: float,
                    fallback_sigma: float = 0.7,
                    fallback_count: int = 32) -> np.ndarray:
    """Grid-snapped source sequence of a fiber, ordered outward from the
    endpoint; exact fibers fall back to a plain geometric sequence."""
    if len(fp.source_sequence):
        hs = np.asarray(fp.source_sequence, float)
    else:
        n = np.arange(1, fallback_count + 1, dtype=float)
        expo = fallback_sigma * n if fp.endpoint == math.inf else -fallback_sigma * n
        hs = np.exp(expo)[::-1]
    snapped = np.exp(np.round(np.log(hs) / h_grid) * h_grid)
    return snapped


def _filter_snapped(inst: ShiftedSIO, fp: FiberPoint, members: np.ndarray,
                    eps_cluster: float) -> np.ndarray:
    """Drop snapped members whose coefficient tuple moved off the fiber
    values by more than eps/2 (snapping is a grid alignment, the fiber must
    stay the same cluster)."""
    if fp.is_exact:
        return members
    ref = np.asarray(fp.values, dtype=complex)
    kept = []
    for h in members:
        try:
            vals = np.array([complex(inst.a(h)), complex(inst.b(h)),
                             complex(inst.c(h)), complex(inst.d(h)),
                             complex(inst.shift.omega(h))])
        except Exception:
            continue
        if float(np.abs(vals - ref).max()) <= fp.cluster_radius + eps_cluster / 2.0:
            kept.append(float(h))
    return np.asarray(kept if kept else members)


def dilation_limit_experiment(inst: ShiftedSIO, fp: FiberPoint,
                              test_fns: Sequence[LogGridFunction],
                              members: Sequence[float] | None = None,
                              eps_cluster: float = 1e-2,
                              route: str = "symbol",
                              pad_tol: float = 1e-3) -> list[TraceRow]:
    """Trace of ||V_h^{-1} N V_h f - N_xi f||_p / ||f||_p along the source
    sequence of the fiber (ordered outward from the endpoint)."""
    if members is None:
        members = _filter_snapped(inst, fp,
                                  dilation_source(fp, test_fns[0].h),
                                  eps_cluster)
    rows = []
    limits = [apply_limit_sio(fp, inst.p, f, route, pad_tol) for f in test_fns]
    for k, h in enumerate(members):
        for j, f in enumerate(test_fns):
            conj = apply_sio(inst, f, scale=float(h), route=route,
                             pad_tol=pad_tol)
            dev = (conj - limits[j]).norm_dt(inst.p) / f.norm_dt(inst.p)
            rows.append(TraceRow(k, float(h), j, dev))
    return rows


@dataclass(frozen=True)
class CompactSmoother:
    """Rank-3 smoothing kernel K f = sum_i phi_i <psi_i, f>_{L^2(dt)} with
    log-Gaussian factors; the standing concrete compact test operator."""

    centers: tuple[float, ...] = (-1.0, 0.0, 1.0)
    width: float = 1.0

    def _factor(self, x: np.ndarray, center: float) -> np.ndarray:
        return np.exp(-((x - center) ** 2) / (2.0 * self.width ** 2))

    def apply(self, f: LogGridFunction, scale: float = 1.0) -> LogGridFunction:
        """V_s^{-1} K V_s f, evaluated without representing V_s:
        sum_i phi_i(s t) * s * int psi_i(s u) f(u) du."""
        x = f.x
        t = f.t
        out = np.zeros(f.n, dtype=complex)
        ls = math.log(scale)
        for c in self.centers:
            phi_scaled = self._factor(x + ls, c)
            psi_scaled = self._factor(x + ls, c)
            inner = f.h * np.sum(psi_scaled * f.values * t) * scale
            out += phi_scaled * inner
        return f.with_values(out)


def compact_limit_trace(K: CompactSmoother, members: Sequence[float],
                        test_fns: Sequence[LogGridFunction],
                        p: float = 2.0) -> list[TraceRow]:
    rows = []
    for k, h in enumerate(members):
        for j, f in enumerate(test_fns):
            dev = K.apply(f, scale=float(h)).norm_dt(p) / f.norm_dt(p)
            rows.append(TraceRow(k, float(h), j, dev))
    return rows


# --------------------------------------------------------------------------
# Modulation experiments
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BandLimitedFn:
    """A test function whose weighted image Phi f has a compactly supported
    Mellin transform (the dense set the modulation limits act through)."""

    f: LogGridFunction
    band: float
    p: float = 2.0


def band_limited_bump(band: float = 2.0, L: float = 12.0, m: int = 14,
                      amplitude: complex = 1.0,
                      p: float = 2.0) -> BandLimitedFn:
    """f = Phi^{-1} psi where M psi is a Gaussian profile truncated at
    |xi| = band (exactly zero outside, a ~4e-6 jump at the support edge),
    so psi decays fast enough in log t for grid work while the transform
    support stays compact."""
    from .mellin import MellinData, mellin_inverse, phi_inv
    g = LogGridFunction.zeros(L, m)
    xi = np.sort(2.0 * np.pi * np.fft.fftfreq(g.n, d=g.h))
    sigma = band / 5.0
    profile = np.where(np.abs(xi) < band,
                       np.exp(-(xi / sigma) ** 2 / 2.0), 0.0).astype(complex)
    psi = mellin_inverse(MellinData(xi, amplitude * profile, g.x0, g.h))
    return BandLimitedFn(phi_inv(psi, p), band, p)


def require_band_limited(bl: BandLimitedFn, tol: float = 1e-8) -> None:
    from .mellin import phi
    md = mellin_transform(phi(bl.f, bl.p), decay_tol=1e-2)
    outside = np.abs(md.xi) > bl.band * (1.0 + 1e-9)
    peak = float(np.abs(md.values).max())
    level = float(np.abs(md.values[outside]).max()) / (peak + 1e-300)
    if level > tol:
        raise NotBandLimitedError(
            f"declared band {bl.band} but spectral level outside is "
            f"{level:.2e}")


@dataclass(frozen=True)
class ModulationRow:
    mu: float
    test_fn: int
    discrepancy: float
    predicted_symbol_gap: float
    predicted_symbol_slope: float


def modulation_limit_experiment(mu_list: Sequence[float],
                                test_fns: Sequence[BandLimitedFn],
                                p: float = 2.0,
                                route: str = "symbol") -> list[ModulationRow]:
    """Measure ||E_mu^{-1} S E_mu f -+ f|| for band-limited f, with the
    closed-form bounds sup_K |s_p(x + mu) -+ 1| and sup_K |s_p'(x + mu)|."""
    from .mellin import apply_s
    rows = []
    for bl in test_fns:
        if bl.p != p:
            raise LimitOpError(f"test function built for p = {bl.p}, "
                               f"experiment runs at p = {p}")
        require_band_limited(bl)
    for mu in mu_list:
        sign = 1.0 if mu > 0 else -1.0
        for j, bl in enumerate(test_fns):
            f = bl.f
            conj = apply_modulation(apply_s(apply_modulation(f, mu), p, route),
                                    -mu)
            dev = (conj - sign * f).norm_dt(p) / f.norm_dt(p)
            k = np.linspace(-bl.band, bl.band, 512)
            gap = float(np.abs(symbol_sp(p, k + mu) - sign).max())
            slope = float(np.abs(symbol_sp_deriv(p, k + mu)).max())
            rows.append(ModulationRow(float(mu), j, dev, gap, slope))
    return rows


def nu_sequence(k: float, count: int) -> np.ndarray:
    """Modulation parameters 2 pi n / |log k| that fix the shift t -> k t."""
    n = np.arange(1, count + 1, dtype=float)
    if k <= 0:
        raise ValueError("k must be positive")
    if k == 1.0:
        return 2.0 * np.pi * n
    return 2.0 * np.pi * n / abs(math.log(k))


# --------------------------------------------------------------------------
# Finite sections
# --------------------------------------------------------------------------

def materialize_operator(apply_fn: Callable[[LogGridFunction], LogGridFunction],
                         grid: LogGridFunction) -> np.ndarray:
    """Matrix of the operator in the orthonormalized indicator basis of the
    grid (columns are images of basis vectors, conjugated by sqrt(t))."""
    n = grid.n
    A = np.empty((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        A[:, j] = apply_fn(grid.with_values(e)).values
    root_t = np.exp(grid.x / 2.0)
    return root_t[:, None] * A / root_t[None, :]


def finite_section_probe(apply_fn: Callable[[LogGridFunction], LogGridFunction],
                         sizes: Sequence[int], span_step: float = 24.0 / 256.0,
                         p: float = 2.0,
                         size_cap: int = 4096) -> list[tuple[int, float]]:
    """Smallest singular value of the operator materialized on growing
    grids of ``size`` points spaced ``span_step`` in log t (p = 2 only)."""
    if p != 2.0:
        raise ValueError("singular values are meaningful at p = 2 only")
    out = []
    for size in sizes:
        if size > size_cap:
            raise LimitOpError(f"section size {size} exceeds cap {size_cap}")
        span = size * span_step
        grid = LogGridFunction(-span / 2.0, span_step,
                               np.zeros(size, dtype=complex))
        M = materialize_operator(apply_fn, grid)
        sigma = np.linalg.svd(M, compute_uv=False)
        out.append((size, float(sigma[-1])))
    return out
