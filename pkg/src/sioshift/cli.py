"""Batch front door.

Subcommands:

    check        --config FILE [--out FILE]   Fredholm verdict
    symbol-dump  --config FILE --out FILE     CSV trace of |n| per fiber
    verify-so    --config FILE [--out FILE]   oscillation diagnostics
    invertibility --config FILE [--out FILE]  condition (i) reports
    limitop-test --config FILE [--out FILE] [--endpoint 0|inf] [--fiber K]
    selftest                                  built-in oracle suite

Exit codes for ``check``: 0 fredholm, 1 not-fredholm, 2 inconclusive,
3 configuration/domain errors, 4 unexpected failure.  Other subcommands
use 0 for success/acceptance, 1 for a negative outcome, and the same 3/4
error codes.  Output files embed the full effective configuration and
contain no timestamps, so identical configs produce identical bytes.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import fredholm, funcops, instances, limitops, mellin, so_core
from .config import (ConfigError, InstanceConfig, build_instance,
                     parse_config_text, render_config)
from .exprdsl import ExprError
from .fredholm import FredholmError, FredholmVerdict
from .funcops import BinomialOp, FuncOpError
from .mellin import GridError, LogGridFunction, log_gaussian
from .shifts import ShiftError
from .so_core import INF, ZERO, FiberConfig, SOError, endpoint_key

_CONFIG_ERRORS = (ConfigError, ExprError, SOError, ShiftError, FuncOpError,
                  FredholmError, GridError, OSError, ValueError)


def _fiber_config(cfg: InstanceConfig) -> FiberConfig:
    n = cfg.numerics
    return FiberConfig(sigma=n.sigma, n_samples=n.samples,
                       eps_cluster=n.eps_cluster)


def _load(path: str) -> InstanceConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _complex_text(z: complex) -> str:
    if z.imag == 0:
        return repr(z.real)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


# --------------------------------------------------------------------------
# check
# --------------------------------------------------------------------------

def _render_l(label: str, est) -> list[str]:
    return [
        f"{label}_liminf = {est.liminf!r}",
        f"{label}_limsup = {est.limsup!r}",
        f"{label}_exact = {est.exact}",
        f"{label}_stabilized = {est.stabilized}",
        f"{label}_fiber_min = {est.fiber_min!r}",
        f"{label}_fiber_max = {est.fiber_max!r}",
    ]


def _render_invertibility(section: str, rep) -> list[str]:
    lines = [f"[{section}]", f"verdict = {rep.verdict}",
             f"margin = {rep.margin!r}",
             f"inf_a = {rep.inf_a!r}", f"inf_b = {rep.inf_b!r}",
             f"inf_exact = {rep.inf_exact}"]
    lines += _render_l("l_zero", rep.at_zero)
    lines += _render_l("l_inf", rep.at_inf)
    lines.append(f"contraction_factor = "
                 f"{'none' if rep.contraction_factor is None else repr(rep.contraction_factor)}")
    for k, note in enumerate(rep.notes):
        lines.append(f"note_{k} = {note}")
    lines.append("")
    return lines


def render_verdict(cfg: InstanceConfig, verdict: FredholmVerdict) -> str:
    lines = ["[verdict]", f"overall = {verdict.overall}",
             f"tol = {verdict.tol!r}", ""]
    lines += _render_invertibility("condition-i-plus", verdict.plus_report)
    lines += _render_invertibility("condition-i-minus", verdict.minus_report)
    cii = verdict.condition_ii
    lines += [
        "[condition-ii]",
        f"margin = {cii.margin!r}",
        f"grid_min = {cii.grid_min!r}",
        f"tail_min = {cii.tail_min!r}",
        f"passes = {'undecided' if cii.passes is None else cii.passes}",
        f"witness_fiber = {cii.witness_fiber}",
        f"witness_x = {cii.witness_x!r}",
        f"witness_endpoint = {endpoint_key(cii.witness_endpoint)}",
        f"certified_gap = {cii.certified_gap!r}",
        f"fiber_count = {cii.fiber_count}",
        "",
    ]
    for cov in verdict.coverage:
        lines += [
            f"[coverage-{endpoint_key(cov.endpoint)}]",
            f"clusters = {cov.count}",
            f"max_radius = {cov.max_radius!r}",
            f"kind = {'exact' if cov.exact else 'sampled'}",
            f"source_samples = {cov.n_source_samples}",
            "",
        ]
    lines.append("# effective configuration")
    return "\n".join(lines) + render_config(cfg)


def cmd_check(args) -> int:
    cfg = _load(args.config)
    inst = build_instance(cfg)
    n = cfg.numerics
    verdict = fredholm.fredholm_check(inst, tol=n.tol, X=n.X, delta=n.delta,
                                      fiber_config=_fiber_config(cfg),
                                      so_tol=n.so_tol)
    _emit(render_verdict(cfg, verdict), args.out)
    if args.out:
        sys.stdout.write(f"overall = {verdict.overall}\n")
    return {"fredholm": 0, "not-fredholm": 1, "inconclusive": 2}[verdict.overall]


# --------------------------------------------------------------------------
# symbol-dump
# --------------------------------------------------------------------------

def cmd_symbol_dump(args) -> int:
    cfg = _load(args.config)
    inst = build_instance(cfg)
    n = cfg.numerics
    fibers = []
    for endpoint in (ZERO, INF):
        fibers.extend(so_core.estimate_fiber_points(
            inst.a, inst.b, inst.c, inst.d, inst.shift.omega, endpoint,
            _fiber_config(cfg)))
    xs = np.arange(-n.X, n.X + n.delta / 2.0, n.delta)
    lines = ["fiberId,x,re_n,im_n,abs_n"]
    for k, fp in enumerate(fibers):
        vals = fredholm.fiber_symbol(fp, inst.p, xs)
        for x, v in zip(xs, vals):
            lines.append(f"{k},{float(x)!r},{float(v.real)!r},"
                         f"{float(v.imag)!r},{float(abs(v))!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# --------------------------------------------------------------------------
# verify-so
# --------------------------------------------------------------------------

def cmd_verify_so(args) -> int:
    cfg = _load(args.config)
    n = cfg.numerics
    from .config import build_instance as _build  # validated construction
    inst = _build(cfg)
    rows = ["function,endpoint,r,modulus"]
    all_ok = True
    summary = []
    named = list(zip("abcd", inst.coefficients)) + [("omega", inst.shift.omega)]
    for name, fn in named:
        diag = so_core.verify_so(fn, lam=n.so_lambda, tol=n.so_tol)
        all_ok &= diag.accepted
        for epd in (diag.at_zero, diag.at_inf):
            summary.append(f"{name}@{endpoint_key(epd.endpoint)}: "
                           f"{'accepted' if epd.accepted else 'REJECTED'} "
                           f"({epd.reason})")
            for r, modulus in zip(epd.rs, epd.moduli):
                rows.append(f"{name},{endpoint_key(epd.endpoint)},{r!r},"
                            f"{modulus!r}")
    if args.out:
        _emit("\n".join(rows) + "\n", args.out)
    sys.stdout.write("\n".join(summary) + "\n")
    return 0 if all_ok else 1


# --------------------------------------------------------------------------
# invertibility
# --------------------------------------------------------------------------

def cmd_invertibility(args) -> int:
    cfg = _load(args.config)
    inst = build_instance(cfg)
    n = cfg.numerics
    fc = _fiber_config(cfg)
    plus = funcops.check_invertibility(
        BinomialOp(inst.a, inst.b, inst.shift, inst.p), n.tol, fc)
    minus = funcops.check_invertibility(
        BinomialOp(inst.c, inst.d, inst.shift, inst.p), n.tol, fc)
    lines = _render_invertibility("plus", plus)
    lines += _render_invertibility("minus", minus)
    _emit("\n".join(lines) + render_config(cfg), args.out)
    invertible = {funcops.VERDICT_FIRST, funcops.VERDICT_SECOND}
    if plus.verdict in invertible and minus.verdict in invertible:
        return 0
    if (plus.verdict == funcops.VERDICT_NOT
            or minus.verdict == funcops.VERDICT_NOT):
        return 1
    return 2


# --------------------------------------------------------------------------
# limitop-test
# --------------------------------------------------------------------------

def cmd_limitop_test(args) -> int:
    cfg = _load(args.config)
    inst = build_instance(cfg)
    n = cfg.numerics
    endpoint = so_core.parse_endpoint(args.endpoint)
    fibers = so_core.estimate_fiber_points(
        inst.a, inst.b, inst.c, inst.d, inst.shift.omega, endpoint,
        _fiber_config(cfg))
    if not 0 <= args.fiber < len(fibers):
        raise ConfigError(f"--fiber {args.fiber} out of range "
                          f"(0..{len(fibers) - 1})")
    fp = fibers[args.fiber]
    test_fns = [log_gaussian(0.0, 1.0, L=n.L, m=n.m),
                log_gaussian(0.5, 1.5, L=n.L, m=n.m)]
    rows = limitops.dilation_limit_experiment(inst, fp, test_fns,
                                              eps_cluster=n.eps_cluster)
    _emit(limitops.trace_csv(rows), args.out)
    quarter = [r.discrepancy for r in rows[: max(1, len(rows) // 4)]]
    sys.stdout.write(f"fiber {args.fiber} at {endpoint_key(endpoint)}: "
                     f"deepest-quarter max discrepancy "
                     f"{max(quarter)!r}\n")
    return 0


# --------------------------------------------------------------------------
# selftest
# --------------------------------------------------------------------------

def _check_roundtrip() -> tuple[bool, str]:
    f = log_gaussian(0.3, 1.1)
    back = mellin.mellin_inverse(mellin.mellin_transform(f))
    err = (back - f).norm_dmu(2.0) / f.norm_dmu(2.0)
    return err <= 1e-9, f"relative round-trip error {err:.2e}"


def _check_parseval() -> tuple[bool, str]:
    f = log_gaussian(-0.4, 0.8, amplitude=1.0 + 0.5j)
    md = mellin.mellin_transform(f)
    lhs = math.sqrt(float(np.sum(np.abs(md.values) ** 2)
                          * (md.xi[1] - md.xi[0])) / (2.0 * math.pi))
    rhs = f.norm_dmu(2.0)
    err = abs(lhs - rhs) / rhs
    return err <= 1e-9, f"Parseval mismatch {err:.2e}"


def _check_symbol_identity() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        p = float(rng.uniform(1.1, 6.0))
        x = float(rng.uniform(-30, 30))
        s = mellin.symbol_sp(p, x)
        r = mellin.symbol_rp(p, x)
        worst = max(worst, abs(s * s - r * r - 1.0))
    return worst <= 1e-10, f"max |s^2 - r^2 - 1| = {worst:.2e}"


def _check_operator_identity() -> tuple[bool, str]:
    worst = 0.0
    for k, (center, width) in enumerate(((0.0, 1.0), (1.0, 0.7), (-1.5, 1.4))):
        f = log_gaussian(center, width, amplitude=1.0 + 0.3j * k)
        pm = mellin.p_minus(f, 2.0, route="direct")
        rr = mellin.apply_r(mellin.apply_r(f, 2.0, "direct"), 2.0, "direct")
        lhs = 4.0 * mellin.p_plus(pm, 2.0, route="direct") + rr
        worst = max(worst, lhs.norm_dt(2.0) / f.norm_dt(2.0))
        ss = mellin.apply_s(mellin.apply_s(f, 2.0, "direct"), 2.0, "direct")
        # I - S^2 = -R^2, i.e. S^2 f - R^2 f - f = 0
        worst = max(worst, (ss - rr - f).norm_dt(2.0) / f.norm_dt(2.0))
    return worst <= 1e-5, f"operator identity residual {worst:.2e}"


def _check_s_similarity() -> tuple[bool, str]:
    f = log_gaussian(0.2, 1.2)
    direct = mellin.apply_s(f, 2.0, route="direct")
    via_symbol = mellin.apply_s(f, 2.0, route="symbol")
    err = (direct - via_symbol).norm_dt(2.0) / f.norm_dt(2.0)
    return err <= 1e-5, f"S route disagreement {err:.2e}"


def _check_shift_similarity() -> tuple[bool, str]:
    f = log_gaussian(0.1, 0.9)
    p = 2.0
    k = 2.0
    lhs = mellin.phi(limitops.shift_by_exponent(f, math.log(k)), p)
    rhs = mellin.co_apply(mellin.symbol_mult_shift(p, k), mellin.phi(f, p))
    err = (lhs - rhs).norm_dmu(p) / f.norm_dt(p)
    return err <= 1e-8, f"multiplicative-shift similarity error {err:.2e}"


def _neumann_residual(name: str) -> float:
    inst = instances.load_instance(name)
    op = BinomialOp(inst.a, inst.b, inst.shift, inst.p)
    rep = funcops.check_invertibility(op)
    worst = 0.0
    for center in (-0.5, 0.5):
        f = log_gaussian(center, 1.0, L=32.0, m=16)
        inv = funcops.apply_neumann_inverse(op, f, 1e-6, rep)
        resid = (funcops.apply_binomial(op, inv) - f).norm_dt(inst.p)
        worst = max(worst, resid / f.norm_dt(inst.p))
    return worst


def _check_neumann(name: str):
    def run() -> tuple[bool, str]:
        worst = _neumann_residual(name)
        return worst <= 2e-6, f"residual {worst:.2e}"
    return run


def _check_boundary_verdict() -> tuple[bool, str]:
    inst = instances.load_instance("binom-boundary")
    rep = funcops.check_invertibility(
        BinomialOp(inst.a, inst.b, inst.shift, inst.p))
    return (rep.verdict == funcops.VERDICT_NOT,
            f"verdict {rep.verdict}, margin {rep.margin:.2e}")


def _check_dilation_trace() -> tuple[bool, str]:
    inst = instances.load_instance("so-oscillating")
    fibers = so_core.estimate_fiber_points(
        inst.a, inst.b, inst.c, inst.d, inst.shift.omega, INF)
    fp = fibers[0]
    test_fns = [log_gaussian(0.0, 1.0)]
    members = limitops.dilation_source(fp, test_fns[0].h)[:4]
    rows = limitops.dilation_limit_experiment(inst, fp, test_fns,
                                              members=members)
    worst = max(r.discrepancy for r in rows)
    return worst <= 1e-2, f"deepest dilation discrepancy {worst:.2e}"


def _check_modulation_trace() -> tuple[bool, str]:
    bl = limitops.band_limited_bump(band=2.0)
    rows = limitops.modulation_limit_experiment([20.0], [bl], p=2.0)
    worst = max(r.discrepancy for r in rows)
    return worst <= 1e-4, f"modulation discrepancy {worst:.2e}"


def _check_fiber_coverage() -> tuple[bool, str]:
    inst = instances.load_instance("so-oscillating")
    fibers = so_core.estimate_fiber_points(
        inst.a, inst.b, inst.c, inst.d, inst.shift.omega, INF)
    avals = [fp.a.real for fp in fibers]
    lo, hi = min(avals), max(avals)
    ok = lo <= 1.05 and hi >= 2.95 and lo >= 0.95 and hi <= 3.05
    return ok, f"sampled a-range [{lo:.3f}, {hi:.3f}]"


def _check_verdicts() -> tuple[bool, str]:
    expected = {"fredholm-constant": "fredholm", "symbol-zero": "not-fredholm",
                "identity": "fredholm"}
    got = {}
    for name, want in expected.items():
        verdict = fredholm.fredholm_check(instances.load_instance(name))
        got[name] = verdict.overall
        if verdict.overall != want:
            return False, f"{name}: expected {want}, got {verdict.overall}"
    return True, "; ".join(f"{k}={v}" for k, v in sorted(got.items()))


SELFTEST_CHECKS = [
    ("mellin.roundtrip", _check_roundtrip),
    ("mellin.parseval", _check_parseval),
    ("mellin.symbol-identity", _check_symbol_identity),
    ("mellin.operator-identity", _check_operator_identity),
    ("mellin.s-similarity", _check_s_similarity),
    ("mellin.shift-similarity", _check_shift_similarity),
    ("funcops.neumann-first", _check_neumann("binom-first")),
    ("funcops.neumann-second", _check_neumann("binom-second")),
    ("funcops.neumann-b-zero", _check_neumann("binom-b-zero")),
    ("funcops.boundary-verdict", _check_boundary_verdict),
    ("limitops.dilation-trace", _check_dilation_trace),
    ("limitops.modulation-trace", _check_modulation_trace),
    ("so_core.fiber-coverage", _check_fiber_coverage),
    ("fredholm.verdicts", _check_verdicts),
]


def cmd_selftest(args) -> int:
    failures = 0
    for check_id, run in SELFTEST_CHECKS:
        try:
            ok, detail = run()
        except Exception as exc:  # a crash is a failure with a reason
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "ok" if ok else "FAIL"
        sys.stdout.write(f"[{status}] {check_id}: {detail}\n")
        failures += 0 if ok else 1
    sys.stdout.write(f"{len(SELFTEST_CHECKS) - failures}/"
                     f"{len(SELFTEST_CHECKS)} checks passed\n")
    return 0 if failures == 0 else 1


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sioshift",
        description="Fredholm analysis of singular integral operators with "
                    "shift on the half-line")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, needs_config=True, needs_out=True):
        sp = sub.add_parser(name)
        if needs_config:
            sp.add_argument("--config", required=True)
        if needs_out:
            sp.add_argument("--out", default=None)
        sp.set_defaults(fn=fn)
        return sp

    add("check", cmd_check)
    sp = add("symbol-dump", cmd_symbol_dump, needs_out=False)
    sp.add_argument("--out", required=True)
    add("verify-so", cmd_verify_so)
    add("invertibility", cmd_invertibility)
    sp = add("limitop-test", cmd_limitop_test)
    sp.add_argument("--endpoint", default="inf", choices=("0", "inf"))
    sp.add_argument("--fiber", type=int, default=0)
    add("selftest", cmd_selftest, needs_config=False, needs_out=False)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _CONFIG_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"unexpected failure: {type(exc).__name__}: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
