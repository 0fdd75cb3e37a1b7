"""Line-oriented instance configuration.

Format: ``key = value`` lines under ``[section]`` headers, ``#`` comments.

    [problem]
    p = 2
    a = 2+sin(log(log(t)))
    b = 1
    c = 2
    d = 1
    omega = 1
    domain = 2.718281828459045 inf

    [limits]
    a@0 = 2            # declared limit of a at the endpoint 0

    [numerics]
    L = 12             # half-width of the log grid
    m = 14             # grid size 2^m
    X = 8              # symbol scan window [-X, X]
    delta = 0.00390625 # symbol scan step (1/256)
    sigma = 0.7        # geometric sweep step
    samples = 400      # sweep length
    eps_cluster = 0.01 # fiber clustering radius
    tol = 0.001        # decision margin
    so_tol = 0.05      # slowly-oscillating acceptance threshold
    so_lambda = 0.5    # oscillation-window ratio

All numerics keys are optional; the defaults above are the single source
of truth (DEFAULT_NUMERICS).  Limit values are constant expressions in the
coefficient language (the imaginary unit is ``i``, e.g. ``1+2*i``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .exprdsl import ExprError, constant_value, parse
from .fredholm import ShiftedSIO
from .shifts import SOSShift
from .so_core import SOFunction, parse_endpoint


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class NumericsConfig:
    L: float = 12.0
    m: int = 14
    X: float = 8.0
    delta: float = 1.0 / 256.0
    sigma: float = 0.7
    samples: int = 400
    eps_cluster: float = 1e-2
    tol: float = 1e-3
    so_tol: float = 0.05
    so_lambda: float = 0.5

    def __post_init__(self):
        for name in ("L", "X", "delta", "sigma", "eps_cluster", "tol",
                     "so_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"numerics value {name} must be positive")
        if self.m < 3 or self.samples < 8:
            raise ConfigError("grid and sweep sizes are too small")
        if not 0.0 < self.so_lambda < 1.0:
            raise ConfigError("so_lambda must lie in (0, 1)")


DEFAULT_NUMERICS = NumericsConfig()

_PROBLEM_KEYS = ("p", "a", "b", "c", "d", "omega", "domain")
_NUMERIC_KEYS = ("L", "m", "X", "delta", "sigma", "samples", "eps_cluster",
                 "tol", "so_tol", "so_lambda")


@dataclass(frozen=True)
class InstanceConfig:
    p: float
    exprs: dict[str, str]              # a, b, c, d, omega source text
    domain: tuple[float, float]
    limits: dict[tuple[str, float], complex] = field(default_factory=dict)
    numerics: NumericsConfig = DEFAULT_NUMERICS


def _parse_number(text: str, what: str) -> float:
    text = text.strip()
    if text in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what} value {text!r}") from exc


def parse_config_text(text: str) -> InstanceConfig:
    """Parse the configuration format; unknown sections or keys are errors."""
    section = None
    problem: dict[str, str] = {}
    limits: dict[tuple[str, float], complex] = {}
    numerics: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("problem", "limits", "numerics"):
                raise ConfigError(f"line {lineno}: unknown section "
                                  f"[{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if section == "problem":
            if key not in _PROBLEM_KEYS:
                raise ConfigError(f"line {lineno}: unknown problem key "
                                  f"{key!r}")
            problem[key] = value
        elif section == "limits":
            if "@" not in key:
                raise ConfigError(f"line {lineno}: limit keys look like "
                                  f"name@endpoint")
            name, ep_text = key.split("@", 1)
            if name not in ("a", "b", "c", "d", "omega"):
                raise ConfigError(f"line {lineno}: unknown function "
                                  f"{name!r} in limit key")
            try:
                endpoint = parse_endpoint(ep_text.strip())
                limits[(name, endpoint)] = constant_value(parse(value))
            except (ValueError, ExprError) as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
        elif section == "numerics":
            if key not in _NUMERIC_KEYS:
                raise ConfigError(f"line {lineno}: unknown numerics key "
                                  f"{key!r}")
            numerics[key] = _parse_number(value, key)
        else:
            raise ConfigError(f"line {lineno}: key outside any section")

    missing = [k for k in _PROBLEM_KEYS if k != "domain" and k not in problem]
    if missing:
        raise ConfigError(f"missing problem keys: {', '.join(missing)}")
    p = _parse_number(problem["p"], "p")
    if not 1.0 < p < math.inf:
        raise ConfigError(f"p = {p} must lie in (1, inf)")
    domain = (0.0, math.inf)
    if "domain" in problem:
        parts = problem["domain"].split()
        if len(parts) != 2:
            raise ConfigError("domain needs two values: t_min t_max")
        domain = (_parse_number(parts[0], "domain"),
                  _parse_number(parts[1], "domain"))
        if not 0.0 <= domain[0] < domain[1]:
            raise ConfigError(f"invalid domain {domain!r}")
    exprs = {k: problem[k] for k in ("a", "b", "c", "d", "omega")}
    for name, source in exprs.items():
        try:
            parse(source)
        except ExprError as exc:
            raise ConfigError(f"cannot parse expression for {name!r}: "
                              f"{exc}") from exc
    num = DEFAULT_NUMERICS
    if numerics:
        kwargs = dict(numerics)
        if "m" in kwargs:
            kwargs["m"] = int(kwargs["m"])
        if "samples" in kwargs:
            kwargs["samples"] = int(kwargs["samples"])
        num = replace(DEFAULT_NUMERICS, **kwargs)
    return InstanceConfig(p, exprs, domain, limits, num)


def build_instance(cfg: InstanceConfig) -> ShiftedSIO:
    """Construct the validated problem instance from a parsed config."""
    fns = {}
    for name in ("a", "b", "c", "d", "omega"):
        lims = {ep: val for (nm, ep), val in cfg.limits.items() if nm == name}
        fns[name] = SOFunction.from_text(cfg.exprs[name], cfg.domain, lims)
    shift = SOSShift.from_omega(fns["omega"], so_tol=cfg.numerics.so_tol)
    return ShiftedSIO(fns["a"], fns["b"], fns["c"], fns["d"], shift, cfg.p)


def render_config(cfg: InstanceConfig) -> str:
    """Deterministic round-trippable rendering (used in verdict files)."""
    lines = ["[problem]", f"p = {cfg.p!r}"]
    for name in ("a", "b", "c", "d", "omega"):
        lines.append(f"{name} = {cfg.exprs[name]}")
    lo, hi = cfg.domain
    lines.append(f"domain = {lo!r} {'inf' if math.isinf(hi) else repr(hi)}")
    if cfg.limits:
        lines.append("")
        lines.append("[limits]")
        for (name, ep), val in sorted(cfg.limits.items()):
            ep_text = "inf" if math.isinf(ep) else "0"
            if val.imag == 0:
                rendered = repr(val.real)
            else:
                rendered = f"{val.real!r}+{val.imag!r}*i"
            lines.append(f"{name}@{ep_text} = {rendered}")
    lines.append("")
    lines.append("[numerics]")
    n = cfg.numerics
    lines.append(f"L = {n.L!r}")
    lines.append(f"m = {n.m}")
    lines.append(f"X = {n.X!r}")
    lines.append(f"delta = {n.delta!r}")
    lines.append(f"sigma = {n.sigma!r}")
    lines.append(f"samples = {n.samples}")
    lines.append(f"eps_cluster = {n.eps_cluster!r}")
    lines.append(f"tol = {n.tol!r}")
    lines.append(f"so_tol = {n.so_tol!r}")
    lines.append(f"so_lambda = {n.so_lambda!r}")
    return "\n".join(lines) + "\n"
