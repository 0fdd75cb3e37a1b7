"""Bundled problem instances in canonical config-file form.

These are the standing examples exercised by the self-test command and the
acceptance suite: constant-coefficient instances with known closed-form
margins, the boundary case whose margin is exactly zero, and the genuinely
oscillating instance whose leading coefficient sweeps the band [1, 3].
"""

from __future__ import annotations

from .config import InstanceConfig, build_instance, parse_config_text
from .fredholm import ShiftedSIO

E_CONST = "2.718281828459045"

CONFIG_TEXTS: dict[str, str] = {
    # Fredholm with comfortable margins: n(x) = 2 - e^{-1/2} e^{ix},
    # both binomial operators invertible on the first branch.
    "fredholm-constant": """
[problem]
p = 2
a = 2
b = 1
c = 2
d = 1
omega = 1
""",
    # Symbol zero at x = 0: |a| - |b| e^{-omega/p} = 1 - e^{1/2} e^{-1/2} = 0.
    "symbol-zero": """
[problem]
p = 2
a = 1
b = exp(0.5)
c = 1
d = exp(0.5)
omega = 1
""",
    # N = I.
    "identity": """
[problem]
p = 2
a = 1
b = 0
c = 1
d = 0
omega = 1
""",
    # Margin 5e-4 sits inside the default tol band: inconclusive by design.
    "inconclusive-margin": """
[problem]
p = 2
a = 1
b = exp(0.5)*(1-0.0005)
c = 1
d = exp(0.5)*(1-0.0005)
omega = 1
""",
    # Genuinely slowly oscillating leading coefficient; its partial limits
    # at infinity fill [1, 3].  The domain starts above e, so the limit at
    # the endpoint 0 is declared.
    "so-oscillating": f"""
[problem]
p = 2
a = 2+sin(log(log(t)))
b = 1
c = 2
d = 1
omega = 1
domain = {E_CONST} inf

[limits]
a@0 = 2
""",
    # Binomial instances (c = a, d = b so N coincides with aI - bW).
    "binom-first": """
[problem]
p = 2
a = 2
b = 1
c = 2
d = 1
omega = 1
""",
    "binom-second": """
[problem]
p = 2
a = 0.5
b = 1
c = 0.5
d = 1
omega = log(2)
""",
    "binom-b-zero": """
[problem]
p = 2
a = 2
b = 0
c = 2
d = 0
omega = 1
""",
    # Exact boundary: margin |a| - |b| e^{-omega/p} = 0, decisively
    # not invertible because the limits are exact.
    "binom-boundary": """
[problem]
p = 2
a = 1
b = exp(0.5)
c = 1
d = exp(0.5)
omega = 1
""",
}


def instance_config(name: str) -> InstanceConfig:
    try:
        text = CONFIG_TEXTS[name]
    except KeyError:
        raise KeyError(f"unknown bundled instance {name!r}; choose from "
                       f"{sorted(CONFIG_TEXTS)}") from None
    return parse_config_text(text)


def load_instance(name: str) -> ShiftedSIO:
    return build_instance(instance_config(name))
