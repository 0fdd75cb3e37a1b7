"""Numerical Fredholm analysis for singular integral operators with shift
on the half-line, with slowly oscillating coefficients."""

from .exprdsl import differentiate, evaluate, parse, pretty
from .so_core import (FiberConfig, FiberPoint, SOFunction,
                      estimate_fiber_points, oscillation_modulus, verify_so)
from .shifts import SOSShift, fiber_shift_derivative
from .mellin import (LogGridFunction, MellinSymbol, apply_r, apply_s,
                     co_apply, log_gaussian, mellin_inverse, mellin_transform,
                     p_minus, p_plus, phi, phi_inv, stechkin_bound,
                     symbol_mult_shift, symbol_rp, symbol_sp, total_variation)
from .funcops import (BinomialOp, InvertibilityReport, apply_binomial,
                      apply_neumann_inverse, check_invertibility, l_star)
from .fredholm import (FredholmVerdict, ShiftedSIO, check_condition_ii,
                       fiber_symbol, fredholm_check, sap_invertible,
                       symbol_tail_bounds)
from .limitops import (apply_dilation, apply_limit_sio, apply_modulation,
                       apply_sio, band_limited_bump, dilation_limit_experiment,
                       finite_section_probe, modulation_limit_experiment)
from .config import InstanceConfig, NumericsConfig, build_instance, parse_config_text

__version__ = "0.1.0"
