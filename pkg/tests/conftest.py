import numpy as np
import pytest

from sioshift.mellin import log_gaussian


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_log_gaussians(rng, count, L=12.0, m=14, center_span=2.0):
    """Random complex-amplitude Gaussian bumps in the log variable."""
    out = []
    for _ in range(count):
        center = float(rng.uniform(-center_span, center_span))
        width = float(rng.uniform(0.6, 1.8))
        amp = complex(rng.normal(), rng.normal())
        if abs(amp) < 0.1:
            amp = 1.0 + 0.5j
        out.append(log_gaussian(center, width, amp, L=L, m=m))
    return out
