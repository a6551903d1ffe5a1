"""Unit conventions and conversions.

Everything inside the package is angular frequency in rad/s and time in
seconds.  Configs, reports, and function arguments that end in ``_mhz``
or ``_us`` are the human-facing linear-frequency / microsecond values.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def mhz(value):
    """Linear MHz -> angular rad/s."""
    return TWO_PI * 1e6 * np.asarray(value, dtype=float) if np.ndim(value) else TWO_PI * 1e6 * float(value)


def to_mhz(omega):
    """Angular rad/s -> linear MHz."""
    return np.asarray(omega) / (TWO_PI * 1e6) if np.ndim(omega) else float(omega) / (TWO_PI * 1e6)


def khz(value):
    return TWO_PI * 1e3 * float(value)


def ghz(value):
    return TWO_PI * 1e9 * float(value)


def us(value):
    """Microseconds -> seconds."""
    return 1e-6 * float(value)


def to_us(t):
    return 1e6 * float(t)
