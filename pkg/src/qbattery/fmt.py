"""Deterministic number formatting shared by every CSV writer."""

import math

SIG_DIGITS = 12


def format_float(x) -> str:
    """Twelve significant digits in scientific notation, platform independent."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        x = 0.0  # drop the sign of negative zero
    return f"{x:.{SIG_DIGITS - 1}e}"


def format_complex(z) -> str:
    z = complex(z)
    im = format_float(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{format_float(z.real)}{im}j"
