"""WCAG color contrast math on sRGB point samples.

Implements the relative-luminance and contrast-ratio calculations from WCAG
2.0, applied to averaged point picks: channels are averaged in gamma-encoded
sRGB space first, then the averaged color is linearized once. Constants are
fixed (0.03928 breakpoint, 2.4 exponent) so scores are bit-stable across runs
and labellers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InputDomainError, ProtocolViolation

# Linearization breakpoint and coefficients, as published. Not configurable.
_LINEAR_BREAKPOINT = 0.03928
_LINEAR_DIVISOR = 12.92
_GAMMA_OFFSET = 0.055
_GAMMA_SCALE = 1.055
_GAMMA_EXPONENT = 2.4

LUMINANCE_WEIGHTS = (0.2126, 0.7152, 0.0722)

#: Default luminance floor below which a score is flagged as abnormal.
DEFAULT_LUMINANCE_FLOOR = 0.01

Rgb = tuple[float, float, float]


@dataclass(frozen=True)
class ContrastScore:
    """A WCAG contrast ratio together with the luminances that formed it.

    ``lighter`` and ``darker`` are the relative luminances L1 >= L2 of the two
    averaged colors; ``value`` = (L1 + 0.05) / (L2 + 0.05), in [1, 21].
    """

    value: float
    lighter: float
    darker: float


def srgb_channel_to_linear(c: float) -> float:
    """Linearize one gamma-encoded sRGB channel value in [0, 255].

    Accepts real-valued channels because averaged picks are not re-quantized.
    """
    if not 0 <= c <= 255:
        raise InputDomainError(f"channel value {c!r} outside [0, 255]")
    s = c / 255.0
    if s <= _LINEAR_BREAKPOINT:
        return s / _LINEAR_DIVISOR
    return ((s + _GAMMA_OFFSET) / _GAMMA_SCALE) ** _GAMMA_EXPONENT


def linearize(color: Sequence[float]) -> Rgb:
    """Linearize a gamma-encoded sRGB triple (channels in [0, 255])."""
    r, g, b = color
    return (
        srgb_channel_to_linear(r),
        srgb_channel_to_linear(g),
        srgb_channel_to_linear(b),
    )


def relative_luminance(linear: Sequence[float]) -> float:
    """Relative luminance of a linearized color (channels in [0, 1])."""
    r, g, b = linear
    for v in (r, g, b):
        if not 0.0 <= v <= 1.0:
            raise InputDomainError(f"linear channel {v!r} outside [0, 1]")
    wr, wg, wb = LUMINANCE_WEIGHTS
    return wr * r + wg * g + wb * b


def luminance(color: Sequence[float]) -> float:
    """Relative luminance of a gamma-encoded sRGB triple (0-255 channels)."""
    return relative_luminance(linearize(color))


def average_points(points: Sequence[Sequence[float]], expected_count: int = 3) -> Rgb:
    """Per-channel arithmetic mean of point picks, in gamma-encoded space.

    The mean stays real-valued; rounding back to integers would bias a
    three-sample mean. Raises :class:`ProtocolViolation` unless exactly
    ``expected_count`` points are given.
    """
    if len(points) != expected_count:
        raise ProtocolViolation(
            f"expected exactly {expected_count} points, got {len(points)}"
        )
    n = len(points)
    r = sum(p[0] for p in points) / n
    g = sum(p[1] for p in points) / n
    b = sum(p[2] for p in points) / n
    return (r, g, b)


def contrast_ratio(fg: Sequence[float], bg: Sequence[float]) -> ContrastScore:
    """WCAG contrast ratio between two (averaged) sRGB colors.

    Symmetric in its arguments: the lighter luminance always goes on top.
    """
    lf = luminance(fg)
    lb = luminance(bg)
    lighter = max(lf, lb)
    darker = min(lf, lb)
    return ContrastScore(
        value=(lighter + 0.05) / (darker + 0.05),
        lighter=lighter,
        darker=darker,
    )


def is_abnormal_score(score: ContrastScore, l_min: float = DEFAULT_LUMINANCE_FLOOR) -> bool:
    """Flag scores whose darker luminance falls below the floor ``l_min``.

    Near-black denominators dominate the ratio and are the only
    formula-driven instability; flagged images are excluded from grouping.
    """
    return min(score.lighter, score.darker) < l_min
