"""Planar frame helpers shared across the planning modules."""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi].

    The upper boundary is inclusive: wrap_angle(pi) == pi and
    wrap_angle(-pi) == pi, so every heading has exactly one representative.
    """
    return -((-a + math.pi) % TWO_PI - math.pi)


def rotate(x: float, y: float, theta: float) -> tuple[float, float]:
    """Rotate the vector (x, y) by theta about the origin."""
    c = math.cos(theta)
    s = math.sin(theta)
    return (c * x - s * y, s * x + c * y)
