"""Point-mass pendulum stepping core.

The center of mass is modeled as a linear inverted pendulum at constant
height z0: each horizontal axis evolves independently about the stance
point p according to

    xdd = omega0^2 (x - p),        omega0 = sqrt(g / z0)

which has the closed-form solution

    x(t) - p = (x0 - p) cosh(omega0 t) + (v0 / omega0) sinh(omega0 t)
    v(t)     = (x0 - p) omega0 sinh(omega0 t) + v0 cosh(omega0 t)

The divergent component xi = x + v / omega0 (the extrapolated center of
mass) is the point the mass comes to rest over when the stance is placed
exactly there; the conserved per-axis orbital energy is
E = v^2/2 - omega0^2 (x - p)^2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def natural_frequency(z0: float, g: float = 9.81) -> float:
    """sqrt(g / z0); raises ValueError unless both arguments are positive."""
    if z0 <= 0.0:
        raise ValueError(f"pendulum height must be positive, got z0={z0}")
    if g <= 0.0:
        raise ValueError(f"gravity must be positive, got g={g}")
    return math.sqrt(g / z0)


@dataclass(frozen=True)
class PendulumParams:
    """Constant-height pendulum parameters.

    omega0 is always recomputed from (z0, g) so the three values can never
    disagree.
    """

    z0: float = 0.7
    g: float = 9.81

    def __post_init__(self) -> None:
        natural_frequency(self.z0, self.g)  # validate

    @property
    def omega0(self) -> float:
        return natural_frequency(self.z0, self.g)


@dataclass(frozen=True)
class CoMState:
    """Planar center-of-mass state (position and velocity)."""

    x: float
    y: float
    vx: float
    vy: float


def _propagate_axis(q: float, v: float, p: float, omega: float, dt: float) -> tuple[float, float]:
    c = math.cosh(omega * dt)
    s = math.sinh(omega * dt)
    d = q - p
    return (p + d * c + (v / omega) * s, d * omega * s + v * c)


def propagate(state: CoMState, stance: tuple[float, float], params: PendulumParams, dt: float) -> CoMState:
    """Advance the CoM by dt about a fixed stance point, per axis, closed form.

    dt may be zero (identity). Negative dt is rejected; the engine only
    integrates forward.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    omega = params.omega0
    x, vx = _propagate_axis(state.x, state.vx, stance[0], omega, dt)
    y, vy = _propagate_axis(state.y, state.vy, stance[1], omega, dt)
    return CoMState(x, y, vx, vy)


def xcom(state: CoMState, omega0: float) -> tuple[float, float]:
    """Extrapolated center of mass (xi_x, xi_y) = position + velocity/omega0."""
    if omega0 <= 0.0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    return (state.x + state.vx / omega0, state.y + state.vy / omega0)


def orbital_energy(state: CoMState, stance: tuple[float, float], omega0: float) -> tuple[float, float]:
    """Per-axis conserved energy v^2/2 - omega0^2 (x - p)^2 / 2."""
    if omega0 <= 0.0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    ex = 0.5 * state.vx**2 - 0.5 * omega0**2 * (state.x - stance[0]) ** 2
    ey = 0.5 * state.vy**2 - 0.5 * omega0**2 * (state.y - stance[1]) ** 2
    return (ex, ey)
