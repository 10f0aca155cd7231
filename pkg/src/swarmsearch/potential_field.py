"""Repulsive artificial potential field between robots.

Repulsion is active only inside the influence radius ``rho0``; beyond it
both potential and force vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import DegenerateGeometryError, ParameterDomainError


class Vector2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vector2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vector2(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return Vector2(-self.x, -self.y)

    def scale(self, c: float) -> "Vector2":
        return Vector2(self.x * c, self.y * c)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


ZERO = Vector2(0.0, 0.0)


@dataclass(frozen=True)
class PotentialParams:
    k_rep: float = 1.0
    rho0: float = 1.0

    def __post_init__(self):
        if not self.k_rep > 0 or not self.rho0 > 0:
            raise ParameterDomainError("k_rep and rho0 must both be positive")


def repulsive_potential(rho: float, params: PotentialParams) -> float:
    """Unsquared repulsive potential ``k/2 * (1/rho - 1/rho0)`` inside ``rho0``."""
    if not rho > 0:
        raise ParameterDomainError(f"rho must be positive, got {rho}")
    if rho >= params.rho0:
        return 0.0
    return 0.5 * params.k_rep * (1.0 / rho - 1.0 / params.rho0)


def force_potential(rho: float, params: PotentialParams) -> float:
    """Potential whose negative gradient is exactly ``repulsive_force``.

    Integrating the force magnitude from ``rho`` out to ``rho0`` gives the
    squared form ``k/2 * (1/rho - 1/rho0)**2``.
    """
    if not rho > 0:
        raise ParameterDomainError(f"rho must be positive, got {rho}")
    if rho >= params.rho0:
        return 0.0
    return 0.5 * params.k_rep * (1.0 / rho - 1.0 / params.rho0) ** 2


def force_magnitude(rho: float, params: PotentialParams) -> float:
    if rho >= params.rho0:
        return 0.0
    return params.k_rep * (1.0 / rho - 1.0 / params.rho0) / (rho * rho)


def repulsive_force(q, q_neighbor, params: PotentialParams) -> Vector2:
    """Force on a robot at ``q`` from a neighbour at ``q_neighbor``.

    Points from the neighbour towards ``q``; zero at and beyond ``rho0``.
    """
    dx = q[0] - q_neighbor[0]
    dy = q[1] - q_neighbor[1]
    rho = math.hypot(dx, dy)
    if rho == 0.0:
        raise DegenerateGeometryError(f"robot and neighbour coincide at {tuple(q)}")
    if rho >= params.rho0:
        return ZERO
    try:
        c = params.k_rep * (1.0 / rho - 1.0 / params.rho0) / (rho * rho)
        f = Vector2(c * (dx / rho), c * (dy / rho))
    except (ZeroDivisionError, OverflowError):
        f = Vector2(math.nan, math.nan)
    if not (math.isfinite(f.x) and math.isfinite(f.y)):
        raise DegenerateGeometryError(f"separation {rho!r} too small for a finite force")
    return f


def net_repulsion(q, neighbors: Iterable, params: PotentialParams) -> Vector2:
    """Superposition of the repulsive forces from every neighbour."""
    fx = fy = 0.0
    for nb in neighbors:
        f = repulsive_force(q, nb, params)
        fx += f[0]
        fy += f[1]
    return Vector2(fx, fy)
