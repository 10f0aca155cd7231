import math

import pytest
from hypothesis import given, strategies as st

from swarmsearch.errors import DegenerateGeometryError, ParameterDomainError
from swarmsearch.potential_field import (
    PotentialParams,
    Vector2,
    force_magnitude,
    force_potential,
    net_repulsion,
    repulsive_force,
    repulsive_potential,
)

P = PotentialParams(k_rep=2.0, rho0=1.5)
coord = st.floats(-5, 5, allow_nan=False)


def test_potential_inside_and_outside():
    assert repulsive_potential(0.5, P) == pytest.approx(0.5 * 2.0 * (2.0 - 1 / 1.5))
    assert repulsive_potential(1.5, P) == 0.0
    assert repulsive_potential(3.0, P) == 0.0


def test_potential_decreasing_inside():
    values = [repulsive_potential(r, P) for r in (0.1, 0.4, 0.9, 1.4)]
    assert values == sorted(values, reverse=True)


def test_potential_rejects_nonpositive_distance():
    with pytest.raises(ParameterDomainError):
        repulsive_potential(0.0, P)
    with pytest.raises(ParameterDomainError):
        force_potential(-1.0, P)


def test_force_formula():
    f = repulsive_force((1.0, 0.0), (0.0, 0.0), P)
    expected = 2.0 * (1.0 - 1 / 1.5)
    assert f.x == pytest.approx(expected) and f.y == 0.0
    assert force_magnitude(1.0, P) == pytest.approx(expected)


def test_force_zero_at_and_beyond_radius():
    assert repulsive_force((1.5, 0.0), (0.0, 0.0), P) == (0.0, 0.0)
    assert repulsive_force((0.0, 4.0), (0.0, 0.0), P) == (0.0, 0.0)


def test_coincident_points_raise():
    with pytest.raises(DegenerateGeometryError):
        repulsive_force((1.0, 1.0), (1.0, 1.0), P)


@given(coord, coord, coord, coord)
def test_force_antisymmetric_and_repulsive(x1, y1, x2, y2):
    if math.hypot(x1 - x2, y1 - y2) < 1e-6:
        return
    f12 = repulsive_force((x1, y1), (x2, y2), P)
    f21 = repulsive_force((x2, y2), (x1, y1), P)
    assert f12.x == pytest.approx(-f21.x) and f12.y == pytest.approx(-f21.y)
    # points away from the neighbour
    assert f12.x * (x1 - x2) + f12.y * (y1 - y2) >= 0.0


@given(st.floats(0.05, 1.45), st.floats(0, 2 * math.pi))
def test_force_is_negative_gradient(rho, phi):
    q = (rho * math.cos(phi), rho * math.sin(phi))
    h = 1e-6

    def u(x, y):
        return force_potential(math.hypot(x, y), P)

    gx = (u(q[0] + h, q[1]) - u(q[0] - h, q[1])) / (2 * h)
    gy = (u(q[0], q[1] + h) - u(q[0], q[1] - h)) / (2 * h)
    f = repulsive_force(q, (0.0, 0.0), P)
    scale = max(1.0, f.norm())
    assert abs(f.x + gx) / scale < 1e-4
    assert abs(f.y + gy) / scale < 1e-4


def test_underflowing_separation_raises():
    with pytest.raises(DegenerateGeometryError):
        repulsive_force((0.0, 0.0), (5e-324, 0.0), P)


def test_net_repulsion_superposes():
    q = (0.0, 0.0)
    nbs = [(0.5, 0.0), (-0.5, 0.0)]
    assert net_repulsion(q, nbs, P).norm() == pytest.approx(0.0, abs=1e-12)
    one = repulsive_force(q, (0.0, 0.7), P)
    total = net_repulsion(q, [(0.0, 0.7), (5.0, 5.0)], P)
    assert total == one
    assert net_repulsion(q, [], P) == (0.0, 0.0)


def test_vector_arithmetic():
    a, b = Vector2(1.0, 2.0), Vector2(3.0, -1.0)
    assert a + b == (4.0, 1.0)
    assert a - b == (-2.0, 3.0)
    assert -a == (-1.0, -2.0)
    assert a.scale(2) == (2.0, 4.0)
    assert Vector2(3.0, 4.0).norm() == 5.0


def test_params_validation():
    with pytest.raises(ParameterDomainError):
        PotentialParams(k_rep=0.0)
    with pytest.raises(ParameterDomainError):
        PotentialParams(rho0=-1.0)
