import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_lab.errors import DomainError, SingularityError
from liouville_lab.families import RadialProfile
from liouville_lab.green_disk import (
    GreenKernel, green, log_potential, poisson_kernel, regular_part, represent,
)
from liouville_lab.quadrature import QuadratureSpec

UNIT = GreenKernel()
# frozen mpmath values
G_0_HALF = 0.110317800076325796698228216059
H_06 = -0.0710287984214729606834181313853
P_HALF = 0.477464829275686007306651290118


def _interior(rng, n, rmax=0.999):
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def test_reference_values():
    assert green(UNIT, 0, (0.5, 0)) == pytest.approx(G_0_HALF, rel=1e-14)
    assert regular_part(UNIT, 0, 0) == 0.0
    assert regular_part(UNIT, 0.6, 0.6) == pytest.approx(H_06, rel=1e-14)
    assert poisson_kernel(UNIT, (0.5, 0), (1, 0)) == pytest.approx(P_HALF, rel=1e-14)
    s = np.exp(1j * np.linspace(0, 6, 9))
    assert np.allclose(poisson_kernel(UNIT, 0, s), 1 / (2 * math.pi), rtol=1e-15)


def test_symmetry_and_positivity():
    rng = np.random.default_rng(7)
    x, y = _interior(rng, 10_000), _interior(rng, 10_000)
    gxy = green(UNIT, x, y)
    assert np.array_equal(gxy, green(UNIT, y, x))
    assert np.all(gxy > 0)


def test_kernel_split_consistency():
    rng = np.random.default_rng(3)
    x, y = _interior(rng, 200, 0.9), _interior(rng, 200, 0.9)
    lhs = green(UNIT, x, y)
    rhs = -np.log(np.abs(x - y)) / (2 * math.pi) + regular_part(UNIT, x, y)
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_regular_part_harmonic_in_y():
    h = 1e-3
    for x, y in [(0.2 + 0.1j, -0.3 + 0.4j), (0.0, 0.5), (0.7j, -0.6)]:
        lap = (regular_part(UNIT, x, y + h) + regular_part(UNIT, x, y - h) + regular_part(UNIT, x, y + 1j * h)
               + regular_part(UNIT, x, y - 1j * h) - 4 * regular_part(UNIT, x, y)) / h**2
        assert abs(lap) <= 1e-6


def test_errors():
    with pytest.raises(SingularityError):
        green(UNIT, 0.3, 0.3)
    with pytest.raises(DomainError):
        green(UNIT, 1.0, 0.0)
    with pytest.raises(DomainError):
        poisson_kernel(UNIT, 0.0, 0.5)


def test_rescaled_disk_invariance():
    k = GreenKernel(2.0, 0.5 + 0.5j)
    x, y = 0.9 + 0.1j, -0.4 + 1.2j
    assert green(k, x, y) == pytest.approx(green(UNIT, (x - k.center) / 2, (y - k.center) / 2), rel=1e-14)


def test_represent_examples():
    assert represent(UNIT, 4.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-8)
    assert represent(UNIT, None, lambda s: s.real, (0.25, 0)) == pytest.approx(0.25, abs=1e-8)
    for c in (-2.0, 3.5):
        assert represent(UNIT, None, c, 0.4 - 0.3j) == pytest.approx(c, abs=1e-8)


def test_poisson_integral_with_256_nodes():
    x = 0.3 + 0.4j
    s = np.exp(2j * np.pi * np.arange(256) / 256)
    total = np.sum(poisson_kernel(UNIT, x, s)) * 2 * np.pi / 256
    assert total == pytest.approx(1.0, abs=1e-8)


def test_represent_on_shifted_disk():
    k = GreenKernel(2.0, 1 + 1j)
    x = 1.5 + 0.2j
    # u = 4 - |x - c|^2 has -Δu = 4 and u = 0 on the circle
    assert represent(k, 4.0, 0.0, x) == pytest.approx(4 - abs(x - k.center) ** 2, abs=1e-8)


def test_log_potential_closed_form():
    assert log_potential(0, 1.0, 1.0) == pytest.approx(0.25, abs=1e-12)
    assert log_potential(0, math.sqrt(math.e), 1.0) == pytest.approx(0.0, abs=1e-12)
    assert log_potential(0.3, 1.0, 0.0) == 0.0
    for R in (0.2, 2.0):
        expect = R * R * (1 - 2 * math.log(R)) / 4
        assert log_potential(0.1 + 0.2j, R, 1.0, radial=False) == pytest.approx(expect, abs=1e-8)


def test_log_potential_of_profile():
    # radial density about the origin: 2π∫ -(1/2π) log r · 8i²/(1+i²r²)² r dr, compare with a fine rule
    p = RadialProfile.bubble(4)
    fine = QuadratureSpec(radial_nodes=64, levels=40)
    a = log_potential(0, 0.5, p)
    b = log_potential(0, 0.5, lambda r: 8 * 16 / (1 + 16 * r * r) ** 2, fine, radial=True)
    assert a == pytest.approx(b, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0.0, 0.95), t=st.floats(0.0, 2 * math.pi), c=st.floats(-5, 5))
def test_constant_reproduction_property(r, t, c):
    assert represent(UNIT, None, c, r * complex(math.cos(t), math.sin(t))) == pytest.approx(c, abs=1e-8)
