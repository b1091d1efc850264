import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_lab import families as fam
from liouville_lab.errors import DomainError, InputError, JointError
from liouville_lab.families import Family, RadialProfile, WeightSpec

# frozen arbitrary-precision values (mpmath, 30 digits)
LOG_32_25 = 0.246860077931525797884641940838
BUBBLE16_MASS = 25.0349484612914262738190414356
ANNULUS5_MASS = 31.3546271670473998336320407912
SHAFRIR_SCALED_10_15_AT_002 = 6.72395333701774815828807159007
REMARK4_AT_05 = -0.724155553631875817718940213543
ANNULUS5_AT_15 = -0.294796874611293624371212861099


def test_bubble_values():
    assert fam.eval_u(RadialProfile.bubble(1), 0.0) == pytest.approx(math.log(8), abs=1e-15)
    assert fam.eval_u(RadialProfile.bubble(2), 1.0) == pytest.approx(LOG_32_25, abs=1e-15)
    assert fam.eval_du(RadialProfile.bubble(1), 1.0) == pytest.approx(-2.0, abs=1e-15)


def test_other_family_values():
    assert fam.eval_u(RadialProfile.shafrir_scaled(10, 1.5), 0.02) == pytest.approx(SHAFRIR_SCALED_10_15_AT_002, abs=1e-14)
    assert fam.eval_u(RadialProfile.remark(4), 0.5) == pytest.approx(REMARK4_AT_05, abs=1e-14)
    assert fam.eval_u(RadialProfile.annulus(5), 1.5) == pytest.approx(ANNULUS5_AT_15, abs=1e-14)


@pytest.mark.parametrize("p", [
    RadialProfile.bubble(3), RadialProfile.remark(2.0), RadialProfile.shafrir(2.0),
    RadialProfile.shafrir_scaled(5, 1.5),
])
def test_derivative_vanishes_at_origin(p):
    assert fam.eval_du(p, 0.0) == 0.0


def test_weights():
    assert fam.eval_V(RadialProfile.shafrir_scaled(10, 2.0), 0.05) == 0.5
    assert fam.eval_V(RadialProfile.shafrir_scaled(10, 2.0), 0.5) == 2.0
    assert np.all(fam.eval_V(RadialProfile.bubble(3), np.linspace(0, 1, 7)) == 1.0)
    assert fam.eval_V(RadialProfile.annulus(5), 1.5) == 2.0
    assert fam.eval_V(RadialProfile.remark(3.0, literal=True), 0.2) == 72.0


def test_pointwise_residuals():
    assert abs(fam.residual(RadialProfile.bubble(7), 0.3)) <= 1e-8
    assert abs(fam.residual(RadialProfile.shafrir_scaled(10, 1.5), 0.02)) <= 1e-8
    assert abs(fam.residual(RadialProfile.remark(4), 0.5)) <= 1e-8
    assert abs(fam.residual(RadialProfile.remark(4, literal=True), 0.5)) <= 1e-8


def test_residual_at_origin_uses_radial_limit():
    for p in (RadialProfile.bubble(5), RadialProfile.shafrir(3.0), RadialProfile.remark(0.7)):
        assert abs(fam.residual(p, 0.0)) <= 1e-10


def test_joint_is_guarded():
    with pytest.raises(JointError):
        fam.eval_du(RadialProfile.shafrir(2.0), 1.0)
    with pytest.raises(JointError):
        fam.residual(RadialProfile.shafrir_scaled(4, 2.0), 0.25)
    # u itself is continuous there
    p = RadialProfile.shafrir_scaled(4, 2.0)
    h = 1e-7
    assert fam.eval_u(p, 0.25 - h) == pytest.approx(fam.eval_u(p, 0.25 + h), abs=1e-5)
    # and C^1
    assert fam.eval_du(p, 0.25 - h) == pytest.approx(fam.eval_du(p, 0.25 + h), abs=1e-4)


def test_domain_errors():
    with pytest.raises(DomainError):
        fam.eval_u(RadialProfile.bubble(2), 1.5)
    with pytest.raises(DomainError):
        fam.eval_u(RadialProfile.annulus(2), 0.5)
    with pytest.raises(InputError):
        RadialProfile.bubble(0)
    with pytest.raises(InputError):
        RadialProfile.shafrir(0.5)
    with pytest.raises(InputError):
        RadialProfile(Family.STANDARD_BUBBLE, 1.0, literal=True)


def test_closed_form_masses():
    assert fam.mass(RadialProfile.bubble(16), 1.0) == pytest.approx(BUBBLE16_MASS, rel=1e-14)
    assert fam.mass(RadialProfile.annulus(5), 2.0) == pytest.approx(ANNULUS5_MASS, rel=1e-14)
    for mu in (0.5, 1.0, 4.0):
        assert fam.mass(RadialProfile.remark(mu), 1.0) == pytest.approx(8 * math.pi / (1 + mu * mu), rel=1e-14)
    assert fam.mass(RadialProfile.remark(1e4), 1.0) < 1e-6


@pytest.mark.parametrize("p,R", [
    (RadialProfile.bubble(9), 0.7),
    (RadialProfile.remark(0.3), 1.0),
    (RadialProfile.remark(2.0, literal=True), 1.0),
    (RadialProfile.shafrir(1.7), 2.0),
    (RadialProfile.shafrir(2.5), 0.6),
    (RadialProfile.shafrir_scaled(12, 2.0), 1.0),
    (RadialProfile.annulus(6), 1.8),
])
def test_mass_matches_quadrature(p, R):
    assert fam.mass_quadrature(p, R) == pytest.approx(fam.mass(p, R), rel=1e-8)


@pytest.mark.parametrize("p,R", [
    (RadialProfile.bubble(9), 0.7),
    (RadialProfile.shafrir(1.7), 2.0),
    (RadialProfile.shafrir_scaled(12, 2.0), 1.0),
    (RadialProfile.annulus(6), 1.8),
])
def test_flux_identity_for_weighted_mass(p, R):
    assert fam.weighted_mass(p, R) == pytest.approx(fam.mass_quadrature(p, R, weighted=True), rel=1e-9)


def test_bubble_limit_of_u0_plus_uk():
    k = 0.5
    vals = [fam.eval_u(RadialProfile.bubble(i), 0.0) + fam.eval_u(RadialProfile.bubble(i), k) for i in (10, 100, 1000)]
    assert abs(vals[-1] - math.log(64 / k**4)) < 1e-4
    assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])


@settings(max_examples=200, deadline=None)
@given(i=st.floats(1.0, 200.0), r=st.floats(0.01, 1.0), di=st.floats(0.01, 10.0))
def test_bubble_decreasing_in_index_beyond_core(i, r, di):
    if i * r <= 1.0:
        return
    assert fam.eval_u(RadialProfile.bubble(i + di), r) < fam.eval_u(RadialProfile.bubble(i), r)


@settings(max_examples=100, deadline=None)
@given(i=st.floats(1.0, 64.0), beta=st.floats(1.0, 4.0), r=st.floats(0.0, 1.0))
def test_shafrir_scaled_residual(i, beta, r):
    p = RadialProfile.shafrir_scaled(i, beta)
    if abs(r - 1 / i) <= 1e-6:
        return
    assert abs(fam.residual(p, r)) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(name=st.sampled_from(["bubble", "remark", "annulus"]), i=st.floats(0.5, 64.0),
       t=st.floats(0.0, 1.0))
def test_profiles_decrease_in_r(name, i, t):
    p = fam.parse_descriptor(f"{name}:{i!r}")
    r = p.r_min + t * (p.r_max - p.r_min)
    if 0 < r:
        assert fam.eval_du(p, r) < 0


def test_parse_descriptor():
    p = fam.parse_descriptor("shafrir-scaled:16:2")
    assert p == RadialProfile.shafrir_scaled(16, 2.0)
    assert fam.parse_descriptor(p.descriptor) == p
    assert fam.parse_descriptor("remark-literal:3").literal
    for bad in ("shafrir:1", "bubble:1:2", "nope:1", "bubble:x"):
        with pytest.raises(InputError):
            fam.parse_descriptor(bad)


def test_weight_spec():
    w = WeightSpec.piecewise((0.0, 0.5, 1.0), (2.0, 3.0))
    assert w.kind == "PiecewiseRadial"
    assert list(w(np.array([0.0, 0.5, 0.75]))) == [2.0, 2.0, 3.0]
    assert WeightSpec.constant(0.0).is_zero
