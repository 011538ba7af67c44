import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bertrand.errors import DomainError
from bertrand.param_plane import (ParamPoint, RegionTag, aux_roots, branch, branch_intervals, branch_of, classify,
                                  meridian_coord, meridian_inverse, normalize, q_prime, q_value)

coord = st.floats(-20, 20, allow_nan=False).filter(lambda v: abs(v) > 1e-3)

# 30-digit quadratures of 1/Q (mpmath, frozen)
ORACLE_POLE_TO_ZERO = {
    (3.0, -2.0): 0.65064514228428650428,
    (1.0, -1.0): 0.9068996821171089253,
    (2.0, -1.0): math.pi / 4,
    (1.0, 0.0): math.pi / 2,
}
ORACLE_EQUATOR_TO_ZERO = {
    (3.0, -2.0): 0.1171859800501070105,
    (1.0, -1.0): 0.1787967688915270398,
    (2.0, -1.0): 0.14269908169872415481,
}


@pytest.mark.parametrize("c,d,tag", [
    (3, -2, "Omega1"), (1, 1, "Omega2"), (-3, -1, "Omega3"), (1, -1, "Omega4"),
    (1, 0, "L1"), (-1, 0, "L2"), (-2, -1, "L3"), (2, -1, "L4"), (0, 0, "Origin"),
    (0, 1, "Omega2"), (0, -1, "Omega4"),
])
def test_classify_examples(c, d, tag):
    assert classify(ParamPoint(c, d)) is RegionTag(tag)


@given(coord, coord)
def test_second_branch_exists_iff_d_negative(c, d):
    p = ParamPoint(c, d)
    ks = [b.k for b in branch_intervals(p)]
    assert ks == ([1, 2] if d < 0 else [1])


@given(coord, coord, st.floats(0.01, 0.99))
def test_q_positive_inside_every_branch(c, d, u):
    p = ParamPoint(c, d)
    for b in branch_intervals(p):
        lo = b.theta_max - 50.0 if b.theta_min == -math.inf else b.theta_min
        t = lo + u * (b.theta_max - lo)
        assume(t != 0)
        assert q_value(p, t) > 0


@given(coord, coord)
def test_finite_branch_ends_are_absolutes_or_equators(c, d):
    p = ParamPoint(c, d)
    for b in branch_intervals(p):
        for t in (b.theta_min, b.theta_max):
            if math.isfinite(t) and t != 0:
                scale = max(1.0, abs(c), abs(d) / t**2)
                assert abs(q_value(p, t)) < 1e-9 * scale or abs(q_prime(p, t)) < 1e-9 * max(1.0, abs(t), abs(d / t**3))


@given(coord, coord)
def test_aux_roots_solve_the_biquadratic(c, d):
    p = ParamPoint(c, d)
    a = aux_roots(p)
    scale = max(1.0, c * c, abs(d))
    if a.family == 4:
        assert math.isclose(a.x**2 + a.y**2, math.sqrt(-d), rel_tol=1e-12)
        assert math.isclose(a.y**2 - a.x**2, c / 2, rel_tol=1e-9, abs_tol=1e-12)
        return
    # x^2 and y^2 are roots of u^2 + c u - d or of u^2 - c u - d
    for v in (a.x**2, a.y**2):
        if v == 0:
            continue
        assert min(abs(v * v + c * v - d), abs(v * v - c * v - d)) < 1e-9 * scale


def test_aux_roots_undefined_at_origin():
    with pytest.raises(DomainError):
        aux_roots(ParamPoint(0, 0))


@given(coord, coord, st.floats(0.02, 0.98))
@settings(max_examples=200)
def test_meridian_derivative_is_inverse_q(c, d, u):
    p = ParamPoint(c, d)
    for b in branch_intervals(p):
        lo = b.theta_max - 10.0 if b.theta_min == -math.inf else b.theta_min
        t = lo + u * (b.theta_max - lo)
        h = 1e-6 * (b.theta_max - lo)
        assume(b.contains(t - h) and b.contains(t + h))
        q = q_value(p, t)
        assume(1e-3 < q < 1e6)
        fd = (meridian_coord(p, t + h) - meridian_coord(p, t - h)) / (2 * h)
        assert abs(fd * q - 1.0) < 1e-5


@given(coord, coord, st.floats(0.05, 0.95))
@settings(max_examples=200)
def test_inverse_round_trip(c, d, u):
    p = ParamPoint(c, d)
    for b in branch_intervals(p):
        lo = b.theta_max - 10.0 if b.theta_min == -math.inf else b.theta_min
        t = lo + u * (b.theta_max - lo)
        r = meridian_coord(p, t)
        assume(b.r_image[0] < r < b.r_image[1])
        back = meridian_inverse(p, b.k, r)
        # the map r -> theta has slope Q; compare in r to stay scale free
        assert abs(meridian_coord(p, back) - r) <= 1e-10 * max(1.0, abs(r))


@pytest.mark.parametrize("cd", list(ORACLE_POLE_TO_ZERO))
def test_pole_end_matches_frozen_quadrature(cd):
    p = ParamPoint(*cd)
    assert abs(branch(p, 1).r_image[0] + ORACLE_POLE_TO_ZERO[cd]) < 1e-14


@pytest.mark.parametrize("cd", list(ORACLE_EQUATOR_TO_ZERO))
def test_equator_matches_frozen_quadrature(cd):
    p = ParamPoint(*cd)
    assert abs(branch(p, 1).r_image[1] + ORACLE_EQUATOR_TO_ZERO[cd]) < 1e-14
    assert branch(p, 2).r_image == (branch(p, 1).r_image[1], 0.0)


@pytest.mark.parametrize("c,d", [(0.5, -1.0), (-1.0, -1.0), (0.0, -3.0), (1.9, -1.0)])
def test_omega4_equator_against_scipy_quad(c, d):
    p = ParamPoint(c, d)
    eq = -((-d) ** 0.25)
    depth = quad(lambda t: 1.0 / q_value(p, t), eq, 0.0, epsabs=1e-14, epsrel=1e-13)[0]
    assert abs(branch(p, 2).r_image[0] + depth) < 1e-10


def test_meridian_normalized_at_zero():
    for c, d in [(3, -2), (1, -1), (2, -1), (1, 0)]:
        p = ParamPoint(c, d)
        assert abs(meridian_coord(p, -1e-9)) < 1e-8


def test_branch_lookup_errors():
    with pytest.raises(DomainError):
        branch(ParamPoint(1, 1), 2)
    with pytest.raises(DomainError):
        branch_of(ParamPoint(1, 1), -0.5)  # between the absolute and zero
    with pytest.raises(DomainError):
        q_value(ParamPoint(1, 1), 0.0)
    with pytest.raises(DomainError):
        ParamPoint(float("nan"), 0.0)


def test_inverse_rejects_r_outside_image():
    with pytest.raises(DomainError):
        meridian_inverse(ParamPoint(1, 0), 1, 0.5)


def test_inverse_far_in_unbounded_branch():
    p = ParamPoint(-1.0, 0.0)  # L2: r in (0, inf), absolute at theta = -1
    t = meridian_inverse(p, 1, 12.0)
    assert -1.0 - 1e-9 < t < -1.0
    # theta sits ~1e-10 from the absolute, so one ulp moves r by ~1e-6: the
    # answer must be the float whose neighbours bracket r
    below, above = math.nextafter(t, -math.inf), math.nextafter(t, 0.0)
    vals = sorted([meridian_coord(p, below), meridian_coord(p, above)])
    assert vals[0] <= 12.0 <= vals[1] or abs(meridian_coord(p, t) - 12.0) < 1e-9


@given(coord, coord)
def test_normalize_scales(c, d):
    lam, canon = normalize(ParamPoint(c, d))
    assert math.isclose(canon.c * lam**2, c, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(canon.d * lam**4, d, rel_tol=1e-12, abs_tol=1e-12)
    assert canon.d in (-1.0, 1.0)
    assert classify(canon) is classify(ParamPoint(c, d))


REPRESENTATIVES = [(3, -2), (1, 1), (-3, -1), (1, -1), (1, 0), (-1, 0), (-2, -1), (2, -1), (0, 0)]


@pytest.mark.parametrize("c,d", REPRESENTATIVES)
def test_meridian_tends_to_image_endpoints(c, d):
    p = ParamPoint(c, d)
    for b in branch_intervals(p):
        for t, want, inward in ((b.theta_min, b.r_image[0], 1.0), (b.theta_max, b.r_image[1], -1.0)):
            if t == -math.inf:
                got = meridian_coord(p, -1e8)
            else:
                got = meridian_coord(p, t + inward * 1e-6)
            if math.isfinite(want):
                assert abs(got - want) < 1e-4
            else:
                # infinite images sit at finite theta: signed blow-up, still growing
                closer = meridian_coord(p, t + inward * 1e-9)
                assert math.copysign(1.0, got) == math.copysign(1.0, want)
                assert abs(closer) > abs(got)


def _expected_tag(c, d):
    delta = c * c + 4 * d
    if c == 0 and d == 0:
        return "Origin"
    if d == 0:
        return "L1" if c > 0 else "L2"
    if d > 0:
        return "Omega2"
    if delta < 0:
        return "Omega4"
    if delta == 0:
        return "L4" if c > 0 else "L3"
    return "Omega1" if c > 0 else "Omega3"


def test_partition_of_the_plane():
    grid = np.linspace(-10, 10, 81)  # includes 0 and the points on Delta = 0 through (+-2, -1), (+-4, -4)
    for c in grid:
        for d in grid:
            assert classify(ParamPoint(c, d)).value == _expected_tag(c, d)


@pytest.mark.parametrize("c,d", REPRESENTATIVES)
def test_meridian_is_an_antiderivative_of_inverse_q(c, d):
    p = ParamPoint(c, d)
    rng = np.random.default_rng(11)
    for b in branch_intervals(p):
        lo = b.theta_max - 10.0 if b.theta_min == -math.inf else b.theta_min
        ths = np.sort(lo + rng.uniform(0.02, 0.98, 100) * (b.theta_max - lo))
        vals = [meridian_coord(p, t) for t in ths]
        assert all(np.diff(vals) > 0)
        for t in ths:
            room = min(1.0, abs(t), b.theta_max - t, t - lo if b.theta_min > -math.inf else 1.0)
            h = 1e-4 * room
            m = [meridian_coord(p, t + k * h) for k in (-2, -1, 1, 2)]
            fd = (m[0] - 8 * m[1] + 8 * m[2] - m[3]) / (12 * h)
            inv_q = 1.0 / q_value(p, t)
            assert abs(fd - inv_q) < 1e-8 * max(1.0, inv_q)


@pytest.mark.parametrize("c,d", [(1.0, -1.0), (-2.5, 1.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (0.0, -1.0)])
def test_normalize_is_idempotent_on_canonical_points(c, d):
    assert normalize(ParamPoint(c, d)) == (1.0, ParamPoint(c, d))
