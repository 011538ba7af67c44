import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bertrand.errors import DomainError
from bertrand.surfaces import (FirstTypeSpec, SurfaceSpec, canonical_surface, curvature_range, detect_embedding,
                               f_of_r, fprime_of_r, laplace_beltrami, project_to_canonical, realizable_in_R3,
                               scalar_curvature)

SPECS = [
    SurfaceSpec(1.5, 3.0, -2.0), SurfaceSpec(2.0, 3.0, -2.0, k=2), SurfaceSpec(0.7, 1.0, 1.0),
    SurfaceSpec(1.2, -3.0, -1.0), SurfaceSpec(1.2, -3.0, -1.0, k=2), SurfaceSpec(1.0, 0.5, -1.0, eta=-1, r0=2.0),
    SurfaceSpec(1.5, 1.0, 0.0), SurfaceSpec(1.5, -1.0, 0.0), SurfaceSpec(1.0, 2.0, -1.0),
    SurfaceSpec(0.8, 0.0, 0.0),
]


def _theta_at(s, u):
    br = s.branch
    lo = br.theta_max - 4.0 if br.theta_min == -math.inf else br.theta_min
    return s.eta * (lo + (0.1 + 0.8 * u) * (br.theta_max - lo))


def _fd(f, x, h, order):
    if order == 1:
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)


@pytest.mark.parametrize("s", SPECS, ids=lambda s: f"{s.region.value}-k{s.k}")
@given(u=st.floats(0, 1))
@settings(max_examples=100)
def test_chart_consistency(s, u):
    th = _theta_at(s, u)
    r = s.r_of_theta(th)
    want = 1.0 / (s.mu * math.sqrt(s.q(th)))
    assert abs(f_of_r(s, r) - want) <= 1e-10 * want


@pytest.mark.parametrize("s", SPECS, ids=lambda s: f"{s.region.value}-k{s.k}")
def test_fprime_matches_finite_differences(s):
    for u in np.linspace(0.05, 0.95, 7):
        r = s.r_of_theta(_theta_at(s, u))
        lo, hi = s.chart
        h = 1e-3 * min(1.0, r - lo, hi - r)
        fd = _fd(s.f, r, h, 1)
        assert abs(fd - fprime_of_r(s, r)) <= 1e-6 * max(1.0, abs(fd))


@pytest.mark.parametrize("mu", [0.5, 2.0, 3.0])
def test_mu_scaling(mu):
    base, scaled = SurfaceSpec(1.0, 3.0, -2.0), SurfaceSpec(mu, 3.0, -2.0)
    for th in (-3.0, -1.7, -1.3):
        r = base.r_of_theta(th)
        assert scaled.r_of_theta(th) == r
        assert math.isclose(scaled.f(r) * mu, base.f(r), rel_tol=1e-12)
        assert math.isclose(scaled.fprime(r) * mu, base.fprime(r), rel_tol=1e-12)
        assert scalar_curvature(scaled, th) == scalar_curvature(base, th)


@pytest.mark.parametrize("xi,c", [(1.0, 0.0), (0.6, 1.0), (1.7, -0.5)])
def test_first_type_profile_identity(xi, c):
    s = FirstTypeSpec(xi, c, r0=0.2)
    a, b = s.chart
    b = min(b, a + 3.0)
    for r in np.linspace(a + 0.1 * (b - a), b - 0.1 * (b - a), 9):
        f0, f1, f2 = s.f(r), _fd(s.f, r, 1e-3, 1), _fd(s.f, r, 1e-3, 2)
        assert abs(f2 * f0 - f1 * f1 + xi * xi) < 1e-6


def test_first_type_curvature_is_constant():
    s = FirstTypeSpec(0.6, 1.0)
    assert curvature_range(s) == (2.0, 2.0)


@pytest.mark.parametrize("s", SPECS, ids=lambda s: f"{s.region.value}-k{s.k}")
@given(u=st.floats(0, 1))
@settings(max_examples=30)
def test_json_round_trip(s, u):
    t = SurfaceSpec.from_json(s.to_json())
    assert t == s
    th = _theta_at(s, u)
    assert t.r_of_theta(th) == s.r_of_theta(th)


@given(st.floats(0.05, 5), st.floats(-3, 3), st.floats(-2, 2), st.sampled_from([1, -1]))
def test_first_type_json_round_trip(xi, c, r0, sign):
    s = FirstTypeSpec(xi, c, r0, sign)
    assert FirstTypeSpec.from_json(s.to_json()) == s


def test_curvature_range_examples():
    assert curvature_range(SurfaceSpec(1.0, -1.0, 0.0)) == (-2.0, -2.0)
    c, d = 0.5, -1.0
    y4 = math.sqrt(math.sqrt(-d) / 2 + c / 4)
    lo, hi = curvature_range(SurfaceSpec(1.0, c, d))
    assert lo == 2 * c and math.isclose(hi, 32 * y4**2, rel_tol=1e-12)
    c, d = 1.0, 2.0
    x2 = math.sqrt((-c + math.sqrt(c * c + 4 * d)) / 2)
    lo, hi = curvature_range(SurfaceSpec(1.0, c, d))
    assert lo == 2 * c and math.isclose(hi, -2 * (c * c + 4 * d) / x2**2, rel_tol=1e-12)


def test_curvature_rejects_theta_off_branch():
    with pytest.raises(DomainError):
        scalar_curvature(SurfaceSpec(1.0, 1.0, 1.0), -0.1)


@pytest.mark.parametrize("mu,want", [(2.0, "yes"), (1.0, "boundary"), (0.5, "no")])
def test_realizability_at_d_nonpositive_c_nonnegative(mu, want):
    # |f'| -> 1/mu at the pole, so mu >= 1 is needed
    got = realizable_in_R3(SurfaceSpec(mu, 2.0, -1.0))
    if want == "boundary":
        assert got in ("yes", "boundary")
    else:
        assert got == want


@pytest.mark.parametrize("mu", [0.5, 1.0, 4.0])
def test_unrealizable_families(mu):
    assert realizable_in_R3(SurfaceSpec(mu, 1.0, 1.0)) == "no"
    assert realizable_in_R3(SurfaceSpec(mu, -3.0, -1.0)) == "no"
    assert realizable_in_R3(SurfaceSpec(mu, 3.0, -2.0, k=2)) == "no"


def test_laplace_beltrami():
    plane = SurfaceSpec(1.0, 0.0, 0.0)
    r = 1.7
    assert abs(laplace_beltrami(plane, lambda x: 3.0, r, 2)) < 1e-9
    assert abs(laplace_beltrami(plane, lambda x: x, r, 2) - 1 / r) < 1e-7  # second-difference roundoff
    s = SurfaceSpec(1.5, 3.0, -2.0)
    r = s.r_of_theta(-2.0)
    assert abs(laplace_beltrami(s, s.Theta, r, 3)) < 1e-6
    with pytest.raises(DomainError):
        laplace_beltrami(s, s.Theta, r, 1)


def test_project_to_canonical():
    s = SurfaceSpec(1.0, 3.0, -2.0)
    t, phi = project_to_canonical(s, -2.0, 0.4)
    assert math.isclose(t, -2.0 / 2**0.25, rel_tol=1e-15) and phi == 0.4
    assert project_to_canonical(SurfaceSpec(1.0, 1.0, 0.0), -0.3, 1.0) == (-0.3, 1.0)
    canon = canonical_surface(s)
    assert math.isclose(canon.c, 3.0 / math.sqrt(2.0), rel_tol=1e-15) and canon.d == -1.0
    with pytest.raises(DomainError):
        project_to_canonical(s, -1.0, 0.0)  # k=2 side of the equator


def test_constructor_errors():
    with pytest.raises(DomainError):
        SurfaceSpec(0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        SurfaceSpec(1.0, 1.0, 1.0, k=2)
    with pytest.raises(DomainError):
        SurfaceSpec(1.0, 1.0, 0.0, eta=0)
    with pytest.raises(DomainError):
        SurfaceSpec(1.0, 1.0, 0.0, chart=(-5.0, 0.0))
    with pytest.raises(DomainError):
        FirstTypeSpec(-1.0, 0.0)
    with pytest.raises(DomainError):
        FirstTypeSpec(1.0, 1.0, chart=(0.5, 2.0))  # crosses the equator at pi/2


def test_detect_plane_and_sinh():
    r = np.linspace(0.1, 10.0, 2001)
    plane = detect_embedding(r, r)
    assert isinstance(plane, FirstTypeSpec)
    assert abs(plane.xi - 1.0) < 1e-6 and abs(plane.c) < 1e-6
    r = np.linspace(0.1, 3.0, 2001)
    lob = detect_embedding(r, 2.0 * np.sinh(r))
    assert abs(lob.xi - 2.0) < 1e-6 and abs(lob.c + 1.0) < 1e-6
    assert detect_embedding(r, np.cosh(r)) is None


def test_detect_second_type_roundtrip():
    s = SurfaceSpec(2.0, 3.0, -2.0, r0=0.1)
    lo, hi = s.chart
    r = np.linspace(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo), 2001)
    got = detect_embedding(r, np.array([s.f(x) for x in r]))
    assert isinstance(got, SurfaceSpec) and (got.k, got.eta) == (1, 1)
    for a, b in ((got.mu, 2.0), (got.c, 3.0), (got.d, -2.0), (got.r0, 0.1)):
        assert abs(a - b) < 1e-4


def test_detect_input_errors():
    r = np.linspace(1, 2, 10)
    with pytest.raises(DomainError):
        detect_embedding(r, r)
    r = np.linspace(-1, 1, 200)
    with pytest.raises(DomainError):
        detect_embedding(r, r)
