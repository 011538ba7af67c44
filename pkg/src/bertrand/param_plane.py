"""The (c, d) parameter plane.

Region classification, the function Q(theta) = theta^2 + c - d/theta^2, the
auxiliary roots of theta^4 + c theta^2 - d, the closed-form meridian
coordinate r(theta) (an antiderivative of 1/Q), its branch intervals and its
numerical inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, NumericalFailure

INF = math.inf


class RegionTag(str, Enum):
    OMEGA1 = "Omega1"
    OMEGA2 = "Omega2"
    OMEGA3 = "Omega3"
    OMEGA4 = "Omega4"
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    ORIGIN = "Origin"


@dataclass(frozen=True)
class ParamPoint:
    c: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and math.isfinite(self.d)):
            raise DomainError(f"non-finite parameter point ({self.c}, {self.d})")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", float(self.d))

    @property
    def delta(self) -> float:
        return self.c * self.c + 4.0 * self.d


@dataclass(frozen=True)
class AuxRoots:
    delta: float
    x: float
    y: float
    family: int


@dataclass(frozen=True)
class BranchInterval:
    k: int
    theta_min: float
    theta_max: float
    r_image: tuple[float, float]

    def contains(self, theta: float) -> bool:
        return self.theta_min < theta < self.theta_max


def as_point(p) -> ParamPoint:
    if isinstance(p, ParamPoint):
        return p
    c, d = p
    return ParamPoint(c, d)


# --- Classification ---


def classify(p) -> RegionTag:
    p = as_point(p)
    c, d = p.c, p.d
    if d > 0:
        return RegionTag.OMEGA2
    if d == 0:
        if c > 0:
            return RegionTag.L1
        if c < 0:
            return RegionTag.L2
        return RegionTag.ORIGIN
    delta = p.delta
    if delta < 0:
        return RegionTag.OMEGA4
    if delta == 0:
        return RegionTag.L3 if c < 0 else RegionTag.L4
    return RegionTag.OMEGA1 if c > 0 else RegionTag.OMEGA3


def q_value(p, theta: float) -> float:
    p = as_point(p)
    if theta == 0:
        raise DomainError("Q is undefined at theta = 0")
    return theta * theta + p.c - p.d / (theta * theta)


def q_prime(p, theta: float) -> float:
    p = as_point(p)
    if theta == 0:
        raise DomainError("Q is undefined at theta = 0")
    return 2.0 * theta + 2.0 * p.d / theta**3


def _sqrt0(v: float) -> float:
    return math.sqrt(max(v, 0.0))


_FAMILY = {
    RegionTag.OMEGA1: 1,
    RegionTag.L1: 1,
    RegionTag.OMEGA2: 2,
    RegionTag.L2: 2,
    RegionTag.OMEGA3: 3,
    RegionTag.L3: 3,
    RegionTag.OMEGA4: 4,
    RegionTag.L4: 4,
}


def aux_roots(p) -> AuxRoots:
    p = as_point(p)
    region = classify(p)
    if region not in _FAMILY:
        raise DomainError("no auxiliary root family applies at the origin")
    c, d = p.c, p.d
    delta = p.delta
    family = _FAMILY[region]
    # degenerate lines use their exact coincident values
    if region is RegionTag.L1:
        x, y = 0.0, math.sqrt(c)
    elif region is RegionTag.L2:
        x, y = math.sqrt(-c), 0.0
    elif region is RegionTag.L3:
        x = y = math.sqrt(-c / 2.0)
    elif region is RegionTag.L4:
        x, y = 0.0, math.sqrt(c / 2.0)
    elif family == 1:
        sd = math.sqrt(delta)
        x, y = _sqrt0((c - sd) / 2.0), _sqrt0((c + sd) / 2.0)
    elif family == 2:
        sd = math.sqrt(delta)
        x, y = _sqrt0((-c + sd) / 2.0), _sqrt0((c + sd) / 2.0)
    elif family == 3:
        sd = math.sqrt(delta)
        x, y = _sqrt0((-c + sd) / 2.0), _sqrt0((-c - sd) / 2.0)
    else:
        s = math.sqrt(-d)
        x, y = _sqrt0(s / 2.0 - c / 4.0), _sqrt0(s / 2.0 + c / 4.0)
    return AuxRoots(delta=delta, x=x, y=y, family=family)


def _pair4(p: ParamPoint) -> tuple[float, float]:
    """(x4, y4) for d < 0, used by curvature and equator constants."""
    s = math.sqrt(-p.d)
    return _sqrt0(s / 2.0 - p.c / 4.0), _sqrt0(s / 2.0 + p.c / 4.0)


# --- Meridian coordinate ---


def _log_ratio(theta: float, x: float) -> float:
    """ln|(theta - x)/(theta + x)| for x > 0, written with atanh for accuracy."""
    if abs(theta) < x:
        return -2.0 * math.atanh(theta / x)
    return -2.0 * math.atanh(x / theta)


def _meridian_raw(region: RegionTag, aux: AuxRoots | None, theta: float) -> float:
    """Closed-form antiderivative of 1/Q without domain checks."""
    t = theta
    if region is RegionTag.ORIGIN:
        return -1.0 / t
    x, y = aux.x, aux.y
    if region is RegionTag.OMEGA1:
        return (-x * math.atan(t / x) + y * math.atan(t / y)) / (y * y - x * x)
    if region is RegionTag.L1:
        return math.atan(t / y) / y
    if region is RegionTag.OMEGA2:
        return (0.5 * x * _log_ratio(t, x) + y * math.atan(t / y)) / (x * x + y * y)
    if region is RegionTag.L2:
        return _log_ratio(t, x) / (2.0 * x)
    if region is RegionTag.OMEGA3:
        return (0.5 * x * _log_ratio(t, x) - 0.5 * y * _log_ratio(t, y)) / (x * x - y * y)
    if region is RegionTag.L3:
        return -0.5 * t / (t * t - x * x) + _log_ratio(t, x) / (4.0 * x)
    if region is RegionTag.OMEGA4:
        arc = math.atan((t + x) / y) + math.atan((t - x) / y)
        log = math.log(((t + x) ** 2 + y * y) / ((t - x) ** 2 + y * y))
        return arc / (4.0 * y) - log / (8.0 * x)
    if region is RegionTag.L4:
        return math.atan(t / y) / (2.0 * y) - 0.5 * t / (t * t + y * y)
    raise AssertionError(region)


def equator_depth(p) -> float:
    """Positive constant with r(equator) = -constant, for Omega1, Omega4 and L4."""
    p = as_point(p)
    region = classify(p)
    aux = aux_roots(p) if region is not RegionTag.ORIGIN else None
    if region is RegionTag.OMEGA1:
        x, y = aux.x, aux.y
        return 0.5 * math.pi * y / (y * y - x * x) - math.atan(math.sqrt(y / x)) / (y - x)
    if region is RegionTag.OMEGA4:
        x, y = aux.x, aux.y
        return math.pi / (8.0 * y) + math.log((math.hypot(x, y) - x) / y) / (4.0 * x)
    if region is RegionTag.L4:
        return (0.5 * math.pi - 1.0) / (4.0 * aux.y)
    raise DomainError(f"region {region.value} has no equator")


def branch_intervals(p) -> list[BranchInterval]:
    p = as_point(p)
    region = classify(p)
    if region is RegionTag.ORIGIN:
        return [BranchInterval(1, -INF, 0.0, (0.0, INF))]
    aux = aux_roots(p)
    x, y = aux.x, aux.y
    if region is RegionTag.L1:
        return [BranchInterval(1, -INF, 0.0, (-math.pi / (2.0 * y), 0.0))]
    if region is RegionTag.L2:
        return [BranchInterval(1, -INF, -x, (0.0, INF))]
    if region is RegionTag.OMEGA2:
        lo = -math.pi * y / (2.0 * math.sqrt(aux.delta))
        return [BranchInterval(1, -INF, -x, (lo, INF))]
    if region in (RegionTag.OMEGA3, RegionTag.L3):
        return [
            BranchInterval(1, -INF, -x, (0.0, INF)),
            BranchInterval(2, -y, 0.0, (-INF, 0.0)),
        ]
    depth = equator_depth(p)
    if region is RegionTag.OMEGA1:
        eq = -((-p.d) ** 0.25)
        lo = -math.pi / (2.0 * (x + y))
    elif region is RegionTag.OMEGA4:
        eq = -((-p.d) ** 0.25)
        lo = -math.pi / (4.0 * y)
    else:
        eq = -y
        lo = -math.pi / (4.0 * y)
    return [
        BranchInterval(1, -INF, eq, (lo, -depth)),
        BranchInterval(2, eq, 0.0, (-depth, 0.0)),
    ]


def branch(p, k: int) -> BranchInterval:
    for b in branch_intervals(p):
        if b.k == k:
            return b
    raise DomainError(f"branch k={k} does not exist for {as_point(p)}")


def branch_of(p, theta: float) -> BranchInterval:
    for b in branch_intervals(p):
        if b.contains(theta):
            return b
    raise DomainError(f"theta={theta} lies in no branch interval")


def meridian_coord(p, theta: float) -> float:
    p = as_point(p)
    branch_of(p, theta)
    region = classify(p)
    aux = None if region is RegionTag.ORIGIN else aux_roots(p)
    return _meridian_raw(region, aux, theta)


def meridian_inverse(p, k: int, r: float, guess: float | None = None) -> float:
    """theta on branch k with meridian_coord(theta) = r.

    Bracketed bisection to a relative width of 1e-6, then Newton steps using
    d theta/dr = Q, kept inside the bracket. At most 200 iterations in total.
    An optional ``guess`` inside the branch starts Newton directly.
    """
    p = as_point(p)
    br = branch(p, k)
    lo_r, hi_r = br.r_image
    if not (lo_r < r < hi_r):
        raise DomainError(f"r={r} is outside the branch image {br.r_image}")
    region = classify(p)
    aux = None if region is RegionTag.ORIGIN else aux_roots(p)
    tol = 1e-12 * max(1.0, abs(r))
    tmin, tmax = br.theta_min, br.theta_max

    def F(t):
        return _meridian_raw(region, aux, t) - r

    def polish(t, val):
        # extra Newton steps once inside tolerance, keeping the best residual
        best_t, best_v = t, abs(val)
        for _ in range(3):
            nxt = t - val * q_value(p, t)
            if not (tmin < nxt < tmax) or nxt == t:
                break
            t = nxt
            val = F(t)
            if abs(val) < best_v:
                best_t, best_v = t, abs(val)
            else:
                break
        return best_t

    if guess is not None and tmin < guess < tmax:
        t = guess
        for _ in range(8):
            val = F(t)
            if abs(val) <= tol:
                return polish(t, val)
            nxt = t - val * q_value(p, t)
            if not (tmin < nxt < tmax):
                break
            t = nxt

    # bracket
    mid = tmax - 1.0 if tmin == -INF else 0.5 * (tmin + tmax)
    iters = 0
    if F(mid) >= 0:
        b = mid
        j = 1
        while True:
            a = mid - 2.0**j if tmin == -INF else tmin + (mid - tmin) / 2.0**j
            if a <= tmin:
                raise NumericalFailure("could not bracket the lower side")
            if F(a) < 0:
                break
            j += 1
            if j > 1100:
                raise NumericalFailure("could not bracket the lower side")
    else:
        a = mid
        j = 1
        while True:
            b = tmax - (tmax - mid) / 2.0**j
            if b >= tmax or j > 1100:
                raise NumericalFailure("could not bracket the upper side")
            if F(b) > 0:
                break
            j += 1

    while b - a > 1e-6 * max(1.0, abs(a), abs(b)):
        m = 0.5 * (a + b)
        if F(m) < 0:
            a = m
        else:
            b = m
        iters += 1
        if iters >= 200:
            raise NumericalFailure("bisection iteration cap reached")

    t = 0.5 * (a + b)
    while iters < 200:
        val = F(t)
        if abs(val) <= tol:
            return polish(t, val)
        if val < 0:
            a = t
        else:
            b = t
        nxt = t - val * q_value(p, t)
        if not (a < nxt < b):
            nxt = 0.5 * (a + b)
        if nxt == t or math.nextafter(a, b) >= b:
            # bracket collapsed to adjacent floats: best representable answer
            return t
        t = nxt
        iters += 1
    raise NumericalFailure(f"meridian_inverse did not converge for r={r}", partial=t)


# --- Normalization ---


def normalize(p) -> tuple[float, ParamPoint]:
    """Scale factor lambda and canonical point with c = lambda^2 c*, d = lambda^4 d*."""
    p = as_point(p)
    if p.d != 0:
        lam = abs(p.d) ** 0.25
        return lam, ParamPoint(p.c / lam**2, math.copysign(1.0, p.d))
    if p.c != 0:
        lam = math.sqrt(abs(p.c))
        return lam, ParamPoint(math.copysign(1.0, p.c), 0.0)
    return 1.0, ParamPoint(0.0, 0.0)
