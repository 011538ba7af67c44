"""Closing central potentials and the effective potential.

The gravitational potential V1 = -A|theta| + B lives on d = 0 surfaces only;
the oscillator V2 = A/(2 theta^2) + B lives on every Bertrand surface with
A (theta^4 + d) > 0 along the chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConstraintError, DomainError
from .surfaces import FirstTypeSpec, _theta_grid, _theta_range

KIND_NAMES = {1: "grav", 2: "osc"}
KIND_CODES = {"grav": 1, "osc": 2, "1": 1, "2": 2}


@dataclass(frozen=True)
class Potential:
    """Closing potential of index ``kind`` (1 gravitational, 2 oscillator).

    ``A=None`` selects the default amplitude for the host surface: +1, or -1
    on an additional (k=2) branch for the oscillator.
    """

    kind: int
    A: float | None = None
    B: float = 0.0

    def __post_init__(self):
        if self.kind not in (1, 2):
            raise DomainError("potential kind must be 1 (grav) or 2 (osc)")
        if self.A is not None and (self.A == 0 or not math.isfinite(self.A)):
            raise ConstraintError("A must be finite and nonzero")

    def to_json(self) -> dict:
        return {"kind": KIND_NAMES[self.kind], "A": self.A, "B": self.B}

    @classmethod
    def from_json(cls, obj: dict) -> "Potential":
        kind = KIND_CODES[str(obj["kind"])]
        A = obj.get("A")
        return cls(kind, None if A is None else float(A), float(obj.get("B", 0.0)))


def _default_amplitude(s, kind: int) -> float:
    if kind == 2 and s.d < 0 and s.k == 2:
        return -1.0
    return 1.0


@dataclass(frozen=True)
class BoundPotential:
    """A potential validated against its host surface."""

    surface: object
    kind: int
    A: float
    B: float

    # values as functions of theta
    def V_theta(self, theta: float) -> float:
        if self.kind == 1:
            return -self.A * abs(theta) + self.B
        return self.A / (2.0 * theta * theta) + self.B

    def dV_theta(self, theta: float) -> float:
        if self.kind == 1:
            return -self.A * math.copysign(1.0, theta)
        return -self.A / theta**3

    def V(self, r: float, guess: float | None = None) -> float:
        return self.V_theta(self.surface.theta(r, guess))

    def dV(self, r: float, guess: float | None = None) -> float:
        th = self.surface.theta(r, guess)
        return self.dV_theta(th) * self.surface.q(th)

    @property
    def potential(self) -> Potential:
        return Potential(self.kind, self.A, self.B)


def _check_constraints(s, kind: int, A: float, n: int = 1000) -> None:
    if kind == 1:
        if s.d != 0:
            raise ConstraintError("the gravitational potential requires d = 0")
        if not A > 0:
            raise ConstraintError("the gravitational potential requires A > 0")
        return
    lo, hi = _theta_range(s)
    grid = _theta_grid(lo, hi, n)
    vals = A * (grid**4 + s.d)
    if not np.all(vals > 0):
        raise ConstraintError("A (theta^4 + d) must be positive on the chart")
    # endpoint limits may touch zero at an excluded equator but must not change sign
    for t in (lo, hi):
        lim = math.inf if t == -math.inf else t**4 + s.d
        if A * lim < -1e-12 * max(1.0, abs(s.d)):
            raise ConstraintError("A (theta^4 + d) changes sign at a chart end")


@lru_cache(maxsize=256)
def bind(s, p: Potential) -> BoundPotential:
    """Attach ``p`` to surface ``s``, validating the sign constraints eagerly."""
    A = _default_amplitude(s, p.kind) if p.A is None else p.A
    _check_constraints(s, p.kind, A)
    return BoundPotential(s, p.kind, A, p.B)


# --- Operations on (surface, potential) pairs ---


def potential_value(s, p: Potential, r: float) -> float:
    return bind(s, p).V(r)


def potential_derivative(s, p: Potential, r: float) -> float:
    return bind(s, p).dV(r)


def effective_potential(s, p: Potential, K: float, r: float) -> float:
    if K == 0:
        raise DomainError("K = 0 orbits are meridian lines; no effective potential")
    return bind(s, p).V(r) + K * K / (2.0 * s.f(r) ** 2)


def circular_momentum(s, p: Potential, r: float) -> tuple[float, float]:
    """The pair (+K, -K) for which the parallel through r is a circular orbit."""
    bp = bind(s, p)
    th = s.theta(r)
    denom = abs(th) ** (bp.kind**2) + s.d
    rad = bp.A / denom if denom != 0 else -1.0
    if not rad > 0:
        raise ConstraintError("no circular orbit: radicand is not positive")
    K = math.sqrt(rad) / s.mu
    return K, -K


@dataclass(frozen=True)
class AttractingCenter:
    r: float
    total_angle: float
    V_inf: float


def attracting_center(s, p: Potential) -> AttractingCenter:
    """Pole of the chart (where f -> 0), its total angle, and inf V attained there."""
    bp = bind(s, p)
    r_pole = s.chart[1] if s.pole_is_upper() else s.chart[0]
    if isinstance(s, FirstTypeSpec):
        angle = 2.0 * math.pi * s.xi
        theta_pole = -math.inf
    elif s.k == 1:
        angle = 2.0 * math.pi / s.mu
        theta_pole = -math.inf
    else:
        angle = math.inf
        theta_pole = 0.0
    if bp.kind == 1 or theta_pole == 0.0:
        v_inf = -math.inf
    else:
        v_inf = bp.B
    # inf V over the chart must be the pole limit
    lo, hi = _theta_range(s)
    grid = _theta_grid(lo, hi, 200)
    interior = min(bp.V_theta(float(t)) for t in grid)
    if interior < v_inf:
        raise AssertionError("inf V is not attained at the pole")
    return AttractingCenter(r_pole, angle, v_inf)
