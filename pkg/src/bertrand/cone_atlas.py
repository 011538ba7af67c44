"""Developing map of the cone ds^2 = dr^2 + xi^2 r^2 dphi^2 onto plane sectors.

A point (r, phi) on sheet n = floor(phi / 2pi) lands at planar polar
coordinates (r, alpha) with alpha = xi (phi mod 2pi) + 2 pi xi n.  For
rational xi = p/q the sheets repeat with period q.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .dynamics import OrbitState, apsidal_angle, integrate, radial_period
from .errors import DomainError
from .numerics import as_fraction, parse_ratio
from .potentials import Potential
from .surfaces import FirstTypeSpec

TWO_PI = 2.0 * math.pi
SHEET_BUDGET = 64


@dataclass(frozen=True)
class ConeSpec:
    xi: float
    ratio: Fraction | None = None

    def __post_init__(self):
        if not (self.xi > 0 and math.isfinite(self.xi)):
            raise DomainError("xi must be positive and finite")
        if self.ratio is None:
            object.__setattr__(self, "ratio", as_fraction(self.xi, SHEET_BUDGET, 1e-12))

    @classmethod
    def parse(cls, text) -> "ConeSpec":
        val, frac = parse_ratio(text)
        return cls(val, frac)

    @property
    def rational(self) -> bool:
        return self.ratio is not None

    def surface(self) -> FirstTypeSpec:
        return FirstTypeSpec(self.xi, 0.0)

    def to_json(self) -> dict:
        return {"xi": self.xi, "ratio": None if self.ratio is None else str(self.ratio)}

    @classmethod
    def from_json(cls, obj: dict) -> "ConeSpec":
        if obj.get("ratio"):
            return cls.parse(obj["ratio"])
        return cls(float(obj["xi"]))


@dataclass(frozen=True)
class SectorPoint:
    sheet: int
    r: float
    alpha: float
    x: float
    y: float


def develop(cone: ConeSpec, traj) -> list[SectorPoint]:
    """Map (r, unwrapped phi) pairs to sector points; sheets come from unwrapped phi."""
    out = []
    q = cone.ratio.denominator if cone.rational else None
    for r, phi in traj:
        r, phi = float(r), float(phi)
        if not r > 0:
            raise DomainError("r must be positive on the cone")
        n = math.floor(phi / TWO_PI)
        base = phi - n * TWO_PI
        sheet = n % q if q is not None else n
        alpha = cone.xi * (base + TWO_PI * sheet)
        out.append(SectorPoint(sheet, r, alpha, r * math.cos(alpha), r * math.sin(alpha)))
    return out


@dataclass(frozen=True)
class Covering:
    q: int | None
    p: int | None

    @property
    def infinite(self) -> bool:
        return self.q is None

    def to_json(self) -> dict:
        return {"q": self.q, "p": self.p, "infinite": self.infinite}


def covering_order(cone: ConeSpec) -> Covering:
    """q sheets of the cone close up; they cover the plane p times."""
    if not cone.rational:
        return Covering(None, None)
    return Covering(cone.ratio.denominator, cone.ratio.numerator)


def cone_distance(cone: ConeSpec, r0: float, phi0: float, r1: float, phi1: float) -> float:
    """Intrinsic distance between two points of the cone."""
    dphi = math.remainder(phi1 - phi0, TWO_PI)
    ang = cone.xi * abs(dphi)
    if ang >= math.pi:
        return r0 + r1
    return math.sqrt((r1 - r0) ** 2 + 4.0 * r0 * r1 * math.sin(0.5 * ang) ** 2)


def phase_gap(cone: ConeSpec, start, end) -> float:
    """Distance between two states (r, r', phi, phi') on the cone: position plus velocity."""
    r0, v0, p0, w0 = start
    r1, v1, p1, w1 = end
    dpos = cone_distance(cone, r0, p0, r1, p1)
    # velocity components in the orthonormal (radial, angular) frame
    dvel = math.hypot(v1 - v0, cone.xi * (r1 * w1 - r0 * w0))
    return math.hypot(dpos, dvel)


@dataclass
class ClosureDemo:
    points: list
    gap: float
    closed: bool
    verdict: str
    phi_span: float
    Phi: float
    trajectory: object


def closure_span(cone: ConeSpec, kind: int) -> float:
    """phi advance after which an orbit of potential index ``kind`` closes."""
    if not cone.rational:
        return TWO_PI * SHEET_BUDGET
    q = cone.ratio.denominator
    return TWO_PI * q / gcd(q, kind)


def closure_demo(cone: ConeSpec, kind: int, E: float, K: float, gap_tol: float = 1e-5,
                 tol: float = 1e-11, samples_per_turn: int = 200) -> ClosureDemo:
    s = cone.surface()
    p = Potential(kind)
    rep = apsidal_angle(s, p, E, K)
    span = closure_span(cone, kind)
    # bound the step so the polyline resolves each radial oscillation
    t_osc = radial_period(s, p, E, K)
    traj = integrate(s, p, OrbitState(0.0, rep.r_peri, 0.0, 0.0), K, t_max=1e9, tol=tol,
                     phi_target=span, max_step=t_osc / samples_per_turn)
    if traj.stop_state is None:
        raise DomainError(f"orbit stopped before the phi span ({traj.status})")
    r_end, v_end, phi_end = (float(v) for v in traj.stop_state[:3])
    f0, f1 = s.f(rep.r_peri), s.f(r_end)
    gap = phase_gap(cone, (rep.r_peri, 0.0, 0.0, K / f0**2), (r_end, v_end, phi_end, K / f1**2))
    closed = gap < gap_tol
    if closed:
        verdict = "closed"
    else:
        verdict = "not closed" if cone.rational else "not closed within sheet budget"
    pts = develop(cone, zip(traj.r, traj.phi))
    return ClosureDemo(pts, gap, closed, verdict, span, rep.Phi, traj)


# --- output ---


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_csv(points, stream) -> None:
    stream.write("sheet,r,alpha,x,y\n")
    for pt in points:
        stream.write(f"{pt.sheet},{_fmt(pt.r)},{_fmt(pt.alpha)},{_fmt(pt.x)},{_fmt(pt.y)}\n")


def to_svg(points, cone: ConeSpec | None = None, size: int = 800) -> str:
    """Polyline of the development with sector boundaries as light guides."""
    xs = np.array([p.x for p in points])
    ys = np.array([-p.y for p in points])
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = float(ys.min()), float(ys.max())
    if cone is not None:
        xmin, xmax = min(xmin, 0.0), max(xmax, 0.0)
        ymin, ymax = min(ymin, 0.0), max(ymax, 0.0)
    w = max(xmax - xmin, 1e-12)
    h = max(ymax - ymin, 1e-12)
    mx, my = 0.05 * w, 0.05 * h
    vb = (xmin - mx, ymin - my, w + 2 * mx, h + 2 * my)
    stroke = 0.002 * max(vb[2], vb[3])
    buf = io.StringIO()
    buf.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    buf.write(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
              f'viewBox="{_fmt(vb[0])} {_fmt(vb[1])} {_fmt(vb[2])} {_fmt(vb[3])}">\n')
    if cone is not None:
        R = float(np.max(np.hypot(xs, ys)))
        n_rays = cone.ratio.denominator if cone.rational else SHEET_BUDGET
        n_rays = min(n_rays, SHEET_BUDGET)
        for n in range(n_rays):
            a = TWO_PI * cone.xi * n
            buf.write(f'<line x1="0" y1="0" x2="{_fmt(R * math.cos(a))}" y2="{_fmt(-R * math.sin(a))}" '
                      f'stroke="#cccccc" stroke-width="{_fmt(stroke)}"/>\n')
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    buf.write(f'<polyline fill="none" stroke="#1f4e99" stroke-width="{_fmt(stroke)}" points="{pts}"/>\n')
    buf.write("</svg>\n")
    return buf.getvalue()
