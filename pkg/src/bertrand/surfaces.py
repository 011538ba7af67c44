"""Bertrand surfaces of revolution and first-type (constant curvature) surfaces.

Both surface kinds carry the metric dr^2 + f(r)^2 dphi^2 on a chart interval
of the meridian coordinate r. Second-type surfaces are parametrized by
(mu, c, d, k) and are most naturally described in the theta-chart

    ds^2 = dtheta^2 / Q^2 + dphi^2 / (mu^2 Q),   Q = theta^2 + c - d/theta^2,

with f = 1/(mu sqrt(Q(theta))). First-type surfaces f = xi f_c(r - r0) are
the d = 0 members written with xi = 1/mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline

from . import param_plane as pp
from .errors import DomainError
from .numerics import as_fraction, derivative

INF = math.inf


@dataclass(frozen=True)
class MetricSample:
    g_rr: float
    g_phiphi: float
    g_thetatheta: float
    g_phiphi_theta: float


class _Profile:
    """Shared behaviour of the two surface kinds (f, f', theta, Q)."""

    def _check(self, r: float) -> None:
        lo, hi = self.chart
        if not (lo < r < hi):
            raise DomainError(f"r={r} outside chart ({lo}, {hi})")

    def q(self, theta: float) -> float:
        return theta * theta + self.c - self.d / (theta * theta)

    def f_theta(self, theta: float) -> float:
        return 1.0 / (self.mu * math.sqrt(self.q(theta)))

    def fprime_theta(self, theta: float) -> float:
        return -(theta + self.d / theta**3) / (self.mu * math.sqrt(self.q(theta)))

    def Theta(self, r: float) -> float:
        """Antiderivative of 1/f^2 normalized as mu^2 theta(r)."""
        return self.mu**2 * self.theta(r)

    def metric(self, r: float) -> MetricSample:
        th = self.theta(r)
        qv = self.q(th)
        return MetricSample(1.0, self.f(r) ** 2, 1.0 / qv**2, 1.0 / (self.mu**2 * qv))

    @property
    def mu_fraction(self) -> Fraction | None:
        return as_fraction(self.mu, 64, 1e-12)


@dataclass(frozen=True)
class SurfaceSpec(_Profile):
    """Second-type Bertrand surface, f(r) = (1/mu) f_{c,d,k}(eta (r - r0))."""

    mu: float
    c: float
    d: float
    k: int = 1
    r0: float = 0.0
    eta: int = 1
    chart: tuple[float, float] | None = None
    _branch: pp.BranchInterval = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError("mu must be positive and finite")
        if self.eta not in (1, -1):
            raise DomainError("eta must be +1 or -1")
        for name in ("mu", "c", "d", "r0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        br = pp.branch(self.params, self.k)
        object.__setattr__(self, "_branch", br)
        lo, hi = br.r_image
        if self.eta == 1:
            full = (self.r0 + lo, self.r0 + hi)
        else:
            full = (self.r0 - hi, self.r0 - lo)
        if self.chart is None:
            object.__setattr__(self, "chart", full)
        else:
            a, b = (float(v) for v in self.chart)
            if not (full[0] <= a < b <= full[1]):
                raise DomainError(f"chart ({a}, {b}) is not inside the image {full}")
            object.__setattr__(self, "chart", (a, b))

    @property
    def params(self) -> pp.ParamPoint:
        return pp.ParamPoint(self.c, self.d)

    @property
    def region(self) -> pp.RegionTag:
        return pp.classify(self.params)

    @property
    def branch(self) -> pp.BranchInterval:
        return self._branch

    def theta_can(self, r: float, guess: float | None = None) -> float:
        self._check(r)
        return pp.meridian_inverse(self.params, self.k, self.eta * (r - self.r0), guess)

    def theta(self, r: float, guess: float | None = None) -> float:
        g = None if guess is None else self.eta * guess
        return self.eta * self.theta_can(r, g)

    def r_of_theta(self, theta: float) -> float:
        return self.r0 + self.eta * pp.meridian_coord(self.params, self.eta * theta)

    def f(self, r: float, guess: float | None = None) -> float:
        return self.f_theta(self.theta(r, guess))

    def fprime(self, r: float, guess: float | None = None) -> float:
        return self.fprime_theta(self.theta(r, guess))

    def pole_is_upper(self) -> bool:
        """True when the pole (f -> 0) is the upper end of the r-chart."""
        # k=1 pole at theta -> -inf (lower end of the canonical image), k=2 at theta -> 0
        lower_canonical = self.k == 1
        return lower_canonical != (self.eta == 1)

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "c": self.c,
            "d": self.d,
            "k": self.k,
            "r0": self.r0,
            "eta": self.eta,
            "chart": list(self.chart),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SurfaceSpec":
        chart = obj.get("chart")
        return cls(
            mu=float(obj["mu"]),
            c=float(obj["c"]),
            d=float(obj["d"]),
            k=int(obj.get("k", 1)),
            r0=float(obj.get("r0", 0.0)),
            eta=int(obj.get("eta", 1)),
            chart=None if chart is None else (float(chart[0]), float(chart[1])),
        )


@dataclass(frozen=True)
class FirstTypeSpec(_Profile):
    """First-type surface f(r) = sign * xi * f_c(r - r0), curvature constant 2c."""

    xi: float
    c: float
    r0: float = 0.0
    sign: int = 1
    chart: tuple[float, float] | None = None

    d = 0.0
    k = 1

    def __post_init__(self):
        if not (self.xi > 0 and math.isfinite(self.xi)):
            raise DomainError("xi must be positive and finite")
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        for name in ("xi", "c", "r0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.c > 0:
            quarter = 0.5 * math.pi / math.sqrt(self.c)
            full = (self.r0, self.r0 + quarter) if self.sign == 1 else (self.r0 - quarter, self.r0)
        else:
            full = (self.r0, INF) if self.sign == 1 else (-INF, self.r0)
        if self.chart is None:
            object.__setattr__(self, "chart", full)
            return
        a, b = (float(v) for v in self.chart)
        if not a < b:
            raise DomainError("empty chart")
        object.__setattr__(self, "chart", (a, b))
        # f > 0 and f' != 0 on the chart
        if self.c > 0:
            period = math.pi / math.sqrt(self.c)
            xs = (self.sign * (a - self.r0), self.sign * (b - self.r0))
            lo_x, hi_x = min(xs), max(xs)
            tol = 1e-12 * (period + abs(self.r0))  # the default chart round-trips through r0 +- quarter
            ok = (-tol <= lo_x and hi_x <= 0.5 * period + tol) or (0.5 * period - tol <= lo_x and hi_x <= period + tol)
        else:
            ok = full[0] <= a and b <= full[1]
        if not ok:
            raise DomainError(f"chart ({a}, {b}) violates f > 0, f' != 0")

    @property
    def mu(self) -> float:
        return 1.0 / self.xi

    @property
    def xi_fraction(self) -> Fraction | None:
        return as_fraction(self.xi, 64, 1e-12)

    @property
    def params(self) -> pp.ParamPoint:
        return pp.ParamPoint(self.c, 0.0)

    def f(self, r: float, guess: float | None = None) -> float:
        self._check(r)
        x = r - self.r0
        c = self.c
        if c == 0:
            return self.sign * self.xi * x
        if c > 0:
            a = math.sqrt(c)
            return self.sign * self.xi * math.sin(a * x) / a
        a = math.sqrt(-c)
        return self.sign * self.xi * math.sinh(a * x) / a

    def fprime(self, r: float, guess: float | None = None) -> float:
        self._check(r)
        x = r - self.r0
        c = self.c
        if c == 0:
            return self.sign * self.xi
        if c > 0:
            return self.sign * self.xi * math.cos(math.sqrt(c) * x)
        return self.sign * self.xi * math.cosh(math.sqrt(-c) * x)

    def theta(self, r: float, guess: float | None = None) -> float:
        self._check(r)
        x = r - self.r0
        c = self.c
        if c == 0:
            return -1.0 / x
        if c > 0:
            a = math.sqrt(c)
            return -a / math.tan(a * x)
        a = math.sqrt(-c)
        return -a / math.tanh(a * x)

    def r_of_theta(self, theta: float) -> float:
        c = self.c
        if c == 0:
            x = -1.0 / theta
        elif c > 0:
            a = math.sqrt(c)
            x = (0.5 * math.pi + math.atan(theta / a)) / a
            if self.sign == -1:
                x -= math.pi / a
        else:
            a = math.sqrt(-c)
            if abs(theta) <= a:
                raise DomainError("theta outside the first-type range")
            x = math.atanh(-a / theta) / a
        return self.r0 + x

    def pole_is_upper(self) -> bool:
        return self.sign == -1

    def to_json(self) -> dict:
        return {"xi": self.xi, "c": self.c, "r0": self.r0, "sign": self.sign, "chart": list(self.chart)}

    @classmethod
    def from_json(cls, obj: dict) -> "FirstTypeSpec":
        chart = obj.get("chart")
        return cls(
            xi=float(obj["xi"]),
            c=float(obj.get("c", 0.0)),
            r0=float(obj.get("r0", 0.0)),
            sign=int(obj.get("sign", 1)),
            chart=None if chart is None else (float(chart[0]), float(chart[1])),
        )


# --- Module-level operations ---


def f_of_r(s, r: float) -> float:
    return s.f(r)


def fprime_of_r(s, r: float) -> float:
    return s.fprime(r)


def first_type_f(s: FirstTypeSpec, r: float) -> float:
    return s.f(r)


def scalar_curvature(s, theta: float) -> float:
    """Scalar curvature R = 2(c - 6d/t^2 - 3cd/t^4 + 2d^2/t^6); independent of mu."""
    c, d = s.c, s.d
    if theta == 0:
        if d != 0:
            raise DomainError("curvature is undefined at theta = 0 when d != 0")
        return 2.0 * c
    if isinstance(s, SurfaceSpec):
        br = s.branch
        t = -abs(theta)
        if not (br.theta_min <= t <= br.theta_max):
            raise DomainError(f"theta={theta} outside the branch closure")
    t2 = theta * theta
    return 2.0 * (c - 6.0 * d / t2 - 3.0 * c * d / t2**2 + 2.0 * d * d / t2**3)


def _curvature_limit(c: float, d: float, theta: float) -> float:
    if theta == -INF:
        return 2.0 * c
    if theta == 0:
        return 2.0 * c if d == 0 else INF
    t2 = theta * theta
    return 2.0 * (c - 6.0 * d / t2 - 3.0 * c * d / t2**2 + 2.0 * d * d / t2**3)


def curvature_range(s) -> tuple[float, float]:
    """Values of R at the two theta-ends of the branch (pole side first)."""
    if isinstance(s, FirstTypeSpec):
        return (2.0 * s.c, 2.0 * s.c)
    br = s.branch
    return (_curvature_limit(s.c, s.d, br.theta_min), _curvature_limit(s.c, s.d, br.theta_max))


def _theta_range(s) -> tuple[float, float]:
    """Canonical (negative) theta-interval covered by the chart."""
    if isinstance(s, FirstTypeSpec):
        a, b = s.chart
        ends = []
        for r in (a, b):
            if r == s.r0 or not math.isfinite(r):
                if not math.isfinite(r):
                    ends.append(-math.sqrt(-s.c) if s.c < 0 else 0.0)
                else:
                    ends.append(-INF)
            else:
                x = r - s.r0
                if s.c == 0:
                    ends.append(-1.0 / abs(x))
                elif s.c > 0:
                    a_ = math.sqrt(s.c)
                    ends.append(-abs(a_ / math.tan(a_ * x)) if math.cos(a_ * x) != 0 else 0.0)
                else:
                    a_ = math.sqrt(-s.c)
                    ends.append(-abs(a_ / math.tanh(a_ * x)))
        return min(ends), max(ends)
    br = s.branch
    full = (s.r0 + br.r_image[0], s.r0 + br.r_image[1]) if s.eta == 1 else (
        s.r0 - br.r_image[1], s.r0 - br.r_image[0])
    ends = []
    for r, edge in zip(s.chart, full):
        if r == edge:
            ends.append(None)
        else:
            ends.append(pp.meridian_inverse(s.params, s.k, s.eta * (r - s.r0)))
    # map None to the branch endpoint reached at that side
    lo_side = br.theta_min if s.eta == 1 else br.theta_max
    hi_side = br.theta_max if s.eta == 1 else br.theta_min
    t1 = lo_side if ends[0] is None else ends[0]
    t2 = hi_side if ends[1] is None else ends[1]
    return min(t1, t2), max(t1, t2)


def _theta_grid(lo: float, hi: float, n: int = 2001) -> np.ndarray:
    if lo == -INF:
        ref = hi
        scale = max(1.0, abs(hi))
        pts = ref - scale * np.logspace(-12, 10, n)
        return pts[(pts > -INF) & (pts < hi)]
    s = 0.5 - 0.5 * np.cos(np.pi * np.linspace(0.0, 1.0, n)[1:-1])
    pts = lo + (hi - lo) * s
    extra = np.logspace(-12, -2, 41)
    pts = np.concatenate([pts, lo + (hi - lo) * extra, hi - (hi - lo) * extra])
    return pts[(pts > lo) & (pts < hi)]


def _slope_modulus(s, theta: float) -> float:
    """|f'| as a function of canonical theta, including endpoint limits."""
    c, d, mu = s.c, s.d, s.mu
    if theta == -INF:
        return 1.0 / mu
    if theta == 0:
        if d != 0:
            return INF
        return 1.0 / mu if c == 0 else 0.0
    qv = theta * theta + c - d / theta**2
    if qv <= 0:
        return INF
    return abs(theta + d / theta**3) / (mu * math.sqrt(qv))


def sup_slope(s) -> tuple[float, bool]:
    """sup |f'| over the chart and whether the sup is attained inside the chart."""
    lo, hi = _theta_range(s)
    grid = _theta_grid(lo, hi)
    interior = max((_slope_modulus(s, float(t)) for t in grid), default=0.0)
    edge = max(_slope_modulus(s, lo), _slope_modulus(s, hi))
    if edge > interior:
        return edge, False
    return interior, True


def realizable_in_R3(s, tol: float = 1e-9) -> str:
    """'yes' if |f'| < 1 on the chart, 'boundary' if |f'| reaches 1 there, else 'no'."""
    sup, attained = sup_slope(s)
    if sup > 1.0 + tol:
        return "no"
    if abs(sup - 1.0) <= tol and attained:
        return "boundary"
    return "yes"


def laplace_beltrami(s, h, r: float, N: int = 2) -> float:
    if N < 2:
        raise DomainError("dimension N must be at least 2")
    s._check(r)
    h1 = derivative(h, r, 1, 5)
    h2 = derivative(h, r, 2, 5)
    return h2 + (N - 1) * h1 * s.fprime(r) / s.f(r)


def project_to_canonical(s, theta: float, phi: float) -> tuple[float, float]:
    """Image of (theta, phi) on the canonical representative of the surface."""
    if s.d == 0:
        return theta, phi
    br = s.branch
    if not br.contains(-abs(theta)):
        raise DomainError(f"theta={theta} outside the branch")
    _, canon = pp.normalize(s.params)
    ts = theta / abs(s.d) ** 0.25
    if not pp.branch(canon, s.k).contains(-abs(ts)):
        raise DomainError("image left the canonical branch")
    return ts, phi


def canonical_surface(s: SurfaceSpec) -> SurfaceSpec:
    _, canon = pp.normalize(s.params)
    return SurfaceSpec(s.mu, canon.c, canon.d, s.k)


# --- Embedding detection ---


@dataclass(frozen=True)
class QuarticFit:
    zeta: float
    D: float
    mu: float
    rms: float


def _fit_at(zeta: float, z: np.ndarray, rho: np.ndarray) -> tuple[float, float, float]:
    w = z - zeta
    M = np.column_stack([w, w**-3])
    coef, *_ = np.linalg.lstsq(M, rho, rcond=None)
    resid = M @ coef - rho
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def fit_quartic_rho(z, rho) -> QuarticFit | None:
    """Fit rho(z) = ((z - zeta)^4 + D) / (mu^2 (z - zeta)^3) with zeta outside the samples.

    For fixed zeta the model a w + b w^-3 (w = z - zeta) is linear in (a, b), so
    zeta is scanned on a log grid on both sides of the sample range, refined by
    a bounded scalar search and polished by nonlinear least squares.
    Returns None when the slope a = 1/mu^2 is not positive.
    """
    z = np.asarray(z, dtype=float)
    rho = np.asarray(rho, dtype=float)
    zmin, zmax = float(z.min()), float(z.max())
    span = max(zmax - zmin, 1e-12)
    scale = float(np.sqrt(np.mean(rho**2))) or 1.0

    def loss(side: int, s: float) -> float:
        zeta = zmin - span * 10.0**s if side < 0 else zmax + span * 10.0**s
        return _fit_at(zeta, z, rho)[2]

    logs = np.linspace(-8, 5, 261)
    best = None
    for side in (-1, 1):
        vals = [loss(side, s) for s in logs]
        n = len(vals)
        # refine every local minimum of the grid; the true valley can be narrow
        minima = [i for i in range(n)
                  if vals[i] <= vals[max(i - 1, 0)] and vals[i] <= vals[min(i + 1, n - 1)]]
        for i in minima:
            a = logs[max(i - 1, 0)]
            b = logs[min(i + 1, n - 1)]
            res = optimize.minimize_scalar(lambda s: loss(side, s), bounds=(a, b), method="bounded",
                                           options={"xatol": 1e-12})
            cand = (float(res.fun), side, float(res.x))
            if best is None or cand[0] < best[0]:
                best = cand
    _, side, s = best
    zeta = zmin - span * 10.0**s if side < 0 else zmax + span * 10.0**s
    a, b, _ = _fit_at(zeta, z, rho)

    def residual(x):
        w = z - x[0]
        return (x[1] * w + x[2] * w**-3 - rho) / scale

    sol = optimize.least_squares(residual, [zeta, a, b], xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                 x_scale=[span, abs(a) or 1.0, abs(b) or 1.0])
    zeta2, a2, b2 = (float(v) for v in sol.x)
    if zmin <= zeta2 <= zmax:
        zeta2, a2, b2 = zeta, a, b
    w = z - zeta2
    rms = float(np.sqrt(np.mean((a2 * w + b2 * w**-3 - rho) ** 2))) / scale
    if not a2 > 0:
        return None
    return QuarticFit(zeta=zeta2, D=b2 / a2, mu=1.0 / math.sqrt(a2), rms=rms)


def _sample_derivatives(r: np.ndarray, f: np.ndarray):
    """First and second derivatives on a uniform grid (5-point, interior points)."""
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-9, atol=0):
        raise DomainError("samples must lie on a uniform grid")
    f1 = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    f2 = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    return r[2:-2], f[2:-2], f1, f2


def _first_type_from(r, f, f1, xi: float, c: float) -> FirstTypeSpec:
    sign = 1 if np.median(f1) > 0 else -1
    if c == 0 or abs(c) < 1e-9 * xi**2:
        c = 0.0
        r0s = r - f / f1
    elif c > 0:
        a = math.sqrt(c)
        x = np.arctan2(a * f * sign / xi, f1 * sign / xi) / a
        r0s = r - x
    else:
        a = math.sqrt(-c)
        x = np.arcsinh(sign * f * a / xi) / a
        r0s = r - x
    r0 = float(np.median(r0s))
    try:
        return FirstTypeSpec(xi, c, r0, sign)
    except DomainError:
        return FirstTypeSpec(xi, c, r0, sign, chart=(float(r[0]), float(r[-1])))


def detect_embedding(r_samples, f_samples, first_type_tol: float = 1e-6, fit_tol: float = 1e-6):
    """Recover the surface from samples of its profile f on a uniform grid.

    Returns a FirstTypeSpec when -f''f + f'^2 is a positive constant, a
    SurfaceSpec when rho = f'/f fits the quartic relation in z = -Theta, and
    None otherwise.
    """
    r = np.asarray(r_samples, dtype=float)
    f = np.asarray(f_samples, dtype=float)
    if r.ndim != 1 or r.shape != f.shape or r.size < 50:
        raise DomainError("need at least 50 matching samples")
    if np.any(f <= 0):
        raise DomainError("f must be positive")
    rr, ff, f1, f2 = _sample_derivatives(r, f)
    if np.any(f1 == 0) or np.any(np.diff(np.sign(f1)) != 0):
        raise DomainError("f' must not vanish on the sample interval")
    h = f1**2 - f2 * ff
    hm = float(np.mean(h))
    if hm > 0 and float(np.max(np.abs(h - hm))) < first_type_tol * hm:
        xi = math.sqrt(hm)
        c = float(np.mean(-f2 / ff))
        return _first_type_from(rr, ff, f1, xi, c)

    # z = -Theta up to an additive constant absorbed by zeta
    spline = CubicSpline(r, 1.0 / f**2).antiderivative()
    z = -spline(rr)
    rho = f1 / ff
    fit = fit_quartic_rho(z, rho)
    if fit is None or fit.rms > fit_tol:
        return None
    mu = fit.mu
    d = fit.D / mu**8
    theta_s = -(z - fit.zeta) / mu**2
    c = float(np.mean(1.0 / (mu * ff) ** 2 - theta_s**2 + d / theta_s**2))
    delta = c * c + 4 * d
    if d < 0 and abs(delta) <= 1e-6 * max(c * c, 4 * abs(d)):
        d = -c * c / 4.0  # snap onto the confluent line
    eta = 1 if np.median(theta_s) < 0 else -1
    p = pp.ParamPoint(c, d)
    t_mid = -abs(float(np.median(theta_s)))
    k = pp.branch_of(p, t_mid).k
    r0s = []
    for ri, ti in zip(rr[:: max(1, len(rr) // 200)], theta_s[:: max(1, len(rr) // 200)]):
        tc = -abs(float(ti))
        try:
            r0s.append(ri - eta * pp.meridian_coord(p, tc))
        except DomainError:
            continue
    if not r0s:
        return None
    return SurfaceSpec(mu, c, d, k, r0=float(np.median(r0s)), eta=eta)
