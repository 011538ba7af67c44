"""Orbits of central potentials on surfaces of revolution.

Equations of motion in the meridian chart (K = phi' f^2 eliminated):

    r'' = K^2 f'/f^3 - V'(r),   phi' = K / f^2.

In the theta-chart, with metric dtheta^2/Q^2 + dphi^2/(mu^2 Q):

    theta'' = theta'^2 Q'/Q - K^2 mu^2 Q^2 Q'/2 - Q^2 dV/dtheta,   phi' = K mu^2 Q.

Apsidal angles come from the quadrature
    Phi = 2 int_{r1}^{r2} (K/f^2) dr / sqrt(2 (E - U_eff(r))),
with r = r1 + (r2 - r1) sin^2 u removing the endpoint singularities.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate as sint
from scipy import optimize

from . import param_plane as pp
from .errors import ConstraintError, DomainError, NumericalFailure
from .numerics import as_fraction, derivative
from .potentials import BoundPotential, Potential, bind
from .surfaces import FirstTypeSpec, SurfaceSpec, _theta_range

TWO_PI = 2.0 * math.pi


# --- Fields ---


@dataclass(frozen=True)
class CentralField:
    """User-supplied central potential.

    Either ``V_r`` (a function of r, derivative optional) or ``V_th`` (a
    function of the surface theta) must be given; ``surface`` is required for
    the theta form.
    """

    V_r: Callable | None = None
    dV_r: Callable | None = None
    V_th: Callable | None = None
    dV_th: Callable | None = None
    surface: object = None

    def V(self, r, guess=None):
        if self.V_r is not None:
            return self.V_r(r)
        return self.V_th(self.surface.theta(r, guess))

    def dV(self, r, guess=None):
        if self.V_r is not None:
            if self.dV_r is not None:
                return self.dV_r(r)
            return derivative(self.V_r, r, 1, 5)
        th = self.surface.theta(r, guess)
        return self.dV_theta(th) * self.surface.q(th)

    def V_theta(self, theta):
        if self.V_th is None:
            raise DomainError("field has no theta form")
        return self.V_th(theta)

    def dV_theta(self, theta):
        if self.V_th is None:
            raise DomainError("field has no theta form")
        if self.dV_th is not None:
            return self.dV_th(theta)
        return derivative(self.V_th, theta, 1, 5)

    @classmethod
    def zero(cls) -> "CentralField":
        return cls(V_r=lambda r: 0.0, dV_r=lambda r: 0.0, V_th=lambda t: 0.0, dV_th=lambda t: 0.0)

    @classmethod
    def from_theta(cls, surface, V_th, dV_th=None) -> "CentralField":
        return cls(V_th=V_th, dV_th=dV_th, surface=surface)


def as_field(s, V):
    if V is None:
        return CentralField.zero()
    if isinstance(V, Potential):
        return bind(s, V)
    if isinstance(V, (BoundPotential, CentralField)):
        return V
    if callable(V):
        return CentralField(V_r=V)
    raise DomainError(f"unsupported potential {V!r}")


# --- States and trajectories ---


@dataclass(frozen=True)
class OrbitState:
    t: float
    r: float
    pr: float
    phi: float


@dataclass(frozen=True)
class OrbitConstants:
    E: float
    K: float
    E1: float


@dataclass
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    pr: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    E: np.ndarray
    K: float
    status: str = "ok"
    chart: str = "r"
    minima_t: list = field(default_factory=list)
    minima_phi: list = field(default_factory=list)
    stop_t: float | None = None
    stop_state: np.ndarray | None = None

    def energy_drift(self) -> float:
        e0 = self.E[0]
        return float(np.max(np.abs(self.E - e0)) / max(1.0, abs(e0)))

    def to_csv(self, stream) -> None:
        stream.write("t,r,phi,theta,E,K\n")
        for row in zip(self.t, self.r, self.phi, self.theta, self.E):
            vals = list(row) + [self.K]
            stream.write(",".join(format(float(v), ".17g") for v in vals) + "\n")


def _energy_r(s, field_, K, r, pr, guess=None):
    th = s.theta(r, guess)
    return 0.5 * pr * pr + 0.5 * K * K / s.f_theta(th) ** 2 + field_.V(r, th), th


def energy(s, V, state: OrbitState, K: float) -> float:
    return _energy_r(s, as_field(s, V), K, state.r, state.pr)[0]


def _run(solver_rhs, y0, t_max, tol, record, stop_check, detect_index, phi_index, phi_target,
         max_step=math.inf):
    """Step a DOP853 solver, recording steps and locating minima of y[detect_index]."""
    solver = sint.DOP853(solver_rhs, 0.0, y0, t_max, rtol=tol, atol=tol * 1e-2, max_step=max_step)
    status = "ok"
    minima = []
    stop = None
    record(0.0, np.array(y0, dtype=float))
    while solver.status == "running":
        t_old, y_old = solver.t, solver.y.copy()
        try:
            solver.step()
        except DomainError:
            status = "boundary"
            break
        if solver.status == "failed":
            raise NumericalFailure("step size underflow")
        t_new, y_new = solver.t, solver.y.copy()
        dense = None
        # minimum of the radial coordinate: velocity crosses from - to +
        v0, v1 = y_old[detect_index], y_new[detect_index]
        if v0 < 0 <= v1 and t_new > t_old:
            dense = solver.dense_output()
            tc = optimize.brentq(lambda tt: dense(tt)[detect_index], t_old, t_new, xtol=1e-15, rtol=1e-15)
            minima.append((tc, dense(tc)))
        if phi_target is not None:
            p0, p1 = y_old[phi_index] - phi_target, y_new[phi_index] - phi_target
            if p0 * p1 <= 0 and p0 != p1:
                dense = dense or solver.dense_output()
                tc = optimize.brentq(lambda tt: dense(tt)[phi_index] - phi_target, t_old, t_new,
                                     xtol=1e-15, rtol=1e-15)
                stop = (tc, dense(tc))
                record(tc, stop[1])
                status = "target"
                break
        try:
            record(t_new, y_new)
        except DomainError:
            status = "boundary"
            break
        if stop_check(y_new):
            status = "boundary"
            break
    return status, minima, stop


def _has_theta_form(field_) -> bool:
    return isinstance(field_, BoundPotential) or (isinstance(field_, CentralField) and field_.V_th is not None)


def _V_at(field_, s, r, th):
    return field_.V_theta(th) if _has_theta_form(field_) else field_.V(r)


def _dV_at(field_, s, r, th):
    return field_.dV_theta(th) * s.q(th) if _has_theta_form(field_) else field_.dV(r)


def integrate(s, V, init: OrbitState, K: float, t_max: float, tol: float = 1e-10,
              phi_target: float | None = None, max_step: float = math.inf) -> Trajectory:
    """Integrate the reduced (r, r', phi) system with K substituted exactly.

    On SurfaceSpec charts theta is carried along as a fourth state variable
    (dtheta/dt = Q(theta) r'), which avoids inverting r(theta) at every stage.
    """
    field_ = as_field(s, V)
    lo, hi = s.chart
    s._check(init.r)
    K2 = K * K
    carry = isinstance(s, SurfaceSpec)

    def rhs(t, y):
        r, pr = y[0], y[1]
        if carry:
            th = y[3]
            if s.q(th) <= 0 or (th > 0) != (s.eta < 0):
                raise DomainError("left the chart")
        else:
            th = s.theta(r)
        f = s.f_theta(th)
        fp = s.fprime_theta(th)
        acc = K2 * fp / f**3 - _dV_at(field_, s, r, th)
        out = [pr, acc, K / (f * f)]
        if carry:
            out.append(s.q(th) * pr)
        return np.array(out)

    ts, rs, prs, phis, ths, Es = [], [], [], [], [], []

    def record(t, y):
        r, pr = y[0], y[1]
        th = y[3] if carry else s.theta(r)
        ts.append(t)
        rs.append(r)
        prs.append(pr)
        phis.append(y[2])
        ths.append(th)
        Es.append(0.5 * pr * pr + 0.5 * K2 / s.f_theta(th) ** 2 + _V_at(field_, s, r, th))

    margin = 1e-12

    def stop_check(y):
        return not (lo + margin * max(1, abs(lo) if math.isfinite(lo) else 1) < y[0]
                    < hi - margin * max(1, abs(hi) if math.isfinite(hi) else 1))

    y0 = [init.r, init.pr, init.phi]
    if carry:
        y0.append(s.theta(init.r))
    try:
        status, minima, stop = _run(rhs, y0, t_max, tol, record, stop_check, 1, 2, phi_target,
                                    max_step)
    except NumericalFailure as exc:
        exc.partial = Trajectory(np.array(ts) + init.t, np.array(rs), np.array(prs), np.array(phis),
                                 np.array(ths), np.array(Es), K, "failed", "r")
        raise
    traj = Trajectory(np.array(ts) + init.t, np.array(rs), np.array(prs), np.array(phis), np.array(ths),
                      np.array(Es), K, status, "r")
    traj.minima_t = [m[0] + init.t for m in minima]
    traj.minima_phi = [float(m[1][2]) for m in minima]
    if stop is not None:
        traj.stop_t = stop[0] + init.t
        traj.stop_state = stop[1]
    return traj


def theta_chart(s) -> tuple[float, float]:
    """theta-interval of the surface extended across equators (Q > 0, Q' = 0 allowed)."""
    if isinstance(s, SurfaceSpec) and s.region in (pp.RegionTag.OMEGA1, pp.RegionTag.OMEGA4,
                                                   pp.RegionTag.L4):
        lo, hi = -math.inf, 0.0
    else:
        lo, hi = _theta_range(s)
    sgn = -s.eta if isinstance(s, SurfaceSpec) else -s.sign
    return (lo, hi) if sgn < 0 else (-hi, -lo)


def integrate_theta_chart(s, V, init: OrbitState, K: float, t_max: float, tol: float = 1e-10,
                          phi_target: float | None = None, max_step: float = math.inf) -> Trajectory:
    """Integrate in (theta, theta', phi); ``init.r`` and ``init.pr`` hold theta and theta'."""
    field_ = as_field(s, V)
    lo, hi = theta_chart(s)
    if not lo < init.r < hi:
        raise DomainError("initial theta outside the theta-chart")
    mu2 = s.mu**2
    d = s.d
    K2 = K * K

    def rhs(t, y):
        th, pth, _ = y
        if not lo < th < hi or th == 0:
            raise DomainError("left the theta-chart")
        q = s.q(th)
        if q <= 0:
            raise DomainError("left the theta-chart")
        qp = 2.0 * th + 2.0 * d / th**3
        acc = pth * pth * qp / q - 0.5 * K2 * mu2 * q * q * qp - q * q * field_.dV_theta(th)
        return np.array([pth, acc, K * mu2 * q])

    ts, ths, pths, phis, Es = [], [], [], [], []

    def record(t, y):
        th, pth = y[0], y[1]
        q = s.q(th)
        ts.append(t)
        ths.append(th)
        pths.append(pth)
        phis.append(y[2])
        Es.append(0.5 * pth * pth / (q * q) + 0.5 * K2 * mu2 * q + field_.V_theta(th))

    def stop_check(y):
        return not lo < y[0] < hi

    try:
        status, minima, stop = _run(rhs, [init.r, init.pr, init.phi], t_max, tol, record, stop_check, 1, 2,
                                    phi_target, max_step)
    except NumericalFailure as exc:
        th = np.array(ths)
        exc.partial = Trajectory(np.array(ts) + init.t, th, np.array(pths), np.array(phis), th, np.array(Es),
                                 K, "failed", "theta")
        raise
    th = np.array(ths)
    traj = Trajectory(np.array(ts) + init.t, th, np.array(pths), np.array(phis), th, np.array(Es), K,
                      status, "theta")
    traj.minima_t = [m[0] + init.t for m in minima]
    traj.minima_phi = [float(m[1][2]) for m in minima]
    if stop is not None:
        traj.stop_t = stop[0] + init.t
        traj.stop_state = stop[1]
    return traj


# --- Closed-form orbits ---

FAMILIES = ("grav-first-type", "osc-first-type", "osc-second-type")


@dataclass(frozen=True)
class ClosedFormOrbit:
    family: str
    sigma: int  # sign of theta on the chart
    scale: float  # |theta| scale (grav) or theta^2 scale (osc)
    ecc: float
    freq: float
    phi0: float
    Phi: float
    E: float
    K: float
    E1: float
    bounded: bool

    def theta(self, phi):
        if not self.bounded:
            raise DomainError("unbounded limit orbit has no periodic evaluator")
        s = np.sin(self.freq * (np.asarray(phi, dtype=float) - self.phi0))
        if self.family == "grav-first-type":
            return self.sigma * self.scale * (1.0 + self.ecc * s)
        return self.sigma * np.sqrt(self.scale * (1.0 + self.ecc * s))

    def theta_range(self) -> tuple[float, float]:
        if self.family == "grav-first-type":
            a, b = self.scale * (1 - self.ecc), self.scale * (1 + self.ecc)
        else:
            a, b = math.sqrt(self.scale * (1 - self.ecc)), math.sqrt(self.scale * (1 + self.ecc))
        vals = sorted((self.sigma * a, self.sigma * b))
        return vals[0], vals[1]


def _theta_sign(s) -> int:
    return -s.eta if isinstance(s, SurfaceSpec) else -s.sign


def closed_form_orbit(s, p: Potential, E: float, K: float, phi0: float = 0.0) -> ClosedFormOrbit:
    if K == 0:
        raise DomainError("K = 0 orbits are meridian lines")
    bp = bind(s, p)
    mu = s.mu
    xi = 1.0 / mu
    A, B = bp.A, bp.B
    E1 = E - B - mu * mu * K * K * s.c / 2.0
    sigma = _theta_sign(s)
    if bp.kind == 1:
        family = FAMILIES[0]
        scale = xi * xi * A / (K * K)
        e2 = 1.0 + 2.0 * E1 * K * K / (xi * xi * A * A)
        freq, Phi = xi, TWO_PI / xi
    else:
        if not E1 > 0:
            raise DomainError("no real orbit: shifted energy must be positive")
        if s.d == 0:
            family = FAMILIES[1]
            scale = xi * xi * E1 / (K * K)
            e2 = 1.0 - A * K * K / (xi * xi * E1 * E1)
            freq, Phi = 2.0 * xi, math.pi / xi
        else:
            family = FAMILIES[2]
            scale = E1 / (mu * mu * K * K)
            e2 = 1.0 - (mu * mu * K * K / (E1 * E1)) * (A - mu * mu * K * K * s.d)
            freq, Phi = 2.0 / mu, math.pi * mu
    if e2 < 0:
        if e2 > -1e-12:
            e2 = 0.0
        else:
            raise DomainError("no real orbit: energy below the circular minimum")
    ecc = math.sqrt(e2)
    orbit = ClosedFormOrbit(family, sigma, scale, ecc, freq, phi0, Phi, E, K, E1, ecc < 1.0)
    if orbit.bounded:
        tlo, thi = orbit.theta_range()
        clo, chi = theta_chart(s)
        if not (clo < tlo and thi < chi):
            raise DomainError("closed-form orbit leaves the chart")
    return orbit


def residual_check(orbit: ClosedFormOrbit, s, p: Potential, K: float, n: int = 200) -> float:
    """Relative residual of K^2 (z'' + rho(z)) = Psi(z) along the orbit, z = -Theta."""
    bp = bind(s, p)
    mu2 = s.mu**2
    # z(phi) turns on the angular scale sqrt(1 - e)/freq near an eccentric pericenter
    h = 1e-2 * min(1.0, math.sqrt(max(1.0 - orbit.ecc, 1e-12))) / orbit.freq
    phis = orbit.phi0 + np.linspace(0.0, orbit.Phi, n, endpoint=False)
    worst = 0.0
    scale = 0.0

    def z_of(ph):
        return -mu2 * float(orbit.theta(ph))

    res = []
    for ph in phis:
        zpp = derivative(z_of, float(ph), 2, 5, h)
        th = float(orbit.theta(ph))
        r = s.r_of_theta(th)
        f = s.f(r)
        rho = s.fprime(r) / f
        psi = f * f * bp.dV(r)
        res.append(K * K * (zpp + rho) - psi)
        scale = max(scale, abs(K * K * zpp), abs(K * K * rho), abs(psi))
    worst = max(abs(v) for v in res)
    return worst / scale if scale > 0 else worst


# --- Apsidal angle ---


@dataclass(frozen=True)
class ApsidalReport:
    r_peri: float
    r_apo: float
    Phi: float
    rational: str | None
    closed: bool

    def to_json(self) -> dict:
        return {"r_peri": self.r_peri, "r_apo": self.r_apo, "Phi": self.Phi,
                "rational": self.rational, "closed": self.closed}


def _r_grid(s, n: int = 400) -> np.ndarray:
    lo, hi = s.chart
    if math.isfinite(lo) and math.isfinite(hi):
        u = np.linspace(0.0, 1.0, n + 2)[1:-1]
        pts = lo + (hi - lo) * (0.5 - 0.5 * np.cos(np.pi * u))
        ext = np.logspace(-9, -3, 30)
        pts = np.concatenate([lo + (hi - lo) * ext, pts, hi - (hi - lo) * ext[::-1]])
    elif math.isfinite(lo):
        pts = lo + np.logspace(-6, 4, n)
    else:
        pts = hi - np.logspace(-6, 4, n)[::-1]
    return pts[(pts > lo) & (pts < hi)]


class _Well:
    """Effective potential U = V + K^2/(2 f^2) with warm-started theta lookups."""

    def __init__(self, s, field_, K):
        self.s, self.field, self.K2 = s, field_, K * K
        self.guess = None

    def _theta(self, r):
        th = self.s.theta(r, self.guess)
        self.guess = th
        return th

    def U(self, r):
        th = self._theta(r)
        return _V_at(self.field, self.s, r, th) + 0.5 * self.K2 / self.s.f_theta(th) ** 2

    def dU(self, r):
        th = self._theta(r)
        f = self.s.f_theta(th)
        return _dV_at(self.field, self.s, r, th) - self.K2 * self.s.fprime_theta(th) / f**3

    def inv_f2(self, r):
        th = self._theta(r)
        return 1.0 / self.s.f_theta(th) ** 2


def turning_points(s, V, E: float, K: float, r_guess: float | None = None) -> tuple[float, float]:
    field_ = as_field(s, V)
    well = _Well(s, field_, K)
    grid = _r_grid(s)
    vals = []
    for r in grid:
        try:
            vals.append(well.U(float(r)))
        except (DomainError, NumericalFailure, ZeroDivisionError, ValueError):
            vals.append(math.inf)
    vals = np.array(vals)
    if r_guess is not None:
        i = int(np.argmin(np.abs(grid - r_guess)))
        # descend to the local minimum of the grid
        while True:
            j = i
            if i > 0 and vals[i - 1] < vals[j]:
                j = i - 1
            if i < len(grid) - 1 and vals[i + 1] < vals[j]:
                j = i + 1
            if j == i:
                break
            i = j
    else:
        i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(well.U, bounds=(a, b), method="bounded", options={"xatol": 1e-13})
    r_min, u_min = float(res.x), float(res.fun)
    if not u_min < E:
        raise DomainError(f"E={E} is not above the well minimum {u_min}")

    def g(r):
        return well.U(r) - E

    j = i
    while j >= 0 and not (grid[j] < r_min and E <= vals[j] < math.inf):
        j -= 1
    if j < 0:
        raise DomainError("orbit is not bounded on the inner side")
    r1 = optimize.brentq(g, grid[j], r_min, xtol=1e-15, rtol=1e-15, maxiter=500)
    j = i
    while j < len(grid) and not (grid[j] > r_min and E <= vals[j] < math.inf):
        j += 1
    if j >= len(grid):
        raise DomainError("orbit is not bounded on the outer side")
    r2 = optimize.brentq(g, r_min, grid[j], xtol=1e-15, rtol=1e-15, maxiter=500)
    return r1, r2


def _well_integral(s, field_, E, K, r1, r2, weight) -> float:
    """2 int_{r1}^{r2} weight(r) dr / sqrt(2 (E - U)) with r = r1 + (r2 - r1) sin^2 u."""
    well = _Well(s, field_, K)
    L = r2 - r1
    dU1, dU2 = well.dU(r1), well.dU(r2)
    if not (dU1 < 0 < dU2):
        raise DomainError("degenerate turning point")
    # within `edge` of a turning point E - U is a difference of nearly equal
    # numbers; a second-order expansion about the endpoint replaces it there
    # lengths are local: U varies on the scale of the distance to a pole
    lo, hi = s.chart
    len1 = min(L, r1 - lo) if math.isfinite(lo) else L
    len2 = min(L, hi - r2) if math.isfinite(hi) else L
    edge1, edge2 = 1e-4 * len1, 1e-4 * len2
    h1, h2 = 1e-3 * len1, 1e-3 * len2
    d2U1 = (well.dU(r1 + h1) - well.dU(r1 - h1)) / (2 * h1)
    d2U2 = (well.dU(r2 + h2) - well.dU(r2 - h2)) / (2 * h2)

    def integrand(u):
        su, cu = math.sin(u), math.cos(u)
        x1, x2 = L * su * su, L * cu * cu
        r = r1 + x1 if x1 <= x2 else r2 - x2
        if x1 < edge1:
            H = (-dU1 - 0.5 * d2U1 * x1) / x2
        elif x2 < edge2:
            H = (dU2 - 0.5 * d2U2 * x2) / x1
        else:
            H = (E - well.U(r)) / (x1 * x2)
            if H <= 0:
                H = (-dU1 if x1 < x2 else dU2) / L
        return 4.0 * weight(well, r) / math.sqrt(2.0 * H)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sint.IntegrationWarning)
        val, err = sint.quad(integrand, 0.0, 0.5 * math.pi, epsabs=1e-13, epsrel=1e-12, limit=400)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise NumericalFailure(f"well quadrature did not converge (err={err})", partial=val)
    return val


def apsidal_angle(s, V, E: float, K: float, r_guess: float | None = None,
                  max_den: int = 64, rat_tol: float = 1e-6) -> ApsidalReport:
    if K == 0:
        raise DomainError("K = 0 orbits are meridian lines")
    field_ = as_field(s, V)
    r1, r2 = turning_points(s, field_, E, K, r_guess)
    aK = abs(K)
    val = _well_integral(s, field_, E, K, r1, r2, lambda well, r: aK * well.inv_f2(r))
    frac = as_fraction(val / TWO_PI, max_den, rat_tol)
    rational = None if frac is None else f"{frac.numerator}/{frac.denominator}"
    return ApsidalReport(r1, r2, val, rational, frac is not None)


def radial_period(s, V, E: float, K: float, r_guess: float | None = None) -> float:
    """Time between successive pericenters."""
    field_ = as_field(s, V)
    r1, r2 = turning_points(s, field_, E, K, r_guess)
    return _well_integral(s, field_, E, K, r1, r2, lambda well, r: 1.0)


# --- Closure sweep ---


@dataclass
class ClosureVerdict:
    closed: bool
    verdict: str
    Phi: float
    spread: float
    rational: str | None
    expected: float | None
    samples: list

    def to_json(self) -> dict:
        return {"closed": self.closed, "verdict": self.verdict, "Phi": self.Phi, "spread": self.spread,
                "rational": self.rational, "expected": self.expected,
                "samples": [{"E": e, "K": k, "Phi": ph} for e, k, ph in self.samples]}


def _pole_r(s) -> float:
    return s.chart[1] if s.pole_is_upper() else s.chart[0]


def default_sweep(s, V, n_E: int = 20, n_K: int = 5) -> list[tuple[float, float, float]]:
    """(E, K, r_circ) triples: n_K circular radii, n_E energies log-spaced in the well above each."""
    field_ = as_field(s, V)
    lo, hi = s.chart
    up = s.pole_is_upper()
    pole = _pole_r(s)
    far = lo if up else hi
    far_r = None
    if math.isfinite(lo) and math.isfinite(hi):
        radii = lo + (hi - lo) * np.linspace(0.3, 0.7, n_K)
    elif isinstance(s, SurfaceSpec):
        # an infinite r-end is an absolute where U flattens out exponentially;
        # spacing the radii in theta keeps the wells well conditioned
        tlo, thi = _theta_range(s)
        if not math.isfinite(tlo):
            tlo = thi - 2.0 * max(1.0, abs(thi))
        ths = tlo + (thi - tlo) * np.linspace(0.3, 0.7, n_K)
        radii = [s.r_of_theta(s.eta * float(t)) for t in ths]
        pole_th = thi if s.k == 2 else tlo
        far_th = tlo + thi - pole_th
        far_r = s.r_of_theta(s.eta * float(pole_th + 0.95 * (far_th - pole_th)))
    else:
        base = pole if math.isfinite(pole) else far
        direction = -1.0 if up else 1.0
        offs = np.logspace(-0.3, 0.3, n_K)
        if math.isfinite(pole):
            radii = base + direction * offs
        else:
            radii = base - direction * offs
    out = []
    for rc in radii:
        rc = float(rc)
        th = s.theta(rc)
        f, fp = s.f_theta(th), s.fprime_theta(th)
        K2 = field_.dV(rc, th) * f**3 / fp
        if not K2 > 0:
            continue
        K = math.sqrt(K2)
        well = _Well(s, field_, K)
        if far_r is not None:
            w = abs(far_r - rc)
        elif math.isfinite(far):
            w = 0.9 * abs(far - rc)
        elif math.isfinite(pole):
            w = 2.0 * abs(rc - pole)
        else:
            w = 1.0
        direction = -1.0 if up else 1.0
        try:
            top = well.U(rc + direction * w)
        except (DomainError, NumericalFailure):
            continue
        base_u = well.U(rc)
        for frac in np.logspace(-3, math.log10(0.9), n_E):
            out.append((float(base_u + frac * (top - base_u)), K, rc))
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BERTRAND_THREADS", "1")))
    except ValueError:
        return 1


def closure_test(s, V, sweep=None, tol: float = 1e-6, n_E: int = 20, n_K: int = 5,
                 max_den: int = 64) -> ClosureVerdict:
    """Closure verdict from the apsidal angle over a sweep of (E, K)."""
    field_ = as_field(s, V)
    if sweep is None:
        sweep = default_sweep(s, field_, n_E, n_K)
    jobs = [tuple(item) + (None,) * (3 - len(item)) for item in sweep]

    def job(item):
        E, K, rc = item
        try:
            return apsidal_angle(s, field_, E, K, r_guess=rc, max_den=max_den).Phi
        except (DomainError, NumericalFailure):
            return None

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(job, jobs))
    samples = [(E, K, ph) for (E, K, _), ph in zip(jobs, results) if ph is not None]
    if not samples:
        raise DomainError("no admissible (E, K) in the sweep")
    phis = np.array([ph for _, _, ph in samples])
    spread = float(phis.max() - phis.min())
    mean = float(phis.mean())
    frac = as_fraction(mean / TWO_PI, max_den, 1e-6)
    rational = None if frac is None else f"{frac.numerator}/{frac.denominator}"
    if spread >= tol:
        verdict, closed = "not closed", False
    elif frac is None:
        verdict, closed = "inconclusive beyond cap", False
    else:
        verdict, closed = "closed", True
    expected = None
    if isinstance(field_, BoundPotential):
        expected = TWO_PI * s.mu / field_.kind
    return ClosureVerdict(closed, verdict, mean, spread, rational, expected, samples)


# --- Equilibria ---


def equilibrium_spectrum(s, V, r: float, K: float, chart: str = "r", tol: float = 1e-6) -> str:
    """Classify a parallel as nondegenerate-min, degenerate, max or not-equilibrium.

    With ``chart="theta"`` the position ``r`` is read as theta and the
    effective potential is written as V(theta) + K^2 mu^2 Q(theta)/2.
    """
    if K == 0:
        raise DomainError("K must be nonzero")
    field_ = as_field(s, V)
    K2 = K * K
    if chart == "theta":
        def V_(x):
            return field_.V_theta(x)

        def C_(x):
            return 0.5 * K2 * s.mu**2 * s.q(x)
    else:
        def V_(x):
            return field_.V(x)

        def C_(x):
            return 0.5 * K2 / s.f(x) ** 2
    dV, dC = derivative(V_, r, 1, 5), derivative(C_, r, 1, 5)
    d2V, d2C = derivative(V_, r, 2, 5), derivative(C_, r, 2, 5)
    first = dV + dC
    # slope is compared with its own terms and with curvature over a unit length
    scale1 = max(abs(dV) + abs(dC), (abs(d2V) + abs(d2C)) * max(1.0, abs(r)), 1e-300)
    if abs(first) > tol * scale1:
        return "not-equilibrium"
    second = d2V + d2C
    if abs(second) <= tol * max(abs(d2V) + abs(d2C), 1e-300):
        return "degenerate"
    return "nondegenerate-min" if second > 0 else "max"


def pericenter_advance(traj: Trajectory) -> np.ndarray:
    """phi advances between successive minima of the radial coordinate."""
    return np.diff(np.array(traj.minima_phi))
