"""Executable form of the closure classification for z'' + rho(z) = Psi(z)/K^2.

A family rho on (a, b) without zeros falls in one of three cases:
  a: rho' is a positive constant xi^2; closing Psi_i = A_i / rho^(i^2 - 1), i = 1, 2
  b: rho = ((z - zeta)^4 + D) / (mu^2 (z - zeta)^3), D != 0; closing Psi = A / (z - zeta)^3
  c: no closing Psi exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .numerics import derivative
from .surfaces import FirstTypeSpec, SurfaceSpec, _theta_range, fit_quartic_rho

GRID = 512


@dataclass(frozen=True)
class RhoFamily:
    rho: Callable[[float], float]
    a: float
    b: float
    provenance: str = "user"

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise DomainError("interval must be finite with a < b")

    def grid(self, n: int = GRID) -> tuple[np.ndarray, np.ndarray]:
        z = np.linspace(self.a, self.b, n)
        return z, np.array([float(self.rho(float(v))) for v in z])

    @classmethod
    def from_surface(cls, s, theta_lo: float | None = None, theta_hi: float | None = None) -> "RhoFamily":
        """rho(z) = f'/f at r(z), z = -mu^2 theta, over a finite part of the chart."""
        lo, hi = _theta_range(s)  # canonical (negative) theta
        if theta_lo is None or theta_hi is None:
            if not math.isfinite(lo):
                lo = hi - max(2.0, 2.0 * abs(hi))
            w = hi - lo
            lo, hi = lo + 0.05 * w, hi - 0.05 * w
            sgn = -1 if isinstance(s, SurfaceSpec) and s.eta < 0 else 1
            if isinstance(s, FirstTypeSpec) and s.sign < 0:
                sgn = -1
            theta_lo, theta_hi = (lo, hi) if sgn > 0 else (-hi, -lo)
        mu2 = s.mu**2

        def rho(z):
            th = -z / mu2
            r = s.r_of_theta(th)
            return s.fprime(r) / s.f(r)

        za, zb = sorted((-mu2 * theta_lo, -mu2 * theta_hi))
        return cls(rho, za, zb, "from-surface")


@dataclass(frozen=True)
class CaseVerdict:
    case: str
    xi: float | None = None
    zeta: float | None = None
    D: float | None = None
    mu: float | None = None
    residuals: dict = field(default_factory=dict, compare=False)
    family: RhoFamily | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        out = {"case": self.case}
        if self.case == "a":
            out["xi"] = self.xi
        elif self.case == "b":
            out.update(zeta=self.zeta, D=self.D, mu=self.mu)
        out["residuals"] = dict(self.residuals)
        return out


def classify_rho(fam: RhoFamily, linear_tol: float = 1e-7, quartic_tol: float = 1e-6) -> CaseVerdict:
    z, rho = fam.grid()
    if np.any(rho == 0) or np.any(np.sign(rho) != np.sign(rho[0])):
        raise PreconditionError("rho vanishes on the interval")
    scale = float(np.max(np.abs(rho)))
    slope, icpt = np.polyfit(z, rho, 1)
    lin_rms = float(np.sqrt(np.mean((slope * z + icpt - rho) ** 2)))
    res = {"linear_rms": lin_rms / scale}
    if lin_rms < linear_tol * scale:
        if slope > 0:
            return CaseVerdict("a", xi=math.sqrt(slope), residuals=res, family=fam)
        return CaseVerdict("c", residuals=res, family=fam)
    fit = fit_quartic_rho(z, rho)
    if fit is not None:
        res["quartic_rms"] = fit.rms
        if fit.rms < quartic_tol and fit.D != 0:
            return CaseVerdict("b", zeta=fit.zeta, D=fit.D, mu=fit.mu, residuals=res, family=fam)
    return CaseVerdict("c", residuals=res, family=fam)


@dataclass(frozen=True)
class PsiFamily:
    """Psi(z) = A * shape(z) with the sign constraint admissible(A, z)."""

    index: int
    label: str
    shape: Callable[[float], float] = field(compare=False)
    weight: Callable[[float], float] = field(compare=False)

    def __call__(self, z: float, A: float = 1.0) -> float:
        return A * self.shape(z)

    def admissible(self, A: float, z: float) -> bool:
        return A * self.weight(z) > 0


def closing_psi(verdict: CaseVerdict) -> list[PsiFamily]:
    if verdict.case == "a":
        rho = verdict.family.rho if verdict.family is not None else (lambda z, xi=verdict.xi: xi * xi * z)
        return [
            PsiFamily(1, "A", lambda z: 1.0, lambda z: rho(z)),
            PsiFamily(2, "A/rho^3", lambda z: 1.0 / rho(z) ** 3, lambda z: rho(z) ** 2),
        ]
    if verdict.case == "b":
        zeta, D = verdict.zeta, verdict.D
        return [PsiFamily(2, "A/(z-zeta)^3", lambda z: 1.0 / (z - zeta) ** 3,
                          lambda z: (z - zeta) ** 4 + D)]
    return []


def _rel(res: np.ndarray, scale: np.ndarray) -> float:
    m = float(np.max(scale))
    return float(np.max(np.abs(res))) / m if m > 0 else float(np.max(np.abs(res)))


def verify_identities(Psi, rho, interval, beta: float, n: int = 200) -> tuple[float, float]:
    """Relative residuals of 3 Psi'' Psi = 4 Psi'^2 and Psi rho' - Psi' rho = beta^2 Psi."""
    a, b = interval
    z = np.linspace(a, b, n + 2)[1:-1]
    P = np.array([Psi(float(v)) for v in z])
    P1 = np.array([derivative(Psi, float(v), 1, 5) for v in z])
    P2 = np.array([derivative(Psi, float(v), 2, 5) for v in z])
    R = np.array([rho(float(v)) for v in z])
    R1 = np.array([derivative(rho, float(v), 1, 5) for v in z])
    lhs1, rhs1 = 3 * P2 * P, 4 * P1**2
    # floor: Psi^2 / z^2 is the natural size of either side
    floor = P**2 / np.maximum(1.0, np.abs(z)) ** 2
    r1 = _rel(lhs1 - rhs1, np.maximum.reduce([np.abs(lhs1), np.abs(rhs1), floor]))
    t1, t2, t3 = P * R1, P1 * R, beta**2 * P
    r2 = _rel(t1 - t2 - t3, np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(t3)]))
    return r1, r2


@dataclass
class BiquadraticReport:
    r: np.ndarray
    roots: np.ndarray  # (n, 2) beta^2 values, nan where the discriminant is negative

    @property
    def betas(self) -> np.ndarray:
        return np.sqrt(self.roots)

    def spreads(self) -> tuple[float, float]:
        b = self.betas
        return float(np.nanmax(b[:, 0]) - np.nanmin(b[:, 0])), float(np.nanmax(b[:, 1]) - np.nanmin(b[:, 1]))

    def constant_roots(self, tol: float = 1e-5) -> list[float]:
        """beta values present at every sample within tol (roots may swap order)."""
        b = self.betas
        out = []
        for cand in b[0]:
            if not math.isfinite(cand):
                continue
            dist = np.nanmin(np.abs(b - cand), axis=1)
            nearest = np.array([row[np.nanargmin(np.abs(row - cand))] if np.any(np.isfinite(row)) else np.nan
                                for row in b])
            if np.all(np.isfinite(dist)) and np.nanmax(nearest) - np.nanmin(nearest) < tol:
                val = float(np.mean(nearest))
                if not any(abs(val - o) < tol for o in out):
                    out.append(val)
        return sorted(out)


def biquadratic_roots(f: Callable[[float], float], r_samples, h: float = 1e-3) -> BiquadraticReport:
    """Roots beta^2 of beta^4 - 5 h beta^2 + C = 0 at each sample, h = f'^2 - f f''."""
    rs = np.asarray(r_samples, dtype=float)
    roots = np.full((len(rs), 2), np.nan)
    for j, r in enumerate(rs):
        step = h * max(1.0, abs(r))
        f0 = f(float(r))
        f1 = derivative(f, float(r), 1, 7, step)
        f2 = derivative(f, float(r), 2, 7, step)
        f3 = derivative(f, float(r), 3, 7, step)
        hh = f1 * f1 - f2 * f0
        C = -5 * f0 * f2 * f1**2 + 4 * f2**2 * f0**2 - 3 * f3 * f1 * f0**2 + 4 * f1**4
        disc = 25 * hh * hh - 4 * C
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        lo, hi = (5 * hh - sq) / 2, (5 * hh + sq) / 2
        if lo >= 0:
            roots[j] = (lo, hi)
        elif hi >= 0:
            roots[j, 1] = hi
    return BiquadraticReport(rs, roots)


@dataclass(frozen=True)
class ProfileSolution:
    """Solution of f'' f - f'^2 = -xi^2: (xi/alpha) sin, (xi/alpha) sinh, or +-xi r + shift."""

    xi: float
    c_sign: str
    alpha: float = 1.0
    shift: float = 0.0
    slope_sign: int = 1

    def __call__(self, r):
        x = np.asarray(r, dtype=float)
        if self.c_sign == "+":
            out = self.xi / self.alpha * np.sin(self.alpha * x + self.shift)
        elif self.c_sign == "-":
            out = self.xi / self.alpha * np.sinh(self.alpha * x + self.shift)
        else:
            out = self.slope_sign * self.xi * x + self.shift
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, r: float, order: int = 1) -> float:
        if self.c_sign == "0":
            return self.slope_sign * self.xi if order == 1 else 0.0
        u = self.alpha * r + self.shift
        k = self.xi * self.alpha ** (order - 1)
        if self.c_sign == "+":
            return k * (math.cos, lambda x: -math.sin(x), lambda x: -math.cos(x))[order - 1](u)
        return k * (math.cosh, math.sinh, math.cosh)[order - 1](u)

    def zeros_in(self, a: float, b: float) -> bool:
        """True if f vanishes in the open interval (a, b)."""
        if self.c_sign == "+":
            lo, hi = sorted((self.alpha * a + self.shift, self.alpha * b + self.shift))
            k = math.floor(lo / math.pi) + 1
            return k * math.pi < hi
        if self.c_sign == "-":
            z = -self.shift / self.alpha
        else:
            z = -self.shift / (self.slope_sign * self.xi)
        return a < z < b


def profile_solutions(xi: float, c_sign: str, alpha: float = 1.0, beta_shift: float = 0.0,
                      interval: tuple[float, float] | None = None, slope_sign: int = 1) -> ProfileSolution:
    if not xi > 0:
        raise DomainError("xi must be positive")
    if c_sign not in ("+", "-", "0"):
        raise DomainError("c_sign must be one of '+', '-', '0'")
    if c_sign != "0" and not alpha > 0:
        raise DomainError("alpha must be positive")
    sol = ProfileSolution(xi, c_sign, alpha, beta_shift, slope_sign)
    if interval is not None:
        a, b = interval
        if sol.zeros_in(a, b):
            raise DomainError("profile crosses zero inside the interval")
    return sol
