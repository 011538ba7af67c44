"""Finite-difference stencils and rational approximation helpers."""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError

# central stencils: (offsets, weights), derivative = sum(w*f(x+o*h)) / h**order
_STENCILS = {
    (1, 5): ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    (2, 5): ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    (1, 7): ((-3, -2, -1, 1, 2, 3), (-1 / 60, 9 / 60, -45 / 60, 45 / 60, -9 / 60, 1 / 60)),
    (2, 7): (
        (-3, -2, -1, 0, 1, 2, 3),
        (2 / 180, -27 / 180, 270 / 180, -490 / 180, 270 / 180, -27 / 180, 2 / 180),
    ),
    (3, 7): ((-3, -2, -1, 1, 2, 3), (1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8)),
}


def fd_step(x: float, rel: float = 1e-4) -> float:
    return rel * max(1.0, abs(x))


def derivative(func, x: float, order: int = 1, points: int = 5, h: float | None = None) -> float:
    """Central finite-difference derivative of ``func`` at ``x``."""
    offsets, weights = _STENCILS[(order, points)]
    if h is None:
        h = fd_step(x, 1e-4 if points == 5 else 1e-3)
    total = 0.0
    for o, w in zip(offsets, weights):
        total += w * func(x + o * h)
    return total / h**order


def as_fraction(x: float, max_den: int = 64, tol: float = 1e-6) -> Fraction | None:
    """Best rational m/n with n <= max_den, accepted only if within ``tol``."""
    if not math.isfinite(x):
        return None
    frac = Fraction(x).limit_denominator(max_den)
    if abs(float(frac) - x) < tol:
        return frac
    return None


def parse_ratio(text) -> tuple[float, Fraction | None]:
    """Parse "p/q", an integer or a float; rational inputs keep their fraction."""
    if isinstance(text, Fraction):
        return float(text), text
    if isinstance(text, int):
        return float(text), Fraction(text)
    if isinstance(text, float):
        return text, as_fraction(text, 64, 1e-12)
    s = str(text).strip()
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            frac = Fraction(int(num), int(den))
            return float(frac), frac
        try:
            frac = Fraction(int(s))
            return float(frac), frac
        except ValueError:
            value = float(s)
            return value, as_fraction(value, 64, 1e-12)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a ratio: {text!r}") from exc
