"""Lattice Green's function of the fractional heat semigroup.

    G^s(x, t) = (1/2pi) int_{-pi}^{pi} exp(-t (4 sin^2(z/2))^s) cos(x z) dz

computed with the composite trapezoid rule on the periodic integrand.  A
whole profile is one real FFT of the sampled symbol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, NumericalContractError
from .kernel import check_order
from .lattice import LatticeVector

__all__ = [
    "GreenProfile",
    "DispersionFit",
    "DEFAULT_QUAD",
    "green_value",
    "green_profile",
    "evolve",
    "half_mass_width",
    "dispersion_exponent",
]

DEFAULT_QUAD = 4096
# truncated signed mass below this means the window misses too much of G
MIN_CAPTURED_MASS = 0.9


def _check_quad(quad_points) -> int:
    if int(quad_points) != quad_points or quad_points < 16 or quad_points % 2:
        raise DomainError(f"quad_points must be an even integer >= 16, got {quad_points!r}")
    return int(quad_points)


def _check_time(t) -> float:
    t = float(t)
    if not t > 0 or math.isinf(t):
        raise DomainError(f"time must be positive and finite, got {t!r}")
    return t


def _symbol_samples(s: float, t: float, n: int) -> np.ndarray:
    z = 2.0 * np.pi * np.arange(n) / n
    return np.exp(-t * (4.0 * np.sin(0.5 * z) ** 2) ** s)


def green_value(s: float, x: int, t: float, quad_points: int = DEFAULT_QUAD) -> float:
    """G_s(x, t) by the composite trapezoid rule on [-pi, pi).

    Convergence is spectral for s = 1 only; otherwise the symbol has a kink
    at z = 0 and the error falls like quad_points^-(1+2s).
    """
    s = check_order(s)
    t = _check_time(t)
    n = _check_quad(quad_points)
    z = -np.pi + 2.0 * np.pi * np.arange(n) / n
    f = np.exp(-t * (4.0 * np.sin(0.5 * z) ** 2) ** s) * np.cos(int(x) * z)
    return float(f.sum() / n)


@dataclass(frozen=True)
class GreenProfile:
    s: float
    t: float
    xmax: int
    values: np.ndarray  # G(-xmax), ..., G(xmax)
    quad_points: int

    def __getitem__(self, x: int) -> float:
        x = abs(int(x))
        return float(self.values[self.xmax + x]) if x <= self.xmax else 0.0

    @property
    def x(self) -> np.ndarray:
        return np.arange(-self.xmax, self.xmax + 1)

    @property
    def mass(self) -> float:
        return float(self.values.sum())

    def as_vector(self) -> LatticeVector:
        return LatticeVector(-self.xmax, self.values.copy())


def green_profile(s: float, t: float, xmax: int, quad_points: int = DEFAULT_QUAD) -> GreenProfile:
    """G^s(x, t) for |x| <= xmax; needs quad_points > 2 xmax (one period)."""
    s = check_order(s)
    t = _check_time(t)
    n = _check_quad(quad_points)
    xmax = int(xmax)
    if xmax < 0 or 2 * xmax >= n:
        raise DomainError(f"xmax={xmax} needs quad_points > 2*xmax (got {n})")
    half = sfft.rfft(_symbol_samples(s, t, n)).real[: xmax + 1] / n
    values = np.concatenate([half[:0:-1], half])
    return GreenProfile(s=s, t=t, xmax=xmax, values=values, quad_points=n)


def evolve(
    s: float, phi: LatticeVector, t: float, xmax: int, quad_points: int = DEFAULT_QUAD
) -> LatticeVector:
    """v(x, t) = sum_k G^s(x-k, t) phi(k), on [phi.lo - xmax, phi.hi + xmax]."""
    g = green_profile(s, t, xmax, quad_points)
    return LatticeVector(phi.lo - g.xmax, np.convolve(phi.values, g.values))


def half_mass_width(profile: GreenProfile) -> float:
    """Radius holding half of sum |G| over the window, linearly interpolated."""
    a = np.abs(profile.values[profile.xmax :])
    cum = np.cumsum(np.concatenate([a[:1], 2.0 * a[1:]]))
    half = 0.5 * cum[-1]
    r = int(np.searchsorted(cum, half))
    below = cum[r - 1] if r > 0 else 0.0
    return (r - 1) + (half - below) / (cum[r] - below)


@dataclass(frozen=True)
class DispersionFit:
    s: float
    times: np.ndarray
    widths: np.ndarray
    exponent: float
    intercept: float = 0.0

    @property
    def widths_sq(self) -> np.ndarray:
        return self.widths**2


def default_quad_for(xmax: int) -> int:
    return max(DEFAULT_QUAD, 1 << int(math.ceil(math.log2(4 * xmax + 4))))


def dispersion_exponent(s: float, times, xmax: int, quad_points=None) -> DispersionFit:
    """Least-squares slope of log w(t)^2 against log t; approximates 1/s.

    Raises NumericalContractError when the window [-xmax, xmax] captures less
    than 90% of the (unit) total mass at some time, since the half-mass
    radius would then be measured against a badly truncated profile.
    """
    s = check_order(s)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 5:
        raise DomainError("need at least 5 times")
    if np.any(np.diff(times) <= 0):
        raise DomainError("times must be strictly increasing")
    if times[0] < 10:
        raise DomainError("the asymptotic fit needs times >= 10")
    quad = default_quad_for(xmax) if quad_points is None else quad_points
    widths = np.empty(times.size)
    for i, t in enumerate(times):
        prof = green_profile(s, t, xmax, quad)
        if prof.mass < MIN_CAPTURED_MASS:
            raise NumericalContractError(
                f"window xmax={xmax} captures mass {prof.mass:.4g} at t={t:g}; enlarge xmax"
            )
        w = half_mass_width(prof)
        if not w > 0:
            raise NumericalContractError(f"nonpositive half-mass width at t={t:g}")
        widths[i] = w
    slope, intercept = np.polyfit(np.log(times), np.log(widths**2), 1)
    return DispersionFit(s=s, times=times, widths=widths, exponent=float(slope), intercept=float(intercept))
