"""Kernel of the discrete fractional Laplacian on the integer lattice.

For 0 < s < 2 the operator acts as

    (-Delta)^s u_n = sum_{m >= 1} (2 u_n - u_{n-m} - u_{n+m}) K_s(m)

with

    K_s(m) = (-1)^(m+1) Gamma(2s+1) / (Gamma(1+s+m) Gamma(1+s-m)),   m != 0.

Small |m| use the ratio recurrence from K_s(1); large |m| use the power law
|m|^(-1-2s) with an asymptotic correction, so nothing overflows and no
log-Gamma differences cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from .errors import DomainError

__all__ = [
    "KernelTable",
    "JumpWeights",
    "check_order",
    "gamma_sign",
    "kernel_value",
    "kernel_table",
    "normalization_A",
    "jump_distribution",
    "tail_bound",
]


def check_order(s: float) -> float:
    s = float(s)
    if not (0.0 < s < 2.0) or math.isnan(s):
        raise DomainError(f"fractional order s must lie in (0, 2), got {s!r}")
    return s


def gamma_sign(x: float) -> float:
    """Sign of Gamma(x); Gamma has no zeros, and at poles we return 0."""
    if x > 0:
        return 1.0
    if x == math.floor(x):
        return 0.0
    # Gamma is negative on (-1, 0), positive on (-2, -1), ...
    return -1.0 if math.floor(-x) % 2 == 0 else 1.0


def _sinpi(x: float) -> float:
    # sin(pi x) with exact argument reduction; keeps precision near the integers
    x = math.fmod(x, 2.0)
    if x > 1.0:
        x -= 2.0
    elif x < -1.0:
        x += 2.0
    if x > 0.5:
        x = 1.0 - x
    elif x < -0.5:
        x = -1.0 - x
    return math.sin(math.pi * x)


# below this |m| the kernel comes from the ratio recurrence, above it from the
# asymptotic series of the Gamma ratio; both are good to a few ulps there
_SERIES_FROM = 30
_SERIES_TERMS = 20
_BERNOULLI = bernoulli(_SERIES_TERMS + 1)


def _first_weight(s: float) -> float:
    # arguments stay below 6, so plain Gamma is safe and sharper than lgamma
    return math.gamma(2.0 * s + 1.0) / (math.gamma(2.0 + s) * math.gamma(s))


def _recurrence(s: float, M: int) -> np.ndarray:
    """K_s(1..M) from K_s(m+1) = K_s(m) (m-s)/(m+1+s)."""
    j = np.arange(1, M, dtype=float)
    ratios = np.concatenate(([1.0], (j - s) / (j + 1.0 + s)))
    return _first_weight(s) * np.cumprod(ratios)


def _bernoulli_poly(n: int, x: float) -> float:
    return sum(math.comb(n, j) * _BERNOULLI[j] * x ** (n - j) for j in range(n + 1))


def _log_ratio_correction(s: float, m: int) -> float:
    """log(Gamma(m-s)/Gamma(m+1+s)) + (1+2s) log m, as a series in 1/m.

    Only even powers survive because B_n(1-x) = (-1)^n B_n(x).
    """
    total = 0.0
    for k in range(_SERIES_TERMS, 0, -2):
        total += -2.0 * _bernoulli_poly(k + 1, -s) / (k * (k + 1)) / float(m) ** k
    return total


def kernel_value(s: float, m: int) -> float:
    """Closed-form K_s(m) for m != 0 (symmetric in m).

    Through the reflection formula the kernel reads

        K_s(m) = sin(pi s)/pi * Gamma(2s+1) Gamma(|m|-s) / Gamma(1+s+|m|)

    and for large |m| the Gamma ratio is |m|^(-1-2s) times a convergent-in-
    practice series, which avoids the cancellation in log-Gamma differences.
    """
    s = check_order(s)
    m = int(m)
    if m == 0:
        raise DomainError("kernel is undefined at m = 0")
    m = abs(m)
    if s == 1.0:
        return 1.0 if m == 1 else 0.0
    if m < _SERIES_FROM:
        return float(_recurrence(s, m)[-1])
    prefactor = _sinpi(s) / math.pi * math.gamma(2.0 * s + 1.0)
    return prefactor * float(m) ** (-1.0 - 2.0 * s) * math.exp(_log_ratio_correction(s, m))


def normalization_A(s: float) -> float:
    """A_s = 4^s Gamma(1/2+s) / (sqrt(pi) Gamma(1+s)) = sum over m != 0 of K_s(m).

    Evaluated in the duplicated form Gamma(1+2s) / Gamma(1+s)^2, which is
    exact at s = 1 and needs no sqrt(pi).
    """
    s = check_order(s)
    return math.gamma(1.0 + 2.0 * s) / math.gamma(1.0 + s) ** 2


@dataclass(frozen=True)
class KernelTable:
    """K_s(1..M) for one order s; ``values[m-1]`` holds K_s(m)."""

    s: float
    M: int
    values: np.ndarray
    A: float

    def __post_init__(self):
        self.values.setflags(write=False)

    def __getitem__(self, m: int) -> float:
        m = abs(int(m))
        if m == 0 or m > self.M:
            return 0.0
        return float(self.values[m - 1])

    @property
    def partial_mass(self) -> float:
        """2 * sum_{m=1..M} K_s(m): the diagonal of the truncated operator."""
        return 2.0 * float(self.values.sum())

    @property
    def support(self) -> int:
        """Largest m with K_s(m) != 0 (1 for s = 1)."""
        nz = np.flatnonzero(self.values)
        return int(nz[-1]) + 1 if nz.size else 0


def _check_radius(M) -> int:
    if int(M) != M or M < 1:
        raise DomainError(f"truncation radius M must be a positive integer, got {M!r}")
    return int(M)


def kernel_table(s: float, M: int) -> KernelTable:
    """Tabulate K_s(1..M) with the ratio K_s(m+1) = K_s(m) (m-s)/(m+1+s).

    The ratio vanishes identically at s = 1, so the classical stencil comes
    out with exact zeros beyond the nearest neighbour.
    """
    s = check_order(s)
    M = _check_radius(M)
    values = _recurrence(s, M)
    return KernelTable(s=s, M=M, values=values, A=normalization_A(s))


@dataclass(frozen=True)
class JumpWeights:
    """P_s(m) = K_s(m)/A_s for m = 1..M (one side; the law is symmetric)."""

    s: float
    M: int
    weights: np.ndarray


def jump_distribution(s: float, M: int) -> JumpWeights:
    table = kernel_table(s, M)
    w = table.values / table.A
    w.setflags(write=False)
    return JumpWeights(s=table.s, M=table.M, weights=w)


def tail_bound(s: float, M: int, u_sup: float) -> float:
    """Bound B/(M-s)^2 on the dropped remainder of the truncated operator.

    B = 4 u_sup 4^s Gamma(1/2+s) / (sqrt(pi) |Gamma(-s)| Gamma(1+2s)).
    Note this decays like M^-2 while the kernel tail itself decays like
    M^-2s, so for s < 1 it is not a bound on the kernel mass beyond M.
    """
    s = check_order(s)
    if M <= s:
        raise DomainError(f"tail bound needs M > s, got M={M!r}, s={s!r}")
    if u_sup < 0:
        raise DomainError("u_sup must be nonnegative")
    if u_sup == 0 or s == 1.0:
        # 1/|Gamma(-1)| = 0
        return 0.0
    log_b = (
        math.log(4.0 * u_sup)
        + s * math.log(4.0)
        + math.lgamma(0.5 + s)
        - 0.5 * math.log(math.pi)
        - math.lgamma(-s)
        - math.lgamma(1.0 + 2.0 * s)
    )
    return math.exp(log_b) / (M - s) ** 2
