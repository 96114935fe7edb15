"""Finitely supported lattice vectors and the random fractional Schrodinger operator.

A vector lives on a contiguous window ``[lo, lo + len(values))`` of Z and is
zero elsewhere.  Applying the truncated operator widens the window by exactly
M sites on each side, so Krylov iterates started from compact data are
represented without any boundary error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import oaconvolve

from .errors import DomainError
from .kernel import KernelTable

__all__ = [
    "LatticeVector",
    "DisorderField",
    "Hamiltonian",
    "splitmix64",
    "derive_seed",
    "apply_frac_laplacian",
    "apply_hamiltonian",
    "epsilon",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)

# below this many products the plain sliding sum beats the transform
_DIRECT_CUTOFF = 20_000


@dataclass(frozen=True)
class LatticeVector:
    lo: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError("a lattice vector needs a nonempty 1-D window")
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "values", vals)

    @classmethod
    def delta(cls, site: int = 0) -> "LatticeVector":
        return cls(site, np.ones(1))

    @classmethod
    def from_sites(cls, entries: dict) -> "LatticeVector":
        lo, hi = min(entries), max(entries)
        vals = np.zeros(hi - lo + 1)
        for site, val in entries.items():
            vals[site - lo] = val
        return cls(lo, vals)

    @property
    def hi(self) -> int:
        """Last site of the window (inclusive)."""
        return self.lo + self.values.size - 1

    @property
    def width(self) -> int:
        return self.values.size

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __getitem__(self, site: int) -> float:
        i = int(site) - self.lo
        if 0 <= i < self.values.size:
            return float(self.values[i])
        return 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dot(self, other: "LatticeVector") -> float:
        a = max(self.lo, other.lo)
        b = min(self.hi, other.hi) + 1
        if b <= a:
            return 0.0
        return float(self.values[a - self.lo : b - self.lo] @ other.values[a - other.lo : b - other.lo])

    def padded(self, lo: int, hi: int) -> "LatticeVector":
        """Same vector on the window [lo, hi]; the window must contain our support."""
        if lo > self.lo or hi < self.hi:
            raise DomainError("padding window must contain the current window")
        out = np.zeros(hi - lo + 1)
        out[self.lo - lo : self.lo - lo + self.width] = self.values
        return LatticeVector(lo, out)

    def clipped(self, lo: int, hi: int) -> "LatticeVector":
        """Restrict to [lo, hi] (zero boundary); the window must overlap."""
        a, b = max(lo, self.lo), min(hi, self.hi)
        if b < a:
            raise DomainError("clipping window does not overlap the vector")
        return LatticeVector(a, self.values[a - self.lo : b - self.lo + 1].copy())

    def trimmed(self, tol: float) -> "LatticeVector":
        """Flush entries with |x| <= tol to zero and drop zero edges.

        Keeps at least one site, so the result is always a valid vector.
        """
        vals = np.where(np.abs(self.values) > tol, self.values, 0.0)
        nz = np.flatnonzero(vals)
        if nz.size == 0:
            return LatticeVector(self.lo, vals[:1])
        a, b = int(nz[0]), int(nz[-1])
        return LatticeVector(self.lo + a, vals[a : b + 1])

    def scaled(self, alpha: float) -> "LatticeVector":
        return LatticeVector(self.lo, alpha * self.values)

    def normalized(self) -> "LatticeVector":
        return self.scaled(1.0 / self.norm())

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        out = self.padded(lo, hi).values
        out[other.lo - lo : other.lo - lo + other.width] += other.values
        return LatticeVector(lo, out)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return self + other.scaled(-1.0)

    def __mul__(self, alpha: float) -> "LatticeVector":
        return self.scaled(alpha)

    __rmul__ = __mul__


def splitmix64(x):
    """SplitMix64 finalizer, vectorized over uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def derive_seed(base_seed: int, index: int) -> int:
    """Seed for realization ``index``: a bit-mixed function of (base_seed, index)."""
    key = splitmix64(np.uint64(int(base_seed) & _MASK64))
    with np.errstate(over="ignore"):
        z = splitmix64(key ^ splitmix64(np.uint64(int(index) & _MASK64)))
    return int(z)


@dataclass(frozen=True)
class DisorderField:
    """i.i.d. Uniform[-c/2, c/2] on-site energies, random-access by absolute site.

    epsilon(i) depends only on (seed, i), so extending a window never
    re-randomizes sites that were already seen.
    """

    c: float
    seed: int = 0

    def __post_init__(self):
        if not self.c >= 0:
            raise DomainError(f"disorder strength c must be nonnegative, got {self.c!r}")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)

    def values(self, lo: int, n: int) -> np.ndarray:
        """epsilon(lo), ..., epsilon(lo + n - 1)."""
        if self.c == 0.0:
            return np.zeros(n)
        key = splitmix64(np.uint64(self.seed))
        sites = np.arange(lo, lo + n, dtype=np.int64).view(np.uint64)
        with np.errstate(over="ignore"):
            bits = splitmix64(splitmix64(sites * _GOLDEN) ^ key)
        u = (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return self.c * (u - 0.5)

    def __call__(self, i: int) -> float:
        return float(self.values(int(i), 1)[0])


def epsilon(field: DisorderField, i: int) -> float:
    return field(i)


class Hamiltonian:
    """Truncated random fractional Schrodinger operator.

    (H u)_n = sum_{m=1..M} (2 u_n - u_{n-m} - u_{n+m}) K_s(m) + eps_n u_n
    """

    def __init__(self, kernel: KernelTable, disorder: DisorderField):
        self._kernel = kernel
        self._disorder = disorder
        # memo of epsilon over [_cache_lo, _cache_lo + len(_cache)); pure function of the field
        self._cache_lo = 0
        self._cache = np.zeros(0)

    @property
    def kernel(self) -> KernelTable:
        return self._kernel

    @property
    def disorder(self) -> DisorderField:
        return self._disorder

    @property
    def s(self) -> float:
        return self._kernel.s

    @property
    def M(self) -> int:
        return self._kernel.M

    def potential(self, lo: int, n: int) -> np.ndarray:
        hi = lo + n
        clo, chi = self._cache_lo, self._cache_lo + self._cache.size
        if self._cache.size == 0 or lo < clo or hi > chi:
            # grow geometrically around the requested window
            span = max(n, 2 * self._cache.size, 1024)
            new_lo = min(lo, clo) if self._cache.size else lo
            new_hi = max(hi, chi) if self._cache.size else hi
            pad = max(0, span - (new_hi - new_lo)) // 2
            new_lo, new_hi = new_lo - pad, new_hi + pad
            self._cache = self._disorder.values(new_lo, new_hi - new_lo)
            self._cache_lo = new_lo
        off = lo - self._cache_lo
        return self._cache[off : off + n]

    def apply(self, u: LatticeVector, method: str = "auto") -> LatticeVector:
        return apply_hamiltonian(self, u, method=method)

    def __matmul__(self, u: LatticeVector) -> LatticeVector:
        return self.apply(u)


def _laplacian_direct(k: np.ndarray, diag: float, u: np.ndarray, M: int) -> np.ndarray:
    W = u.size
    out = np.zeros(W + 2 * M)
    out[M : M + W] = diag * u
    for m in range(1, k.size + 1):
        km = k[m - 1]
        if km == 0.0:
            continue
        # u_{n-m} lands at n = j + m, u_{n+m} at n = j - m
        out[M + m : M + m + W] -= km * u
        out[M - m : M - m + W] -= km * u
    return out


def _laplacian_fast(k: np.ndarray, diag: float, u: np.ndarray, M: int) -> np.ndarray:
    Me = k.size
    stencil = np.concatenate([k[::-1], [0.0], k])
    if u.size * Me <= _DIRECT_CUTOFF:
        conv = np.convolve(u, stencil)
    else:
        conv = oaconvolve(u, stencil)
    out = np.zeros(u.size + 2 * M)
    out[M - Me : M - Me + conv.size] = -conv
    out[M : M + u.size] += diag * u
    return out


def apply_frac_laplacian(kernel: KernelTable, u: LatticeVector, method: str = "auto") -> LatticeVector:
    """Truncated fractional Laplacian; the result lives on [u.lo - M, u.hi + M].

    ``method="direct"`` is the O(W M) sliding sum, ``"fast"`` (and ``"auto"``)
    the transform-based convolution.  Trailing zero kernel entries (s = 1) are
    skipped by both, which keeps the classical stencil exact.
    """
    M = kernel.M
    k = kernel.values[: kernel.support]
    diag = kernel.partial_mass
    if method == "direct":
        out = _laplacian_direct(k, diag, u.values, M)
    elif method in ("fast", "auto"):
        out = _laplacian_fast(k, diag, u.values, M)
    else:
        raise DomainError(f"unknown application method {method!r}")
    return LatticeVector(u.lo - M, out)


def apply_hamiltonian(H: Hamiltonian, u: LatticeVector, method: str = "auto") -> LatticeVector:
    out = apply_frac_laplacian(H.kernel, u, method=method)
    vals = out.values
    if H.disorder.c != 0.0:
        M = H.M
        vals[M : M + u.width] += H.potential(u.lo, u.width) * u.values
    return out
