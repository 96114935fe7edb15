"""Spectral distance method: Krylov orbit of a seed vector under H and the
distance from a fixed test vector to its span.

Krylov vectors are orthogonalized with forward (modified) Gram-Schmidt as they
are produced and stored unit-normalized; ``norms_sq`` keeps the squared length
of each orthogonalized vector before rescaling.  Because H is self-adjoint the
projection against anything older than the previous two vectors vanishes in
exact arithmetic, so ``history=2`` (Lanczos) gives the same span at a fraction
of the memory; ``history=None`` keeps and projects against every vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .lattice import Hamiltonian, LatticeVector, apply_hamiltonian

__all__ = [
    "KrylovBasis",
    "DistanceTrace",
    "OrthogonalityReport",
    "TraceAverage",
    "BREAKDOWN_RATIO",
    "DROP_TOL",
    "make_test_vector",
    "krylov_start",
    "krylov_step",
    "distance_trace",
    "orthogonality_check",
    "average_traces",
]

BREAKDOWN_RATIO = 1e-24
# entries of a unit Krylov vector at or below this are dropped; far below
# rounding, and it keeps the far tails out of the subnormal range
DROP_TOL = 1e-30


def make_test_vector(M: int) -> LatticeVector:
    """Unit-norm alternating vector sum_{i<M} (-1)^i (delta_{1+i} - delta_{-1-i})."""
    if int(M) != M or M < 1:
        raise DomainError(f"test vector radius must be a positive integer, got {M!r}")
    M = int(M)
    vals = np.zeros(2 * M + 1)
    signs = (-1.0) ** np.arange(M)
    vals[M + 1 :] = signs
    vals[M - 1 :: -1] = -signs
    vals /= math.sqrt(2 * M)
    return LatticeVector(-M, vals)


@dataclass(frozen=True)
class KrylovBasis:
    vectors: tuple
    norms_sq: tuple
    ref_norm_sq: Optional[float] = None
    history: Optional[int] = None
    count: int = 1
    status: str = "ok"
    clipped: int = 0

    @property
    def last(self) -> LatticeVector:
        return self.vectors[-1]

    @property
    def broken_down(self) -> bool:
        return self.status == "breakdown"


def krylov_start(phi: LatticeVector, history: Optional[int] = None) -> KrylovBasis:
    nsq = phi.norm() ** 2
    if not nsq > 0:
        raise DomainError("Krylov seed must be nonzero")
    if history is not None and history < 1:
        raise DomainError("history must be None or >= 1")
    return KrylovBasis(vectors=(phi.scaled(1.0 / math.sqrt(nsq)),), norms_sq=(nsq,), history=history)


def _subtract_projections(w: np.ndarray, lo: int, vectors: Sequence[LatticeVector]) -> None:
    for q in vectors:
        off = q.lo - lo
        seg = w[off : off + q.width]
        seg -= (seg @ q.values) * q.values


def krylov_step(
    H: Hamiltonian,
    basis: KrylovBasis,
    reorthogonalize: bool = False,
    site_cap: Optional[int] = None,
    method: str = "auto",
    drop_tol: float = DROP_TOL,
) -> KrylovBasis:
    """Apply H to the newest vector and orthogonalize against the stored ones,
    oldest first.  A new vector whose squared norm drops below 1e-24 of the
    first application's is not appended; the basis comes back with status
    ``"breakdown"`` (an invariant subspace was reached).

    ``site_cap`` optionally clips every new vector to sites [-cap, cap]; each
    clip is counted in ``clipped``.  Entries of the new unit vector with
    magnitude <= ``drop_tol`` are zeroed and the window shrunk to the rest;
    pass 0 to keep the full window.
    """
    if basis.broken_down:
        return basis
    w_vec = apply_hamiltonian(H, basis.last, method=method)
    clipped = basis.clipped
    if site_cap is not None and (w_vec.lo < -site_cap or w_vec.hi > site_cap):
        w_vec = w_vec.clipped(-site_cap, site_cap)
        clipped += 1
    ref = basis.ref_norm_sq
    if ref is None:
        ref = w_vec.norm() ** 2
    # trimmed older vectors may reach past the new window
    lo = min([w_vec.lo] + [q.lo for q in basis.vectors])
    hi = max([w_vec.hi] + [q.hi for q in basis.vectors])
    w = w_vec.padded(lo, hi).values
    _subtract_projections(w, lo, basis.vectors)
    if reorthogonalize:
        _subtract_projections(w, lo, basis.vectors)
    nsq = float(w @ w)
    if not nsq >= BREAKDOWN_RATIO * ref or ref == 0.0:
        return replace(basis, ref_norm_sq=ref, status="breakdown", clipped=clipped)
    new = LatticeVector(lo, w / math.sqrt(nsq))
    if drop_tol > 0:
        new = new.trimmed(drop_tol)
    vectors = basis.vectors + (new,)
    norms = basis.norms_sq + (nsq,)
    if basis.history is not None and len(vectors) > basis.history:
        vectors = vectors[-basis.history :]
        norms = norms[-basis.history :]
    return replace(
        basis, vectors=vectors, norms_sq=norms, ref_norm_sq=ref, count=basis.count + 1, clipped=clipped
    )


@dataclass(frozen=True)
class DistanceTrace:
    s: float
    c: float
    seed: int
    M: int
    values: np.ndarray
    status: str = "completed"
    clamped: int = 0
    clipped: int = 0

    @property
    def n_max(self) -> int:
        return self.values.size - 1


def distance_trace(
    H: Hamiltonian,
    phi: LatticeVector,
    v: LatticeVector,
    n_max: int,
    *,
    history: Optional[int] = None,
    reorthogonalize: bool = False,
    site_cap: Optional[int] = None,
    keep_basis: bool = False,
    drop_tol: float = DROP_TOL,
):
    """D^n = sqrt(1 - sum_{k<=n} <v, m_k>^2 / <m_k, m_k>) for n = 0..n_max.

    The running sum is accumulated incrementally; a negative radicand is
    clamped to zero and counted.  On breakdown the trace stops early with
    status ``"breakdown"``.  With ``keep_basis`` the final KrylovBasis is
    returned alongside the trace.
    """
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    if abs(v.norm() - 1.0) > 1e-12:
        raise DomainError("test vector v must have unit norm")
    basis = krylov_start(phi, history=history)
    acc = v.dot(basis.last) ** 2
    clamped = 0

    def dist(total):
        nonlocal clamped
        r = 1.0 - total
        if r < 0.0:
            clamped += 1
            return 0.0
        return math.sqrt(r)

    values = [dist(acc)]
    status = "completed"
    for _ in range(n_max):
        basis = krylov_step(
            H, basis, reorthogonalize=reorthogonalize, site_cap=site_cap, drop_tol=drop_tol
        )
        if basis.broken_down:
            status = "breakdown"
            break
        acc += v.dot(basis.last) ** 2
        values.append(dist(acc))
    if basis.clipped and status == "completed":
        status = "capped"
    trace = DistanceTrace(
        s=H.s,
        c=H.disorder.c,
        seed=H.disorder.seed,
        M=H.M,
        values=np.asarray(values),
        status=status,
        clamped=clamped,
        clipped=basis.clipped,
    )
    return (trace, basis) if keep_basis else trace


@dataclass(frozen=True)
class OrthogonalityReport:
    n: int
    Q: float


def orthogonality_check(basis) -> OrthogonalityReport:
    """Q = ||K^T K - I||_inf for the unit-normalized basis vectors as columns of K."""
    vectors = basis.vectors if isinstance(basis, KrylovBasis) else list(basis)
    if not vectors:
        raise DomainError("orthogonality check needs at least one vector")
    lo = min(q.lo for q in vectors)
    hi = max(q.hi for q in vectors)
    K = np.zeros((hi - lo + 1, len(vectors)))
    for j, q in enumerate(vectors):
        K[q.lo - lo : q.lo - lo + q.width, j] = q.values / q.norm()
    G = K.T @ K
    G[np.diag_indices_from(G)] -= 1.0
    return OrthogonalityReport(n=len(vectors), Q=float(np.abs(G).sum(axis=1).max()))


@dataclass(frozen=True)
class TraceAverage:
    n: np.ndarray
    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray
    realizations: int
    statuses: tuple = field(default=())


def average_traces(traces: Sequence[DistanceTrace], n_max: Optional[int] = None) -> TraceAverage:
    """Pointwise mean/min/max over realizations.

    A trace that stopped on breakdown has reached an invariant subspace, so its
    distance stays at its last value; shorter traces are extended that way.
    """
    if not traces:
        raise DomainError("nothing to average")
    length = max(t.values.size for t in traces) if n_max is None else n_max + 1
    stack = np.empty((len(traces), length))
    for i, t in enumerate(traces):
        k = min(t.values.size, length)
        stack[i, :k] = t.values[:k]
        stack[i, k:] = t.values[k - 1]
    return TraceAverage(
        n=np.arange(length),
        mean=stack.mean(axis=0),
        min=stack.min(axis=0),
        max=stack.max(axis=0),
        realizations=len(traces),
        statuses=tuple(t.status for t in traces),
    )
