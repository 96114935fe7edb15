"""Independent reference computations used only by the tests.

Nothing here calls into the package's numerical paths: kernels come from
mpmath's arbitrary-precision Gamma, operators from explicit loops or dense
matrices, heat kernels from the modified-Bessel power series.
"""
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def kernel_mp(s, m):
    s = mp.mpf(s)
    m = abs(int(m))
    return (-1) ** (m + 1) * mp.gamma(2 * s + 1) * mp.rgamma(1 + s + m) * mp.rgamma(1 + s - m)


def kernel_oracle(s, m):
    return float(kernel_mp(s, m))


def A_oracle(s):
    s = mp.mpf(s)
    return float(4**s * mp.gamma(mp.mpf(1) / 2 + s) / (mp.sqrt(mp.pi) * mp.gamma(1 + s)))


def kernel_list(s, M):
    return [kernel_oracle(s, m) for m in range(1, M + 1)]


def apply_double_loop(kvals, eps_of, lo, u):
    """(H u)_n by the defining double sum; eps_of(site) gives the potential."""
    M = len(kvals)
    W = len(u)
    get = lambda i: u[i] if 0 <= i < W else 0.0
    out = []
    for j in range(-M, W + M):
        acc = 0.0
        for m in range(1, M + 1):
            acc += (2.0 * get(j) - get(j - m) - get(j + m)) * kvals[m - 1]
        if 0 <= j < W:
            acc += eps_of(lo + j) * u[j]
        out.append(acc)
    return lo - M, np.array(out)


def dense_hamiltonian(kvals, eps_of, L):
    """Dense H on sites -L..L with zero outside."""
    M = len(kvals)
    n = 2 * L + 1
    H = np.zeros((n, n))
    diag = 2.0 * sum(kvals)
    for i in range(n):
        H[i, i] = diag + eps_of(i - L)
        for m in range(1, M + 1):
            if i - m >= 0:
                H[i, i - m] = -kvals[m - 1]
            if i + m < n:
                H[i, i + m] = -kvals[m - 1]
    return H


def dense_distance(H, phi, v, n_max):
    """Distance of v to span{phi, H phi, ..., H^n phi} via Arnoldi with two
    full classical Gram-Schmidt passes (dense, fixed window)."""
    Q = np.zeros((H.shape[0], n_max + 1))
    q = phi / np.linalg.norm(phi)
    Q[:, 0] = q
    out = [math.sqrt(max(0.0, 1.0 - (v @ q) ** 2))]
    for k in range(1, n_max + 1):
        w = H @ Q[:, k - 1]
        for _ in range(2):
            w = w - Q[:, :k] @ (Q[:, :k].T @ w)
        Q[:, k] = w / np.linalg.norm(w)
        proj = Q[:, : k + 1].T @ v
        out.append(math.sqrt(max(0.0, 1.0 - proj @ proj)))
    return np.array(out)


def heat_kernel_bessel(x, t, terms=200):
    """exp(-2t) I_x(2t) from the power series of I_x."""
    x = abs(int(x))
    total = mp.mpf(0)
    for k in range(terms):
        total += mp.mpf(t) ** (2 * k + x) / (mp.factorial(k) * mp.factorial(k + x))
    return float(mp.exp(-2 * mp.mpf(t)) * total)
