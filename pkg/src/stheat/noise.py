"""Exact sampling of Q-Wiener increments and the coupling norms they enter.

The driving noise is W(t) = sum_j sqrt(gamma_j) beta_j(t) phi_j with the
covariance diagonal in the Laplacian eigenbasis, so each mode is an
independent scalar Brownian motion of variance gamma_j per unit time.  For
the space-time solver every interval needs the pair

    dW[j][n] = W_j(t_{n+1}) - W_j(t_n),
    iW[j][n] = int_{t_n}^{t_{n+1}} (s - t_n) dW_j(s),

which is jointly Gaussian with covariance gamma_j * [[h, h^2/2], [h^2/2,
h^3/3]] and is drawn exactly from its Cholesky factor.

Randomness is counter-based: the sample at (path p, mode j, interval n)
depends only on (master seed, p, j, n).  Each (p, j, aux) triple owns a
Philox stream (key = seed, counter = [0, aux, j, p]); interval n consumes
uniform draws 2n and 2n+1 of that stream, and Gaussians are produced by the
inverse normal CDF so the word count per draw is fixed.  Paths, modes and
intervals can therefore be generated in any order, in chunks, or in
parallel with bitwise-identical results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .spectral import EigenBasis

__all__ = [
    "QSpec",
    "TimeGrid",
    "Stream",
    "NoiseSample",
    "sample_noise",
    "sample_noise_paths",
    "standard_normals",
    "uniforms",
    "hs_norm",
    "regularity_coupling_norm",
    "dump_noise_csv",
]

_MASK64 = (1 << 64) - 1

# aux-stream tags: one namespace per consumer so draws never collide
AUX_NOISE = 0      # (dW, iW) pairs
AUX_ORACLE = 1     # conditional residual normals of the mild oracle
AUX_KAPPA = 2      # random operator coefficient realizations
AUX_GENERIC = 3    # auxiliary Monte Carlo draws (bound checks etc.)


@dataclass(frozen=True)
class QSpec:
    """Diagonal covariance spectrum gamma_j >= 0 in the eigenbasis.

    decay_exponent records rho when the spectrum was generated as
    gamma_j = j^(-rho); it is informational only.
    """

    gammas: np.ndarray
    decay_exponent: float | None = None

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        if g.ndim != 1 or g.size < 1:
            raise ValueError("gammas must be a nonempty 1d sequence")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("gammas must be finite and nonnegative")
        object.__setattr__(self, "gammas", g)

    @classmethod
    def from_decay(cls, J, rho):
        """gamma_j = j^(-rho) for j = 1..J."""
        j = np.arange(1, J + 1, dtype=float)
        return cls(gammas=j ** (-float(rho)), decay_exponent=float(rho))

    @classmethod
    def rank_one(cls, J, mode=1, gamma=1.0):
        """Noise supported on a single eigenmode."""
        g = np.zeros(J)
        g[mode - 1] = gamma
        return cls(gammas=g)

    @property
    def J(self):
        return self.gammas.size

    def trace(self):
        return float(np.sum(self.gammas))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 = t_0 < ... < t_N = T with spacing h = T/N."""

    T: float
    N: int

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("final time T must be positive")
        if self.N < 1:
            raise ValueError("number of intervals N must be >= 1")

    @property
    def h(self):
        return self.T / self.N

    @property
    def nodes(self):
        return np.linspace(0.0, self.T, self.N + 1)


@dataclass(frozen=True)
class Stream:
    """Identity of one Monte Carlo path's random stream."""

    seed: int
    path: int = 0

    def with_path(self, path):
        return Stream(self.seed, int(path))


def _philox(seed, path, mode, aux):
    key = [int(seed) & _MASK64, 0]
    counter = [0, int(aux) & _MASK64, int(mode) & _MASK64, int(path) & _MASK64]
    return Philox(key=key, counter=counter)


def uniforms(seed, path, mode, aux, count):
    """Uniform doubles u_0..u_{count-1} of stream (seed, path, mode, aux).

    u_k is a pure function of (seed, path, mode, aux, k): each double
    consumes exactly one 64-bit Philox word, so prefixes are stable no
    matter how many draws are requested.
    """
    return Generator(_philox(seed, path, mode, aux)).random(count)


def standard_normals(seed, path, mode, aux, count):
    """Standard normals via inverse CDF on cell-midpoint uniforms."""
    u = uniforms(seed, path, mode, aux, count)
    # random() returns k*2^-53; shifting to the cell midpoint keeps ndtri
    # finite and the lattice symmetric around 0
    return ndtri(u + 0.5 * 2.0**-53)


@dataclass(frozen=True)
class NoiseSample:
    """One path's (dW, iW) panel, shape (J, N) each, plus provenance."""

    dW: np.ndarray
    iW: np.ndarray
    grid: TimeGrid
    q: QSpec
    stream: Stream

    def __post_init__(self):
        J, N = self.q.J, self.grid.N
        if self.dW.shape != (J, N) or self.iW.shape != (J, N):
            raise ValueError("dW/iW must have shape (J, N)")


def sample_noise_paths(grid, q, seed, paths):
    """Sample (dW, iW) for several paths at once.

    Returns arrays of shape (P, J, N).  Identical (seed, path) always
    reproduce the same panel regardless of batch composition.
    """
    paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
    J, N, h = q.J, grid.N, grid.h
    dW = np.empty((paths.size, J, N))
    iW = np.empty((paths.size, J, N))
    # Cholesky factor of [[h, h^2/2], [h^2/2, h^3/3]]
    c11 = np.sqrt(h)
    c21 = 0.5 * h**1.5
    c22 = h**1.5 / np.sqrt(12.0)
    sqrt_g = np.sqrt(q.gammas)
    for ip, p in enumerate(paths):
        for j in range(J):
            if sqrt_g[j] == 0.0:
                dW[ip, j] = 0.0
                iW[ip, j] = 0.0
                continue
            z = standard_normals(seed, p, j, AUX_NOISE, 2 * N)
            z1, z2 = z[0::2], z[1::2]
            dW[ip, j] = sqrt_g[j] * c11 * z1
            iW[ip, j] = sqrt_g[j] * (c21 * z1 + c22 * z2)
    return dW, iW


def sample_noise(grid, q, stream):
    """Sample one path's NoiseSample; `stream` is a Stream or a bare seed."""
    if not isinstance(stream, Stream):
        stream = Stream(int(stream))
    dW, iW = sample_noise_paths(grid, q, stream.seed, [stream.path])
    return NoiseSample(dW=dW[0], iW=iW[0], grid=grid, q=q, stream=stream)


def hs_norm(psi_diag, q, basis, s=0.0):
    """Hilbert-Schmidt coupling norm (sum_j lambda_j^s psi_j^2 gamma_j)^(1/2).

    s=0 is the plain Hilbert-Schmidt norm of Psi Q^(1/2); s=beta measures the
    same operator into the fractional space of order beta.
    """
    psi = np.asarray(psi_diag, dtype=float)
    if psi.shape != (q.J,):
        raise ValueError("psi_diag must have length J")
    if q.J != basis.J:
        raise ValueError("Q spectrum and basis truncation disagree")
    return float(np.sqrt(np.sum(basis.lambdas**s * psi**2 * q.gammas)))


def regularity_coupling_norm(q, basis, beta):
    """(sum_j lambda_j^(beta-1) gamma_j)^(1/2) on the truncated basis.

    Finiteness of the untruncated series is the regularity gate for order
    beta; on a truncation it is always finite, so divergence is detected by
    comparing truncation levels (partial-sum growth).
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return hs_norm(np.ones(q.J), q, basis, s=beta - 1.0)


def dump_noise_csv(file, samples):
    """Write samples (iterable of NoiseSample) as path,j,n,dW,iW rows."""
    writer = csv.writer(file)
    writer.writerow(["path", "j", "n", "dW", "iW"])
    for s in samples:
        J, N = s.q.J, s.grid.N
        for j in range(J):
            for n in range(N):
                writer.writerow(
                    [s.stream.path, j + 1, n, repr(s.dW[j, n]), repr(s.iW[j, n])]
                )
