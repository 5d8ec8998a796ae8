"""Discrete inf-sup and boundedness constants of the space-time form.

For a constant coefficient kappa the bilinear form decouples over
eigenmodes, so the Gram and form matrices are assembled as per-mode blocks
(trial: N interval indicators plus the terminal value; test: N+1 temporal
hats) and the constants come from the singular values of the whitened
blocks

    W_j = L_X^{-1} B_j^T L_Y^{-T},    GX = L_X L_X^T,  GY = L_Y L_Y^T.

c_B is the smallest and C_B the largest singular value over all modes.  The
fractional-order variants of the trial/test spaces only rescale each mode's
Gram matrices by powers of lambda_j, which cancels in the whitening, so the
constants are independent of the regularity shift; this is asserted cheaply
by assembling both ways.

Caveat recorded by the sweep: restricting BOTH the inf and the sup to
discrete subspaces certifies only the upper bound C_B <= sqrt(2 max(1,
A_max^2)); the discrete c_B is reported against the continuous lower bound
min(A_min, 1/A_max, A_min/A_max)/2 and flagged (not hard-failed) when it
dips below, which it does once lambda_J * h is large: the
piecewise-constant trial direction that alternates sign every interval is
L^2-orthogonal to every continuous piecewise-linear test function, leaving
only the time-derivative pairing, and the discrete constant then decays
like 2*sqrt(3)/(lambda_J h).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular, svd

from .noise import TimeGrid
from .spectral import EigenBasis

__all__ = [
    "DiscreteForm",
    "assemble_form",
    "discrete_constants",
    "swap_check",
    "bnb2_check",
    "paper_bounds",
    "whitened_blocks",
]


@dataclass(frozen=True)
class DiscreteForm:
    """Per-mode blocks of the discrete bilinear form and Gram matrices.

    B[j][i, k] is the form evaluated at trial function i (interval
    indicators 0..N-1, then the terminal-value component) against test hat
    k.  GX[j] is dense (temporal mass + stiffness + both boundary terms);
    GY[j] is diagonal and stored as its diagonal.
    """

    B: np.ndarray       # (J, N+1, N+1)
    GX: np.ndarray      # (J, N+1, N+1)
    GY: np.ndarray      # (J, N+1) diagonal entries
    beta: float
    kappa: float
    bounds: tuple
    grid: TimeGrid
    basis: EigenBasis


def _temporal_matrices(N, h):
    """Hat-function mass and stiffness matrices on the uniform grid."""
    M = np.zeros((N + 1, N + 1))
    K = np.zeros((N + 1, N + 1))
    mloc = h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    kloc = 1.0 / h * np.array([[1.0, -1.0], [-1.0, 1.0]])
    for m in range(N):
        M[m : m + 2, m : m + 2] += mloc
        K[m : m + 2, m : m + 2] += kloc
    return M, K


def assemble_form(op_bounds, grid, basis, beta=0.0, kappa=None):
    """Assemble the discrete form for a constant coefficient.

    op_bounds = (A_min, A_max); kappa defaults to A_min when the bounds
    coincide (the sweep's usage) and must otherwise be given explicitly
    inside [A_min, A_max].  beta >= 0 selects the fractional-order spaces;
    the weights are per-mode powers of lambda_j.
    """
    A_min, A_max = op_bounds
    if not 0 < A_min <= A_max:
        raise ValueError("need 0 < A_min <= A_max")
    if kappa is None:
        if A_min != A_max:
            raise ValueError("explicit kappa required when A_min < A_max")
        kappa = A_min
    if not A_min <= kappa <= A_max:
        raise ValueError("kappa outside [A_min, A_max]")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    N, h, J = grid.N, grid.h, basis.J
    M, K = _temporal_matrices(N, h)
    B = np.zeros((J, N + 1, N + 1))
    GX = np.zeros((J, N + 1, N + 1))
    GY = np.zeros((J, N + 1))
    for j, lam in enumerate(basis.lambdas):
        a = 0.5 * kappa * lam * h
        Bj = np.zeros((N + 1, N + 1))
        idx = np.arange(N)
        Bj[idx, idx] = 1.0 + a          # interval i against hat i
        Bj[idx, idx + 1] = -1.0 + a     # interval i against hat i+1
        Bj[N, N] = 1.0                  # terminal value against x(T)
        B[j] = Bj
        GX[j] = lam ** (1.0 - beta) * M + lam ** (-1.0 - beta) * K
        GX[j, 0, 0] += lam ** (-beta)
        GX[j, N, N] += lam ** (-beta)
        GY[j, :N] = h * lam ** (1.0 + beta)
        GY[j, N] = lam**beta
    form = DiscreteForm(
        B=B,
        GX=GX,
        GY=GY,
        beta=float(beta),
        kappa=float(kappa),
        bounds=(float(A_min), float(A_max)),
        grid=grid,
        basis=basis,
    )
    _validate_grams(form)
    return form


def _validate_grams(form):
    # indefinite Gram matrices signal an assembly bug; Cholesky is the probe
    for j in range(form.basis.J):
        try:
            cholesky(form.GX[j], lower=True)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise ValueError(f"GX block {j} is not positive definite") from exc
        if np.any(form.GY[j] <= 0):  # pragma: no cover
            raise ValueError(f"GY block {j} is not positive definite")


def whitened_blocks(form):
    """Whitened per-mode matrices whose singular values give the constants."""
    out = []
    for j in range(form.basis.J):
        LX = cholesky(form.GX[j], lower=True)
        W = solve_triangular(LX, form.B[j].T, lower=True)
        W = W / np.sqrt(form.GY[j])[None, :]
        out.append(W)
    return out


def discrete_constants(form):
    """(c_B, C_B): extreme singular values over all whitened mode blocks."""
    smin, smax = np.inf, 0.0
    for W in whitened_blocks(form):
        s = svd(W, compute_uv=False)
        smin = min(smin, s[-1])
        smax = max(smax, s[0])
    return float(smin), float(smax)


def swap_check(form):
    """|c_B - c_B after swapping inf and sup| (must vanish for square B).

    The swapped constant whitens the transposed blocks with the Gram roles
    exchanged; for matched (square) discrete dimensions the two matrices
    are exact transposes, so their singular values agree and the check
    certifies the identity numerically.
    """
    smin, smax = np.inf, 0.0
    for j in range(form.basis.J):
        Bj = form.B[j]
        if Bj.shape[0] != Bj.shape[1]:
            raise ValueError(
                "swap identity needs matched trial/test dimensions; "
                "assemble with equal discrete sizes"
            )
        LX = cholesky(form.GX[j], lower=True)
        # roles exchanged: trial rows whitened by GY, test columns by GX
        W = (form.B[j] / np.sqrt(form.GY[j])[:, None])
        W = solve_triangular(LX, W.T, lower=True).T
        s = svd(W, compute_uv=False)
        smin = min(smin, s[-1])
        smax = max(smax, s[0])
    c_direct, _ = discrete_constants(form)
    return abs(c_direct - float(smin))


def bnb2_check(form):
    """Surjectivity-side constant, reported against min(1, A_min).

    Measures inf over discrete trial directions of the normalized sup over
    discrete test functions with the roles swapped; on the square discrete
    system this equals c_B, and the continuous theory lower-bounds the
    corresponding quantity by min(1, A_min).  The discrete sup runs over a
    subspace, so the value is reported with its deficit, not hard-asserted.
    """
    smin = np.inf
    for j in range(form.basis.J):
        LX = cholesky(form.GX[j], lower=True)
        W = (form.B[j] / np.sqrt(form.GY[j])[:, None])
        W = solve_triangular(LX, W.T, lower=True).T
        s = svd(W, compute_uv=False)
        smin = min(smin, s[-1])
    threshold = min(1.0, form.bounds[0])
    return {
        "value": float(smin),
        "threshold": threshold,
        "deficit": max(0.0, threshold - float(smin)),
    }


def paper_bounds(A_min, A_max):
    """Continuous-theory bounds (lower for c_B, upper for C_B)."""
    lower = min(A_min, 1.0 / A_max, A_min / A_max) / 2.0
    upper = np.sqrt(2.0 * max(1.0, A_max**2))
    return float(lower), float(upper)
