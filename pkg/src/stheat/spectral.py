"""Dirichlet-Laplacian eigenbasis on (0, 1) and fractional-order calculus.

The base operator is A0 = -d^2/dx^2 with homogeneous Dirichlet conditions,
whose eigenpairs are lambda_j = (j*pi)^2 and phi_j(x) = sqrt(2)*sin(j*pi*x).
Every field in this package is represented by its coefficient vector in this
basis (a plain 1d ndarray of length J).  Fractional norms are

    ||v||_s = ( sum_j lambda_j^s * v_j^2 )^(1/2),

so s=0 is the L^2 norm, s=1 the H^1_0 (energy) norm and s=-1 its dual norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EigenBasis",
    "build_basis",
    "as_coeffs",
    "frac_norm",
    "apply_laplacian_power",
    "dual_pairing",
    "mode_vector",
    "eigenfunction_values",
]


@dataclass(frozen=True)
class EigenBasis:
    """Truncated eigenbasis of the Dirichlet Laplacian on (0, 1).

    Attributes
    ----------
    J : int
        Number of retained modes (>= 1).
    lambdas : ndarray, shape (J,)
        Eigenvalues (j*pi)^2 for j = 1..J, strictly increasing.
    """

    J: int
    lambdas: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", np.asarray(self.lambdas, dtype=float))
        if self.J < 1:
            raise ValueError("basis truncation J must be >= 1")
        if self.lambdas.shape != (self.J,):
            raise ValueError("lambdas must have shape (J,)")


def build_basis(J):
    """Return the eigenbasis with modes 1..J; rejects J < 1."""
    if J < 1:
        raise ValueError(f"invalid truncation level J={J}; need J >= 1")
    j = np.arange(1, J + 1, dtype=float)
    return EigenBasis(J=int(J), lambdas=(j * np.pi) ** 2)


def as_coeffs(v, basis):
    """Validate and return v as a float coefficient array of length basis.J."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != basis.J:
        raise ValueError(
            f"coefficient length {v.shape[-1]} does not match basis J={basis.J}"
        )
    if not np.all(np.isfinite(v)):
        raise ValueError("coefficients must be finite")
    return v


def frac_norm(v, s, basis):
    """Fractional-order norm (sum_j lambda_j^s v_j^2)^(1/2).

    s=0 gives the L^2 norm, s=1 the energy norm, s=-1 the dual norm.  Any
    real s is allowed since all eigenvalues are positive.  Broadcasts over
    leading axes of v (the norm is taken along the last axis).
    """
    v = as_coeffs(v, basis)
    return np.sqrt(np.sum(basis.lambdas**s * v**2, axis=-1))


def apply_laplacian_power(v, s, basis):
    """Apply A0^s diagonally: coefficient j becomes lambda_j^s * v_j."""
    v = as_coeffs(v, basis)
    return basis.lambdas**s * v


def dual_pairing(u, v, basis):
    """Duality pairing <u, v> = sum_j u_j v_j.

    Coincides with the L^2 inner product whenever both arguments are in L^2;
    more generally it extends the inner product to the dual pairing of the
    Gelfand triple.  Mismatched truncation levels are rejected.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(
            f"mismatched truncations: {u.shape[-1]} vs {v.shape[-1]}"
        )
    u = as_coeffs(u, basis)
    v = as_coeffs(v, basis)
    return np.sum(u * v, axis=-1)


def mode_vector(basis, j, amplitude=1.0):
    """Coefficient vector of amplitude * phi_j (j is 1-based)."""
    if not 1 <= j <= basis.J:
        raise ValueError(f"mode index {j} outside 1..{basis.J}")
    v = np.zeros(basis.J)
    v[j - 1] = amplitude
    return v


def eigenfunction_values(basis, xi):
    """Evaluate phi_j(xi) = sqrt(2) sin(j pi xi) for all modes.

    Returns an array of shape (J, len(xi)); used for collocation and for
    reconstructing physical-space profiles in the demos.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    j = np.arange(1, basis.J + 1, dtype=float)
    return np.sqrt(2.0) * np.sin(np.outer(j, np.pi * xi))
