"""Pathwise weak space-time solver for the stochastic heat equation.

One realization of the problem

    dU + kappa(t) A0 U dt = f dt + Psi dW,   U(0) = U0,

is discretized per eigenmode with trial functions that are piecewise
constant in time (the first solution component U1) plus a terminal value in
L^2 (the second component U2), tested against continuous piecewise-linear
hat functions.  All integrals in the bilinear form and the load functionals
are evaluated exactly for this pairing: the time derivative of a hat is
piecewise constant, the stiffness term is a trapezoid that is exact for
linear test functions, and the noise functional of an affine-in-time test
function is an exact linear combination of the interval increments dW and
the time-weighted integrals iW carried by NoiseSample.

The resulting per-mode system is lower bidiagonal in time, so one forward
sweep produces U1 on every interval and U2 at every node simultaneously;
the weak identity then holds at every node against every discrete test
function up to round-off.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .noise import AUX_KAPPA, NoiseSample, Stream, TimeGrid, uniforms
from .spectral import EigenBasis, as_coeffs

__all__ = [
    "OperatorSpec",
    "LoadSpec",
    "EnergyRecord",
    "SpaceTimeSolution",
    "assemble_and_solve",
    "residual",
    "energy_norms",
    "check_versions",
    "export_solution_csv",
    "export_energy_json",
]


@dataclass(frozen=True)
class OperatorSpec:
    """Scalar random elliptic coefficient kappa(omega, t) scaling A0.

    The realized operator is A(omega, t) = kappa(omega, t) * A0 with
    A_min <= kappa <= A_max.  `law` is either "constant" (kappa == value)
    or "uniform" (per-interval i.i.d. uniform on [A_min, A_max], drawn from
    the path's counter-based stream so realizations are reproducible).
    """

    A_min: float
    A_max: float
    law: str = "constant"
    value: float | None = None

    def __post_init__(self):
        if self.A_min <= 0:
            raise ValueError("A_min must be positive (coercivity)")
        if self.A_max < self.A_min:
            raise ValueError("need A_max >= A_min")
        if self.law not in ("constant", "uniform"):
            raise ValueError(f"unknown coefficient law {self.law!r}")
        if self.law == "constant":
            v = self.value
            if v is None:
                if self.A_min != self.A_max:
                    raise ValueError(
                        "constant law needs an explicit value when A_min < A_max"
                    )
                v = self.A_min
            if not self.A_min <= v <= self.A_max:
                raise ValueError("constant value outside [A_min, A_max]")
            object.__setattr__(self, "value", float(v))

    @property
    def is_constant(self):
        return self.law == "constant"

    def realize(self, grid, stream):
        """Piecewise-constant realization kappa_n, shape (N,)."""
        return self.realize_paths(grid, stream.seed, [stream.path])[0]

    def realize_paths(self, grid, seed, paths):
        """Realizations for several paths, shape (P, N)."""
        paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
        N = grid.N
        if self.is_constant:
            return np.full((paths.size, N), self.value)
        out = np.empty((paths.size, N))
        for ip, p in enumerate(paths):
            u = uniforms(seed, p, 0, AUX_KAPPA, N)
            out[ip] = self.A_min + (self.A_max - self.A_min) * u
        return out


@dataclass(frozen=True)
class LoadSpec:
    """Deterministic data: initial value, source term, additive noise gain.

    f may be a single coefficient vector (constant in time) or an (N, J)
    panel of per-interval values; general time dependence must be projected
    to piecewise constants by the caller (cell averages).  psi_diag is the
    diagonal of the constant additive-noise operator Psi.
    """

    U0: np.ndarray
    f: np.ndarray
    psi_diag: np.ndarray

    def __post_init__(self):
        for name in ("U0", "f", "psi_diag"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, arr)

    @classmethod
    def zero(cls, J):
        z = np.zeros(J)
        return cls(U0=z, f=z, psi_diag=z)

    def f_panel(self, N):
        """f as an (N, J) per-interval panel."""
        if self.f.ndim == 1:
            return np.broadcast_to(self.f, (N, self.f.size))
        if self.f.shape[0] != N:
            raise ValueError("f panel rows must equal the number of intervals")
        return self.f


@dataclass(frozen=True)
class EnergyRecord:
    """Energy functionals of one solution path."""

    l2v_sq: float    # int_0^T ||U1||_V^2 dt
    max_h_sq: float  # max over nodes of ||U2||_H^2


@dataclass(frozen=True)
class SpaceTimeSolution:
    """The pair (U1, U2): U1 per interval (N, J), U2 per node (N+1, J)."""

    U1: np.ndarray
    U2: np.ndarray
    energy: EnergyRecord
    grid: TimeGrid
    basis: EigenBasis
    kappa: np.ndarray  # realized coefficient, (N,)

    def __post_init__(self):
        N, J = self.grid.N, self.basis.J
        if self.U1.shape != (N, J) or self.U2.shape != (N + 1, J):
            raise ValueError("solution arrays have inconsistent shapes")


def sweep(lam_eff, F, P, R, u0, h):
    """Forward-sweep solve of the discrete weak system.

    Parameters are panels over (..., N, J): lam_eff = kappa_n * lambda_j,
    F the source, P = <Psi dW> and R = <Psi iW> the per-interval noise
    loads; u0 has shape (..., J).  Returns (U1, U2) with U2 including both
    endpoints.  Broadcasting over leading axes gives batched Monte Carlo
    solves.  Every per-mode step is a closed-form scalar operation; the
    diagonal entries 1 + lam_eff*h/2 are positive, so no step can be
    singular.
    """
    lam_eff, F, P, R = np.broadcast_arrays(lam_eff, F, P, R)
    if np.any(lam_eff <= 0):
        raise ValueError("effective eigenvalues must be positive")
    batch = lam_eff.shape[:-2]
    N, J = lam_eff.shape[-2:]
    u0 = np.broadcast_to(u0, batch + (J,))
    a = 0.5 * h * lam_eff
    U1 = np.empty(batch + (N, J))
    U2 = np.empty(batch + (N + 1, J))
    U2[..., 0, :] = u0
    u = (u0 + 0.5 * h * F[..., 0, :] + P[..., 0, :] - R[..., 0, :] / h) / (
        1.0 + a[..., 0, :]
    )
    U1[..., 0, :] = u
    for n in range(1, N):
        carry = (
            u * (1.0 - a[..., n - 1, :])
            + 0.5 * h * F[..., n - 1, :]
            + R[..., n - 1, :] / h
        )
        U2[..., n, :] = carry
        u = (carry + 0.5 * h * F[..., n, :] + P[..., n, :] - R[..., n, :] / h) / (
            1.0 + a[..., n, :]
        )
        U1[..., n, :] = u
    U2[..., N, :] = (
        u * (1.0 - a[..., N - 1, :])
        + 0.5 * h * F[..., N - 1, :]
        + R[..., N - 1, :] / h
    )
    return U1, U2


def additive_noise_loads(load, noise):
    """Per-interval noise loads (P, R) of a constant diagonal Psi, (N, J)."""
    psi = load.psi_diag
    return psi * noise.dW.T, psi * noise.iW.T


def assemble_and_solve(op, load, noise, grid, basis, path_stream=None):
    """Solve one path of the weak space-time formulation.

    The coefficient realization is drawn from `path_stream` (defaults to
    the noise sample's own stream, so solver and oracle share one omega).
    """
    stream = path_stream if path_stream is not None else noise.stream
    kappa = op.realize(grid, stream)
    lam_eff = kappa[:, None] * basis.lambdas[None, :]
    F = load.f_panel(grid.N)
    P, R = additive_noise_loads(load, noise)
    U1, U2 = sweep(lam_eff, F, P, R, as_coeffs(load.U0, basis), grid.h)
    l2v, maxh = energy_from_arrays(U1, U2, grid, basis)
    return SpaceTimeSolution(
        U1=U1,
        U2=U2,
        energy=EnergyRecord(l2v_sq=float(l2v), max_h_sq=float(maxh)),
        grid=grid,
        basis=basis,
        kappa=kappa,
    )


def energy_from_arrays(U1, U2, grid, basis):
    """(int ||U1||_V^2 dt, max_n ||U2||_H^2); broadcasts over batch axes."""
    l2v = grid.h * np.sum(basis.lambdas * U1**2, axis=(-2, -1))
    maxh = np.max(np.sum(U2**2, axis=-1), axis=-1)
    return l2v, maxh


def energy_norms(sol, grid, basis):
    """Energy functionals of a computed solution."""
    l2v, maxh = energy_from_arrays(sol.U1, sol.U2, grid, basis)
    return float(l2v), float(maxh)


def _test_norms(lam, h, N):
    """||psi_k phi_j||_X for full hats k=0..N-1 and the truncated horizon hat.

    Returns (full, horizon): `full[k]` is the X-norm of hat k tested on any
    horizon strictly beyond its support; `horizon` is the norm of the
    ascending half-hat at its own horizon node (value 1 there, so the
    terminal boundary term contributes 1).  Shapes (N, J) and (J,).
    """
    k = np.arange(N)
    mass = np.where(k == 0, h / 3.0, 2.0 * h / 3.0)
    stiff = np.where(k == 0, 1.0 / h, 2.0 / h)
    bnd = np.where(k == 0, 1.0, 0.0)
    full = np.sqrt(
        lam[None, :] * mass[:, None]
        + stiff[:, None] / lam[None, :]
        + bnd[:, None]
    )
    horizon = np.sqrt(lam * (h / 3.0) + 1.0 / (lam * h) + 1.0)
    return full, horizon


def residual_panels(U1, U2, kappa, F, P, R, U0, grid, basis):
    """Weak-identity defect from raw per-interval panels.

    Re-assembles the bilinear form and both load functionals directly from
    hat-function values (independent of the sweep's closed-form rows) and
    returns max over test functions and horizons of
    |B*(U, x) - F(x) - W(x)| / ||x||_X.
    """
    N, h = grid.N, grid.h
    lam = basis.lambdas

    # hat values at nodes: psi_k(t_m) = delta_{km}
    hat = np.eye(N + 1)
    left, right = hat[:, :N], hat[:, 1:]          # psi_k at interval ends
    slope = (right - left) / h

    ku = kappa[:, None] * lam[None, :] * U1
    B_int = (left - right) @ U1 + 0.5 * h * (left + right) @ ku
    F_val = 0.5 * h * (left + right) @ F + np.outer(hat[0], U0)
    W_val = left @ P + slope @ R

    rows = B_int - F_val - W_val                  # (N+1, J); k-th test hat
    full_nrm, hor_nrm = _test_norms(lam, h, N)

    # rows k = 0..N-1 are shared by every horizon n > k (hat k is then
    # supported strictly inside [0, t_n] and psi_k(t_n) = 0)
    worst = np.max(np.abs(rows[:N]) / full_nrm)

    # horizon rows: ascending half-hat at t_n plus the boundary term
    hor = (
        U2[1:]
        - U1 * (1.0 - 0.5 * h * kappa[:, None] * lam[None, :])
        - 0.5 * h * F
        - R / h
    )
    worst = max(worst, np.max(np.abs(hor) / hor_nrm[None, :]))

    # degenerate horizon t_0: the identity reduces to U2[0] = U0
    worst = max(worst, float(np.max(np.abs(U2[0] - U0))))
    return float(worst)


def residual(sol, op, load, noise, grid, basis):
    """Largest normalized defect of the weak identity for an additive run."""
    F = load.f_panel(grid.N)
    P, R = additive_noise_loads(load, noise)
    return residual_panels(
        sol.U1, sol.U2, sol.kappa, F, P, R, load.U0, grid, basis
    )


def check_versions(sol, load, noise, grid, basis):
    """Verify the discrete integral identity behind the continuous version.

    U2(t_n) must equal U0 + sum_{m<n} h*(-kappa_m A0 U1_m + f_m) + sum_{m<n}
    Psi dW_m per mode (the constant-in-time test function is the sum of all
    hats, so this is an exact algebraic consequence of the weak identity).
    Also reports the gap between U2 cell averages and U1, which measures how
    far apart the two versions are at finite resolution.
    """
    N, h = grid.N, grid.h
    lam = basis.lambdas
    drift = h * (-sol.kappa[:, None] * lam[None, :] * sol.U1 + load.f_panel(N))
    noise_sum = load.psi_diag * noise.dW.T
    rhs = load.U0 + np.cumsum(drift + noise_sum, axis=0)
    identity_err = float(np.max(np.abs(sol.U2[1:] - rhs)))
    identity_err = max(identity_err, float(np.max(np.abs(sol.U2[0] - load.U0))))

    cell_avg = 0.5 * (sol.U2[:-1] + sol.U2[1:])
    gap = float(np.max(np.sqrt(np.sum((cell_avg - sol.U1) ** 2, axis=-1))))
    return {"identity_max_err": identity_err, "version_gap": gap}


def export_solution_csv(sol, file):
    """Rows (node, mode, U1, U2); U1 is blank at the final node."""
    writer = csv.writer(file)
    writer.writerow(["node", "mode", "U1", "U2"])
    N, J = sol.grid.N, sol.basis.J
    for n in range(N + 1):
        for j in range(J):
            u1 = repr(sol.U1[n, j]) if n < N else ""
            writer.writerow([n, j + 1, u1, repr(sol.U2[n, j])])


def export_energy_json(sol, file):
    json.dump(
        {
            "schema_version": 1,
            "l2v_sq": sol.energy.l2v_sq,
            "max_h_sq": sol.energy.max_h_sq,
            "T": sol.grid.T,
            "N": sol.grid.N,
            "J": sol.basis.J,
        },
        file,
        indent=2,
    )
    file.write("\n")
