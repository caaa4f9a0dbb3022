"""Bayesian propagation of the Dirac distribution to displaced camera planes.

Moving the camera a distance dz past the Fourier-transform plane changes the
strong measurement from momentum to a hybrid observable K', position on the
displaced camera.  Because the input plane sits one focal length before the
FT lens, free propagation past the FT plane acts on the input-plane state as
a pure position-diagonal defocus chirp,

    V(dz) = diag_m exp(-i pi dz x_m^2 / (lambda f^2)),

so the displaced camera pixels correspond to the pulled-back states
``|k'_j> = V^dag |p_j>``.  The state-independent complex conditional

    cond[k', m, kp] = <p_kp|k'> <k'|x_m> / <p_kp|x_m>

propagates any Dirac distribution d to the displaced plane through the Bayes
sum ``e[m, k'] = sum_kp cond[k', m, kp] d[m, kp]``, exactly equal to the
displaced-basis expectation Tr[pi_k' pi_x rho] when the kernel comes from a
unitary.  An alternative kernel evaluates the closed-form spherical-wavelet
(Huygens) propagator on the camera lattice; the two agree up to paraxial
corrections.

All kernels are stored in factored form, ``cond = col[m,j] row[kp,j]
inv[m,kp]``, so propagation is one matrix product and the full n^3 array is
only materialized on demand for small grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, ContractError, DegenerateKernelError,
                     NumericalIntegrityError)
from .lattice import Grid, TWO_PI
from .qstate import BenchConfig, DensityMatrix
from .dirac import DiracDistribution
from . import weaksim

KIND_UNITARY = "discrete-unitary"
KIND_ANALYTIC = "analytic-fresnel"
_COND_MEMORY_LIMIT = 2 ** 30  # refuse to materialize cond arrays above 1 GiB


@dataclass(frozen=True, eq=False)
class PropagatorKernel:
    """Conditional quasi-probability kernel for one camera displacement.

    ``k_basis`` columns are the displaced-plane position eigenstates in the
    x-basis (unitary construction only).  The factor arrays reproduce
    ``cond[j, m, kp] = col[m, j] * row[kp, j] * inv[m, kp]``.
    """

    grid: Grid
    dz: float
    kind: str
    k_basis: np.ndarray | None
    col: np.ndarray
    row: np.ndarray
    inv: np.ndarray

    def cond_array(self) -> np.ndarray:
        """Materialize cond[j, m, kp]; refuses grids where it would not fit."""
        n = self.grid.n
        if 16 * n ** 3 > _COND_MEMORY_LIMIT:
            raise ContractError(
                f"cond array for n={n} needs {16 * n ** 3 / 2 ** 30:.1f} GiB; "
                "use the factored form via bayes_propagate instead"
            )
        return np.einsum("mj,kj,mk->jmk", self.col, self.row, self.inv)


@dataclass(frozen=True, eq=False)
class PropagatedDistribution:
    """Complex array e[m, k'] over (weak position, displaced camera position)."""

    grid: Grid
    dz: float
    e: np.ndarray
    kind: str

    def validate(self, tol: float = 1e-9) -> None:
        total = self.e.sum()
        if abs(total - 1.0) > tol:
            raise ContractError(f"propagated distribution sums to {total}, expected 1")
        for axis, label in ((1, "row"), (0, "column")):
            sums = self.e.sum(axis=axis)
            if np.max(np.abs(sums.imag)) > tol:
                raise NumericalIntegrityError(f"{label} sums have imaginary residual")
            if sums.real.min() < -tol:
                raise NumericalIntegrityError(f"{label} sums have negative entry")


def fresnel_unitary(grid: Grid, dz: float) -> np.ndarray:
    """Paraxial free-space propagation by dz in the camera region.

    The camera-region angular spectrum lives on the input-plane position
    lattice, so the transfer phase exp(-i dz lambda kappa^2 / 4 pi) becomes
    the x-diagonal chirp exp(-i pi dz x^2 / (lambda f^2)).  V(0) = identity.
    """
    units = grid.require_unit_map()
    if dz < 0:
        raise ConfigError(f"camera displacement dz {dz} must be nonnegative")
    lam, f = units.wavelength, units.focal_length
    x_axis = grid.coords - grid.x0  # the optical axis runs through the grid center
    phase = -np.pi * dz * x_axis ** 2 / (lam * f ** 2)
    return np.diag(np.exp(1j * phase))


def build_kernel_unitary(grid: Grid, v: np.ndarray, dz: float = 0.0) -> PropagatorKernel:
    """Exact kernel from a discrete unitary V; its k' states are V^dag |p_j>.

    Completeness (sum over k' equal to one) holds identically, so the Bayes
    sum reproduces displaced-basis expectation values exactly.  ``dz`` is
    recorded as provenance only; it plays no role in the construction.
    """
    v = np.asarray(v, dtype=complex)
    n = grid.n
    if v.shape != (n, n):
        raise ContractError(f"unitary shape {v.shape} does not match grid n={n}")
    defect = np.max(np.abs(v.conj().T @ v - np.eye(n)))
    if defect > 1e-12:
        raise ContractError(f"matrix is not unitary (defect {defect:.3e})")
    u = grid.overlap_matrix
    if np.min(np.abs(u)) == 0.0:
        raise ContractError("overlap matrix has a vanishing entry")
    k_basis = v.conj().T @ u
    return PropagatorKernel(
        grid=grid, dz=float(dz), kind=KIND_UNITARY, k_basis=k_basis,
        col=k_basis.conj(), row=u.conj().T @ k_basis, inv=1.0 / u.conj(),
    )


def analytic_kernel_term(x: float, x_ft: float, kprime: float, dz: float,
                         wavelength: float, focal_length: float) -> complex:
    """One unnormalized spherical-wavelet kernel value in closed form.

    Combines the exact path length from the Fourier-plane point x_ft to the
    displaced camera point k', the lens phase x k' / (f lambda), the
    x_ft-dependent cross term, and the oblique-path correction
    alpha = x dz / (lambda sqrt(x^2 + f^2)); the overall normalization is
    left to the caller.
    """
    r = np.sqrt(dz ** 2 + (x_ft - kprime) ** 2)
    alpha = x * dz / (wavelength * np.sqrt(x ** 2 + focal_length ** 2))
    phase = TWO_PI * (r / wavelength
                      + (x * kprime - x_ft * x) / (focal_length * wavelength)
                      + alpha)
    return complex(np.exp(1j * phase) / r)


def build_kernel_analytic(grid: Grid, dz: float) -> PropagatorKernel:
    """Closed-form spherical-wavelet kernel on the camera pixel lattice.

    The kernel is normalized per (x, p) pair by the completeness condition
    sum_k' cond = 1, which the Bayes sum requires; factors depending only on
    (x, p) cancel under that normalization, leaving the wavelet and the lens
    phase.  The closed form of :func:`analytic_kernel_term` is written for
    the Fourier convention conjugate to this package's <x|p> = exp(+i x p),
    so the kernel built here is its entrywise conjugate: wavelet
    exp(-2 pi i r / lambda)/r and lens phase exp(-2 pi i x k'/(f lambda)).
    This orientation is pinned by paraxial agreement with the unitary
    construction.  Magnification is left out; apply it afterwards as a
    coordinate relabeling.  dz = 0 is singular here and must use the unitary
    kernel.
    """
    units = grid.require_unit_map()
    if dz <= 0:
        raise DegenerateKernelError(
            "analytic kernel is singular at dz = 0; build the unitary kernel instead"
        )
    lam, f = units.wavelength, units.focal_length
    cam = units.ft_plane_coordinate(grid.momenta)
    x_axis = grid.coords - grid.x0  # positions relative to the optical axis
    r = np.sqrt(dz ** 2 + (cam[:, None] - cam[None, :]) ** 2)
    wavelet = np.exp(-1j * TWO_PI * r / lam) / r
    lens = np.exp(-1j * TWO_PI * np.outer(x_axis, cam) / (f * lam))
    norm = lens @ wavelet.T
    if np.min(np.abs(norm)) == 0.0:
        raise NumericalIntegrityError("analytic kernel normalization vanished")
    return PropagatorKernel(
        grid=grid, dz=float(dz), kind=KIND_ANALYTIC, k_basis=None,
        col=lens, row=wavelet, inv=1.0 / norm,
    )


def bayes_propagate(dist: DiracDistribution, kernel: PropagatorKernel) -> PropagatedDistribution:
    """Single-variable Bayes update e[m, k'] = sum_kp cond[k', m, kp] d[m, kp]."""
    if dist.grid != kernel.grid:
        raise ContractError("distribution and kernel live on different grids")
    e = kernel.col * ((kernel.inv * dist.d) @ kernel.row)
    e.setflags(write=False)
    return PropagatedDistribution(grid=dist.grid, dz=kernel.dz, e=e, kind=kernel.kind)


def joint4_tensor(rho: DensityMatrix, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Four-variable joint J[x, q', k', p] = <p|k'><k'|q'><q'|x><x|rho|p>.

    q' eigenstates are V1^dag applied to the position basis, k' eigenstates
    V2^dag applied to the momentum basis.  Summing all four indices gives 1;
    summing x and p gives the two-projector expectation Tr[pi_k' pi_q' rho].
    """
    grid = rho.grid
    u = grid.overlap_matrix
    q_basis = np.asarray(v1, dtype=complex).conj().T
    k_basis = np.asarray(v2, dtype=complex).conj().T @ u
    p2k = u.conj().T @ k_basis
    k2q = k_basis.conj().T @ q_basis
    q2x = q_basis.conj().T
    xrp = rho.rho @ u
    return np.einsum("kc,cb,ba,ak->abck", p2k, k2q, q2x, xrp)


def joint4(rho: DensityMatrix, ix: int, iq: int, ik: int, ip: int,
           v1: np.ndarray, v2: np.ndarray) -> complex:
    """Single entry of the four-variable joint quasi-probability."""
    grid = rho.grid
    for idx in (ix, iq, ik, ip):
        if not 0 <= idx < grid.n:
            raise ContractError(f"index {idx} out of range for n={grid.n}")
    u = grid.overlap_matrix
    q = np.asarray(v1, dtype=complex).conj().T[:, iq]
    k = np.asarray(v2, dtype=complex).conj().T @ u[:, ik]
    p = u[:, ip]
    return complex(np.vdot(p, k) * np.vdot(k, q) * np.conj(q[ix]) * (rho.rho @ p)[ix])


def direct_measure_displaced(rho: DensityMatrix, cfg: BenchConfig, dz: float, *,
                             noise: bool = False, seed: int | None = None,
                             correct: bool = True) -> PropagatedDistribution:
    """Run the weak-measurement pipeline with the camera displaced by dz.

    The system is propagated by the defocus unitary before the strong
    projection, i.e. the readout basis becomes the displaced-plane pixel
    states.  This is the experimental-side oracle for :func:`bayes_propagate`.
    """
    v = fresnel_unitary(rho.grid, dz)
    basis = v.conj().T @ rho.grid.overlap_matrix
    measured, _ = weaksim.scan_with_records(
        rho, cfg, noise=noise, seed=seed, correct=correct, basis=basis
    )
    return PropagatedDistribution(grid=rho.grid, dz=float(dz), e=measured.d, kind="measured")
