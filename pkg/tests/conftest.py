"""Shared helpers for the test suite: independent oracles and circular stats."""

import numpy as np

from diracsim import make_grid, UnitMap, BenchConfig


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def projector_trace_oracle(grid, rho):
    """Brute-force Tr[P_k X_m rho] from explicit projector matrices."""
    n = grid.n
    u = grid.overlap_matrix
    out = np.empty((n, n), dtype=complex)
    for m in range(n):
        xm = np.zeros((n, n), dtype=complex)
        xm[m, m] = 1.0
        for k in range(n):
            pk = np.outer(u[:, k], u[:, k].conj())
            out[m, k] = np.trace(pk @ xm @ rho)
    return out


def displaced_trace_oracle(k_basis, rho):
    """Brute-force Tr[pi_k' pi_x rho] in an arbitrary orthonormal k' basis."""
    n = rho.shape[0]
    out = np.empty((n, n), dtype=complex)
    for m in range(n):
        xm = np.zeros((n, n), dtype=complex)
        xm[m, m] = 1.0
        for j in range(n):
            pk = np.outer(k_basis[:, j], k_basis[:, j].conj())
            out[m, j] = np.trace(pk @ xm @ rho)
    return out


def circ_centroid_bin(w):
    """Phasor-mean centroid of a periodic profile, in fractional bins [0, n)."""
    n = len(w)
    ph = np.sum(w * np.exp(2j * np.pi * np.arange(n) / n))
    return (np.angle(ph) * n / (2.0 * np.pi)) % n


def circ_shift_bins(c2, c1, n):
    """Circular difference c2 - c1 wrapped into (-n/2, n/2]."""
    return ((c2 - c1 + n / 2.0) % n) - n / 2.0


def circ_variance_bins(w):
    """Second moment about the circular centroid, in bins^2."""
    n = len(w)
    c = circ_centroid_bin(w)
    rolled = np.roll(w, int(round(n / 2.0 - c)))
    idx = np.arange(n)
    mu = np.sum(rolled * idx) / np.sum(rolled)
    return np.sum(rolled * (idx - mu) ** 2) / np.sum(rolled)


def bench_grid(n=256, mixed=False, **bench_kwargs):
    """Default-bench grid + config pair at a chosen resolution."""
    grid = make_grid(n, 44e-3 / n, 22e-3, UnitMap(780e-9, 1.0, 4.935))
    cfg = BenchConfig(aperture_halfwidth=22e-3, edge_position=25e-3,
                      mixed=mixed, **bench_kwargs)
    return grid, cfg
