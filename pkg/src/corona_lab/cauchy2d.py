"""Planar (solid) Cauchy transforms: C[f](z) = -(1/pi) iint f(w)/(w-z) dA(w).

C[f] solves dbar C[f] = f.  Everything here supports the subtraction scheme
used for the dbar solvers: plain quadrature sums give values that are
analytic off the nodes, and the exact closed forms below restore the correct
dbar behavior through terms evaluated at the target point:

    b(z) = Q[f] - f(z) (Q[1] - C[1](z)) - g(z) (Q[wbar - zbar] - C[wbar-zbar](z))

with g = dbar f, which satisfies dbar b = f up to second-order quadrature
moments.  Closed forms: over the unit disc C[1](z) = zbar and
C[wbar](z) = zbar^2/2; over a polygon both come from Stokes edge sums.
"""
from __future__ import annotations

import numpy as np


def _edge_terms(corners: np.ndarray, z: np.ndarray):
    """Per-edge quantities for the polygon formulas.

    corners: (Q, K) complex polygon corners (closed implicitly), z: (B,).
    Returns kappa (B,Q,K), logr (B,Q,K), e (Q,K), cbar-terms for moments.
    """
    a = corners
    b = np.roll(corners, -1, axis=-1)
    e = b - a
    z = z.reshape(z.shape + (1,) * corners.ndim)
    c = a - z                       # (B, Q, K)
    cb = np.conj(c)
    eb = np.conj(e)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = cb - c * eb / e
        logr = np.log((b - z) / c)
    return kappa, logr, e, eb, c, cb


def polygon_cauchy_const(corners: np.ndarray, z: np.ndarray) -> np.ndarray:
    """C[1_P](z) for polygons; corners (..., K), z (B,) -> (B, ...)."""
    corners = np.asarray(corners, dtype=complex)
    single = corners.ndim == 1
    if single:
        corners = corners[None, :]
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    kappa, logr, *_ = _edge_terms(corners, z)
    out = -np.sum(kappa * logr, axis=-1) / (2j * np.pi)
    return out[:, 0] if single else out


def polygon_cauchy_wbar(corners: np.ndarray, z: np.ndarray) -> np.ndarray:
    """C[(wbar - zbar) 1_P](z); corners (..., K), z (B,) -> (B, ...)."""
    corners = np.asarray(corners, dtype=complex)
    single = corners.ndim == 1
    if single:
        corners = corners[None, :]
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    kappa, logr, e, eb, c, cb = _edge_terms(corners, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        poly = 0.5 * eb * eb + 2.0 * cb * eb - c * eb * eb / e
    out = -np.sum(kappa ** 2 * logr + poly, axis=-1) / (4j * np.pi)
    return out[:, 0] if single else out


def polygon_cauchy_const_paired(corners: np.ndarray, z: np.ndarray) -> np.ndarray:
    """C[1_P](z) with one polygon per point: corners (B, K), z (B,) -> (B,)."""
    a = np.asarray(corners, dtype=complex)
    b = np.roll(a, -1, axis=-1)
    z = np.asarray(z, dtype=complex)[:, None]
    e = b - a
    c = a - z
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.conj(c) - c * np.conj(e) / e
        logr = np.log((b - z) / c)
    return -np.sum(kappa * logr, axis=-1) / (2j * np.pi)


def polygon_cauchy_wbar_paired(corners: np.ndarray, z: np.ndarray) -> np.ndarray:
    """C[(wbar-zbar) 1_P](z), one polygon per point."""
    a = np.asarray(corners, dtype=complex)
    b = np.roll(a, -1, axis=-1)
    z = np.asarray(z, dtype=complex)[:, None]
    e = b - a
    eb = np.conj(e)
    c = a - z
    cb = np.conj(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = cb - c * eb / e
        logr = np.log((b - z) / c)
        poly = 0.5 * eb * eb + 2.0 * cb * eb - c * eb * eb / e
    return -np.sum(kappa ** 2 * logr + poly, axis=-1) / (4j * np.pi)


def polygon_area(corners: np.ndarray) -> np.ndarray:
    a = np.asarray(corners, dtype=complex)
    b = np.roll(a, -1, axis=-1)
    return 0.5 * np.abs(np.sum(a.real * b.imag - a.imag * b.real, axis=-1))


def disc_cauchy_const(z: np.ndarray) -> np.ndarray:
    """C[1_D](z) = conj(z) on the unit disc."""
    return np.conj(np.asarray(z, dtype=complex))


def disc_cauchy_wbar(z: np.ndarray) -> np.ndarray:
    """C[(wbar - zbar) 1_D](z) = -conj(z)^2 / 2 on the unit disc."""
    zb = np.conj(np.asarray(z, dtype=complex))
    return -0.5 * zb * zb


def kernel_sum(nodes: np.ndarray, coeffs: np.ndarray, z: np.ndarray,
               chunk: int = 4096) -> np.ndarray:
    """Q[z] = -(1/pi) sum_q coeffs_q / (nodes_q - z), chunked over z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=complex)
    for lo in range(0, z.size, chunk):
        zz = z.ravel()[lo:lo + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            out.ravel()[lo:lo + chunk] = (coeffs[None, :]
                                          / (nodes[None, :] - zz)).sum(axis=1)
    return -out / np.pi


def wirtinger_dbar(f, z, h: float = 1e-6) -> np.ndarray:
    """Finite-difference Wirtinger d/d(zbar) of a smooth field."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    fx = (np.asarray(f(z + h)) - np.asarray(f(z - h))) / (2 * h)
    fy = (np.asarray(f(z + 1j * h)) - np.asarray(f(z - 1j * h))) / (2 * h)
    return 0.5 * (fx + 1j * fy)


def wirtinger_d(f, z, h: float = 1e-6) -> np.ndarray:
    """Finite-difference Wirtinger d/dz of a smooth field."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    fx = (np.asarray(f(z + h)) - np.asarray(f(z - h))) / (2 * h)
    fy = (np.asarray(f(z + 1j * h)) - np.asarray(f(z - 1j * h))) / (2 * h)
    return 0.5 * (fx - 1j * fy)
