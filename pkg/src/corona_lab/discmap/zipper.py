"""Geodesic zipper: numerical conformal map of a Jordan polyline onto the disc.

The boundary is welded one point at a time by elementary slit maps
(Moebius + square root); the composition maps the interior onto the upper
half plane and a final Cayley transform takes it to the unit disc with a
marked center at 0.

Boundary images are obtained by evaluating the forward map at points nudged
slightly into the domain (the welded prongs are two-sided, so tracking raw
boundary values through the composition would pick arbitrary sides); the
closing parameter is the image of the starting vertex, which stays a
single-sided curve endpoint and is tracked with the sign-preserving real
branch of each slit map.

All maps evaluate on arrays; forward and inverse are each O(n_boundary)
array operations per call.
"""
from __future__ import annotations

import numpy as np

from ..errors import MapDiverged


def _sqrt_up(v: np.ndarray) -> np.ndarray:
    """Branch of sqrt with nonnegative imaginary part."""
    w = np.sqrt(np.asarray(v, dtype=complex))
    return np.where(w.imag < 0.0, -w, w)


def _slit_forward(z, b, c):
    """Forward slit map sqrt(moebius(z)^2 + c^2), upper-half-plane branch."""
    if np.isfinite(b):
        with np.errstate(divide="ignore", invalid="ignore"):
            w = z / (1.0 - z / b)
        w = np.where(np.isinf(z), -b + 0.0j, w)
    else:
        w = z
    m = max(abs(c), 1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        out = m * _sqrt_up((w / m) ** 2 + (c / m) ** 2)
    return np.where(np.isinf(w), np.inf + 0.0j, out)


def _slit_forward_real(x: float, b: float, c: float) -> float:
    """Boundary (real) extension of the slit map; sign-preserving."""
    if np.isinf(x):
        if np.isfinite(b):
            x = -b
        else:
            return np.inf
    elif np.isfinite(b):
        if x == b:
            return np.inf
        x = x / (1.0 - x / b)
    return np.sign(x) * np.hypot(x, c)


def _slit_inverse(w, b, c):
    m = max(abs(c), 1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        v = m * _sqrt_up((w / m) ** 2 - (c / m) ** 2)
    if np.isfinite(b):
        with np.errstate(divide="ignore", invalid="ignore"):
            z = v / (1.0 + v / b)
    else:
        z = v
    return z


class ZipperMap:
    """Conformal map interior(polyline) -> unit disc, center -> 0."""

    def __init__(self, boundary: np.ndarray, center: complex):
        pts = np.asarray(boundary, dtype=complex)
        scale = max(np.ptp(pts.real), np.ptp(pts.imag))
        gap = np.abs(pts - np.roll(pts, 1))
        self.kept = np.nonzero(gap > 1e-12 * scale)[0]
        pts = pts[self.kept]
        if len(pts) < 8:
            raise MapDiverged("need at least 8 boundary points")
        area = 0.5 * np.sum((pts.real * np.roll(pts.imag, -1)
                             - pts.imag * np.roll(pts.real, -1)))
        if area <= 0:
            raise MapDiverged("boundary polyline must be counterclockwise")
        self.boundary = pts
        self.center = complex(center)
        self._build()
        self._boundary_table()

    def _build(self):
        pts = self.boundary
        n = len(pts)
        p0, p1 = pts[0], pts[1]
        rest = np.concatenate([pts[2:], [self.center]]).astype(complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            rest = 1j * _sqrt_up((rest - p1) / (rest - p0))
        rest = np.where(rest.imag < 0, -rest, rest)
        x0 = np.inf  # image of p0: single-sided curve endpoint, real track
        params = []
        for k in range(n - 2):
            a = rest[k]
            if not np.isfinite(a) or a.imag <= 0.0:
                raise MapDiverged(
                    f"boundary point {k + 2} lost the upper half plane "
                    f"(image {a}); refine the polyline")
            asq = abs(a) ** 2
            b = asq / a.real if abs(a.real) > 1e-300 else np.inf
            c = asq / a.imag
            params.append((b, c))
            rest = _slit_forward(rest, b, c)
            rest[k] = 0.0
            x0 = _slit_forward_real(x0, b, c)
        zeta = float(np.real(x0))
        if not np.isfinite(zeta) or zeta == 0.0:
            raise MapDiverged("degenerate closing parameter")
        self._params = params
        self._zeta = zeta
        cimg = rest[-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            cimg = cimg / (1.0 - cimg / zeta)
        self._sq_sign = 1.0 if cimg.real > 0.0 else -1.0
        cimg = self._final_square(np.array([cimg]))[0]
        if not (np.isfinite(cimg) and cimg.imag > 0):
            raise MapDiverged("center did not land in the upper half plane")
        self._cayley_a = cimg
        self._rot = 1.0 + 0.0j

    def _boundary_table(self):
        pts = self.boundary
        nxt = np.roll(pts, -1)
        prv = np.roll(pts, 1)
        tang = nxt - prv
        tang = tang / np.abs(tang)
        eps = 1e-3 * np.minimum(np.abs(nxt - pts), np.abs(pts - prv))
        probes = pts + 1j * tang * eps
        img = self.forward(probes)
        bad = ~np.isfinite(img) | (np.abs(img) >= 1.0)
        if np.any(bad):
            # fall back to a deeper nudge for the few stragglers
            probes2 = pts[bad] + 1j * tang[bad] * (20 * eps[bad])
            img2 = self.forward(probes2)
            img[bad] = img2
        if np.any(~np.isfinite(img)):
            raise MapDiverged("boundary correspondence evaluation failed")
        self.boundary_images = img / np.abs(img)
        self.boundary_angles = np.angle(self.boundary_images)

    def _final_square(self, z):
        with np.errstate(invalid="ignore", over="ignore"):
            w = z * z if self._sq_sign > 0 else -(z * z)
        return np.where(np.isinf(z), np.inf + 0.0j, w)

    def _final_square_inv(self, w):
        if self._sq_sign > 0:
            return np.sqrt(np.asarray(w, dtype=complex))
        return -np.sqrt(np.asarray(-w, dtype=complex))

    def set_rotation(self, rot: complex):
        self._rot = complex(rot) / abs(rot)
        self.boundary_images = self.boundary_images * self._rot
        self.boundary_angles = np.angle(self.boundary_images)

    # ------------------------------------------------------------------
    def forward_jet(self, z):
        """(w, w', w'') of the forward map, all by exact chain rule.

        Finite differences of the composition are useless for w'' (the
        1/h^2 amplification digs into the composition's rounding noise), so
        every elementary map propagates its own closed-form derivatives.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        p0, p1 = self.boundary[0], self.boundary[1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (z - p1) / (z - p0)
            r1 = (p1 - p0) / (z - p0) ** 2
            r2 = -2.0 * (p1 - p0) / (z - p0) ** 3
        w = 1j * _sqrt_up(ratio)
        w = np.where(w.imag < 0, -w, w)
        # w^2 = -ratio: 2 w w' = -r1; 2 w'^2 + 2 w w'' = -r2
        d1 = -r1 / (2.0 * w)
        d2 = -(r2 + 2.0 * d1 * d1) / (2.0 * w)
        for b, c in self._params:
            if np.isfinite(b):
                den = 1.0 - w / b
                u = w / den
                u1 = 1.0 / den ** 2
                u2 = 2.0 / (b * den ** 3)
                d2 = u2 * d1 * d1 + u1 * d2
                d1 = u1 * d1
                w = u
            m = max(abs(c), 1.0)
            v = m * _sqrt_up((w / m) ** 2 + (c / m) ** 2)
            v1 = w / v
            v2 = (1.0 - v1 * v1) / v
            d2 = v2 * d1 * d1 + v1 * d2
            d1 = v1 * d1
            w = v
        zeta = self._zeta
        den = 1.0 - w / zeta
        u1 = 1.0 / den ** 2
        u2 = 2.0 / (zeta * den ** 3)
        d2 = u2 * d1 * d1 + u1 * d2
        d1 = u1 * d1
        w = w / den
        s = self._sq_sign
        d2 = s * (2.0 * d1 * d1 + 2.0 * w * d2)
        d1 = s * 2.0 * w * d1
        w = s * w * w
        a = self._cayley_a
        den = w - np.conj(a)
        c1 = a - np.conj(a)
        u1 = c1 / den ** 2
        u2 = -2.0 * c1 / den ** 3
        d2 = u2 * d1 * d1 + u1 * d2
        d1 = u1 * d1
        w = (w - a) / den
        return self._rot * w, self._rot * d1, self._rot * d2

    def forward(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        p0, p1 = self.boundary[0], self.boundary[1]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1j * _sqrt_up((z - p1) / (z - p0))
        w = np.where(w.imag < 0, -w, w)
        w = np.where(z == p0, np.inf + 0.0j, w)
        for b, c in self._params:
            w = _slit_forward(w, b, c)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(np.isinf(w), -self._zeta + 0.0j,
                         w / (1.0 - w / self._zeta))
        w = self._final_square(w)
        a = self._cayley_a
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(np.isinf(w), 1.0 + 0.0j,
                           (w - a) / (w - np.conj(a)))
        return self._rot * out

    def inverse(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=complex)) / self._rot
        a = self._cayley_a
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (a - np.conj(a) * w) / (1.0 - w)
        z = self._final_square_inv(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = z / (1.0 + z / self._zeta)
        for b, c in reversed(self._params):
            z = _slit_inverse(z, b, c)
        p0, p1 = self.boundary[0], self.boundary[1]
        rho = -(z * z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (p1 - p0 * rho) / (1.0 - rho)
        return out
