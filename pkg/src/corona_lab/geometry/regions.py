"""Plane regions as closed polylines, plus the polygon utilities the rest of
the code leans on (membership, resampling with corner grading, distances).

Vertices are complex numbers in counterclockwise order; the closing edge from
the last vertex back to the first is implicit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Region:
    """Simply connected region bounded by a closed polyline."""

    label: str
    vertices: np.ndarray            # complex, ccw, implicit closure
    center: complex
    corner_idx: np.ndarray | None = None   # indices of true corners
    marks: dict = field(default_factory=dict)  # name -> vertex index

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=complex)
        if self.corner_idx is None:
            self.corner_idx = np.arange(len(self.vertices))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def signed_area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1)
        return 0.5 * float(np.sum(v.real * w.imag - v.imag * w.real))

    def contains(self, z) -> np.ndarray:
        return points_in_polygon(np.asarray(z, dtype=complex), self.vertices)

    def boundary_distance(self, z) -> np.ndarray:
        return dist_to_polyline(np.asarray(z, dtype=complex), self.vertices,
                                closed=True)

    def perimeter_points(self) -> np.ndarray:
        return self.vertices


def points_in_polygon(z: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule membership test, vectorized over z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x, y = z.real, z.imag
    px, py = poly.real, poly.imag
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    inside = np.zeros(z.shape, dtype=bool)
    for k in range(len(poly)):
        x1, y1, x2, y2 = px[k], py[k], qx[k], qy[k]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        hit = crosses & (x < xint)
        inside ^= hit
    return inside


def dist_to_segments(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each z to the nearest of the segments a[k]->b[k]."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = np.full(z.shape, np.inf)
    for k in range(len(a)):
        e = b[k] - a[k]
        L2 = abs(e) ** 2
        if L2 == 0.0:
            dk = np.abs(z - a[k])
        else:
            t = np.clip(((z - a[k]) * np.conj(e)).real / L2, 0.0, 1.0)
            dk = np.abs(z - (a[k] + t * e))
        d = np.minimum(d, dk)
    return d


def dist_to_polyline(z: np.ndarray, poly: np.ndarray, closed: bool = True) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1) if closed else poly[1:]
    if not closed:
        a = poly[:-1]
    return dist_to_segments(z, a, b)


def resample_polyline(vertices: np.ndarray, n_target: int,
                      corner_ratio: float = 0.6, corner_depth: int = 7,
                      corner_idx=None) -> tuple[np.ndarray, np.ndarray]:
    """Resample a closed polyline for conformal mapping.

    Each edge gets points proportional to its length (at least one), with a
    geometric refinement toward endpoints that are true corners (all of them
    unless corner_idx restricts the set; curved sections arrive pre-sampled
    and need no grading).  Returns (points, index_of_original_vertex).
    """
    v = np.asarray(vertices, dtype=complex)
    m = len(v)
    is_corner = np.ones(m, dtype=bool)
    if corner_idx is not None:
        is_corner[:] = False
        is_corner[np.asarray(corner_idx, dtype=int)] = True
    edges = np.roll(v, -1) - v
    lengths = np.abs(edges)
    total = lengths.sum()
    min_step = total / (12.0 * max(n_target, 1))
    tail = np.array([corner_ratio ** (corner_depth - i)
                     for i in range(corner_depth)])
    pts: list[complex] = []
    vert_index = np.zeros(m, dtype=int)
    for k in range(m):
        vert_index[k] = len(pts)
        pts.append(v[k])
        L = lengths[k]
        if L == 0.0:
            continue
        n_mid = max(int(round(n_target * L / total)), 1)
        lo = tail * 0.5 if is_corner[k] else np.empty(0)
        hi = 1.0 - tail[::-1] * 0.5 if is_corner[(k + 1) % m] else np.empty(0)
        lo = lo[lo * L >= min_step]
        hi = hi[(1.0 - hi) * L >= min_step]
        a = lo[-1] if lo.size else 0.0
        b = hi[0] if hi.size else 1.0
        mid = np.linspace(a, b, n_mid + 2)[1:-1]
        ts = np.unique(np.concatenate([lo, mid, hi]))
        ts = ts[(ts > 0.0) & (ts < 1.0)]
        last = 0.0
        for t in ts:
            if (t - last) * L < 0.25 * min_step:
                continue
            pts.append(v[k] + t * edges[k])
            last = t
    return np.asarray(pts, dtype=complex), vert_index
