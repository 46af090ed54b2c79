"""Region-to-disc conformal maps: zipper core + symmetry averaging +
boundary correspondence bookkeeping.

The delivered forward map averages the raw zipper over the region's
rotational symmetry group (making the symmetry exact by construction); the
inverse is the raw zipper inverse, so round-trip error is of the order of
the raw symmetry defect, which is what the accuracy field reports.

A ConformalMap may carry a `pre` map (plane -> zipper plane); the exterior
region is passed through the inversion 1/(z - c) this way, with the zipper
acting on the bounded inverted polyline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import MapDiverged
from ..geometry.regions import Region, points_in_polygon, resample_polyline
from .zipper import ZipperMap


@dataclass
class ConformalMap:
    region: Region                  # region in the zipper plane
    zipper: ZipperMap
    center: complex                 # marked center in the zipper plane
    sym_order: int = 1
    average: bool = False           # averaging is measurably worse near the
    accuracy: float = np.nan        # boundary; kept as an opt-in experiment
    pre: Callable | None = None
    pre_inv: Callable | None = None
    boundary_points: np.ndarray | None = field(default=None, repr=False)
    boundary_angles: np.ndarray | None = field(default=None, repr=False)
    mark_angles: dict = field(default_factory=dict)

    def forward_zp(self, w) -> np.ndarray:
        """Forward map from the zipper plane (post-`pre`) to the disc."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        k = self.sym_order
        if k <= 1 or not self.average:
            return self.zipper.forward(w)
        zc = self.zipper.center
        rho = np.exp(2j * np.pi / k)
        acc = np.zeros(w.shape, dtype=complex)
        for j in range(k):
            acc += rho ** (-j) * self.zipper.forward(zc + rho ** j * (w - zc))
        return acc / k

    def forward(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.pre is not None:
            z = self.pre(z)
        return self.forward_zp(z)

    def inverse(self, w) -> np.ndarray:
        z = self.zipper.inverse(np.atleast_1d(np.asarray(w, dtype=complex)))
        return self.pre_inv(z) if self.pre_inv is not None else z

    def inverse_zp(self, w) -> np.ndarray:
        return self.zipper.inverse(np.atleast_1d(np.asarray(w, dtype=complex)))

    def forward_jet(self, z):
        """(w, phi', phi'') with exact chain-rule derivatives (raw map)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.pre is None:
            return self.zipper.forward_jet(z)
        u = self.pre(z)
        # the only pre-map used is the inversion u = 1/(z - c)
        u1 = -u * u
        u2 = 2.0 * u * u * u
        w, d1, d2 = self.zipper.forward_jet(u)
        return w, d1 * u1, d2 * u1 * u1 + d1 * u2

    def scale(self) -> float:
        v = self.region.vertices
        return float(max(np.ptp(v.real), np.ptp(v.imag)))


def map_region(region: Region, symmetry_order: int = 4,
               n_boundary: int = 900, corner_ratio: float = 0.6,
               corner_depth: int = 7, pre=None, pre_inv=None,
               accuracy_limit: float = 5e-2, average: bool = False) -> ConformalMap:
    """Numerical conformal map of a simply connected region onto the disc,
    center to 0, positive derivative at the center.

    symmetry_order sets the rotation group used to measure the symmetry
    defect (and to average when `average` is set; the raw map is the default
    because averaging mixes independent near-boundary errors).
    """
    pts, vert_index = resample_polyline(region.vertices, n_boundary,
                                        corner_ratio, corner_depth,
                                        corner_idx=region.corner_idx)
    zm = ZipperMap(pts, region.center)
    scale = max(np.ptp(pts.real), np.ptp(pts.imag))
    h = 1e-6 * scale
    d = (zm.forward(np.array([region.center + h]))[0]
         - zm.forward(np.array([region.center - h]))[0]) / (2 * h)
    zm.set_rotation(np.conj(d) / abs(d))

    cmap = ConformalMap(region=region, zipper=zm, center=region.center,
                        sym_order=symmetry_order, average=average,
                        pre=pre, pre_inv=pre_inv)
    cmap.boundary_points = zm.boundary
    cmap.boundary_angles = zm.boundary_angles
    # vert_index refers to the resampled points; the zipper may drop
    # near-duplicates, so route through its kept-index table
    remap = np.searchsorted(zm.kept, np.clip(vert_index, 0, zm.kept[-1]))
    remap = np.clip(remap, 0, len(zm.kept) - 1)
    for key, idx in region.marks.items():
        if np.ndim(idx) == 0:
            idx = (idx,)
        cmap.mark_angles[key] = tuple(zm.boundary_angles[remap[i]]
                                      for i in idx)

    # accuracy probes: shrunk vertices that stay inside the region
    probes = []
    for f in (0.35, 0.55):
        cand = region.center + f * (region.vertices[::3] - region.center)
        keep = points_in_polygon(cand, region.vertices)
        probes.append(cand[keep])
    probes = np.concatenate(probes)
    if probes.size == 0:
        raise MapDiverged("no interior probes found")
    w = cmap.forward_zp(probes)
    zz = cmap.inverse_zp(w)
    roundtrip = float(np.max(np.abs(zz - probes)) / scale)
    sym_defect = 0.0
    if symmetry_order > 1:
        zc = zm.center
        rho = np.exp(2j * np.pi / symmetry_order)
        rot = cmap.forward_zp(zc + rho * (probes - zc))
        d = np.abs(rot - rho * w)
        sym_defect = float(np.quantile(d, 0.9))
    cmap.accuracy = max(roundtrip, sym_defect)
    if not np.isfinite(cmap.accuracy) or cmap.accuracy > accuracy_limit:
        raise MapDiverged(f"map accuracy {cmap.accuracy:.3g} above limit; "
                          "refine the boundary polyline")
    return cmap
