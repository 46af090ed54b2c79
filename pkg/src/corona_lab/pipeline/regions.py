"""Assembly of the enlarged pasting domains and their conformal maps.

Each cross at levels 0..N-1 gets a region: its hatted polygon with every
deeper attached lozenge bump replaced by the "chimney" boundary of the
descendant's bubble (two sliver pieces of the descendant's own boundary plus
the pulled-back gamma* arc).  The exterior of the root square is treated as
generation -1 and passed to the zipper through the inversion
w = 1/(z - center).

Maps must therefore be built from the deepest level upward, the exterior
last; solutions are later constructed in the opposite order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import CantorConfig
from ..errors import MapDiverged
from ..geometry.regions import Region
from ..geometry.tree import EXT, CantorTree, Gap
from ..discmap.arcs import ArcSystem, build_arc_system
from ..discmap.conformal import ConformalMap, map_region

_TWO_PI = 2.0 * np.pi


@dataclass
class RegionNode:
    key: object                   # (n, J) or "ext"
    level: int                    # -1 for the exterior
    tree: CantorTree
    region: Region                # zipper-plane polyline (inverted for ext)
    cmap: ConformalMap = None
    arcs: ArcSystem | None = None
    own_gaps: list = field(default_factory=list)
    neighbor_of_gap: dict = field(default_factory=dict)  # gap key -> region key

    @property
    def is_ext(self) -> bool:
        return self.key == EXT


def _angdiff(a: float, b: float) -> float:
    """Signed angular difference a-b wrapped to (-pi, pi]."""
    return float(np.mod(a - b + np.pi, _TWO_PI) - np.pi)


def _chimney(child: "RegionNode", gap: Gap, first_tip: complex,
             n_gamma: int = 25, n_sliver: int = 5,
             cut: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Boundary path replacing the parent's bump over `gap`: sliver up the
    child's boundary, a straight connector, and the pulled-back gamma*.

    The bubble pinches to zero width where gamma* meets the circle, which a
    welding algorithm cannot survive; the chimney therefore follows gamma*
    only on [cut, 1-cut] and drops straight connectors to the child
    boundary.  The clipped slivers lie outside every lozenge, so no
    downstream evaluation ever looks there.

    Returns (points, corner_mask); the path starts after first_tip and ends
    before the other tip (both tips excluded).
    """
    entry = next(e for e in child.arcs.entries if e.gap_key == gap.key)
    cm = child.cmap
    first_is_x1 = abs(first_tip - gap.x1) < abs(first_tip - gap.x2)
    gamma = entry.gamma
    angles = np.mod(cm.boundary_angles, _TWO_PI)

    def sliver(tip_angle: float, star_angle: float) -> np.ndarray:
        """Child-boundary points strictly between the two angles, ordered
        from the tip toward the star endpoint."""
        a = np.mod(tip_angle, _TWO_PI)
        b = np.mod(star_angle, _TWO_PI)
        fwd = np.mod(b - a, _TWO_PI)
        if fwd <= np.pi:
            rel = np.mod(angles - a, _TWO_PI)
            sel = (rel > 1e-12) & (rel < fwd - 1e-12)
        else:
            fwd = _TWO_PI - fwd
            rel = np.mod(a - angles, _TWO_PI)
            sel = (rel > 1e-12) & (rel < fwd - 1e-12)
        pts = cm.boundary_points[sel][np.argsort(rel[sel])]
        if len(pts) > n_sliver:
            take = np.unique(np.linspace(0, len(pts) - 1,
                                         n_sliver).astype(int))
            pts = pts[take]
        return pts

    ts = 0.5 * (1.0 + np.sin(np.pi * (np.linspace(0, 1, n_gamma) - 0.5)))
    ts = cut + (1.0 - 2.0 * cut) * ts
    gpts = cm.inverse(gamma.point(ts))      # runs from gamma.point(0) side
    star1_plane = _boundary_point_at(cm, entry.star1)
    star2_plane = _boundary_point_at(cm, entry.star2)
    if not entry.gamma_from_star1:
        gpts = gpts[::-1]                   # now star1 side -> star2 side
    if first_is_x1:
        up = sliver(entry.theta1, entry.star1)
        down = sliver(entry.theta2, entry.star2)
        path = np.concatenate([up, [star1_plane], gpts, [star2_plane],
                               down[::-1]])
    else:
        up = sliver(entry.theta2, entry.star2)
        down = sliver(entry.theta1, entry.star1)
        path = np.concatenate([up, [star2_plane], gpts[::-1], [star1_plane],
                               down[::-1]])
    corner = np.zeros(len(path), dtype=bool)
    n_up, n_dn = len(up), len(down)
    # grade at the junction vertices and the connector feet only
    for k in (0, n_up, n_up + 1, len(path) - n_dn - 2,
              len(path) - n_dn - 1, len(path) - 1):
        corner[k] = True
    return path, corner


def _boundary_point_at(cm: ConformalMap, angle: float) -> complex:
    """Child boundary point at a given disc angle (nearest-node interp)."""
    rel = np.abs(np.mod(cm.boundary_angles - angle + np.pi, _TWO_PI) - np.pi)
    k = int(np.argmin(rel))
    return complex(cm.boundary_points[k])


def build_region_node(tree: CantorTree, key, built: dict,
                      config: CantorConfig) -> RegionNode:
    """Region node for a cross (n, J) or the exterior, with chimneys from
    already-built deeper nodes."""
    if key == EXT:
        base = tree.exterior_region()
        level = -1
    else:
        n, J = key
        base = tree.hatted_cross(n, J)
        level = n
    node = RegionNode(key=key, level=level, tree=tree, region=base)
    node.own_gaps = [] if key == EXT else tree.own_gaps(*key)
    deeper = [g for g in tree.gaps() if g.outside == key]
    verts = base.vertices
    n_v = len(verts)
    keep = np.ones(n_v, dtype=bool)
    insert: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for g in deeper:
        child = built[g.inside]
        i1, ia, i2 = base.marks[g.key]
        first_tip = verts[i1]
        path, corner = _chimney(child, g, first_tip)
        keep[ia] = False           # drop the bump apex
        insert[ia] = (path, corner)
        node.neighbor_of_gap[g.key] = g.inside
    for g in node.own_gaps:
        node.neighbor_of_gap[g.key] = g.outside
    new_pts: list[complex] = []
    new_corner: list[bool] = []
    new_marks: dict = {}
    old_to_new: dict[int, int] = {}
    scale = max(np.ptp(verts.real), np.ptp(verts.imag))
    tol = 1e-11 * scale

    def push(p: complex, is_corner: bool) -> int:
        if new_pts and abs(p - new_pts[-1]) < tol:
            new_corner[-1] = new_corner[-1] or is_corner
            return len(new_pts) - 1
        new_pts.append(p)
        new_corner.append(is_corner)
        return len(new_pts) - 1

    for i in range(n_v):
        if keep[i]:
            old_to_new[i] = push(verts[i], True)
        elif i in insert:
            path, corner = insert[i]
            for p, c in zip(path, corner):
                push(p, bool(c))
    while len(new_pts) > 1 and abs(new_pts[-1] - new_pts[0]) < tol:
        new_pts.pop()
        new_corner.pop()
    for gk, (i1, ia, i2) in base.marks.items():
        if keep[ia]:
            new_marks[gk] = tuple(old_to_new[i] for i in (i1, ia, i2))
    pts = np.asarray(new_pts, dtype=complex)
    corner_idx = np.nonzero(new_corner)[0]
    if key == EXT:
        c = tree.root_center
        inv = 1.0 / (pts - c)
        region = Region(label="Ttilde^ext", vertices=inv, center=0.0 + 0.0j,
                        corner_idx=corner_idx, marks=new_marks)
        node.region = region
        node.cmap = map_region(
            region, symmetry_order=config.extra("symmetry_order"),
            n_boundary=config.extra("boundary_points"),
            corner_ratio=config.extra("corner_ratio"),
            corner_depth=config.extra("corner_depth"),
            pre=lambda z: 1.0 / (np.asarray(z, dtype=complex) - c),
            pre_inv=lambda w: c + 1.0 / np.asarray(w, dtype=complex))
    else:
        region = Region(label=f"Ttilde^{key[0]}_{key[1] or 'root'}",
                        vertices=pts, center=base.center,
                        corner_idx=corner_idx, marks=new_marks)
        node.region = region
        node.cmap = map_region(
            region, symmetry_order=config.extra("symmetry_order"),
            n_boundary=config.extra("boundary_points"),
            corner_ratio=config.extra("corner_ratio"),
            corner_depth=config.extra("corner_depth"))
        node.arcs = build_arc_system(node.cmap, tree, key[0], key[1], config)
    return node


def build_all_regions(tree: CantorTree, config: CantorConfig) -> dict:
    """All region nodes, deepest level first, exterior last."""
    built: dict = {}
    for n in range(tree.N - 1, -1, -1):
        for J in tree.indices(n):
            key = (n, J)
            built[key] = build_region_node(tree, key, built, config)
    built[EXT] = build_region_node(tree, EXT, built, config)
    return built
