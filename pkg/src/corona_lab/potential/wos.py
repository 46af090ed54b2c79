"""Walk-on-spheres estimators for harmonic measure and Green's function.

The truncated boundary is a finite union of squares and segments, so WoS is
exact up to the absorption shell.  Every walk draws its angles from a
counter-based stream keyed by (seed, walk index, step), which makes all
estimates bit-reproducible and independent of batching.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng
from ..errors import NoConvergence, PointNotInterior, PointOnK
from ..geometry.regions import dist_to_segments
from ..geometry.tree import CantorTree


@dataclass
class MCEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int

    def __repr__(self):
        return (f"MCEstimate({self.value:.6g} +- {self.stderr:.2g}, "
                f"n={self.n_samples}, seed={self.seed})")


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

class OmegaDomain:
    """Exterior of the truncated Cantor set K^N (unbounded)."""

    def __init__(self, tree: CantorTree, far_radius: float | None = None,
                 eps_abs: float | None = None):
        self.tree = tree
        cfg = tree.config
        self.center = tree.root_center
        self.far_radius = far_radius or cfg.extra("far_radius")
        self.eps = (eps_abs or cfg.extra("eps_abs")) * tree.sigma[tree.N]

    def distance(self, z: np.ndarray) -> np.ndarray:
        return self.tree.dist_to_K(z)

    def nearest_leaf(self, z: np.ndarray) -> np.ndarray:
        t = self.tree
        dx = np.abs(z.real[:, None] - t.leaf_centers.real[None, :]) - t.leaf_half
        dy = np.abs(z.imag[:, None] - t.leaf_centers.imag[None, :]) - t.leaf_half
        d = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        return d.argmin(axis=1)


class PolygonDomain:
    """Bounded polygon with labeled boundary segments.

    labels: {name: [(a, b), ...]} must partition the full boundary.
    """

    def __init__(self, segments: dict, eps_abs: float):
        self.labels = list(segments.keys())
        self.seg_a = []
        self.seg_b = []
        self.seg_label = []
        for li, name in enumerate(self.labels):
            for a, b in segments[name]:
                self.seg_a.append(a)
                self.seg_b.append(b)
                self.seg_label.append(li)
        self.seg_a = np.asarray(self.seg_a, dtype=complex)
        self.seg_b = np.asarray(self.seg_b, dtype=complex)
        self.seg_label = np.asarray(self.seg_label)
        self.eps = eps_abs

    def distance_and_label(self, z: np.ndarray):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        d = np.full(z.shape, np.inf)
        lab = np.zeros(z.shape, dtype=int)
        for k in range(len(self.seg_a)):
            e = self.seg_b[k] - self.seg_a[k]
            t = np.clip(((z - self.seg_a[k]) * np.conj(e)).real / abs(e) ** 2,
                        0.0, 1.0)
            dk = np.abs(z - (self.seg_a[k] + t * e))
            closer = dk < d
            d = np.where(closer, dk, d)
            lab = np.where(closer, self.seg_label[k], lab)
        return d, lab

    def distance(self, z: np.ndarray) -> np.ndarray:
        return self.distance_and_label(z)[0]


class DiscDomain:
    """Unit disc with the boundary partitioned into labeled arcs.

    arcs: {name: [(theta1, theta2), ...]} with theta2 > theta1 (radians);
    unlabeled parts of the circle fall to the label "rest".
    """

    def __init__(self, arcs: dict, eps_abs: float = 1e-4):
        self.arcs = arcs
        self.eps = eps_abs
        self.labels = list(arcs.keys()) + ["rest"]

    def label_of_angle(self, theta: np.ndarray) -> np.ndarray:
        th = np.mod(theta, 2.0 * np.pi)
        out = np.full(th.shape, len(self.arcs), dtype=int)
        for li, name in enumerate(self.arcs):
            for t1, t2 in self.arcs[name]:
                a = np.mod(t1, 2.0 * np.pi)
                width = t2 - t1
                rel = np.mod(th - a, 2.0 * np.pi)
                out = np.where(rel <= width, li, out)
        return out


# ---------------------------------------------------------------------------
# core walkers
# ---------------------------------------------------------------------------

def _exterior_reentry(pos, center, R, seed, stream, counter):
    """Resample walkers outside |z-c|=R back onto the circle (exact kernel)."""
    rel = pos - center
    r = np.abs(rel)
    theta0 = np.angle(rel)
    u = rng.uniform(seed, stream, counter)
    phi = np.pi * (2.0 * u - 1.0)
    half = np.tan(0.5 * phi)
    theta = theta0 + 2.0 * np.arctan(((r - R) / (r + R)) * half)
    return center + R * np.exp(1j * theta)


def walk_exterior(tree: CantorTree, z0, walks: int, seed: int,
                  start_at_infinity: bool = False,
                  step_cap: int | None = None):
    """Run WoS on Omega_N; returns absorbed positions (complex array).

    z0 is ignored when start_at_infinity is set (walkers start uniformly on
    the far circle, the exact hitting distribution from infinity).
    """
    dom = OmegaDomain(tree)
    cap = step_cap or tree.config.extra("step_cap")
    ids = np.arange(walks, dtype=np.uint64)
    if start_at_infinity:
        theta = rng.uniform_angles(seed, ids, np.uint64(0))
        pos = dom.center + dom.far_radius * np.exp(1j * theta)
    else:
        z0 = complex(z0)
        if dom.distance(np.array([z0]))[0] <= 0.0:
            raise PointOnK(f"{z0} lies on K^N")
        pos = np.full(walks, z0, dtype=complex)
    out = np.empty(walks, dtype=complex)
    alive = np.arange(walks)
    step = 1
    while alive.size:
        if step > cap:
            raise NoConvergence(f"{alive.size} walks exceeded step cap {cap}")
        rel = np.abs(pos[alive] - dom.center)
        far = rel > dom.far_radius * 1.0000001
        if np.any(far):
            idx = alive[far]
            pos[idx] = _exterior_reentry(pos[idx], dom.center, dom.far_radius,
                                         seed, ids[idx], np.uint64(2 * step))
        d = dom.distance(pos[alive])
        hit = d < dom.eps
        if np.any(hit):
            out[alive[hit]] = pos[alive[hit]]
            alive = alive[~hit]
            d = d[~hit]
            if alive.size == 0:
                break
        ang = rng.uniform_angles(seed, ids[alive], np.uint64(2 * step + 1))
        pos[alive] = pos[alive] + d * np.exp(1j * ang)
        step += 1
    return out


def harmonic_measure(z, label, domain, walks: int, seed: int) -> MCEstimate:
    """Unbiased WoS estimate of omega(z, label, domain)."""
    if isinstance(domain, DiscDomain):
        z = complex(z)
        if abs(z) >= 1.0:
            raise PointNotInterior(f"{z} not inside the unit disc")
        ids = np.arange(walks, dtype=np.uint64)
        pos = np.full(walks, z, dtype=complex)
        step = 1
        alive = np.arange(walks)
        theta_out = np.empty(walks)
        while alive.size:
            d = 1.0 - np.abs(pos[alive])
            hit = d < domain.eps
            if np.any(hit):
                theta_out[alive[hit]] = np.angle(pos[alive[hit]])
                alive = alive[~hit]
                d = d[~hit]
                if alive.size == 0:
                    break
            ang = rng.uniform_angles(seed, ids[alive], np.uint64(step))
            pos[alive] = pos[alive] + d * np.exp(1j * ang)
            step += 1
        li = list(domain.arcs.keys()).index(label) if label != "rest" \
            else len(domain.arcs)
        hits = (domain.label_of_angle(theta_out) == li).astype(float)
    elif isinstance(domain, PolygonDomain):
        z = complex(z)
        d0, _ = domain.distance_and_label(np.array([z]))
        if d0[0] <= 0.0:
            raise PointNotInterior(f"{z} on the boundary")
        ids = np.arange(walks, dtype=np.uint64)
        pos = np.full(walks, z, dtype=complex)
        alive = np.arange(walks)
        lab_out = np.zeros(walks, dtype=int)
        step = 1
        cap = 1_000_000
        while alive.size:
            if step > cap:
                raise NoConvergence("step cap exceeded")
            d, lab = domain.distance_and_label(pos[alive])
            hit = d < domain.eps
            if np.any(hit):
                lab_out[alive[hit]] = lab[hit]
                alive = alive[~hit]
                if alive.size == 0:
                    break
                d = d[~hit]
            ang = rng.uniform_angles(seed, ids[alive], np.uint64(step))
            pos[alive] = pos[alive] + d * np.exp(1j * ang)
            step += 1
        li = domain.labels.index(label)
        hits = (lab_out == li).astype(float)
    elif isinstance(domain, OmegaDomain):
        exits = walk_exterior(domain.tree, z, walks, seed)
        hits = label(exits).astype(float)  # label is a predicate on exits
    else:
        raise TypeError(f"unsupported domain {type(domain)!r}")
    value = float(hits.mean())
    stderr = float(hits.std(ddof=1) / np.sqrt(walks)) if walks > 1 else np.inf
    return MCEstimate(value, stderr, walks, seed)
