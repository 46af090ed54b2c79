"""The arc system on the disc for one mapped region: boundary arcs E_j over
the gap bumps, their triplings E*_j, the level arcs gamma*_j where the
pasting happens, and the lens domains.

gamma*_j is the circular arc through the endpoints of E*_j on which
omega(z, E*_j, D) = c1/log(n_eff) identically (the paper's "intersecting at
an angle theta_n = pi (1 - c1/log n)"); this is the level-curve convention
that makes |H0| >= exp(-8 p c1) on the arcs.  The reported "radius" of each
gamma* is the sagitta of the circular segment it cuts off its chord.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import CantorConfig
from ..errors import ArcsOverlap
from ..geometry.tree import CantorTree
from .conformal import ConformalMap
from .discgeom import (Arc, LevelArc, arc_measure, lens_contains, phyp,
                       region_between)

_TWO_PI = 2.0 * np.pi


@dataclass
class ArcEntry:
    gap_key: tuple
    E: Arc
    Estar: Arc
    gamma: LevelArc
    theta1: float          # disc angle of the plane tip x1
    theta2: float
    star1: float           # E* endpoint angle on the x1 side
    star2: float
    gamma_from_star1: bool  # gamma.point(0) sits at the star1 endpoint
    lens_corner: float

    @property
    def zeta1(self) -> complex:
        return np.exp(1j * self.theta1)

    @property
    def zeta2(self) -> complex:
        return np.exp(1j * self.theta2)

    @property
    def diam_lens(self) -> float:
        return self.E.chord

    def lens_contains(self, z) -> np.ndarray:
        return lens_contains(z, self.E, self.lens_corner)

    def bubble_contains(self, z) -> np.ndarray:
        return region_between(z, self.Estar, self.gamma.level)

    def dist_to_tips(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.minimum(np.abs(z - self.zeta1), np.abs(z - self.zeta2))


@dataclass
class ArcSystem:
    level: int
    n_eff: float
    p: int
    c1: float
    theta_n: float
    gamma_level: float
    tilde_alpha: float
    wedge_panels: int
    entries: list = field(default_factory=list)
    separation: float = np.nan     # min pseudo-hyperbolic gap between gammas
    radius_rows: list = field(default_factory=list)

    def gamma_samples(self, n: int, pinch: float = 5e-3) -> list:
        return [e.gamma.sample(n, pinch) for e in self.entries]

    def in_any_bubble(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for e in self.entries:
            out |= e.bubble_contains(z)
        return out

    def bubble_index(self, z) -> np.ndarray:
        """Index of the bubble containing each point (-1 outside)."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, -1, dtype=int)
        for k, e in enumerate(self.entries):
            hit = e.bubble_contains(z) & (out < 0)
            out[hit] = k
        return out

    def to_dict(self) -> dict:
        return {
            "level": self.level, "n_eff": self.n_eff, "theta_n": self.theta_n,
            "gamma_level": self.gamma_level, "separation": self.separation,
            "radius_rows": self.radius_rows,
            "entries": [{
                "gap": list(e.gap_key),
                "E": [e.E.t1, e.E.t2], "Estar": [e.Estar.t1, e.Estar.t2],
                "theta1": e.theta1, "theta2": e.theta2,
                "gamma_center": [e.gamma.center.real, e.gamma.center.imag],
                "gamma_radius": e.gamma.radius,
                "sagitta": e.gamma.sagitta(),
            } for e in self.entries],
        }


def build_arc_system(cmap: ConformalMap, tree: CantorTree, n: int, J: str,
                     config: CantorConfig) -> ArcSystem:
    """Arc system over the region's four own gaps; validates separation."""
    n_eff = config.n_eff(n)
    level = config.c1 / np.log(n_eff)
    if level >= 0.5:
        raise ArcsOverlap(
            f"c1/log(n_eff) = {level:.3f} >= 1/2 at level {n}; decrease c1")
    theta_n = np.pi * (1.0 - level)
    sys = ArcSystem(level=n, n_eff=n_eff, p=config.power_p, c1=config.c1,
                    theta_n=theta_n, gamma_level=level,
                    tilde_alpha=config.tilde_alpha,
                    wedge_panels=config.extra("wedge_panels"))
    gaps = tree.own_gaps(n, J)
    for g in gaps:
        th1, th_apex, th2 = cmap.mark_angles[g.key]
        width = np.mod(th2 - th1, _TWO_PI)
        swapped = np.mod(th_apex - th1, _TWO_PI) > width
        a1, a2 = (th2, th1) if swapped else (th1, th2)
        width = np.mod(a2 - a1, _TWO_PI)
        t1 = np.mod(a1, _TWO_PI)
        E = Arc(t1, t1 + width)
        Estar = E.scaled(3.0)
        gamma = LevelArc(Estar, level)
        star_first, star_last = Estar.t1, Estar.t2
        star1, star2 = (star_last, star_first) if swapped \
            else (star_first, star_last)
        sys.entries.append(ArcEntry(
            gap_key=g.key, E=E, Estar=Estar, gamma=gamma,
            theta1=th1, theta2=th2, star1=star1, star2=star2,
            gamma_from_star1=not swapped, lens_corner=config.tilde_alpha))

    _validate(sys)
    return sys


def _validate(sys: ArcSystem):
    ents = sys.entries
    # tripled arcs must stay pairwise disjoint on the circle
    for a in range(len(ents)):
        for b in range(a + 1, len(ents)):
            if _arcs_overlap(ents[a].Estar, ents[b].Estar):
                raise ArcsOverlap(
                    f"tripled arcs {a} and {b} overlap at level {sys.level}; "
                    "the boundary gaps are too wide for this geometry "
                    "(decrease delta or the truncation depth)")
    # bubbles must not meet each other
    samples = sys.gamma_samples(48, pinch=1e-3)
    for a in range(len(ents)):
        for b in range(len(ents)):
            if a == b:
                continue
            if np.any(ents[b].bubble_contains(samples[a])):
                raise ArcsOverlap(
                    f"bubble {a} reaches into bubble {b} at level "
                    f"{sys.level}; increase c1 (shallower pasting arcs)")
    # pseudo-hyperbolic separation of the gamma arcs, reported
    sep = np.inf
    for a in range(len(ents)):
        for b in range(a + 1, len(ents)):
            sep = min(sep, float(phyp(samples[a][:, None],
                                      samples[b][None, :]).min()))
    sys.separation = sep
    if sep < 1e-3:
        raise ArcsOverlap(f"gamma arcs nearly touch (phyp {sep:.2e}); "
                          "increase c1")
    for e in ents:
        chord = 0.5 * e.Estar.chord
        sag = e.gamma.sagitta()
        sys.radius_rows.append({
            "gap": list(e.gap_key), "sagitta": sag,
            "half_chord": chord,
            "scale_bound": chord * (np.pi - sys.theta_n),
            "ratio": sag / (chord * (np.pi - sys.theta_n) + 1e-300),
        })


def _arcs_overlap(a: Arc, b: Arc) -> bool:
    mids = np.linspace(a.t1, a.t2, 33)
    return bool(np.any(b.contains_angle(mids)))
