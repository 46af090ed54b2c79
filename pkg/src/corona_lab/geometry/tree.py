"""Truncated square Cantor set and every derived geometric object.

Conventions fixed here and relied on everywhere else:

* corner letters 1,2,3,4 = SW, SE, NE, NW child of a square;
* edge index j = 1,2,3,4 = S, E, N, W side of a square;
* gap segments (x1, x2) are oriented counterclockwise around their owner
  square, so the owner's interior lies on the left and the outward normal
  is -i * direction;
* the thickened square V^n_J uses the margin convention: each side pushed
  out by sigma_{n-1} * delta_n / 2, which makes the four child V's tile one
  square concentric with the parent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import CantorConfig
from ..errors import (BadIndex, EmptyFrame, LeafHasNoCross, PointOnK,
                      RootHasNoParentScale)
from .regions import Region, points_in_polygon

LETTERS = "1234"
EXT = "ext"

# child corner offsets in units of (parent half - child half), complex
_CORNER = {1: -1 - 1j, 2: 1 - 1j, 3: 1 + 1j, 4: -1 + 1j}
# edge midpoint offsets in units of half-side, and ccw direction per edge
_EDGE_MID = {1: -1j, 2: 1 + 0j, 3: 1j, 4: -1 + 0j}
_EDGE_DIR = {1: 1 + 0j, 2: 1j, 3: -1 + 0j, 4: -1j}


@dataclass(frozen=True)
class Square:
    center: complex
    side: float

    @property
    def half(self) -> float:
        return 0.5 * self.side

    def corners(self) -> np.ndarray:
        h = self.half
        c = self.center
        return np.array([c - h - 1j * h, c + h - 1j * h,
                         c + h + 1j * h, c - h + 1j * h])

    def contains(self, z, closed: bool = True) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        dx = np.abs(z.real - self.center.real)
        dy = np.abs(z.imag - self.center.imag)
        h = self.half
        return (dx <= h) & (dy <= h) if closed else (dx < h) & (dy < h)

    def distance(self, z) -> np.ndarray:
        """Euclidean distance to the closed square (0 inside)."""
        z = np.asarray(z, dtype=complex)
        dx = np.maximum(np.abs(z.real - self.center.real) - self.half, 0.0)
        dy = np.maximum(np.abs(z.imag - self.center.imag) - self.half, 0.0)
        return np.hypot(dx, dy)


@dataclass(frozen=True)
class SquareFrame:
    outer: Square
    inner: Square


@dataclass(frozen=True)
class Gap:
    """One removed mid-edge segment, owner square level m, edge j."""
    level: int
    J: str
    j: int
    x1: complex
    x2: complex
    normal: complex   # outward unit normal of the owner square edge
    inside: tuple     # region key of the cross on the owner side
    outside: object   # region key across the segment ((m,I) or "ext")

    @property
    def length(self) -> float:
        return abs(self.x2 - self.x1)

    @property
    def midpoint(self) -> complex:
        return 0.5 * (self.x1 + self.x2)

    @property
    def key(self) -> tuple:
        return (self.level, self.J, self.j)


def check_word(J: str, n: int | None = None):
    if not isinstance(J, str) or any(ch not in LETTERS for ch in J):
        raise BadIndex(f"multi-index {J!r} must be a word over {{1,2,3,4}}")
    if n is not None and len(J) != n:
        raise BadIndex(f"multi-index {J!r} must have length {n}")


class Lozenge:
    """Open rhombus over a gap segment; the overlap region of two crosses.

    Membership is |arg((z-x1)/(x2-x1))| < alpha and |arg((z-x2)/(x1-x2))| <
    alpha (both cones strict), i.e. vertices x1, x2 and midpoint +- i h with
    h = |x2-x1| tan(alpha) / 2.
    """

    def __init__(self, gap: Gap, alpha: float):
        self.gap = gap
        self.alpha = alpha
        self.q = gap.x2 - gap.x1
        self.tan_a = np.tan(alpha)
        h = 0.5 * abs(self.q) * self.tan_a
        mid = gap.midpoint
        up = 1j * self.q / abs(self.q)       # interior (owner) side
        self.vertices = np.array([gap.x1, mid - h * up, gap.x2, mid + h * up])
        self.diameter = abs(self.q)

    def local(self, z) -> np.ndarray:
        return (np.asarray(z, dtype=complex) - self.gap.x1) / self.q

    def contains(self, z) -> np.ndarray:
        zeta = self.local(z)
        a1 = np.abs(np.angle(zeta))
        a2 = np.abs(np.angle(1.0 - zeta))
        good = np.isfinite(a1) & np.isfinite(a2)
        return good & (a1 < self.alpha) & (a2 < self.alpha) \
            & (np.asarray(z) != self.gap.x1) & (np.asarray(z) != self.gap.x2)

    def bbox_hit(self, z, pad: float = 0.0) -> np.ndarray:
        v = self.vertices
        z = np.asarray(z, dtype=complex)
        return ((z.real >= v.real.min() - pad) & (z.real <= v.real.max() + pad)
                & (z.imag >= v.imag.min() - pad) & (z.imag <= v.imag.max() + pad))

    # --- smooth ramp: weight of the *inside* cross across the overlap ---
    # w(u) = tan(alpha) u (1-u) keeps the transition strictly inside the
    # rhombus and C^1 everywhere; outside the transition strip the weight is
    # locked at 0 or 1.
    def _strip(self, zeta):
        u, v = zeta.real, zeta.imag
        w = self.tan_a * u * (1.0 - u)
        return u, v, w

    def inside_weight(self, z) -> np.ndarray:
        zeta = self.local(z)
        u, v, w = self._strip(zeta)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(w > 0.0, (v / np.where(w > 0, w, 1.0) + 1.0) * 0.5, 0.5)
        r = np.clip(r, 0.0, 1.0)
        return r * r * (3.0 - 2.0 * r)

    def dbar_inside_weight(self, z) -> np.ndarray:
        """Wirtinger d-bar of the inside weight, exact closed form."""
        zeta = self.local(z)
        u, v, w = self._strip(zeta)
        live = (w > 0.0) & (np.abs(v) < w)
        wsafe = np.where(live, w, 1.0)
        r = np.clip((v / wsafe + 1.0) * 0.5, 0.0, 1.0)
        sp = 6.0 * r * (1.0 - r)                      # S'(r)
        wprime = self.tan_a * (1.0 - 2.0 * u)
        phi_u = sp * (-v * wprime / (2.0 * wsafe * wsafe))
        phi_v = sp / (2.0 * wsafe)
        dbar_zeta = 0.5 * (phi_u + 1j * phi_v)
        out = dbar_zeta * np.conj(1.0 / self.q)
        return np.where(live, out, 0.0)

    def grad_inside_weight(self, z) -> np.ndarray:
        return 2.0 * np.abs(self.dbar_inside_weight(z))


class CantorTree:
    """Immutable truncated Cantor geometry; all queries are read-only."""

    def __init__(self, config: CantorConfig):
        self.config = config
        self.N = config.depth
        lam = config.lambdas()
        self.lam = np.array([np.nan] + lam)            # lam[n], n=1..N
        self.sigma = np.ones(self.N + 1)
        for n in range(1, self.N + 1):
            self.sigma[n] = self.sigma[n - 1] * lam[n - 1]
        self.delta = np.full(self.N + 1, np.nan)
        for n in range(1, self.N + 1):
            self.delta[n] = 1.0 - 2.0 * lam[n - 1]
        self.root_center = 0.5 + 0.5j
        # leaf data for distance queries
        self.leaf_words = self.indices(self.N)
        self.leaf_centers = np.array([self.center(J) for J in self.leaf_words])
        self.leaf_half = 0.5 * self.sigma[self.N]
        self.alpha = config.alpha
        self._gaps: list[Gap] | None = None
        self._lozenges: dict[tuple, Lozenge] = {}

    # ---------------- basic indexing ----------------
    def indices(self, n: int) -> list[str]:
        if n < 0 or n > self.N:
            raise BadIndex(f"level {n} outside 0..{self.N}")
        words = [""]
        for _ in range(n):
            words = [w + c for w in words for c in LETTERS]
        return words

    def center(self, J: str) -> complex:
        check_word(J)
        c = self.root_center
        for n, ch in enumerate(J, start=1):
            off = 0.5 * (self.sigma[n - 1] - self.sigma[n])
            c = c + off * _CORNER[int(ch)]
        return c

    def square(self, n: int, J: str) -> Square:
        check_word(J, n)
        if n > self.N:
            raise BadIndex(f"level {n} exceeds depth {self.N}")
        return Square(self.center(J), self.sigma[n])

    def thickened_square(self, n: int, J: str) -> Square:
        if n == 0:
            raise RootHasNoParentScale("V^0 needs sigma_{-1}")
        if not (1 <= n <= self.N):
            raise BadIndex(f"level {n} outside 1..{self.N}")
        check_word(J, n)
        margin = self.sigma[n - 1] * self.delta[n]
        return Square(self.center(J), self.sigma[n] + margin)

    def annulus(self, n: int, J: str) -> SquareFrame:
        if not (1 <= n <= self.N - 1):
            raise BadIndex(f"annulus level {n} outside 1..{self.N - 1}")
        outer = self.thickened_square(n, J)
        inner = Square(self.center(J), self.sigma[n] * (1.0 + self.delta[n + 1]))
        if outer.side <= inner.side:
            raise EmptyFrame(f"A^{n}_{J} would be empty")
        return SquareFrame(outer, inner)

    # ---------------- crosses, gaps, lozenges ----------------
    def cross(self, n: int, J: str) -> Region:
        if n == self.N:
            raise LeafHasNoCross(f"level {self.N} squares are leaves")
        if not (0 <= n < self.N):
            raise BadIndex(f"cross level {n} outside 0..{self.N - 1}")
        check_word(J, n)
        c = self.center(J)
        h = 0.5 * self.sigma[n]
        b = h - self.sigma[n + 1]
        rel = np.array([
            -b - 1j * h, b - 1j * h, b - 1j * b, h - 1j * b, h + 1j * b,
            b + 1j * b, b + 1j * h, -b + 1j * h, -b + 1j * b, -h + 1j * b,
            -h - 1j * b, -b - 1j * b,
        ])
        marks = {(n, J, j): pair
                 for j, pair in {1: (0, 1), 2: (3, 4), 3: (6, 7),
                                 4: (9, 10)}.items()}
        return Region(label=f"T^{n}_{J or 'root'}", vertices=c + rel,
                      center=c, marks=marks)

    def boundary_segments(self, n: int, J: str) -> list[Gap]:
        self.cross(n, J)  # validates
        return [g for g in self.gaps() if g.level == n and g.J == J]

    def gaps(self) -> list[Gap]:
        if self._gaps is None:
            self._gaps = self._build_gaps()
        return self._gaps

    def _gap_endpoints(self, n: int, J: str, j: int) -> tuple[complex, complex, complex]:
        c = self.center(J)
        h = 0.5 * self.sigma[n]
        g = self.sigma[n] * self.delta[n + 1]
        mid = c + h * _EDGE_MID[j]
        d = _EDGE_DIR[j]
        return mid - 0.5 * g * d, mid + 0.5 * g * d, -1j * d

    def _build_gaps(self) -> list[Gap]:
        out = []
        for m in range(0, self.N):
            for J in self.indices(m):
                for j in (1, 2, 3, 4):
                    x1, x2, nrm = self._gap_endpoints(m, J, j)
                    probe = 0.5 * (x1 + x2) + nrm * 1e-3 * abs(x2 - x1)
                    outside = self._locate_raw(probe)
                    out.append(Gap(level=m, J=J, j=j, x1=x1, x2=x2, normal=nrm,
                                   inside=(m, J), outside=outside))
        return out

    def lozenge(self, n: int, J: str, j: int) -> Lozenge:
        if j not in (1, 2, 3, 4):
            raise BadIndex(f"edge index {j} outside 1..4")
        key = (n, J, j)
        if key not in self._lozenges:
            gap = next((g for g in self.gaps() if g.key == key), None)
            if gap is None:
                raise BadIndex(f"no gap at level {n}, index {J!r}, edge {j}")
            self._lozenges[key] = Lozenge(gap, self.alpha)
        return self._lozenges[key]

    def lozenges(self) -> list[Lozenge]:
        return [self.lozenge(*g.key) for g in self.gaps()]

    def region_gaps(self, key) -> list[Gap]:
        """All gaps whose lozenge is attached to the region's hatted boundary."""
        return [g for g in self.gaps() if g.inside == key or g.outside == key]

    def own_gaps(self, n: int, J: str) -> list[Gap]:
        return [g for g in self.gaps() if g.inside == (n, J)]

    def hatted_cross(self, n: int, J: str) -> Region:
        """T-hat: the cross with a triangular bump over every attached gap."""
        base = self.cross(n, J)
        return self._bumped_region(base.vertices, (n, J),
                                   label=f"That^{n}_{J or 'root'}",
                                   center=base.center)

    def exterior_region(self) -> Region:
        """The complement of the root square, traversed with the region on
        the left (clockwise around the square), with its attached bumps."""
        root = self.square(0, "")
        cw = root.corners()[::-1]
        cw = np.roll(cw, 1)  # start at SW corner: SW, NW, NE, SE
        return self._bumped_region(cw, EXT, label="That^ext",
                                   center=self.root_center)

    def _bumped_region(self, base_vertices: np.ndarray, key,
                       label: str, center: complex) -> Region:
        gaps = self.region_gaps(key)
        verts: list[complex] = []
        marks: dict = {}

        def push(p: complex) -> int:
            if verts and abs(p - verts[-1]) < 1e-14:
                return len(verts) - 1
            verts.append(p)
            return len(verts) - 1

        m = len(base_vertices)
        for k in range(m):
            a = base_vertices[k]
            b = base_vertices[(k + 1) % m]
            push(a)
            e = b - a
            L = abs(e)
            d = e / L
            on_edge = []
            for g in gaps:
                t1 = ((g.x1 - a) / d).real
                t2 = ((g.x2 - a) / d).real
                off1 = abs(g.x1 - (a + t1 * d))
                off2 = abs(g.x2 - (a + t2 * d))
                if off1 < 1e-12 and off2 < 1e-12 and -1e-12 <= min(t1, t2) \
                        and max(t1, t2) <= L + 1e-12:
                    on_edge.append((min(t1, t2), max(t1, t2), g))
            on_edge.sort(key=lambda it: it[0])
            for t1, t2, g in on_edge:
                p1 = a + t1 * d
                p2 = a + t2 * d
                h = 0.5 * (t2 - t1) * np.tan(self.alpha)
                apex = 0.5 * (p1 + p2) - 1j * d * h  # right of traversal
                i1 = push(p1)
                ia = push(apex)
                i2 = push(p2)
                marks[g.key] = (i1, ia, i2)
        arr = np.array(verts, dtype=complex)
        return Region(label=label, vertices=arr, center=center, marks=marks)

    # ---------------- membership / distance / partition ----------------
    def dist_to_K(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        dx = np.abs(z.real[:, None] - self.leaf_centers.real[None, :]) - self.leaf_half
        dy = np.abs(z.imag[:, None] - self.leaf_centers.imag[None, :]) - self.leaf_half
        d = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        return d.min(axis=1)

    def _locate_raw(self, z: complex):
        """Region key covering z ignoring lozenges; PointOnK for leaf points."""
        J = ""
        for n in range(0, self.N):
            found = None
            for ch in LETTERS:
                if self.square(n + 1, J + ch).contains(z):
                    found = J + ch
                    break
            if found is None:
                if n == 0 and not self.square(0, "").contains(z):
                    return EXT
                return (n, J)
            J = found
        raise PointOnK(f"{z} lies on the truncated set K^{self.N}")

    def locate(self, z: complex):
        if not self.square(0, "").contains(z):
            return EXT
        return self._locate_raw(z)

    def find_lozenge(self, z) -> Lozenge | None:
        for loz in self.lozenges():
            if loz.bbox_hit(z).item() and loz.contains(z).item():
                return loz
        return None

    def cover_keys(self, z: complex) -> list:
        """Keys of every hatted region containing z (1 or 2 of them)."""
        loz = self.find_lozenge(np.array([z]))
        if loz is not None:
            return [loz.gap.inside, loz.gap.outside]
        return [self.locate(z)]

    def partition_weights(self, z: complex) -> list[tuple]:
        """Partition-of-unity weights [(region_key, weight)] at z; sums to 1."""
        d = float(self.dist_to_K(z)[0])
        if d == 0.0:
            raise PointOnK(f"{z} lies on K^{self.N}")
        loz = self.find_lozenge(np.array([z]))
        if loz is None:
            return [(self.locate(z), 1.0)]
        w_in = float(loz.inside_weight(np.array([z]))[0])
        return [(loz.gap.inside, w_in), (loz.gap.outside, 1.0 - w_in)]

    def export_json(self) -> dict:
        levels = [{"n": n, "sigma": float(self.sigma[n]),
                   "delta": float(self.delta[n]) if n >= 1 else None}
                  for n in range(self.N + 1)]
        squares = []
        for n in range(self.N + 1):
            for J in self.indices(n):
                sq = self.square(n, J)
                squares.append({"J": J, "n": n, "cx": sq.center.real,
                                "cy": sq.center.imag, "side": sq.side})
        lozs = []
        for loz in self.lozenges():
            g = loz.gap
            lozs.append({"n": g.level, "J": g.J, "j": g.j,
                         "vertices": [[v.real, v.imag] for v in loz.vertices]})
        return {"levels": levels, "squares": squares, "lozenges": lozs}


def build_tree(config: CantorConfig) -> CantorTree:
    """Construct the truncated Cantor tree; validates the config invariants."""
    return CantorTree(config)
