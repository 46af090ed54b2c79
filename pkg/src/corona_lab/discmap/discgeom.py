"""Exact disc-side geometry: harmonic measure of boundary arcs, their
analytic (Herglotz) completions, level-curve arcs, lenses and bubbles.

For an arc E of the unit circle, the function

    F_E(z) = 1 + (i s / pi) Log(v(z) / v(0) * u0 ...)

built from the Moebius invariant v(z) = (z - a)/(z - b) has Re F_E =
omega(z, E, D) exactly; v/u stays in one half plane so the principal branch
is safe on the whole disc.  Every lens/bubble used by the construction is a
level set of such an omega, which keeps all membership tests closed-form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Arc:
    """Boundary arc from angle t1 counterclockwise to t2 (t2 > t1)."""
    t1: float
    t2: float

    @property
    def width(self) -> float:
        return self.t2 - self.t1

    @property
    def mid(self) -> float:
        return 0.5 * (self.t1 + self.t2)

    @property
    def a(self) -> complex:
        return np.exp(1j * self.t1)

    @property
    def b(self) -> complex:
        return np.exp(1j * self.t2)

    @property
    def chord(self) -> float:
        return float(abs(self.b - self.a))

    def scaled(self, factor: float) -> "Arc":
        half = 0.5 * self.width * factor
        return Arc(self.mid - half, self.mid + half)

    def contains_angle(self, theta) -> np.ndarray:
        rel = np.mod(np.asarray(theta) - self.t1, _TWO_PI)
        return rel <= self.width

    def boundary_points(self, n: int) -> np.ndarray:
        return np.exp(1j * np.linspace(self.t1, self.t2, n))


def arc_measure(z, arc: Arc) -> np.ndarray:
    """omega(z, arc, D), exact, vectorized."""
    z = np.asarray(z, dtype=complex)
    a, b = arc.a, arc.b
    e = np.exp(1j * arc.mid)
    u = (e - a) / (e - b)
    v = (z - a) / (z - b)
    theta = np.abs(np.angle(v / u))
    return (np.pi - theta) / np.pi


def arc_herglotz(z, arc: Arc) -> np.ndarray:
    """Analytic F with Re F = omega(z, arc, D); F(0) = |arc|/2pi + i*0."""
    z = np.asarray(z, dtype=complex)
    a, b = arc.a, arc.b
    e = np.exp(1j * arc.mid)
    u = (e - a) / (e - b)
    v = (z - a) / (z - b)
    w = v / u
    # w ranges in one (open) half plane; orient it to the upper one
    w0 = (0.0 - a) / (0.0 - b) / u
    s = 1.0 if np.angle(w0) >= 0 else -1.0
    val = 1.0 - (s / np.pi) * np.angle(w) + 1j * (s / np.pi) * np.log(np.abs(w))
    return val


def phyp(z, w) -> np.ndarray:
    """Pseudo-hyperbolic distance |z-w| / |1 - conj(z) w|."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)


@dataclass
class LevelArc:
    """Circular arc {omega(z, base) = level} inside the disc (a "gamma")."""
    base: Arc
    level: float
    center: complex = field(init=False)
    radius: float = field(init=False)
    phi1: float = field(init=False)   # circle angle of base endpoint a
    phi2: float = field(init=False)
    phi_top: float = field(init=False)

    def __post_init__(self):
        base = self.base
        mu = np.exp(1j * base.mid)
        lo, hi = -0.999999, 0.999999

        def f(s):
            return arc_measure(np.array([s * mu]), base)[0] - self.level

        # omega is monotone along the diameter through the arc midpoint
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0.0:
                hi = mid
            else:
                lo = mid
        s_top = 0.5 * (lo + hi)
        z_top = s_top * mu
        self.center, self.radius = _circle_through(base.a, base.b, z_top)
        self.phi1 = float(np.angle(base.a - self.center))
        self.phi2 = float(np.angle(base.b - self.center))
        self.phi_top = float(np.angle(z_top - self.center))

    @property
    def z_top(self) -> complex:
        return self.center + self.radius * np.exp(1j * self.phi_top)

    def sagitta(self) -> float:
        """Depth of the circular segment cut off by the base chord (the
        'radius of the disc determined by the arc' in the reports)."""
        m = 0.5 * (self.base.a + self.base.b)
        return float(self.radius - abs(m - self.center))

    def _sweep(self) -> float:
        """Signed angular sweep from phi1 to phi2 passing through phi_top."""
        ccw = np.mod(self.phi2 - self.phi1, _TWO_PI)
        through = np.mod(self.phi_top - self.phi1, _TWO_PI)
        if through <= ccw + 1e-12:
            return ccw
        return ccw - _TWO_PI

    def param_angles(self, ts) -> np.ndarray:
        return self.phi1 + np.asarray(ts) * self._sweep()

    def point(self, ts) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * self.param_angles(ts))

    def sample(self, n: int, pinch: float = 0.0) -> np.ndarray:
        """n points along the arc; pinch > 0 trims both parameter ends."""
        return self.point(np.linspace(pinch, 1.0 - pinch, n))

    def arclength(self) -> float:
        return float(abs(self._sweep()) * self.radius)


def _circle_through(z1: complex, z2: complex, z3: complex) -> tuple[complex, float]:
    ax, ay = z1.real, z1.imag
    bx, by = z2.real, z2.imag
    cx, cy = z3.real, z3.imag
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax ** 2 + ay ** 2) * (by - cy) + (bx ** 2 + by ** 2) * (cy - ay)
          + (cx ** 2 + cy ** 2) * (ay - by)) / d
    uy = ((ax ** 2 + ay ** 2) * (cx - bx) + (bx ** 2 + by ** 2) * (ax - cx)
          + (cx ** 2 + cy ** 2) * (bx - ax)) / d
    center = ux + 1j * uy
    return center, float(abs(z1 - center))


def region_between(z, base: Arc, level: float) -> np.ndarray:
    """Membership in the region bounded by `base` and its level arc."""
    return arc_measure(z, base) > level


def lens_contains(z, base: Arc, corner_angle: float) -> np.ndarray:
    """Lens over `base` whose boundary arc meets it at `corner_angle`."""
    return region_between(z, base, 1.0 - corner_angle / np.pi)


def lens_sample(base: Arc, corner_angle: float, n_t: int, n_s: int) -> np.ndarray:
    """Interior sample grid of the lens: level curves between 1-ca/pi and 1."""
    levels = np.linspace(1.0 - corner_angle / np.pi, 1.0, n_s + 2)[1:-1]
    out = []
    for lev in levels:
        la = LevelArc(base, lev)
        out.append(la.sample(n_t, pinch=0.02))
    return np.concatenate(out)
