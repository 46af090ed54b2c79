"""Ahlfors-function surrogates, the capacity thickness ratio, and the
derivative-matched correctors.

True Ahlfors functions are never computed: the normalized Cauchy transform
of the natural measure serves throughout, with the sup norm estimated on a
cell-refined grid around the carrier (plus a 1.1 safety factor, since a pure
sample max under-estimates).
"""
from __future__ import annotations

import numpy as np

from ..errors import BadBall, BadIndex, NoNearbySquare
from ..funhandle import FunctionHandle
from ..geometry.tree import CantorTree, Lozenge, check_word
from .measures import DiscreteMeasure, cauchy_handle, cauchy_transform, natural_measure

_SAFETY = 1.1


def sup_norm_estimate(measure: DiscreteMeasure, cell_half: float) -> float:
    """Estimated sup of |C mu| over the complement of the carrier cells.

    Samples ring layers around every carrier point at radii from
    cell_half/2 outward plus a coarse global grid; the transform of a
    lambda > 1/4 Cantor measure peaks within those layers.
    """
    pts = measure.points
    th = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False))
    radii = cell_half * np.array([0.55, 0.8, 1.2, 1.8, 2.8])
    best = 0.0
    for r in radii:
        probes = (pts[:, None] + r * th[None, :]).ravel()
        keep = np.ones(len(probes), dtype=bool)
        vals = np.zeros(len(probes))
        d = np.abs(probes[:, None] - pts[None, :]).min(axis=1)
        keep = d > 0.45 * cell_half
        if np.any(keep):
            vals = np.abs(cauchy_transform(measure, probes[keep]))
            best = max(best, float(vals.max()))
    lo = pts.real.min() - 1.0
    hi = pts.real.max() + 1.0
    gx = np.linspace(lo, hi, 40)
    gz = (gx[:, None] + 1j * gx[None, :]).ravel() \
        + (pts.imag.min() - pts.real.min()) * 1j * 0
    d = np.abs(gz[:, None] - pts[None, :]).min(axis=1)
    far = gz[d > 0.45 * cell_half]
    if far.size:
        best = max(best, float(np.abs(cauchy_transform(measure, far)).max()))
    return _SAFETY * best


def ahlfors_surrogate(tree: CantorTree, n: int, J: str,
                      grid_res: int | None = None,
                      depth: int | None = None) -> FunctionHandle:
    """f = C mu / ||C mu||_inf for the natural measure on K cap Q^n_J.

    f(infinity) = 0, sup_norm_estimate = 1, and derivative_at_infinity =
    total_mass / ||C mu||_inf > 0, a certified capacity lower bound up to
    the grid tolerance.
    """
    depth = tree.N if depth is None else depth
    mu = natural_measure(tree, n, J, depth)
    cell_half = 0.5 * tree.sigma[depth]
    norm = sup_norm_estimate(mu, cell_half)
    h = cauchy_handle(mu, sup_norm=norm, scale=1.0 / norm)
    h.sup_norm_estimate = 1.0
    h.meta["cmu_norm"] = norm
    return h


def capacity_lower_ratio(tree: CantorTree, zeta: complex, r: float,
                         grid_res: int | None = None) -> float:
    """gamma_hat(B(zeta, r) cap K) / r via the largest inscribed square.

    Descends the chain of squares containing (or nearest to) zeta; when even
    a leaf does not fit, a solid sub-square of the leaf is used (the
    truncated set is solid inside leaves).
    """
    diam = float(np.sqrt(2.0))
    if not (0.0 < r <= diam + 1e-12):
        raise BadBall(f"radius {r} outside (0, diam K]")
    zeta = complex(zeta)
    if tree.dist_to_K(zeta)[0] > 1e-12:
        raise BadBall(f"{zeta} not on the truncated set")
    # chain of squares containing zeta (nearest at each level)
    chain = [""]
    J = ""
    for m in range(1, tree.N + 1):
        cand = [J + c for c in "1234"]
        d = [float(tree.square(m, w).distance(np.array([zeta]))[0]) for w in cand]
        J = cand[int(np.argmin(d))]
        chain.append(J)
    for m in range(0, tree.N + 1):
        sq = tree.square(m, chain[m])
        if np.max(np.abs(sq.corners() - zeta)) <= r:
            h = ahlfors_surrogate(tree, m, chain[m])
            return float(h.derivative_at_infinity.real) / r
    # sub-leaf: uniform measure on a small solid square inside the leaf
    leaf = tree.square(tree.N, chain[-1])
    side = min(r / np.sqrt(2.0), leaf.side)
    cx = np.clip(zeta.real, leaf.center.real - leaf.half + side / 2,
                 leaf.center.real + leaf.half - side / 2)
    cy = np.clip(zeta.imag, leaf.center.imag - leaf.half + side / 2,
                 leaf.center.imag + leaf.half - side / 2)
    k = 6
    xs = (np.arange(k) + 0.5) / k - 0.5
    pts = (cx + 1j * cy) + side * (xs[:, None] + 1j * xs[None, :]).ravel()
    wts = np.full(k * k, side / (k * k))
    mu = DiscreteMeasure(points=pts, weights=wts, total_mass=side,
                         carrier=(tree.N, chain[-1], tree.N))
    norm = sup_norm_estimate(mu, side / (2 * k))
    return float(mu.total_mass / norm) / r


def find_nearby_square(tree: CantorTree, loz: Lozenge) -> tuple[int, str]:
    """Cantor square meeting the closed lozenge with side in
    [1/4, 4] sigma_n delta_{n+1}; deterministic (x1 chain before x2,
    lexicographic tie-break)."""
    gap = loz.gap
    target = tree.sigma[gap.level] * tree.delta[gap.level + 1]

    def chain_of(x: complex) -> list[str]:
        out = []
        J = ""
        for m in range(1, tree.N + 1):
            cand = [J + c for c in "1234"]
            d = [float(tree.square(m, w).distance(np.array([x]))[0])
                 for w in cand]
            best = min(range(4), key=lambda i: (d[i], cand[i]))
            J = cand[best]
            out.append(J)
        return out

    for x in (gap.x1, gap.x2):
        ch = chain_of(x)
        for m in range(1, tree.N + 1):
            side = tree.sigma[m]
            if side <= 4.0 * target + 1e-15:
                if side >= 0.25 * target - 1e-15 and \
                        tree.square(m, ch[m - 1]).distance(np.array([x]))[0] < 1e-12:
                    return m, ch[m - 1]
                break
    raise NoNearbySquare(
        f"no Cantor square with side in [1/4,4]*{target:.3g} touches the "
        f"lozenge at {gap.key} (truncation too shallow)")


def matched_corrector(target: complex, tree: CantorTree, n: int, J: str,
                      j: int, c_max: float | None = None) -> FunctionHandle:
    """k = c n_eff^{-p} f with k'(infinity) = target, f the Ahlfors
    surrogate of a nearby square; |c| is reported and flagged when large."""
    loz = tree.lozenge(n, J, j)
    c_max = c_max if c_max is not None else tree.config.extra("c_max")
    p = tree.config.power_p
    n_eff = tree.config.n_eff(n)
    if target == 0:
        k = FunctionHandle(evaluator=lambda z: np.zeros(np.shape(np.atleast_1d(z)), complex),
                           domain="omega", sup_norm_estimate=0.0,
                           derivative_at_infinity=0.0, provenance="zero")
        k.meta.update({"c": 0.0, "flag_unbounded": False, "square": None})
        return k
    m, I = find_nearby_square(tree, loz)
    f = ahlfors_surrogate(tree, m, I)
    c = complex(target) * n_eff ** p / f.derivative_at_infinity
    k = f.scaled(c * n_eff ** (-p))
    k.provenance = "matched-corrector"
    k.meta.update({"c": abs(c), "flag_unbounded": bool(abs(c) > c_max),
                   "square": (m, I), "p": p, "n_eff": n_eff})
    return k
