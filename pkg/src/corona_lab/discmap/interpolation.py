"""Separated sequences on the gamma* arcs, constructive interpolation, and
the Varopoulos peak functions.

Interpolation solves the dual least-norm problem over Szego kernels at the
nodes and multiplies by the outer function G; the interpolation constant A
is the observed sup-norm ratio, reported rather than asserted.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InterpolationIllConditioned
from ..funhandle import FunctionHandle
from .arcs import ArcSystem


@dataclass
class SeparatedSequence:
    points: np.ndarray           # complex nodes on the union of gamma* arcs
    arc_of: np.ndarray           # entry index per node
    tpar: np.ndarray             # parameter along its arc per node
    beta: float
    arcs: ArcSystem
    A: float = np.nan            # interpolation constant estimate
    classes: list = field(default_factory=list)   # index arrays per subsequence
    class_of: np.ndarray | None = None
    maximal_gap: float = np.nan  # largest addable-candidate margin (diagnostic)

    @property
    def depth(self) -> np.ndarray:
        return 1.0 - np.abs(self.points)

    def __len__(self):
        return len(self.points)


def separated_sequence(arcs: ArcSystem, beta: float,
                       pinch_rel: float = 0.05, dense: int = 4001,
                       inset: float = 0.0) -> SeparatedSequence:
    """Greedy maximal beta-separated sequence along each gamma* arc.

    Points are kept while 1-|z| >= pinch_rel * (arc depth); the pinched tail
    carries a vanishing share of the pasting band.  A positive inset pushes
    the points radially inward by inset*(1-|z|) (onto the mid-curve of the
    pasting band, which lives strictly inside the bubble).
    """
    pts, arc_of, tpar = [], [], []
    for j, e in enumerate(arcs.entries):
        ts = np.linspace(0.0, 1.0, dense)
        zs = e.gamma.point(ts)
        if inset > 0.0:
            c = e.gamma.center
            rel = zs - c
            zs = c + (np.abs(rel) - inset * (1.0 - np.abs(zs))) \
                * np.exp(1j * np.angle(rel))
        depth = 1.0 - np.abs(zs)
        cut = pinch_rel * depth.max()
        ok = depth >= cut
        kept_idx: list[int] = []
        for i in np.nonzero(ok)[0]:
            if not kept_idx:
                kept_idx.append(i)
                continue
            zi = zs[i]
            good = True
            for k in kept_idx[::-1]:
                sep = beta * max(1.0 - abs(zs[k]), 1.0 - abs(zi))
                if abs(zi - zs[k]) < sep:
                    good = False
                    break
                if abs(zi - zs[k]) > 4.0 * sep:
                    break
            if good:
                kept_idx.append(i)
        pts.extend(zs[kept_idx])
        arc_of.extend([j] * len(kept_idx))
        tpar.extend(ts[kept_idx])
    seq = SeparatedSequence(points=np.asarray(pts, dtype=complex),
                            arc_of=np.asarray(arc_of, dtype=int),
                            tpar=np.asarray(tpar), beta=beta, arcs=arcs)
    # separation invariant (both orientations)
    z = seq.points
    if len(z) > 1:
        d = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(d, np.inf)
        req = beta * (1.0 - np.abs(z))[:, None]
        if not np.all(d >= req * (1.0 - 1e-9)):
            raise InterpolationIllConditioned("greedy sequence lost separation")
    return seq


def _szego(z, nodes):
    return 1.0 / (1.0 - np.conj(nodes)[None, :] * np.asarray(z).ravel()[:, None])


def _sup_samples(arcs: ArcSystem, n_bnd: int = 720) -> np.ndarray:
    th = np.linspace(0.0, 2.0 * np.pi, n_bnd, endpoint=False)
    ring = 0.999 * np.exp(1j * th)
    rr = np.linspace(0.15, 0.97, 7)
    grid = (rr[:, None] * np.exp(1j * th[None, ::6])).ravel()
    gam = np.concatenate(arcs.gamma_samples(48))
    return np.concatenate([ring, grid, gam])


def dual_solve(nodes: np.ndarray, targets: np.ndarray, samples: np.ndarray,
               penalty: float = 1e-4) -> np.ndarray:
    """Least-norm coefficients over Szego kernels with exact interpolation.

    Minimizes the kernel-quadratic norm plus a sampled boundary-energy
    penalty subject to K c = t (KKT system); the penalty suppresses the wild
    inter-node oscillation the plain dual solve develops on multiscale node
    sets while keeping the interpolation conditions exact.

    targets may be a vector or a (n_nodes, n_rhs) matrix.
    """
    n0 = len(nodes)
    K = _szego(nodes, nodes)
    S = _szego(samples, nodes)
    Q = K + penalty * (S.conj().T @ S) / len(samples)
    M = np.block([[Q, K.conj().T], [K, np.zeros((n0, n0), complex)]])
    t = np.atleast_2d(np.asarray(targets, dtype=complex).T).T
    if t.shape[0] != n0:
        t = t.T
    rhs = np.vstack([np.zeros_like(t), t])
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    c = sol[:n0]
    return c[:, 0] if np.ndim(targets) == 1 else c


def interpolate(seq: SeparatedSequence, values, G: FunctionHandle,
                a_cap: float = 1e6, penalty: float = 1e-4) -> FunctionHandle:
    """Interpolant g = f G with g(z_k) = w_k; A = observed norm ratio."""
    values = np.asarray(values, dtype=complex)
    nodes = seq.points
    targets = values / G(nodes)
    samples = _sup_samples(seq.arcs)
    coef = dual_solve(nodes, targets, samples, penalty)

    def ev(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return (_szego(z, nodes) @ coef).reshape(z.shape) * G(z)

    sup = float(np.abs(ev(samples)).max())
    wmax = float(np.abs(values).max()) if np.abs(values).max() > 0 else 1.0
    A = sup / wmax
    if not np.isfinite(A) or A > a_cap:
        raise InterpolationIllConditioned(
            f"interpolation constant estimate {A:.3g} exceeds cap {a_cap}")
    resid = float(np.abs(ev(nodes) - values).max())
    h = FunctionHandle(evaluator=ev, domain="disc", sup_norm_estimate=sup,
                       provenance="szego-dual",
                       meta={"A": A, "resid": resid, "n_nodes": len(nodes)})
    if not np.isfinite(seq.A) or A > seq.A:
        seq.A = A
    return h


@dataclass
class VaropoulosSystem:
    seq: SeparatedSequence
    G: FunctionHandle
    class_coefs: list            # per class: (node_idx, Dcoef matrix)
    A: float
    n_classes: int
    norm_bound: float            # max sampled |h_m|
    sum_bound: float             # max sampled sum_m |h_m|

    def point_count(self) -> int:
        return len(self.seq)

    def eval_combo(self, z, cls: int) -> np.ndarray:
        """d_m(z) for all m in a class: (B, n0) matrix (before squaring)."""
        idx, Dcoef = self.class_coefs[cls]
        B = _szego(z, self.seq.points[idx]) @ Dcoef
        return B * self.G(z).ravel()[:, None]

    def h_matrix(self, z) -> np.ndarray:
        """(B, M) matrix of h_m(z) over all sequence points m."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty((z.size, len(self.seq)), dtype=complex)
        for cls, (idx, _) in enumerate(self.class_coefs):
            d = self.eval_combo(z, cls)
            out[:, idx] = d * d
        return out

    def h_handle(self, m: int) -> FunctionHandle:
        cls = int(self.seq.class_of[m])
        idx, _ = self.class_coefs[cls]
        pos = int(np.nonzero(idx == m)[0][0])

        def ev(z, cls=cls, pos=pos):
            d = self.eval_combo(z, cls)[:, pos]
            return d * d

        return FunctionHandle(evaluator=ev, domain="disc",
                              sup_norm_estimate=self.norm_bound,
                              provenance="varopoulos")


def split_classes(seq: SeparatedSequence, beta_coarse: float) -> list:
    """Greedy coloring into beta_coarse-separated subsequences."""
    z = seq.points
    depth = seq.depth
    classes: list[list[int]] = []
    for i in range(len(z)):
        placed = False
        for cl in classes:
            ok = True
            for k in cl:
                sep = beta_coarse * max(depth[i], depth[k])
                if abs(z[i] - z[k]) < sep:
                    ok = False
                    break
            if ok:
                cl.append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
    return [np.asarray(c, dtype=int) for c in classes]


def varopoulos_functions(seq: SeparatedSequence, n: int, p: int,
                         G: FunctionHandle,
                         beta_coarse: float | None = None,
                         penalty: float = 1e-4) -> VaropoulosSystem:
    """Peak functions h_m with h_m(z_k) = delta_{mk}, built per subsequence
    by the discrete-Fourier averaging of interpolants of roots of unity."""
    beta_coarse = beta_coarse if beta_coarse is not None \
        else min(0.95, 4.0 * seq.beta)
    classes = split_classes(seq, beta_coarse)
    seq.classes = classes
    class_of = np.empty(len(seq), dtype=int)
    for ci, idx in enumerate(classes):
        class_of[idx] = ci
    seq.class_of = class_of

    samples = _sup_samples(seq.arcs)
    Gs = G(samples)
    Gn = G(seq.points)
    class_coefs = []
    A = 1.0
    norm_bound = 0.0
    sum_abs = np.zeros(samples.shape)
    for idx in classes:
        nodes = seq.points[idx]
        n0 = len(nodes)
        om = np.exp(2j * np.pi / n0)
        jj, kk = np.meshgrid(np.arange(n0), np.arange(n0), indexing="ij")
        targets = om ** (jj * kk) / Gn[idx][None, :]   # (j, k): f_j(z_k)=om^{jk}
        C = dual_solve(nodes, targets.T, samples, penalty)  # (nodes, j)
        fvals = (_szego(samples, nodes) @ C) * Gs[:, None]
        A = max(A, float(np.abs(fvals).max()))
        # h_m = ((1/n0) sum_j om^{-mj} f_j)^2
        W = om ** (-np.outer(np.arange(n0), np.arange(n0))) / n0  # (j, m)
        Dcoef = C @ W
        dvals = (_szego(samples, nodes) @ Dcoef) * Gs[:, None]
        hvals = dvals * dvals
        norm_bound = max(norm_bound, float(np.abs(hvals).max()))
        sum_abs += np.abs(hvals).sum(axis=1)
        class_coefs.append((idx, Dcoef))
    sys = VaropoulosSystem(seq=seq, G=G, class_coefs=class_coefs, A=A,
                           n_classes=len(classes), norm_bound=norm_bound,
                           sum_bound=float(sum_abs.max()))
    seq.A = max(seq.A if np.isfinite(seq.A) else 1.0, A)
    return sys
