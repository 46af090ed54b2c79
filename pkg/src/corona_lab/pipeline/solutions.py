"""Top-down local corona solutions on the pasting regions.

Each region carries a disc-side construction: the Koszul base solve for the
pushed data, a smooth pasting against the already-built neighbor solutions
across the gamma* bands, and the Jones dbar correction with Hormander
antisymmetrization.  Delivered local solutions are normalized pointwise so
sum_mu f_mu g_mu^(R) = 1 holds to rounding on every evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import CantorConfig
from ..errors import CellTooLarge, DataBelowEta
from ..funhandle import FunctionHandle
from ..geometry.tree import CantorTree
from ..discmap.dbar import (BandCells, build_band_cells, dbar_psi_weight,
                            jones_dbar, psi_weight)
from ..discmap.interpolation import (SeparatedSequence, separated_sequence,
                                     varopoulos_functions)
from ..discmap.koszul import DataJet, KoszulSolution, build_koszul
from ..discmap.outer import build_G
from ..cauchy2d import (kernel_sum, polygon_cauchy_const_paired,
                        polygon_cauchy_wbar_paired)
from .regions import RegionNode


@dataclass
class CoronaData:
    """M bounded analytic data functions on Omega with max-modulus >= eta."""
    handles: list
    eta: float

    @property
    def M(self) -> int:
        return len(self.handles)

    def values(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.stack([h(z) for h in self.handles])

    def jet_plane(self, z):
        """(f, f', f'') stacked (M, B) with closed-form derivatives."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        f = np.stack([h(z) for h in self.handles])
        fp = np.stack([h.deriv(z) for h in self.handles])
        fpp = np.stack([h.deriv2(z) for h in self.handles])
        return f, fp, fpp


class LocalSolution:
    """Corona solutions on one region, matched to neighbor solutions."""

    def __init__(self, node: RegionNode, data: CoronaData,
                 prev: dict, config: CantorConfig):
        self.node = node
        self.data = data
        self.prev = prev          # gap key -> LocalSolution (or None for ext)
        self.config = config
        self.band_rel = config.extra("band_rel")
        self.M = data.M
        self._stats: dict = {}
        self._build()

    # ------------------------------------------------------------------
    def _disc_jet(self, z, w=None):
        """Data jet in the disc coordinate at plane points z.

        The map derivatives come from the exact chain rule through the
        zipper composition; finite differences of the composition would
        drown phi'' in rounding noise.
        """
        cm = self.node.cmap
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w_jet, phi_p, phi_pp = cm.forward_jet(z)
        if w is None:
            w = w_jet
        f, fp, fpp = self.data.jet_plane(z)
        Fp = fp / phi_p
        Fpp = (fpp - Fp * phi_pp) / (phi_p * phi_p)
        return w, DataJet(F=f, Fp=Fp, Fpp=Fpp)

    def _build(self):
        node = self.node
        cfg = self.config
        nr = cfg.extra("koszul_nr")
        nt = cfg.extra("koszul_nt")
        from ..discmap.koszul import polar_grid
        nodes, _ = polar_grid(nr, nt)
        z_nodes = node.cmap.inverse(nodes)
        _, jet = self._disc_jet(z_nodes, w=nodes)
        self.koszul = build_koszul(lambda _: jet, self.M, self.data.eta,
                                   nr, nt)
        if node.is_ext:
            self.G = self.seq = self.varo = self.band = None
            self._jones_groups = None
            return
        arcs = node.arcs
        self.G = build_G(arcs)
        self.seq = separated_sequence(arcs, cfg.beta, cfg.extra("pinch_rel"),
                                      inset=2.0 * self.band_rel)
        self.varo = varopoulos_functions(self.seq, arcs.level, cfg.power_p,
                                         self.G,
                                         beta_coarse=cfg.extra("class_beta"),
                                         penalty=cfg.extra("interp_penalty"))
        self.band = build_band_cells(arcs, self.seq, self.band_rel)
        # previous-generation and base values at the band nodes
        zb = node.cmap.inverse(self.band.nodes)
        wb, jet_b = self._disc_jet(zb, w=self.band.nodes)
        g_base = self.koszul.eval_g(self.band.nodes, jet_b)
        prev_vals = np.zeros((self.M, len(zb)), dtype=complex)
        psi = np.zeros(len(zb))
        dpsi = np.zeros(len(zb), dtype=complex)
        for j, entry in enumerate(arcs.entries):
            sel = self.band.arc_of == j
            if not np.any(sel):
                continue
            sol = self.prev[entry.gap_key]
            prev_vals[:, sel] = sol.eval(zb[sel])
            psi[sel] = psi_weight(self.band.nodes[sel], entry, self.band_rel)
            dpsi[sel] = dbar_psi_weight(self.band.nodes[sel], entry,
                                        self.band_rel)
        paste = (1.0 - psi)[None, :] * g_base + psi[None, :] * prev_vals
        dbar_paste = dpsi[None, :] * (prev_vals - g_base)
        # Jones coefficients per ordered pair
        H = self.varo.h_matrix(self.band.nodes)
        h_own = H[np.arange(len(zb)), self.band.cell_of]
        if np.min(np.abs(h_own)) < 0.5:
            raise CellTooLarge(
                f"|h_m| = {np.abs(h_own).min():.3f} < 1/2 on a pasting cell "
                f"of region {node.key}; refine beta or narrow the band")
        self._b_nodes = {}
        self._jones_coef = {}
        for mu in range(self.M):
            for nu in range(self.M):
                if mu == nu:
                    continue
                b = paste[mu] * dbar_paste[nu]
                self._b_nodes[(mu, nu)] = b
                self._jones_coef[(mu, nu)] = b * self.band.areas / h_own
        self._jones_groups = [np.nonzero(self.band.cell_of == m)[0]
                              for m in range(len(self.seq))]
        self._stats["mismatch_band_max"] = float(
            np.abs(prev_vals - g_base).max())
        self._stats["n_band_cells"] = len(zb)

    # ------------------------------------------------------------------
    def _psi_all(self, w):
        """(n_arcs, B) pasting weights and dbar weights at disc points."""
        arcs = self.node.arcs
        psi = np.zeros((len(arcs.entries), w.size))
        dpsi = np.zeros((len(arcs.entries), w.size), dtype=complex)
        for j, entry in enumerate(arcs.entries):
            psi[j] = psi_weight(w, entry, self.band_rel)
            dpsi[j] = dbar_psi_weight(w, entry, self.band_rel)
        return psi, dpsi

    def _jones_eval(self, w, Hw=None):
        """a_{mu nu}(w) for all ordered pairs; (pairs dict of (B,))."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        Hw = self.varo.h_matrix(w) if Hw is None else Hw
        out = {pair: np.zeros(w.shape, dtype=complex)
               for pair in self._jones_coef}
        for m, grp in enumerate(self._jones_groups):
            if grp.size == 0:
                continue
            for pair, coef in self._jones_coef.items():
                out[pair] += Hw[:, m] * kernel_sum(self.band.nodes[grp],
                                                   coef[grp], w)
        # hosting-cell subtraction for points inside the band
        host = self.band.locate(w, self.node.arcs)
        ins = np.nonzero(host >= 0)[0]
        if ins.size:
            wq = w[ins]
            q = host[ins]
            m_idx = self.band.cell_of[q]
            hm = Hw[ins, m_idx]
            c1 = polygon_cauchy_const_paired(self.band.corners[q], wq)
            cw = polygon_cauchy_wbar_paired(self.band.corners[q], wq)
            q1 = -(self.band.areas[q] / np.pi) / (self.band.nodes[q] - wq)
            qw = -(self.band.areas[q] / np.pi) \
                * (np.conj(self.band.nodes[q]) - np.conj(wq)) \
                / (self.band.nodes[q] - wq)
            rho0, drho = self._band_density_local(wq, m_idx)
            for pair in out:
                out[pair][ins] += hm * (rho0[pair] * (c1 - q1)
                                        + drho[pair] * (cw - qw))
        return out

    def _band_density_local(self, wq, m_idx, hstep=2e-7):
        """rho = b/h_m and dbar rho at points inside the band (per pair)."""
        vals = {}
        for dz in (0, hstep, -hstep, 1j * hstep, -1j * hstep):
            vals[dz] = self._band_b_raw(wq + dz, m_idx)
        rho0 = {p: vals[0][p] for p in vals[0]}
        drho = {}
        for p in rho0:
            fx = (vals[hstep][p] - vals[-hstep][p]) / (2 * hstep)
            fy = (vals[1j * hstep][p] - vals[-1j * hstep][p]) / (2 * hstep)
            drho[p] = 0.5 * (fx + 1j * fy)
        return rho0, drho

    def _band_b_raw(self, w, m_idx):
        """b/h_m per pair at arbitrary disc points near the band."""
        z = self.node.cmap.inverse(w)
        w2, jet = self._disc_jet(z, w=w)
        g_base = self.koszul.eval_g(w, jet)
        arcs = self.node.arcs
        psi, dpsi = self._psi_all(w)
        prev_vals = np.zeros((self.M, w.size), dtype=complex)
        for j, entry in enumerate(arcs.entries):
            sel = psi[j] > 0
            if np.any(sel):
                prev_vals[:, sel] = self.prev[entry.gap_key].eval(z[sel])
        # the bands are pairwise disjoint, so at most one psi_j is active
        psi_tot = psi.sum(axis=0)
        dpsi_tot = dpsi.sum(axis=0)
        paste = (1.0 - psi_tot)[None, :] * g_base \
            + psi_tot[None, :] * prev_vals
        dbar_paste = dpsi_tot[None, :] * (prev_vals - g_base)
        hm = self.varo.h_matrix(w)[np.arange(w.size), m_idx]
        return {pair: paste[pair[0]] * dbar_paste[pair[1]] / hm
                for pair in self._jones_coef}

    # ------------------------------------------------------------------
    def eval(self, z, w=None) -> np.ndarray:
        """Normalized local corona solutions (M, B) at plane points z."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w, jet = self._disc_jet(z, w=w)
        g = self.koszul.eval_g(w, jet)
        if not self.node.is_ext:
            psi, _ = self._psi_all(w)
            psi_tot = psi.sum(axis=0)
            if np.any(psi_tot > 0):
                prev_vals = np.zeros((self.M, z.size), dtype=complex)
                for j, entry in enumerate(self.node.arcs.entries):
                    sel = psi[j] > 0
                    if np.any(sel):
                        prev_vals[:, sel] = \
                            self.prev[entry.gap_key].eval(z[sel])
                g = (1.0 - psi_tot)[None, :] * g \
                    + psi_tot[None, :] * prev_vals
            a = self._jones_eval(w)
            for mu in range(self.M):
                corr = np.zeros(z.size, dtype=complex)
                for nu in range(self.M):
                    if nu == mu:
                        continue
                    corr += (a[(mu, nu)] - a[(nu, mu)]) * jet.F[nu]
                g[mu] = g[mu] + corr
        denom = np.sum(jet.F * g, axis=0)
        return g / denom

    def sup_norms(self, n_samples: int = 400) -> np.ndarray:
        th = np.linspace(0, 2 * np.pi, n_samples // 4, endpoint=False)
        rr = np.array([0.3, 0.6, 0.85, 0.96])
        w = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
        z = self.node.cmap.inverse(w)
        vals = self.eval(z, w=w)
        return np.abs(vals).max(axis=1)


def local_solutions_topdown(tree: CantorTree, nodes: dict, data: CoronaData,
                            config: CantorConfig) -> dict:
    """Local solutions for every region, exterior first, then levels 0..N-1
    (predecessors across each own gap are already built)."""
    out: dict = {}
    out["ext"] = LocalSolution(nodes["ext"], data, {}, config)
    for n in range(0, tree.N):
        for J in tree.indices(n):
            key = (n, J)
            node = nodes[key]
            prev = {g.key: out[g.outside] for g in node.own_gaps}
            out[key] = LocalSolution(node, data, prev, config)
    return out
