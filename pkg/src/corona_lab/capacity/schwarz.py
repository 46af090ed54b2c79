"""Schwarz-lemma decay verification for derivative-matched differences."""
from __future__ import annotations

import numpy as np

from ..errors import NotDoubleZero
from ..funhandle import FunctionHandle
from ..report import VerificationReport


def far_field_double_zero(h: FunctionHandle, center: complex = 0.5 + 0.5j,
                          radii=(1e3, 2e3, 4e3), n_dir: int = 8,
                          tol: float = 1e-3) -> float:
    """Largest sampled |z h(z)| at far radii; raises NotDoubleZero if it
    fails to decay (a single zero at infinity leaves z h(z) ~ const)."""
    dirs = np.exp(2j * np.pi * np.arange(n_dir) / n_dir)
    vals = []
    for r in radii:
        z = center + r * dirs
        vals.append(float(np.abs(z * h(z)).max()))
    if not (vals[-1] < 0.5 * vals[0] or vals[-1] < tol * max(vals[0], 1e-300)):
        if vals[0] > 1e-12:
            raise NotDoubleZero(
                f"|z h(z)| does not decay at far field: {vals}")
    return vals[-1]


def schwarz_decay_fit(h: FunctionHandle, e_points, direction: complex = None,
                      d_range=(4.0, 64.0), n_pts: int = 24) -> VerificationReport:
    """Fit log|h| against log d(z, E) on an outward ray from the singular
    set E (given by a sample of its points).

    A matched corrector difference has a double zero at infinity, so the
    fitted exponent should sit near -2.
    """
    rep = VerificationReport(name="schwarz_decay_fit")
    e_points = np.atleast_1d(np.asarray(e_points, dtype=complex))
    E_center = complex(e_points.mean())
    E_diam = max(float(np.abs(e_points[:, None]
                              - e_points[None, :]).max()), 1e-6)
    far_field_double_zero(h, center=E_center)
    if direction is None:
        direction = (E_center - (0.5 + 0.5j))
        if abs(direction) < 1e-12:
            direction = 1.0 + 0.0j
    direction = direction / abs(direction)
    ds = E_diam * np.exp(np.linspace(np.log(d_range[0]), np.log(d_range[1]),
                                     n_pts))
    z = E_center + direction * (ds + 0.5 * E_diam)
    dtrue = np.abs(z[:, None] - e_points[None, :]).min(axis=1)
    vals = np.abs(h(z))
    good = vals > 1e-300
    x = np.log(dtrue[good])
    y = np.log(vals[good])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    ss = 1.0 - np.sum((y - fit) ** 2) / max(np.sum((y - y.mean()) ** 2), 1e-300)
    rep.metrics["exponent"] = float(coef[0])
    rep.metrics["prefactor"] = float(np.exp(coef[1]))
    rep.metrics["r_squared"] = float(ss)
    rep.rows = [{"d": float(d), "abs_h": float(v)}
                for d, v in zip(dtrue, vals)]
    rep.add_check("exponent_in_band", -2.2 <= coef[0] <= -1.8,
                  f"exponent {coef[0]:.3f}")
    return rep
