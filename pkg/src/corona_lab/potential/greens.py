"""Green's function g(z, infinity) for Omega_N and its critical points.

g(z) = log|z - a| - E_z[log|B_tau - a|] for any anchor a outside the domain;
we use the center of the SW-most leaf square (exits stay sigma_N/2 away from
it, keeping the log bounded).  Common random numbers (shared angle streams)
make finite differences of the estimate usable for critical point descent.
"""
from __future__ import annotations

import numpy as np

from ..errors import BadIndex
from ..geometry.tree import CantorTree
from .wos import MCEstimate, walk_exterior


def _anchor(tree: CantorTree) -> complex:
    return tree.center("1" * tree.N)


def greens_function(tree: CantorTree, z, walks: int, seed: int) -> MCEstimate:
    z = complex(z)
    a = _anchor(tree)
    exits = walk_exterior(tree, z, walks, seed)
    vals = np.log(np.abs(z - a)) - np.log(np.abs(exits - a))
    return MCEstimate(float(vals.mean()),
                      float(vals.std(ddof=1) / np.sqrt(walks)), walks, seed)


def _grad_hat(tree, z, h, walks, seed):
    """CRN central-difference gradient of the MC Green's function."""
    gp = greens_function(tree, z + h, walks, seed).value
    gm = greens_function(tree, z - h, walks, seed).value
    gip = greens_function(tree, z + 1j * h, walks, seed).value
    gim = greens_function(tree, z - 1j * h, walks, seed).value
    return np.array([(gp - gm) / (2 * h), (gip - gim) / (2 * h)])


def critical_points(tree: CantorTree, n: int, seed: int,
                    walks: int | None = None, tol: float | None = None,
                    iters: int = 10) -> list[dict]:
    """One approximate zero of grad g per annulus A^n_J.

    Returns [{"J", "z", "residual", "found"}]; residual above tolerance is
    reported via found=False, never fatal.
    """
    if not (1 <= n <= tree.N - 1):
        raise BadIndex(f"critical point level {n} outside 1..{tree.N - 1}")
    walks = walks or max(tree.config.walks // 16, 600)
    tol = tol if tol is not None else 5.0 * tree.config.tol
    out = []
    for J in tree.indices(n):
        frame = tree.annulus(n, J)
        width = 0.5 * (frame.outer.side - frame.inner.side)
        h = max(width / 4.0, 1e-3)
        parent_c = tree.center(J[:-1])
        cands = [parent_c]
        c = frame.outer.center
        ring = 0.25 * (frame.outer.side + frame.inner.side)
        cands += [c + ring * u for u in (1, -1, 1j, -1j)]
        cands = [z for z in cands
                 if frame.outer.contains(z) and not frame.inner.contains(z)]
        best = None
        for z0 in cands:
            z = complex(z0)
            lr = 0.8 * width
            for _ in range(iters):
                gr = _grad_hat(tree, z, h, walks, seed)
                gn = float(np.hypot(*gr))
                if gn < 0.25 * tol:
                    break
                step = -lr * (gr[0] + 1j * gr[1]) / max(gn, 1e-12)
                znew = z + step * min(1.0, gn)
                if frame.outer.contains(znew) and not frame.inner.contains(znew):
                    z = znew
                lr *= 0.7
            res = float(np.hypot(*_grad_hat(tree, z, h, 4 * walks, seed + 1)))
            if best is None or res < best[1]:
                best = (z, res)
        z, res = best
        out.append({"J": J, "z": z, "residual": res, "found": res <= tol})
    return out
