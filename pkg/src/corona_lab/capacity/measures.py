"""Natural measures on Cantor pieces and their Cauchy transforms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadIndex, DepthOrder, SingularPoint
from ..funhandle import FunctionHandle
from ..geometry.tree import CantorTree, check_word


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted complex point cloud on K cap Q^n_J at a stated depth."""
    points: np.ndarray
    weights: np.ndarray
    total_mass: float
    carrier: tuple          # (n, J, depth)

    def __post_init__(self):
        if abs(self.weights.sum() - self.total_mass) > 1e-12 * max(self.total_mass, 1.0):
            raise ValueError("weights must sum to total_mass")


def natural_measure(tree: CantorTree, n: int, J: str, depth: int) -> DiscreteMeasure:
    """Equal weights on the depth-d descendants of Q^n_J, total mass sigma_n."""
    check_word(J, n)
    if depth < n:
        raise DepthOrder(f"depth {depth} below carrier level {n}")
    if depth > tree.N:
        raise BadIndex(f"depth {depth} beyond truncation {tree.N}")
    words = [J + w for w in tree.indices(depth - n)]
    pts = np.array([tree.center(w) for w in words])
    mass = float(tree.sigma[n])
    wts = np.full(len(pts), mass / len(pts))
    return DiscreteMeasure(points=pts, weights=wts, total_mass=mass,
                           carrier=(n, J, depth))


def cauchy_transform(measure: DiscreteMeasure, z) -> np.ndarray:
    """C mu (z) = sum w_i / (z_i - z); vanishes at infinity like mass/|z|."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = measure.points[None, :] - z.ravel()[:, None]
    if np.any(d == 0.0):
        raise SingularPoint("evaluation at a measure point")
    return (measure.weights[None, :] / d).sum(axis=1).reshape(z.shape)


def cauchy_deriv(measure: DiscreteMeasure, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = measure.points[None, :] - z.ravel()[:, None]
    return (measure.weights[None, :] / (d * d)).sum(axis=1).reshape(z.shape)


def cauchy_second(measure: DiscreteMeasure, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = measure.points[None, :] - z.ravel()[:, None]
    return (2.0 * measure.weights[None, :] / (d * d * d)).sum(axis=1).reshape(z.shape)


def cauchy_handle(measure: DiscreteMeasure, sup_norm: float = np.inf,
                  scale: complex = 1.0) -> FunctionHandle:
    """FunctionHandle for scale * C mu with closed-form derivatives.

    derivative_at_infinity follows D[f] = lim -z f(z), giving
    scale * total_mass for the Cauchy transform.
    """
    scale = complex(scale)
    return FunctionHandle(
        evaluator=lambda z: scale * cauchy_transform(measure, z),
        domain="omega",
        sup_norm_estimate=abs(scale) * sup_norm,
        derivative_at_infinity=scale * measure.total_mass,
        provenance="cauchy",
        deriv_evaluator=lambda z: scale * cauchy_deriv(measure, z),
        deriv2_evaluator=lambda z: scale * cauchy_second(measure, z),
        meta={"carrier": measure.carrier},
    )
