"""Evaluator-with-metadata for analytic functions passed between modules.

derivative_at_infinity follows the Ahlfors-function convention
D[f] = lim_{z->inf} -z f(z) (so the Cauchy transform of a positive measure
gets +total_mass, and a corrector matched to a moment has D[I - k] = 0).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class FunctionHandle:
    evaluator: Callable
    domain: str = ""
    sup_norm_estimate: float = np.inf
    derivative_at_infinity: complex | None = None
    provenance: str = ""                      # closed-form | cauchy | grid
    deriv_evaluator: Callable | None = None
    deriv2_evaluator: Callable | None = None
    meta: dict = field(default_factory=dict)

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.asarray(self.evaluator(z), dtype=complex)

    def deriv(self, z, h: float = 1e-6) -> np.ndarray:
        """Complex derivative; central differences unless a closed form is set."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.deriv_evaluator is not None:
            return np.asarray(self.deriv_evaluator(z), dtype=complex)
        return (self(z + h) - self(z - h)) / (2.0 * h)

    def deriv2(self, z, h: float = 1e-5) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.deriv2_evaluator is not None:
            return np.asarray(self.deriv2_evaluator(z), dtype=complex)
        return (self.deriv(z + h) - self.deriv(z - h)) / (2.0 * h)

    def scaled(self, factor: complex) -> "FunctionHandle":
        factor = complex(factor)
        dinf = (None if self.derivative_at_infinity is None
                else factor * self.derivative_at_infinity)
        return FunctionHandle(
            evaluator=lambda z, f=self.evaluator: factor * np.asarray(f(z)),
            domain=self.domain,
            sup_norm_estimate=abs(factor) * self.sup_norm_estimate,
            derivative_at_infinity=dinf,
            provenance=self.provenance,
            deriv_evaluator=(None if self.deriv_evaluator is None else
                             lambda z, d=self.deriv_evaluator:
                             factor * np.asarray(d(z))),
            meta=dict(self.meta),
        )


def handle_sum(handles, domain="", provenance="sum") -> FunctionHandle:
    hs = list(handles)

    def ev(z):
        out = np.zeros(np.shape(np.atleast_1d(z)), dtype=complex)
        for h in hs:
            out = out + h(z)
        return out

    dinf = None
    if all(h.derivative_at_infinity is not None for h in hs):
        dinf = sum(h.derivative_at_infinity for h in hs)
    return FunctionHandle(evaluator=ev, domain=domain,
                          sup_norm_estimate=float(sum(h.sup_norm_estimate
                                                      for h in hs)),
                          derivative_at_infinity=dinf, provenance=provenance)
