"""Run configuration: the geometric/numerical knobs shared by every module.

A config file is a flat ``key = value`` text file (values in JSON syntax, ``#``
comments allowed) or a single JSON object.  Every key has a CLI flag override;
defaults are embedded here and dumped by ``corona-lab --print-config``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Union

from .errors import ConfigError, InvalidLambda, NonmonotoneLambda, DepthZero

LambdaSpec = Union[float, list, tuple, dict]

_EXTRA_DEFAULTS = {
    # boundary polyline resolution: target points per region boundary
    "boundary_points": 900,
    # corner grading: refinement ratio and depth
    "corner_ratio": 0.6,
    "corner_depth": 7,
    # walk-on-spheres absorption shell, in units of sigma_N
    "eps_abs": 1e-3,
    "step_cap": 100_000,
    # far-field start/reentry circle radius (around the set center)
    "far_radius": 2.0,
    # separated sequence: subsequence separation and pinch truncation
    "class_beta": 0.95,
    "pinch_rel": 0.25,
    "interp_penalty": 1e-4,
    # disc-side transition band half-width as a fraction of (1-|z|)
    "band_rel": 0.05,
    # polar quadrature for the disc Koszul correction (radial x angular)
    "koszul_nr": 36,
    "koszul_nt": 72,
    # per-wedge boundary quadrature panels
    "wedge_panels": 160,
    # lozenge quadrature transverse nodes (grid_res is the axial count)
    "lozenge_nv": 8,
    # symmetry averaging order for conformal maps (1 disables)
    "symmetry_order": 4,
    # corrector constant flag threshold
    "c_max": 1e3,
}


@dataclass
class CantorConfig:
    """All knobs for one experiment.

    lambda_spec: a constant in (1/4,1/2), an explicit sequence, or a named
    family ``{"family": "loglog", "c": <float>}`` meaning
    ``lambda_n = (1 - c/log(log(n + e^e)))/2``.
    """

    lambda_spec: LambdaSpec = 0.4
    depth: int = 3
    alpha: float = math.pi / 16         # lozenge half-angle, < pi/4
    tilde_alpha: float = 0.46 * math.pi  # lens angle, < pi/2
    c1: float = 0.30                    # arc-angle constant in theta_n
    beta: float = 0.25                  # separation constant in (0,1)
    power_p: int = 3                    # paper exponents n^p, n^{2p}
    seed: int = 7
    walks: int = 20_000
    grid_res: int = 24                  # quadrature resolution (axial)
    tol: float = 1e-2                   # verification tolerance
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.depth < 1:
            raise DepthZero("depth must be >= 1")
        if not (0.0 < self.alpha < math.pi / 4):
            raise ConfigError("alpha must lie in (0, pi/4)")
        if not (0.0 < self.tilde_alpha < math.pi / 2):
            raise ConfigError("tilde_alpha must lie in (0, pi/2)")
        if self.c1 <= 0:
            raise ConfigError("c1 must be positive")
        if not (0.0 < self.beta < 1.0):
            raise ConfigError("beta must lie in (0,1)")
        if self.power_p < 1:
            raise ConfigError("power_p must be a positive integer")
        if self.grid_res < 4:
            raise ConfigError("grid_res must be >= 4")
        merged = dict(_EXTRA_DEFAULTS)
        merged.update(self.extras)
        self.extras = merged
        self.lambdas()  # validate eagerly

    def lambdas(self) -> list[float]:
        """Resolved sequence lambda_1..lambda_N; validates range/monotonicity."""
        spec = self.lambda_spec
        n = self.depth
        if isinstance(spec, (int, float)):
            lam = [float(spec)] * n
        elif isinstance(spec, (list, tuple)):
            if len(spec) < n:
                raise ConfigError(
                    f"lambda_spec sequence has {len(spec)} entries, depth={n}")
            lam = [float(x) for x in spec[:n]]
        elif isinstance(spec, dict):
            fam = spec.get("family")
            if fam != "loglog":
                raise ConfigError(f"unknown lambda family {fam!r}")
            c = float(spec.get("c", 0.1))
            ee = math.exp(math.e)
            lam = [0.5 * (1.0 - c / math.log(math.log(k + ee)))
                   for k in range(1, n + 1)]
        else:
            raise ConfigError("lambda_spec must be a number, sequence, or family dict")
        for k, x in enumerate(lam):
            if not (0.25 < x < 0.5):
                raise InvalidLambda(
                    f"lambda_{k + 1}={x} outside the open interval (1/4, 1/2)")
        for k in range(len(lam) - 1):
            if lam[k] > lam[k + 1] + 1e-15:
                raise NonmonotoneLambda(
                    f"lambda_{k + 1}={lam[k]} > lambda_{k + 2}={lam[k + 1]}")
        return lam

    def n_eff(self, n: int) -> float:
        """Shifted level scale used in every log-n formula (log undefined at 1)."""
        return float(n + 2)

    def extra(self, key: str):
        return self.extras[key]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CantorConfig":
        d = dict(d)
        known = {k for k in cls.__dataclass_fields__ if k != "extras"}
        extras = dict(d.pop("extras", {}))
        unknown = [k for k in d if k not in known]
        for k in unknown:
            if k in _EXTRA_DEFAULTS:
                extras[k] = d.pop(k)
            else:
                raise ConfigError(f"unknown config key {k!r}")
        return cls(**d, extras=extras)


def parse_config_text(text: str) -> dict:
    """Parse a flat key=value config (JSON values) or a JSON object."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        val = val.strip()
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def load_config(path: str | Path | None, overrides: dict | None = None) -> CantorConfig:
    d: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        d = parse_config_text(p.read_text())
    if overrides:
        d.update({k: v for k, v in overrides.items() if v is not None})
    if "lambda_spec" not in d and "lambda" in d:
        d["lambda_spec"] = d.pop("lambda")
    try:
        return CantorConfig.from_dict(d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(cfg: CantorConfig) -> str:
    lines = []
    for key, val in cfg.to_dict().items():
        if key == "extras":
            for ek, ev in val.items():
                lines.append(f"{ek} = {json.dumps(ev)}")
        else:
            lines.append(f"{key} = {json.dumps(val)}")
    return "\n".join(lines) + "\n"
