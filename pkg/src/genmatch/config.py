"""Run configuration: every pipeline constant with its default, a flat
key=value file format, and CLI override plumbing."""

from __future__ import annotations

import dataclasses

from .errors import GenmatchError


@dataclasses.dataclass
class RunConfig:
    seed: int = 1
    k_s: int = 30
    k_t: int = 60
    d_eps: float = 0.08
    m_max: int = 35
    d_adj: float = 0.3
    eps_wks: float = 0.2
    alpha: float = 1.0
    beta: float = 100.0
    mu: float = 1.0
    eta: float = 1e-3
    gamma: float = 5e-4
    e_max: float = 0.06
    population: int = 400
    crossover_prob: float = 0.75
    rho_growth: float = 0.05
    rho_shrink: float = 0.1
    n_shrink: int = 6
    rho_guidance: float = 0.05
    patience: int = 70
    max_generations: int = 300
    convergence_threshold: float = 0.06

    def validate(self):
        for name in ("crossover_prob", "rho_growth", "rho_shrink", "rho_guidance"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise GenmatchError(f"{name}={value} must be in [0, 1]")
        if not 1 <= self.k_s <= self.k_t:
            raise GenmatchError("require 1 <= k_s <= k_t")
        return self

    def to_text(self):
        lines = []
        for field in dataclasses.fields(self):
            lines.append(f"{field.name}={getattr(self, field.name)!r}")
        return "\n".join(lines) + "\n"


def load_config(path):
    """Read a flat key=value config file (blank lines and # comments allowed)."""
    values = {}
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#")[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise GenmatchError(f"{path}:{lineno}: expected key=value")
            key, raw = (t.strip() for t in line.split("=", 1))
            if key not in fields:
                raise GenmatchError(f"{path}:{lineno}: unknown key {key!r}")
            caster = int if fields[key] == "int" else float
            values[key] = caster(raw)
    return RunConfig(**values).validate()
