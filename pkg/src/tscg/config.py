"""Estimation configuration and rate-based tuning schedules."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .errors import ConfigurationError

__all__ = ["EstimationConfig", "Tuning", "resolve_tuning"]


@dataclass(frozen=True)
class EstimationConfig:
    """All knobs of the three-stage procedure.

    The rates follow the theory (m ~ (log T)^{1/3} T^{2/3},
    lambda1 ~ T^{-1/3 + eta}, kappa ~ T^{-1/2}, nu ~ T^{-1/2 + zeta});
    the multiplicative constants are free. The defaults were calibrated on
    simulated two-layer data with p = 30, T = 1000 and master seed 1
    (scripts/calibrate.py); see the README for the sweep.
    """

    m_const: float = 1.0
    m: Optional[int] = None  # explicit half-block size, bypasses the schedule
    min_blocks: int = 5
    lambda1_const: float = 0.2
    eta: float = 1.0 / 16
    gamma: float = 2.5
    kappa_const: float = 60.0
    nu_const: float = 8.0
    zeta: float = 0.1
    rho: float = 1.0
    varrho: float = 1e-4
    max_iter: int = 3000
    tol_primal: float = 1e-5
    tol_dual: float = 1e-5
    adaptive_rho: bool = True
    stage3_ridge: Optional[float] = None
    ordering_ridge: Optional[float] = None
    center: bool = True
    standardize: bool = False

    def __post_init__(self):
        if not 0 < self.eta < 1.0 / 3:
            raise ConfigurationError(f"eta must lie in (0, 1/3), got {self.eta}")
        if not 0 < self.zeta < 0.5:
            raise ConfigurationError(f"zeta must lie in (0, 1/2), got {self.zeta}")
        if self.min_blocks < 1:
            raise ConfigurationError(f"min_blocks must be >= 1, got {self.min_blocks}")
        for name in ("m_const", "lambda1_const", "gamma", "kappa_const", "nu_const"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.m is not None and self.m < 0:
            raise ConfigurationError(f"m must be >= 0, got {self.m}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EstimationConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Tuning:
    m: int
    M: int
    lambda1: float
    lambda2: float
    kappa: float
    nu: float

    def to_dict(self) -> dict:
        return asdict(self)


def resolve_tuning(T: int, p: int, cfg: EstimationConfig) -> Tuning:
    """Concrete (m, M, lambda1, lambda2, kappa, nu) for a series of length T."""
    if T % 2 or T < 20:
        raise ConfigurationError(f"T must be even and >= 20, got T={T}")
    half = T // 2 - 1
    # largest m that still leaves min_blocks blocks: 2m+1 <= half/min_blocks
    m_max = (half // cfg.min_blocks - 1) // 2
    if m_max < 0:
        raise ConfigurationError(
            f"T={T} is too short for {cfg.min_blocks} frequency blocks"
        )
    if cfg.m is not None:
        m = cfg.m
    else:
        m = min(int(round(cfg.m_const * math.log(T) ** (1 / 3) * T ** (2 / 3))), m_max)
    M = half // (2 * m + 1)
    if M < 1:
        raise ConfigurationError(f"half-block size m={m} leaves no frequency block for T={T}")
    lam1 = cfg.lambda1_const * T ** (-1 / 3 + cfg.eta)
    return Tuning(
        m=m,
        M=M,
        lambda1=lam1,
        lambda2=cfg.gamma * lam1,
        kappa=cfg.kappa_const * T ** -0.5,
        nu=cfg.nu_const * T ** (-0.5 + cfg.zeta),
    )
