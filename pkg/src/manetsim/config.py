"""Experiment configuration, validation, and per-scheme derived parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, RegimeError

SCHEMES = ("fast", "slow")
CODING_MODES = ("lt", "oracle")
GEOMETRIES = ("torus", "square")
GOOD_CELL_POLICIES = ("paper", "adaptive")

# Tolerance used when flooring/ceiling analytically-exact quantities such as
# 6D/(25M): the formulas are often integer-valued in exact arithmetic and must
# not lose a unit to float noise.
_EPS = 1e-9


def floor_tol(x: float) -> int:
    return int(math.floor(x + _EPS))


def ceil_tol(x: float) -> int:
    return int(math.ceil(x - _EPS))


@dataclass(frozen=True)
class SimConfig:
    """All parameters of one simulation run.

    ``W`` is the bit budget of one successful slot-long transmission;
    ``delta`` the protocol-model guard factor; ``C`` the mini-slots per slot.
    ``epsilon_code`` is the rateless-decode overhead: a block of k data
    packets decodes once ceil((1+epsilon)k) distinct coded packets arrive.
    ``good_cell_policy`` selects the cell-occupancy window used by the
    schemes: "paper" is the asymptotic [9M/10+1, 11M/10] window, "adaptive"
    widens it to at least +-3*sqrt(M) so finite-size runs are not starved
    (identical to "paper" once M is large; see README).
    """

    n: int
    D: int
    W: float = 18.0
    delta: float = 0.4
    C: int = 9
    scheme: str = "fast"
    coding_mode: str = "oracle"
    geometry: str = "torus"
    epsilon_code: float = 1.0 / 6.0
    c_s: float = 1.0
    seed: int = 0
    super_slots: int = 1
    good_cell_policy: str = "adaptive"
    # Exponent a in the decode-failure probability k**-a sampled on top of a
    # successful oracle threshold check. None (default) disables the extra
    # draw: the decode guarantee is "failure probability at most k**-a", and
    # zero failures satisfy it.
    oracle_failure_exponent: float | None = None
    # When set, slots draw full positions and assert protocol-model
    # admissibility of every scheduled transmission. Slow; for tests.
    debug_checks: bool = False

    def validate(self) -> "SimConfig":
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.D < 1:
            raise ConfigError(f"D must be >= 1, got {self.D}")
        if self.D >= self.n:
            raise ConfigError(f"D must be < n (D=o(n)); got D={self.D}, n={self.n}")
        for name in ("W", "delta", "epsilon_code", "c_s"):
            v = getattr(self, name)
            if not (v > 0):
                raise ConfigError(f"{name} must be strictly positive, got {v}")
        if self.C < 1:
            raise ConfigError(f"C must be a positive integer, got {self.C}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.coding_mode not in CODING_MODES:
            raise ConfigError(f"coding_mode must be one of {CODING_MODES}, got {self.coding_mode!r}")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if self.good_cell_policy not in GOOD_CELL_POLICIES:
            raise ConfigError(
                f"good_cell_policy must be one of {GOOD_CELL_POLICIES}, got {self.good_cell_policy!r}"
            )
        if self.super_slots < 1:
            raise ConfigError("at least one super slot required")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must fit in 64 bits")
        return self

    def with_overrides(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class RegimeReport:
    """Finite-n proxy check of the asymptotic regime conditions."""

    scheme: str
    in_regime: bool
    warnings: tuple[str, ...] = field(default_factory=tuple)


def validate_regime(cfg: SimConfig) -> RegimeReport:
    """Warn (never fail) when D is outside the regime the throughput guarantees assume.

    Fast scheme wants D between omega(n^(1/3)) and o(n); slow wants omega(1)
    and o(n). At finite n these become the proxies D > n^(1/3) (fast),
    D >= 2 (slow), and D < n/2 (both).
    """
    warnings: list[str] = []
    if cfg.scheme == "fast":
        lower = cfg.n ** (1.0 / 3.0)
        if cfg.D <= lower:
            warnings.append(
                f"D={cfg.D} below the n^(1/3) proxy ({lower:.4g}); fast-regime guarantees need larger D"
            )
    else:
        if cfg.D < 2:
            warnings.append("D must grow without bound (omega(1)); D=1 leaves no coding room")
    if cfg.D >= cfg.n / 2:
        warnings.append(f"D={cfg.D} is not small relative to n={cfg.n} (needs D = o(n))")
    return RegimeReport(scheme=cfg.scheme, in_regime=not warnings, warnings=tuple(warnings))


@dataclass(frozen=True)
class FastParams:
    """Derived quantities of the fast-mobility joint coding-scheduling scheme."""

    M: float            # mean nodes per cell, sqrt(n/D)
    side_count: int     # grid side, round((n*D)**(1/4))
    k: int              # data packets per block, floor(6D/(25M))
    budget: int         # coded packets per block, floor(D/M)
    recipients: int     # broadcast fan-out, floor(9M/10)
    dup_threshold: int  # carriers needed to count as successfully duplicated, ceil(4M/5)
    packet_size: float  # W/(2C) bits
    broadcast_slots: int  # D
    receive_slots: int    # 5D
    slots_per_super_slot: int  # 6D


def fast_params(cfg: SimConfig) -> FastParams:
    n, D = cfg.n, cfg.D
    M = math.sqrt(n / D)
    k = floor_tol(6.0 * D / (25.0 * M))
    budget = floor_tol(D / M)
    if k < 1:
        raise RegimeError(
            f"fast scheme needs floor(6D/(25M)) >= 1; n={n}, D={D} gives M={M:.4g}, k=0"
        )
    if budget < k:
        raise RegimeError(f"coded budget {budget} below block size {k}; D too small for n={n}")
    return FastParams(
        M=M,
        side_count=max(1, round((n * D) ** 0.25)),
        k=k,
        budget=budget,
        recipients=floor_tol(9.0 * M / 10.0),
        dup_threshold=ceil_tol(4.0 * M / 5.0),
        packet_size=cfg.W / (2.0 * cfg.C),
        broadcast_slots=D,
        receive_slots=5 * D,
        slots_per_super_slot=6 * D,
    )


@dataclass(frozen=True)
class SlowParams:
    """Derived quantities of the slow-mobility scheme (two grid scales)."""

    M1: float            # mean nodes per broadcast cell, (n/D)**(1/3)
    M2: float            # mean nodes per receive cell, (n/D)**(2/3)
    side_count_bcast: int   # round((n^2 D)**(1/6))
    side_count_recv: int    # round((n D^2)**(1/6))
    k: int               # floor(2D/5)
    budget: int          # D coded packets
    recipients: int      # floor(9 M1 / 10)
    dup_threshold: int   # ceil(4 M1 / 5)
    packet_size: float   # 10W/(11 c_s C sqrt(M2)) bits
    broadcast_slots: int    # D
    receive_slots: int      # 15D
    slots_per_super_slot: int  # 16D


def slow_params(cfg: SimConfig) -> SlowParams:
    n, D = cfg.n, cfg.D
    M1 = (n / D) ** (1.0 / 3.0)
    M2 = (n / D) ** (2.0 / 3.0)
    # Dimensional sanity: one packet per node per slot through the highway
    # oracle relies on M1*M2*D/n == 1.
    assert abs(M1 * M2 * D / n - 1.0) < 1e-9
    k = floor_tol(2.0 * D / 5.0)
    if k < 1:
        raise RegimeError(f"slow scheme needs floor(2D/5) >= 1, i.e. D >= 3; got D={D}")
    return SlowParams(
        M1=M1,
        M2=M2,
        side_count_bcast=max(1, round((n * n * D) ** (1.0 / 6.0))),
        side_count_recv=max(1, round((n * D * D) ** (1.0 / 6.0))),
        k=k,
        budget=D,
        recipients=floor_tol(9.0 * M1 / 10.0),
        dup_threshold=ceil_tol(4.0 * M1 / 5.0),
        packet_size=10.0 * cfg.W / (11.0 * cfg.c_s * cfg.C * math.sqrt(M2)),
        broadcast_slots=D,
        receive_slots=15 * D,
        slots_per_super_slot=16 * D,
    )


def slots_per_super_slot(cfg: SimConfig) -> int:
    return 6 * cfg.D if cfg.scheme == "fast" else 16 * cfg.D


def decode_threshold(k: int, epsilon: float) -> int:
    """Distinct coded packets needed by the idealized decoder: ceil((1+eps)k)."""
    return ceil_tol((1.0 + epsilon) * k)
