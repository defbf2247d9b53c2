"""Protocol interference model, mini-slot cell coloring, good cells, highway oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ceil_tol, floor_tol
from .errors import ConfigError, MisuseError, UnsupportedConfigError
from .geometry import CellGrid, distance


@dataclass(frozen=True)
class TransmissionAttempt:
    tx: int
    rx: int
    radius: float
    mini_slot: int

    def __post_init__(self):
        if self.tx == self.rx:
            raise ConfigError("transmitter and receiver must differ")
        if not self.radius > 0:
            raise ConfigError("transmission radius must be positive")


def protocol_check(
    attempts: list[TransmissionAttempt],
    positions: np.ndarray,
    delta: float,
    geometry: str = "torus",
) -> list[bool]:
    """Evaluate each concurrent attempt under the protocol interference model.

    Attempt i->j succeeds iff dist(i,j) <= r_i and every other simultaneous
    transmitter k satisfies dist(k,j) >= (1+delta) * dist(i,j), with the
    inequality inclusive at equality. All attempts must share a mini-slot.
    """
    if not attempts:
        return []
    mini = attempts[0].mini_slot
    if any(a.mini_slot != mini for a in attempts):
        raise ConfigError("protocol_check expects attempts from a single mini-slot")
    positions = np.asarray(positions, dtype=float)
    results: list[bool] = []
    # Both inequalities are inclusive at equality; the relative epsilon keeps
    # exact-boundary geometry (e.g. dist = (1+delta)*d) on the inclusive side
    # despite float rounding.
    tol = 1.0 + 1e-12
    for a in attempts:
        d_link = distance(positions[a.tx], positions[a.rx], geometry)
        if d_link > a.radius * tol:
            results.append(False)
            continue
        ok = True
        guard = (1.0 + delta) * d_link
        for other in attempts:
            if other.tx == a.tx:
                continue
            if distance(positions[other.tx], positions[a.rx], geometry) * tol < guard:
                ok = False
                break
        results.append(ok)
    return results


@dataclass(frozen=True)
class CellSchedule:
    """3x3 reuse coloring: cell (i, j) is active in mini-slot 3*(i%3) + (j%3)."""

    side_count: int
    mini_slots: int

    def color(self, i: int, j: int) -> int:
        return 3 * (i % 3) + (j % 3)

    def colors_flat(self) -> np.ndarray:
        g = self.side_count
        i = np.arange(g).reshape(-1, 1)
        j = np.arange(g).reshape(1, -1)
        return (3 * (i % 3) + (j % 3)).reshape(-1)


def color_cells(side_count: int, C: int) -> CellSchedule:
    """Mini-slot schedule guaranteeing every cell interference-free airtime each slot.

    Only the nine-mini-slot 3x3 pattern is supported: an active cell silences
    its eight neighbors, so same-colored cells sit >= 3 cells apart (exact on
    the torus when side_count is a multiple of 3; always in square geometry).
    """
    if C != 9:
        raise UnsupportedConfigError(f"default coloring requires C = 9 mini-slots, got {C}")
    if side_count < 1:
        raise ConfigError("side_count must be >= 1")
    return CellSchedule(side_count=side_count, mini_slots=C)


def good_cell_bounds(M: float, policy: str = "paper", z: float = 3.0) -> tuple[int, int]:
    """Inclusive occupancy window [lo, hi] that makes a cell good.

    "paper": the asymptotic window [9M/10 + 1, 11M/10], integerized as
    lo = floor(9M/10) + 1, hi = floor(11M/10). Its width is M/5 - 1 occupancy
    values, so it only captures a useful fraction of cells once M is large.

    "adaptive": same window widened to at least z standard deviations
    (Poisson: sqrt(M)) around the mean and floored at 2 occupants (a
    broadcast needs a recipient). Coincides with "paper" once z*sqrt(M)
    drops below the paper margins, i.e. for large M.
    """
    lo = floor_tol(9.0 * M / 10.0) + 1
    hi = floor_tol(11.0 * M / 10.0)
    if policy == "paper":
        return lo, hi
    if policy != "adaptive":
        raise ConfigError(f"unknown good-cell policy {policy!r}")
    spread = z * math.sqrt(M)
    lo = max(2, min(lo, ceil_tol(M - spread)))
    hi = max(hi, floor_tol(M + spread))
    return lo, hi


def good_cell_mask(counts: np.ndarray, M: float, policy: str = "paper", z: float = 3.0) -> np.ndarray:
    lo, hi = good_cell_bounds(M, policy, z)
    return (counts >= lo) & (counts <= hi)


def classify_good_cells(grid: CellGrid, M: float) -> set[tuple[int, int]]:
    """Cells whose occupancy falls in the paper window for mean M.

    Classification depends on nothing but the cell's own count.
    """
    if not M > 0:
        raise ConfigError("mean occupancy M must be positive")
    counts = grid.counts()
    good = np.nonzero(good_cell_mask(counts, M, policy="paper"))[0]
    g = grid.side_count
    return {(int(c) // g, int(c) % g) for c in good}


def slow_packet_size(W: float, c_s: float, C: int, M2: float) -> float:
    """Packet size 10W/(11 c_s C sqrt(M2)) that one highway mini-slot can carry per node."""
    return 10.0 * W / (11.0 * c_s * C * math.sqrt(M2))


def highway_capacity(
    cell_occupancy: int,
    c_s: float,
    W: float,
    M2: float,
    C: int = 9,
    scheme: str = "slow",
    policy: str = "paper",
) -> int:
    """Packets per node per slot deliverable inside one cell via the highway oracle.

    The multi-hop highway construction is not path-simulated: in a good cell
    every node may move one packet of size ``slow_packet_size`` to any other
    node in the cell within the cell's mini-slot; outside good cells nothing
    is granted.
    """
    if scheme != "slow":
        raise MisuseError("highway capacity is an oracle for the slow-mobility scheme only")
    lo, hi = good_cell_bounds(M2, policy)
    return 1 if lo <= cell_occupancy <= hi else 0
