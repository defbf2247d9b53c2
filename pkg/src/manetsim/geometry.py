"""Unit-square geometry under 2D i.i.d. repositioning: reshuffles, distances, cell grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError


def reshuffle(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw fresh uniform positions for all n nodes, independent of every other slot.

    Returns an (n, 2) float64 array with coordinates in [0, 1).
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return rng.random((n, 2))


def distance(a, b, geometry: str = "torus"):
    """Euclidean distance between positions, optionally with per-axis wraparound.

    Accepts single positions (length-2 sequences) or (..., 2) arrays and
    broadcasts. On the torus each axis difference is min(|dx|, 1-|dx|).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.abs(a - b)
    if geometry == "torus":
        d = np.minimum(d, 1.0 - d)
    elif geometry != "square":
        raise ConfigError(f"unknown geometry {geometry!r}")
    out = np.sqrt((d * d).sum(axis=-1))
    return float(out) if out.ndim == 0 else out


def cell_index_of(positions: np.ndarray, side_count: int) -> np.ndarray:
    """Flat cell ids under the half-open floor rule: cell (i, j) = (floor(x g), floor(y g))."""
    ij = np.floor(positions * side_count).astype(np.int32)
    # Positions live in [0,1) so floor(x*g) < g already; clip guards float dust.
    np.clip(ij, 0, side_count - 1, out=ij)
    return ij[:, 0] * np.int32(side_count) + ij[:, 1]


@dataclass(frozen=True)
class CellGrid:
    """Occupancy of a g x g partition of the unit square.

    ``node_cells[v]`` is the flat cell id x_index * g + y_index of node v.
    """

    side_count: int
    node_cells: np.ndarray

    @property
    def cell_side(self) -> float:
        return 1.0 / self.side_count

    @property
    def n_cells(self) -> int:
        return self.side_count * self.side_count

    def counts(self) -> np.ndarray:
        return np.bincount(self.node_cells, minlength=self.n_cells)

    def occupancy(self) -> dict[tuple[int, int], list[int]]:
        """Mapping (i, j) cell index -> node ids, for inspection at small n."""
        out: dict[tuple[int, int], list[int]] = {}
        g = self.side_count
        for node, c in enumerate(self.node_cells):
            out.setdefault((int(c) // g, int(c) % g), []).append(node)
        return out


def build_grid(positions: np.ndarray, side_count: int) -> CellGrid:
    """Partition nodes into cells of side 1/side_count by the floor rule."""
    if side_count < 1:
        raise ConfigError(f"side_count must be >= 1, got {side_count}")
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 2:
        raise ConfigError("positions must be an (n, 2) array")
    return CellGrid(side_count=side_count, node_cells=cell_index_of(positions, side_count))


def hit_probability(L: float, D: int) -> float:
    """Probability that a uniformly reshuffled pair comes within distance L in D slots.

    Exact on the unit torus for L <= 1/2, where the per-slot hit probability
    is the disc area pi*L^2: returns 1 - (1 - pi L^2)^D.
    """
    if L < 0.0 or L > 0.5:
        raise DomainError(f"L must lie in [0, 1/2] for the pi*L^2 form to be exact, got {L}")
    if D < 1:
        raise DomainError(f"D must be >= 1, got {D}")
    return 1.0 - (1.0 - math.pi * L * L) ** D
