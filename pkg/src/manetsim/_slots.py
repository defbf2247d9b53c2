"""Per-slot machinery shared by both schemes: reshuffle, grouping, debug assertions."""

from __future__ import annotations

import math

import numpy as np

from .geometry import cell_index_of, reshuffle
from .phymac import TransmissionAttempt, protocol_check


def draw_slot_cells(
    n: int, side_count: int, rng: np.random.Generator, keep_positions: bool = False
) -> tuple[np.ndarray, np.ndarray | None]:
    """One i.i.d. reshuffle mapped to flat cell ids (positions kept only for debug checks)."""
    positions = reshuffle(n, rng)
    cells = cell_index_of(positions, side_count)
    return cells, (positions if keep_positions else None)


def group_by_cell(cells: np.ndarray, n_cells: int, rng: np.random.Generator):
    """Group node ids by cell in uniformly random within-cell order.

    Returns (grouped node ids, per-cell counts, segment starts of length
    n_cells+1). A stable sort applied after a uniform permutation leaves the
    within-cell order uniform, which is what broadcaster/recipient selection
    relies on.
    """
    perm = rng.permutation(cells.size)
    order = np.argsort(cells[perm], kind="stable")
    grouped = perm[order]
    counts = np.bincount(cells, minlength=n_cells)
    starts = np.zeros(n_cells + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    return grouped, counts, starts


def segment_ranges(lengths: np.ndarray) -> np.ndarray:
    """Concatenated arange(l) for each l in lengths."""
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(lengths)
    return np.arange(total, dtype=np.int64) - np.repeat(ends - lengths, lengths)


def assert_broadcasts_admissible(
    positions: np.ndarray,
    cells: np.ndarray,
    tx: np.ndarray,
    rx_lists: list[np.ndarray],
    side_count: int,
    delta: float,
    geometry: str,
):
    """Debug check: all scheduled broadcasts pass the protocol model.

    A cell's broadcasters take turns inside the cell's mini-slot (the packet
    size is chosen to admit them all), so the transmitters concurrent with a
    given one are the same-rank broadcasters of same-colored cells. Receivers
    are cell-mates within radius sqrt(2)/side_count.
    """
    if tx.size == 0:
        return
    radius = math.sqrt(2.0) / side_count
    g = side_count
    tx_cells = cells[tx]
    color = 3 * ((tx_cells // g) % 3) + (tx_cells % g) % 3
    rank = np.zeros(tx.size, dtype=np.int64)
    seen: dict[int, int] = {}
    for pos in range(tx.size):
        c = int(tx_cells[pos])
        rank[pos] = seen.get(c, 0)
        seen[c] = int(rank[pos]) + 1
    for mini in np.unique(color):
        for q in np.unique(rank[color == mini]):
            idx = np.nonzero((color == mini) & (rank == q))[0]
            attempts = []
            for t in idx:
                for r in rx_lists[t]:
                    attempts.append(TransmissionAttempt(int(tx[t]), int(r), radius, int(mini)))
            if not attempts:
                continue
            flags = protocol_check(attempts, positions, delta, geometry)
            if not all(flags):
                bad = [a for a, f in zip(attempts, flags) if not f]
                raise AssertionError(
                    f"protocol model violated for {len(bad)} scheduled transmissions, e.g. {bad[0]}"
                )


def assert_deliveries_admissible(
    positions: np.ndarray,
    cells: np.ndarray,
    carriers: np.ndarray,
    dests: np.ndarray,
    side_count: int,
    delta: float,
    geometry: str,
):
    """Debug check for fast-scheme deliveries: up to two per cell, one per half mini-slot."""
    if carriers.size == 0:
        return
    radius = math.sqrt(2.0) / side_count
    g = side_count
    color = 3 * ((cells[carriers] // g) % 3) + (cells[carriers] % g) % 3
    # Two deliveries in one cell ride the two packet halves of the mini-slot;
    # concurrency is per (color, within-cell rank).
    rank = np.zeros(carriers.size, dtype=np.int64)
    seen: dict[int, int] = {}
    for pos in range(carriers.size):
        c = int(cells[carriers[pos]])
        rank[pos] = seen.get(c, 0)
        seen[c] = int(rank[pos]) + 1
    for mini in np.unique(color):
        for half in (0, 1):
            idx = np.nonzero((color == mini) & (rank == half))[0]
            if idx.size == 0:
                continue
            attempts = [
                TransmissionAttempt(int(carriers[t]), int(dests[t]), radius, int(mini))
                for t in idx
                if carriers[t] != dests[t]  # self-held duplicates need no transmission
            ]
            if not attempts:
                continue
            flags = protocol_check(attempts, positions, delta, geometry)
            if not all(flags):
                raise AssertionError("protocol model violated during delivery mini-slot")
