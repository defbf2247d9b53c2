"""Joint coding-scheduling scheme for slow mobility: the 16D-slot super slot.

Broadcasting runs on the fine grid (mean M1 = (n/D)^(1/3) nodes per cell):
for D slots, every occupant of a good cell broadcasts its next coded packet
to 9*M1/10 cell-mates, with the keep-one dedup pass after each slot.
Receiving runs on the coarse grid (mean M2 = M1^2) for 15D slots with the
request/accept rule: each carrier holding deliverable packets requests one
destination, each destination accepts one request, and accepted packets
cross the cell within the slot through the highway-capacity oracle.
"""

from __future__ import annotations

import numpy as np

from ._dupstore import DupStore, slow_broadcast_kernel
from ._slots import (
    assert_broadcasts_admissible,
    draw_slot_cells,
    group_by_cell,
)
from .config import SimConfig, SlowParams, slow_params
from .fast import SuperSlotReport, _decode_blocks
from .phymac import good_cell_mask, highway_capacity


def broadcast_step_slow(
    cfg: SimConfig,
    params: SlowParams,
    store: DupStore,
    next_unsent: np.ndarray,
    rng: np.random.Generator,
    scratch: np.ndarray,
    out_bufs: list[np.ndarray],
) -> float:
    g = params.side_count_bcast
    n_cells = g * g
    cells, positions = draw_slot_cells(cfg.n, g, rng, keep_positions=cfg.debug_checks)
    grouped, counts, starts = group_by_cell(cells, n_cells, rng)
    good = good_cell_mask(counts, params.M1, cfg.good_cell_policy)
    good_cells = np.nonzero(good)[0].astype(np.int64)
    seed = int(rng.integers(0, 1 << 63))

    before = next_unsent.copy()
    m = slow_broadcast_kernel(
        grouped, starts, good_cells, next_unsent, params.budget, params.recipients,
        seed, scratch, out_bufs[0], out_bufs[1], out_bufs[2],
    )
    while m < 0:  # output buffers too small; grow and replay the slot
        next_unsent[:] = before
        cap = out_bufs[0].size * 2
        out_bufs[0] = np.empty(cap, dtype=np.int64)
        out_bufs[1] = np.empty(cap, dtype=np.int64)
        out_bufs[2] = np.empty(cap, dtype=np.int16)
        m = slow_broadcast_kernel(
            grouped, starts, good_cells, next_unsent, params.budget, params.recipients,
            seed, scratch, out_bufs[0], out_bufs[1], out_bufs[2],
        )
    new_src = out_bufs[0][:m]
    new_car = out_bufs[1][:m]
    new_cod = out_bufs[2][:m]
    coins = rng.random(m)
    store.merge(new_src, new_car, new_cod, coins)

    if cfg.debug_checks and m:
        boundaries = np.nonzero(np.diff(new_src, prepend=new_src[0] - 1))[0]
        tx = new_src[boundaries]
        rx_lists = np.split(new_car, boundaries[1:])
        assert_broadcasts_admissible(positions, cells, tx, rx_lists, g, cfg.delta, cfg.geometry)
    return good.sum() / n_cells


def receive_step_slow(
    cfg: SimConfig,
    params: SlowParams,
    store: DupStore,
    dest_of: np.ndarray,
    received_mask: np.ndarray,
    rng: np.random.Generator,
    expected_hits: int,
):
    """Request/accept delivery over the coarse grid within good cells."""
    g = params.side_count_recv
    cells, _ = draw_slot_cells(cfg.n, g, rng)
    counts = np.bincount(cells, minlength=g * g)
    good = good_cell_mask(counts, params.M2, cfg.good_cell_policy)
    src, pos = store.scan_deliverables(cells, dest_of, good=good, expected=expected_hits)
    if src.size == 0:
        return
    car = store.carriers[src, pos].astype(np.int64)
    dst = dest_of[src]

    # (i) every carrier requests one uniformly chosen deliverable packet
    req_keys = rng.random(src.size)
    acc_keys = rng.random(src.size)
    order = np.lexsort((req_keys, car))
    car_sorted = car[order]
    first = np.concatenate(([True], car_sorted[1:] != car_sorted[:-1]))
    requests = order[first]

    # (ii) every destination accepts one request and refuses the others
    rd = dst[requests]
    order2 = np.lexsort((acc_keys[requests], rd))
    rd_sorted = rd[order2]
    first2 = np.concatenate(([True], rd_sorted[1:] != rd_sorted[:-1]))
    accepted = requests[order2[first2]]

    # (iii) accepted packets cross the cell through the highway oracle
    if accepted.size:
        probe = accepted[0]
        granted = highway_capacity(
            int(counts[cells[dst[probe]]]), cfg.c_s, cfg.W, params.M2,
            C=cfg.C, scheme="slow", policy=cfg.good_cell_policy,
        )
        assert granted == 1  # scan already restricted to good cells
    cod = store.deliver(src[accepted], pos[accepted])
    received_mask[src[accepted], cod] = 1


def run_super_slot_slow(
    cfg: SimConfig, rng: np.random.Generator, params: SlowParams | None = None
) -> SuperSlotReport:
    """Execute one 16D-slot super slot of the slow-mobility scheme."""
    if cfg.scheme != "slow":
        raise ValueError("config is not for the slow scheme")
    if params is None:
        params = slow_params(cfg)
    n = cfg.n
    dest_of = np.roll(np.arange(n, dtype=np.int64), -1)

    store = DupStore(n, capacity=params.budget * max(params.recipients, 1), budget=params.budget)
    next_unsent = np.zeros(n, dtype=np.int64)
    broadcasts = np.zeros(n, dtype=np.int64)
    received_mask = np.zeros((n, params.budget), dtype=np.uint8)
    seeds = None
    if cfg.coding_mode == "lt":
        seeds = rng.integers(0, 1 << 63, size=(n, params.budget), dtype=np.uint64)

    scratch = np.empty(n, dtype=np.int64)  # worst-case one-cell occupancy
    cap0 = int(cfg.n * params.recipients * 1.1) + 4096
    out_bufs = [
        np.empty(cap0, dtype=np.int64),
        np.empty(cap0, dtype=np.int64),
        np.empty(cap0, dtype=np.int16),
    ]

    good_fracs = np.empty(params.broadcast_slots)
    for t in range(params.broadcast_slots):
        sent_before = next_unsent.copy()
        good_fracs[t] = broadcast_step_slow(
            cfg, params, store, next_unsent, rng, scratch, out_bufs
        )
        broadcasts += next_unsent - sent_before

    duplicated = store.successfully_duplicated(params.dup_threshold)
    # Per-source duplicate load never exceeds recipients * D by construction.
    assert int(store.counts.max(initial=0)) <= params.recipients * cfg.D

    expected_hits = int(store.counts.sum() / (params.side_count_recv**2) * 3) + 4096
    for _ in range(params.receive_slots):
        receive_step_slow(cfg, params, store, dest_of, received_mask, rng, expected_hits)

    decode_ok = _decode_blocks(cfg, params.k, received_mask, seeds, rng)
    delivered_bits = np.where(decode_ok, params.k * params.packet_size, 0.0)
    report = SuperSlotReport(
        scheme="slow",
        n=n,
        k=params.k,
        budget=params.budget,
        packet_size=params.packet_size,
        duplicated=duplicated.astype(np.int64),
        delivered_distinct=received_mask.sum(axis=1, dtype=np.int64),
        decode_ok=decode_ok,
        delivered_bits=delivered_bits,
        broadcasts=broadcasts,
        good_cell_fraction=float(good_fracs.mean()),
    )
    report.check_invariants()
    return report
