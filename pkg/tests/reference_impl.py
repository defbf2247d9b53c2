"""Straightforward dict-based implementations of both schemes.

These follow the algorithm text step by step with plain Python containers
and consume random draws in exactly the documented per-slot order, so a
production run and a reference run with the same seed must produce
identical counters. They are deliberately slow and independent of the
vectorized duplicate store.
"""

from __future__ import annotations

import numpy as np

from manetsim._dupstore import _PyStream
from manetsim.config import SimConfig, decode_threshold, fast_params, slow_params
from manetsim.geometry import cell_index_of
from manetsim.phymac import good_cell_bounds


def _draw_cells(n, g, rng):
    positions = rng.random((n, 2))
    return cell_index_of(positions, g)


def _group(cells, n_cells, rng):
    """Same grouping contract as the production scheduler."""
    perm = rng.permutation(cells.size)
    order = np.argsort(cells[perm], kind="stable")
    grouped = perm[order]
    counts = np.bincount(cells, minlength=n_cells)
    starts = np.zeros(n_cells + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    return grouped, counts, starts


class RefState:
    def __init__(self, n, budget):
        self.n = n
        self.budget = budget
        # holdings[carrier][source] = coded index (dedup invariant built in)
        self.holdings: list[dict[int, int]] = [dict() for _ in range(n)]
        self.next_unsent = [0] * n
        self.broadcasts = [0] * n
        self.received: list[set[int]] = [set() for _ in range(n)]
        # flow-conservation counters
        self.created = 0
        self.dropped_dedup = 0
        self.delivered = 0

    def dedup_insert(self, carrier: int, source: int, coded: int, coin: float):
        """Keep-one-at-random between an existing duplicate and the new copy."""
        self.created += 1
        held = self.holdings[carrier]
        if source in held:
            self.dropped_dedup += 1  # exactly one of the two copies survives
            if coin < 0.5:
                held[source] = coded
        else:
            held[source] = coded

    def alive(self) -> int:
        return sum(len(h) for h in self.holdings)

    def check_conservation(self):
        # duplicates are only created by broadcasts and only leave by the
        # dedup rule or delivery; the end-of-super-slot drop is the remainder
        assert self.created == self.dropped_dedup + self.delivered + self.alive()

    def carriers_per_coded(self, source: int) -> dict[int, int]:
        out: dict[int, int] = {}
        for held in self.holdings:
            if source in held:
                out[held[source]] = out.get(held[source], 0) + 1
        return out


def _broadcast_slot_fast(cfg, params, state, rng):
    g = params.side_count
    cells = _draw_cells(cfg.n, g, rng)
    grouped, counts, starts = _group(cells, g * g, rng)
    lo, hi = good_cell_bounds(params.M, cfg.good_cell_policy)

    new = []  # (carrier, source, coded) in production batch order
    for c in range(g * g):
        occ = counts[c]
        if not (lo <= occ <= hi):
            continue
        members = list(grouped[starts[c]: starts[c + 1]])
        speaker = members[0]  # grouped order is uniform within the cell
        if state.next_unsent[speaker] >= params.budget:
            continue
        fanout = min(params.recipients, occ - 1)
        if fanout <= 0:
            continue
        coded = state.next_unsent[speaker]
        state.next_unsent[speaker] += 1
        state.broadcasts[speaker] += 1
        for r in members[1: 1 + fanout]:
            new.append((int(r), int(speaker), coded))
    coins = rng.random(len(new))
    for (carrier, source, coded), coin in zip(new, coins):
        state.dedup_insert(carrier, source, coded, coin)
    return counts, lo, hi


def _receive_slot_fast(cfg, params, state, rng):
    g = params.side_count
    cells = _draw_cells(cfg.n, g, rng)
    deliverable = []  # (carrier, source, coded)
    for carrier in range(cfg.n):
        for source, coded in state.holdings[carrier].items():
            dest = (source + 1) % cfg.n
            if cells[carrier] == cells[dest]:
                deliverable.append((carrier, source, coded))
    per_cell: dict[int, int] = {}
    for carrier, source, coded in deliverable:
        per_cell[int(cells[carrier])] = per_cell.get(int(cells[carrier]), 0) + 1
    for carrier, source, coded in deliverable:
        if per_cell[int(cells[carrier])] <= 2:
            del state.holdings[carrier][source]
            state.received[source].add(coded)
            state.delivered += 1


def run_super_slot_fast_reference(cfg: SimConfig, rng: np.random.Generator):
    """Reference twin of run_super_slot_fast (oracle coding only)."""
    params = fast_params(cfg)
    state = RefState(cfg.n, params.budget)
    for _ in range(params.broadcast_slots):
        _broadcast_slot_fast(cfg, params, state, rng)
    duplicated = [
        sum(1 for cnt in state.carriers_per_coded(i).values() if cnt >= params.dup_threshold)
        for i in range(cfg.n)
    ]
    for _ in range(params.receive_slots):
        _receive_slot_fast(cfg, params, state, rng)
    state.check_conservation()
    threshold = decode_threshold(params.k, cfg.epsilon_code)
    decode_ok = [len(state.received[i]) >= threshold for i in range(cfg.n)]
    return {
        "broadcasts": state.broadcasts,
        "duplicated": duplicated,
        "delivered_distinct": [len(state.received[i]) for i in range(cfg.n)],
        "decode_ok": decode_ok,
        "delivered_bits": [params.k * params.packet_size if ok else 0.0 for ok in decode_ok],
    }


def _broadcast_slot_slow(cfg, params, state, rng):
    g = params.side_count_bcast
    cells = _draw_cells(cfg.n, g, rng)
    grouped, counts, starts = _group(cells, g * g, rng)
    lo, hi = good_cell_bounds(params.M1, cfg.good_cell_policy)
    seed = int(rng.integers(0, 1 << 63))
    stream = _PyStream(seed)

    new = []
    for c in range(g * g):
        occ = counts[c]
        if not (lo <= occ <= hi) or occ < 2:
            continue
        members = list(grouped[starts[c]: starts[c + 1]])
        r = min(params.recipients, occ - 1)
        for pos, b in enumerate(members):
            if state.next_unsent[b] >= params.budget:
                continue
            coded = state.next_unsent[b]
            mates = [int(m) for q, m in enumerate(members) if q != pos]
            w = len(mates)
            for t in range(r):
                j = t + stream.next() % (w - t)
                mates[t], mates[j] = mates[j], mates[t]
                new.append((mates[t], int(b), coded))
            state.next_unsent[b] = coded + 1
            state.broadcasts[b] += 1
    coins = rng.random(len(new))
    for (carrier, source, coded), coin in zip(new, coins):
        state.dedup_insert(carrier, source, coded, coin)


def _receive_slot_slow(cfg, params, state, rng):
    g = params.side_count_recv
    cells = _draw_cells(cfg.n, g, rng)
    counts = np.bincount(cells, minlength=g * g)
    lo, hi = good_cell_bounds(params.M2, cfg.good_cell_policy)

    # Deliverables in the production scan order: source ascending, then
    # carrier ascending (the store keeps rows carrier-sorted).
    deliverable = []
    by_source: list[list[int]] = [[] for _ in range(cfg.n)]
    for carrier in range(cfg.n):
        for source in state.holdings[carrier]:
            by_source[source].append(carrier)
    for source in range(cfg.n):
        dest = (source + 1) % cfg.n
        cd = cells[dest]
        if not (lo <= counts[cd] <= hi):
            continue
        for carrier in sorted(by_source[source]):
            if cells[carrier] == cd:
                deliverable.append((carrier, source))
    m = len(deliverable)
    req_keys = rng.random(m)
    acc_keys = rng.random(m)
    # each carrier requests its minimum-key deliverable
    best_req: dict[int, int] = {}
    for idx, (carrier, source) in enumerate(deliverable):
        if carrier not in best_req or req_keys[idx] < req_keys[best_req[carrier]]:
            best_req[carrier] = idx
    # each destination accepts its minimum-key request
    best_acc: dict[int, int] = {}
    for idx in best_req.values():
        dest = (deliverable[idx][1] + 1) % cfg.n
        if dest not in best_acc or acc_keys[idx] < acc_keys[best_acc[dest]]:
            best_acc[dest] = idx
    for idx in best_acc.values():
        carrier, source = deliverable[idx]
        coded = state.holdings[carrier].pop(source)
        state.received[source].add(coded)
        state.delivered += 1


def run_super_slot_slow_reference(cfg: SimConfig, rng: np.random.Generator):
    """Reference twin of run_super_slot_slow (oracle coding only)."""
    params = slow_params(cfg)
    state = RefState(cfg.n, params.budget)
    for _ in range(params.broadcast_slots):
        _broadcast_slot_slow(cfg, params, state, rng)
    duplicated = [
        sum(1 for cnt in state.carriers_per_coded(i).values() if cnt >= params.dup_threshold)
        for i in range(cfg.n)
    ]
    for _ in range(params.receive_slots):
        _receive_slot_slow(cfg, params, state, rng)
    state.check_conservation()
    threshold = decode_threshold(params.k, cfg.epsilon_code)
    decode_ok = [len(state.received[i]) >= threshold for i in range(cfg.n)]
    return {
        "broadcasts": state.broadcasts,
        "duplicated": duplicated,
        "delivered_distinct": [len(state.received[i]) for i in range(cfg.n)],
        "decode_ok": decode_ok,
        "delivered_bits": [params.k * params.packet_size if ok else 0.0 for ok in decode_ok],
    }
