"""Relay-buffer bookkeeping shared by both schemes.

The per-slot dedup rule ("among duplicates for one destination keep one at
random") makes (carrier, source) a unique key, so the store keeps, per
source, a carrier-sorted row of (carrier, coded index) pairs. Rows get an
unsorted tail during a broadcast batch (recipients of one broadcast are
distinct, so tail keys never collide) and are re-merged at batch end.

Hot paths are numba kernels; ``numba`` is optional at import time and every
kernel has a numpy/python twin with identical semantics used as a
cross-check in tests and as a fallback.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)


@njit(cache=True)
def _splitmix(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return state, z ^ (z >> _U64(31))


@njit(cache=True)
def _merge_batch_nb(carriers, coded, counts, sorted_len, src, car, cod, coins):
    """Insert one slot's new duplicates, applying the random keep-one dedup rule."""
    for t in range(src.size):
        i = src[t]
        j = car[t]
        lo, hi = 0, sorted_len[i]
        pos = -1
        while lo < hi:
            mid = (lo + hi) // 2
            v = carriers[i, mid]
            if v == j:
                pos = mid
                break
            if v < j:
                lo = mid + 1
            else:
                hi = mid
        if pos >= 0:
            if coins[t] < 0.5:  # keep the new copy, drop the old
                coded[i, pos] = cod[t]
        else:
            c = counts[i]
            carriers[i, c] = j
            coded[i, c] = cod[t]
            counts[i] = c + 1


@njit(cache=True)
def _sort_tails_nb(carriers, coded, counts, sorted_len, touched):
    """Merge each touched row's unsorted tail back into its sorted prefix."""
    for idx in range(touched.size):
        i = touched[idx]
        s = sorted_len[i]
        e = counts[i]
        if e == s:
            continue
        # insertion sort of the short tail
        for a in range(s + 1, e):
            cj = carriers[i, a]
            cc = coded[i, a]
            b = a - 1
            while b >= s and carriers[i, b] > cj:
                carriers[i, b + 1] = carriers[i, b]
                coded[i, b + 1] = coded[i, b]
                b -= 1
            carriers[i, b + 1] = cj
            coded[i, b + 1] = cc
        # Stage the tail, then merge backward; merging the two adjacent
        # regions fully in place would overwrite the tail's last element
        # whenever a prefix element outranks it.
        t = e - s
        tmp_car = np.empty(t, dtype=np.int32)
        tmp_cod = np.empty(t, dtype=np.int16)
        for q in range(t):
            tmp_car[q] = carriers[i, s + q]
            tmp_cod[q] = coded[i, s + q]
        a = s - 1
        b = t - 1
        w = e - 1
        while b >= 0:
            if a >= 0 and carriers[i, a] > tmp_car[b]:
                carriers[i, w] = carriers[i, a]
                coded[i, w] = coded[i, a]
                a -= 1
            else:
                carriers[i, w] = tmp_car[b]
                coded[i, w] = tmp_cod[b]
                b -= 1
            w -= 1
        sorted_len[i] = e


@njit(cache=True)
def _scan_nb(carriers, coded, counts, cell_of, dest_of, good, use_good, out_src, out_pos):
    """Collect live duplicates co-located with their destination this slot.

    Returns the number found, or -1 if the output buffers are too small.
    """
    m = 0
    cap = out_src.size
    n = counts.size
    for i in range(n):
        cnt = counts[i]
        if cnt == 0:
            continue
        cd = cell_of[dest_of[i]]
        if use_good and not good[cd]:
            continue
        for t in range(cnt):
            if coded[i, t] >= 0 and cell_of[carriers[i, t]] == cd:
                if m >= cap:
                    return -1
                out_src[m] = i
                out_pos[m] = t
                m += 1
    return m


@njit(cache=True)
def _count_duplicated_nb(coded, counts, budget, threshold, scratch, out):
    """Per source, count coded packets held by at least ``threshold`` distinct carriers."""
    n = counts.size
    for i in range(n):
        for b in range(budget):
            scratch[b] = 0
        cnt = counts[i]
        for t in range(cnt):
            c = coded[i, t]
            if c >= 0:
                scratch[c] += 1
        a = 0
        for b in range(budget):
            if scratch[b] >= threshold:
                a += 1
        out[i] = a


@njit(cache=True)
def _slow_broadcast_nb(
    grouped, starts, good_cells, next_unsent, budget, recip, seed,
    scratch, out_src, out_car, out_cod,
):
    """Every good-cell occupant with coded packets left broadcasts to recip cellmates.

    Recipient sets are distinct uniform cellmates (partial Fisher-Yates)
    drawn from a splitmix64 stream seeded per slot. Returns the number of
    new duplicates, or -1 if the output buffers are too small.
    """
    m = 0
    cap = out_src.size
    state = _U64(seed)
    for gi in range(good_cells.size):
        c = good_cells[gi]
        s = starts[c]
        e = starts[c + 1]
        occ = e - s
        if occ < 2:
            continue
        r = recip if recip < occ - 1 else occ - 1
        for bpos in range(s, e):
            b = grouped[bpos]
            nx = next_unsent[b]
            if nx >= budget:
                continue
            # cellmates other than the broadcaster
            w = 0
            for p in range(s, e):
                if p != bpos:
                    scratch[w] = grouped[p]
                    w += 1
            if m + r > cap:
                return -1
            for t in range(r):
                state, z = _splitmix(state)
                j = t + int(z % _U64(w - t))
                tmp = scratch[t]
                scratch[t] = scratch[j]
                scratch[j] = tmp
                out_src[m] = b
                out_car[m] = scratch[t]
                out_cod[m] = nx
                m += 1
            next_unsent[b] = nx + 1
    return m


# ---------------------------------------------------------------------------
# numpy/python twins (fallback + cross-validation)


def _merge_batch_py(carriers, coded, counts, sorted_len, src, car, cod, coins):
    for t in range(src.size):
        i, j = int(src[t]), int(car[t])
        row = carriers[i, : sorted_len[i]]
        pos = int(np.searchsorted(row, j))
        if pos < sorted_len[i] and row[pos] == j:
            if coins[t] < 0.5:
                coded[i, pos] = cod[t]
        else:
            c = counts[i]
            carriers[i, c] = j
            coded[i, c] = cod[t]
            counts[i] = c + 1


def _sort_tails_py(carriers, coded, counts, sorted_len, touched):
    for i in touched:
        e = counts[i]
        order = np.argsort(carriers[i, :e], kind="stable")
        carriers[i, :e] = carriers[i, :e][order]
        coded[i, :e] = coded[i, :e][order]
        sorted_len[i] = e


def _scan_py(carriers, coded, counts, cell_of, dest_of, good, use_good, out_src, out_pos):
    hits_src = []
    hits_pos = []
    n = counts.size
    for i in range(n):
        cnt = counts[i]
        if cnt == 0:
            continue
        cd = cell_of[dest_of[i]]
        if use_good and not good[cd]:
            continue
        row_alive = coded[i, :cnt] >= 0
        row_hit = cell_of[carriers[i, :cnt]] == cd
        for t in np.nonzero(row_alive & row_hit)[0]:
            hits_src.append(i)
            hits_pos.append(int(t))
    m = len(hits_src)
    if m > out_src.size:
        return -1
    out_src[:m] = hits_src
    out_pos[:m] = hits_pos
    return m


def _count_duplicated_py(coded, counts, budget, threshold, scratch, out):
    n = counts.size
    for i in range(n):
        row = coded[i, : counts[i]]
        row = row[row >= 0]
        if row.size == 0:
            out[i] = 0
            continue
        out[i] = int(np.count_nonzero(np.bincount(row, minlength=budget) >= threshold))


class _PyStream:
    """Python twin of the in-kernel splitmix64 stream."""

    def __init__(self, seed: int):
        self.state = seed & 0xFFFFFFFFFFFFFFFF

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF


def _slow_broadcast_py(
    grouped, starts, good_cells, next_unsent, budget, recip, seed,
    scratch, out_src, out_car, out_cod,
):
    m = 0
    cap = out_src.size
    stream = _PyStream(int(seed))
    for c in good_cells:
        s, e = int(starts[c]), int(starts[c + 1])
        occ = e - s
        if occ < 2:
            continue
        r = min(recip, occ - 1)
        for bpos in range(s, e):
            b = int(grouped[bpos])
            nx = int(next_unsent[b])
            if nx >= budget:
                continue
            mates = [int(grouped[p]) for p in range(s, e) if p != bpos]
            if m + r > cap:
                return -1
            w = len(mates)
            for t in range(r):
                j = t + stream.next() % (w - t)
                mates[t], mates[j] = mates[j], mates[t]
                out_src[m] = b
                out_car[m] = mates[t]
                out_cod[m] = nx
                m += 1
            next_unsent[b] = nx + 1
    return m


if HAVE_NUMBA:
    merge_batch, sort_tails, scan_kernel = _merge_batch_nb, _sort_tails_nb, _scan_nb
    count_duplicated, slow_broadcast_kernel = _count_duplicated_nb, _slow_broadcast_nb
else:  # pragma: no cover
    merge_batch, sort_tails, scan_kernel = _merge_batch_py, _sort_tails_py, _scan_py
    count_duplicated, slow_broadcast_kernel = _count_duplicated_py, _slow_broadcast_py


class DupStore:
    """Per-source relay buffers with at most one duplicate per (carrier, source)."""

    def __init__(self, n: int, capacity: int, budget: int):
        if budget >= 2**15:
            raise ValueError("coded budget must fit in int16")
        self.n = n
        self.capacity = capacity
        self.budget = budget
        self.carriers = np.empty((n, capacity), dtype=np.int32)
        self.coded = np.empty((n, capacity), dtype=np.int16)
        self.counts = np.zeros(n, dtype=np.int32)
        self.sorted_len = np.zeros(n, dtype=np.int32)
        self._scratch_counts = np.zeros(max(budget, 1), dtype=np.int32)

    def merge(self, src: np.ndarray, car: np.ndarray, cod: np.ndarray, coins: np.ndarray):
        """Apply one slot's broadcasts followed by the dedup pass."""
        if src.size == 0:
            return
        src = np.ascontiguousarray(src, dtype=np.int64)
        car = np.ascontiguousarray(car, dtype=np.int64)
        cod = np.ascontiguousarray(cod, dtype=np.int16)
        merge_batch(self.carriers, self.coded, self.counts, self.sorted_len, src, car, cod, coins)
        touched = np.unique(src)
        sort_tails(self.carriers, self.coded, self.counts, self.sorted_len, touched)

    def scan_deliverables(
        self,
        cell_of: np.ndarray,
        dest_of: np.ndarray,
        good: np.ndarray | None = None,
        expected: int | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Live duplicates whose carrier shares a cell with their destination.

        ``good`` restricts to destinations sitting in good cells. Returns
        (source_ids, row_positions).
        """
        total = int(self.counts.sum())
        if total == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        if expected is None:
            expected = total
        cap = max(4096, int(expected))
        use_good = good is not None
        good_arr = good if use_good else np.empty(1, dtype=bool)
        while True:
            out_src = np.empty(cap, dtype=np.int64)
            out_pos = np.empty(cap, dtype=np.int64)
            m = scan_kernel(
                self.carriers, self.coded, self.counts,
                cell_of, dest_of, good_arr, use_good, out_src, out_pos,
            )
            if m >= 0:
                return out_src[:m], out_pos[:m]
            cap = min(total, cap * 4)

    def deliver(self, src: np.ndarray, pos: np.ndarray) -> np.ndarray:
        """Remove the given duplicates; returns their coded indices."""
        cod = self.coded[src, pos].copy()
        self.coded[src, pos] = -1
        return cod

    def successfully_duplicated(self, threshold: int) -> np.ndarray:
        """Per-source count of coded packets held by >= threshold distinct carriers."""
        out = np.zeros(self.n, dtype=np.int32)
        count_duplicated(self.coded, self.counts, self.budget, threshold,
                         self._scratch_counts, out)
        return out

    def carriers_of(self, source: int) -> dict[int, int]:
        """Live carrier -> coded index map for one source (inspection/tests)."""
        cnt = self.counts[source]
        row_car = self.carriers[source, :cnt]
        row_cod = self.coded[source, :cnt]
        return {int(c): int(k) for c, k in zip(row_car, row_cod) if k >= 0}
