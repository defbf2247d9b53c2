"""Rateless erasure codec: concrete LT code plus an idealized decode oracle.

Both modes share one interface. Packets carry identities, not payload bits;
throughput is accounted in bits via the scheme packet size. An LT packet is
self-describing: its degree and neighbor set re-derive from the 64-bit
degree_seed it carries, so the decoder needs no side channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import decode_threshold
from .errors import ConfigError, InfeasibleRateError, IntegrityError

_MASK64 = (1 << 64) - 1

# Robust-soliton defaults; the ripple constant c and failure bound delta are
# the usual practical choices.
SOLITON_C = 0.03
SOLITON_DELTA = 0.05


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class _SeedStream:
    """Tiny deterministic stream of uniforms/integers derived from one 64-bit seed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def next_below(self, n: int) -> int:
        return self.next_u64() % n


@dataclass(frozen=True)
class SourceBlock:
    """One generation's worth of data packets at a source."""

    source_id: int
    generation: int
    k: int
    payload_ids: tuple[int, ...] = ()

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("block size k must be >= 1")
        if self.payload_ids and len(self.payload_ids) != self.k:
            raise ConfigError("payload_ids must have exactly k entries")


@dataclass(frozen=True)
class CodedPacketId:
    """Identity of the index-th coded packet of a source's generation."""

    source_id: int
    index: int
    generation: int
    degree_seed: int | None = None  # present in lt mode only


def robust_soliton(k: int, c: float = SOLITON_C, delta: float = SOLITON_DELTA) -> np.ndarray:
    """Degree distribution over 1..k (index 0 = degree 1)."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    if k == 1:
        return np.array([1.0])
    rho = np.zeros(k)
    rho[0] = 1.0 / k
    degrees = np.arange(2, k + 1)
    rho[1:] = 1.0 / (degrees * (degrees - 1.0))
    S = c * math.log(k / delta) * math.sqrt(k)
    tau = np.zeros(k)
    pivot = max(1, min(k, int(round(k / S)))) if S > 0 else k
    for d in range(1, pivot):
        tau[d - 1] = S / (k * d)
    tau[pivot - 1] += S * math.log(S / delta) / k if S > delta else 0.0
    mu = rho + tau
    return mu / mu.sum()


def _soliton_cdf(k: int) -> np.ndarray:
    return np.cumsum(robust_soliton(k))


def neighbors_from_seed(degree_seed: int, k: int, cdf: np.ndarray | None = None) -> tuple[int, ...]:
    """Re-derive the packet's neighbor set (indices of XORed data packets)."""
    if cdf is None:
        cdf = _soliton_cdf(k)
    stream = _SeedStream(degree_seed)
    d = int(np.searchsorted(cdf, stream.next_float(), side="right")) + 1
    d = min(d, k)
    # Partial Fisher-Yates over 0..k-1 gives d distinct uniform indices.
    pool = list(range(k))
    for i in range(d):
        j = i + stream.next_below(k - i)
        pool[i], pool[j] = pool[j], pool[i]
    return tuple(sorted(pool[:d]))


def encode(
    block: SourceBlock,
    budget: int,
    mode: str = "oracle",
    rng: np.random.Generator | None = None,
) -> list[CodedPacketId]:
    """Generate exactly ``budget`` coded packet identities for one block."""
    if budget < block.k:
        raise InfeasibleRateError(
            f"budget {budget} below block size {block.k}: at least k coded packets are needed"
        )
    if mode == "oracle":
        return [
            CodedPacketId(block.source_id, i, block.generation) for i in range(budget)
        ]
    if mode != "lt":
        raise ConfigError(f"unknown coding mode {mode!r}")
    if rng is None:
        raise ConfigError("lt encoding draws degree seeds and needs an rng")
    seeds = rng.integers(0, 1 << 63, size=budget, dtype=np.uint64)
    return [
        CodedPacketId(block.source_id, i, block.generation, degree_seed=int(seeds[i]))
        for i in range(budget)
    ]


class PeelingDecoder:
    """Incremental LT peeling over neighbor sets.

    Success is a pure, monotone function of the received set: adding packets
    never un-decodes, and the same set always yields the same outcome.
    """

    def __init__(self, k: int):
        self.k = k
        self._cdf = _soliton_cdf(k)
        self.recovered = [False] * k
        self.recovered_count = 0
        # Per pending packet: set of still-unknown neighbors.
        self._pending: list[set[int]] = []
        self._by_source: dict[int, list[int]] = {i: [] for i in range(k)}

    @property
    def decoded(self) -> bool:
        return self.recovered_count == self.k

    def add_packet(self, degree_seed: int) -> bool:
        """Feed one coded packet; returns current decode status."""
        nbrs = {i for i in neighbors_from_seed(int(degree_seed), self.k, self._cdf)
                if not self.recovered[i]}
        if not nbrs:
            return self.decoded  # redundant packet
        idx = len(self._pending)
        self._pending.append(nbrs)
        for i in nbrs:
            self._by_source[i].append(idx)
        if len(nbrs) == 1:
            self._peel(next(iter(nbrs)))
        return self.decoded

    def _peel(self, start: int):
        stack = [start]
        while stack:
            src = stack.pop()
            if self.recovered[src]:
                continue
            # Only recover from a packet actually reduced to degree 1 on src.
            ready = any(self._pending[p] == {src} for p in self._by_source[src])
            if not ready:
                continue
            self.recovered[src] = True
            self.recovered_count += 1
            for p in self._by_source[src]:
                s = self._pending[p]
                s.discard(src)
                if len(s) == 1:
                    stack.append(next(iter(s)))


def decode(
    block: SourceBlock,
    received: set[CodedPacketId] | list[CodedPacketId],
    mode: str = "oracle",
    epsilon_code: float = 1.0 / 6.0,
    rng: np.random.Generator | None = None,
    failure_exponent: float | None = None,
) -> tuple[bool, int]:
    """Attempt to decode a block from received coded packets.

    Oracle mode succeeds iff ceil((1+epsilon)k) distinct packets arrived;
    when ``failure_exponent`` a is set, an extra failure with probability
    k**-a is sampled on top, mirroring the decode guarantee "success with
    probability at least 1 - k**-a". LT mode runs the peeling decoder.
    Returns (success, recovered data packet count).
    """
    packets = list(received)
    for p in packets:
        if p.source_id != block.source_id or p.generation != block.generation:
            raise IntegrityError(f"packet {p} does not belong to block {block}")
    distinct = {p.index for p in packets}
    if len(distinct) < block.k:
        return False, 0  # fewer than k packets can never recover k data packets
    if mode == "oracle":
        ok = len(distinct) >= decode_threshold(block.k, epsilon_code)
        if ok and failure_exponent is not None:
            if rng is None:
                raise ConfigError("failure sampling needs an rng")
            ok = rng.random() >= min(1.0, block.k ** (-failure_exponent))
        return ok, block.k if ok else 0
    if mode != "lt":
        raise ConfigError(f"unknown coding mode {mode!r}")
    dec = PeelingDecoder(block.k)
    for p in packets:
        if p.degree_seed is None:
            raise IntegrityError(f"lt decode needs degree seeds; packet {p} has none")
        dec.add_packet(p.degree_seed)
    return dec.decoded, dec.recovered_count


def overhead_profile(k: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Empirical decode-overhead distribution of the LT code.

    Each trial feeds fresh random coded packets one at a time until peeling
    succeeds; the recorded value is received/k (always >= 1).
    """
    if k < 1 or trials < 1:
        raise ConfigError("k and trials must be >= 1")
    out = np.empty(trials)
    for t in range(trials):
        dec = PeelingDecoder(k)
        count = 0
        while not dec.decoded:
            count += 1
            dec.add_packet(int(rng.integers(0, 1 << 63)))
        out[t] = count / k
    return out
