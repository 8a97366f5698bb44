"""Prime power enumeration with von Mangoldt weights.

Every n = p^a <= limit is an event (n, log p).  Events come out in strictly
ascending n, produced segment by segment so memory stays bounded by the
segment size plus the base prime table (primes up to sqrt(limit)).

The weight of p^a reuses the float computed for p itself, so a prime and
all its powers carry bitwise identical weights.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Tuple

import numpy as np

from .errors import CorruptCacheError, CoverageError, RangeLimitError

DEFAULT_SEGMENT = 1 << 20
# beyond this limit events are re-sieved per range instead of held in memory
PRELOAD_LIMIT = 1 << 28
# key arithmetic in the sweep must stay inside int64
MAX_LIMIT = 1 << 62

CACHE_MAGIC = b"PPOWCHE1"
_RECORD_DTYPE = np.dtype([("n", "<u8"), ("w", "<f8")])


@dataclass(frozen=True)
class PrimePowerEvent:
    n: int
    weight: float


@dataclass(frozen=True)
class SieveConfig:
    limit: int
    segment_size: int = DEFAULT_SEGMENT

    def __post_init__(self):
        if self.limit > MAX_LIMIT:
            raise RangeLimitError(f"limit {self.limit} exceeds 64-bit key range")
        if self.segment_size < 64:
            raise ValueError("segment_size must be at least 64")


def _simple_primes(limit: int) -> np.ndarray:
    """All primes <= limit by a plain odd-only sieve.  Used for the base
    table and as an independent cross-check in tests."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    if limit < 3:
        return np.array([2], dtype=np.int64)
    half = (limit - 1) // 2  # odds 3, 5, ..., indexed by (n - 3) // 2
    mask = np.ones(half, dtype=bool)
    for i in range((math.isqrt(limit) - 1) // 2):  # p = 2i + 3 <= sqrt(limit)
        if mask[i]:
            p = 2 * i + 3
            start = (p * p - 3) // 2
            mask[start::p] = False
    odds = 2 * np.flatnonzero(mask).astype(np.int64) + 3
    return np.concatenate([np.array([2], dtype=np.int64), odds])


def _higher_powers(base: np.ndarray, base_logs: np.ndarray, lo: int, hi: int):
    """Prime powers p^a with a >= 2 in [lo, hi), with the base prime's log."""
    vals = []
    logs = []
    for p, lp in zip(base.tolist(), base_logs.tolist()):
        v = p * p
        if v >= hi:
            break
        while v < hi:
            if v >= lo:
                vals.append(v)
                logs.append(lp)
            v *= p
    if not vals:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    order = np.argsort(np.asarray(vals, dtype=np.int64), kind="stable")
    return (
        np.asarray(vals, dtype=np.int64)[order],
        np.asarray(logs, dtype=np.float64)[order],
    )


def _sieve_segment(lo: int, hi: int, base_odd: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi) given odd base primes up to sqrt(hi)."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.empty(0, dtype=np.int64)
    first_odd = lo | 1
    count = max(0, (hi - first_odd + 1) // 2)
    mask = np.ones(count, dtype=bool)
    for p in base_odd.tolist():
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start < hi:
            mask[(start - first_odd) // 2 :: p] = False
    primes = first_odd + 2 * np.flatnonzero(mask).astype(np.int64)
    if lo <= 2 < hi:
        primes = np.concatenate([np.array([2], dtype=np.int64), primes])
    elif count and first_odd == 1:
        primes = primes[primes != 1]
    return primes


def sieve_range(lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
    """Event arrays (n, weight) for lo <= n < hi, ascending."""
    lo = max(lo, 2)
    if hi <= lo:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    base = _simple_primes(math.isqrt(hi - 1))
    base_logs = np.log(base.astype(np.float64)) if base.size else np.empty(0)
    primes = _sieve_segment(lo, hi, base[base != 2])
    pw_n, pw_w = _higher_powers(base, base_logs, lo, hi)
    ns = np.concatenate([primes, pw_n])
    ws = np.concatenate([np.log(primes.astype(np.float64)), pw_w])
    order = np.argsort(ns, kind="stable")
    return ns[order], ws[order]


def iter_event_blocks(config: SieveConfig) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (n, weight) array blocks covering [2, limit] in ascending order.

    Memory use is bounded by the segment size plus the base prime table;
    the emitted stream is bit-identical for any valid segment_size.
    """
    limit = config.limit
    if limit < 2:
        return
    base = _simple_primes(math.isqrt(limit))
    base_logs = np.log(base.astype(np.float64)) if base.size else np.empty(0)
    base_odd = base[base != 2]
    for lo in range(2, limit + 1, config.segment_size):
        hi = min(lo + config.segment_size, limit + 1)
        primes = _sieve_segment(lo, hi, base_odd)
        pw_n, pw_w = _higher_powers(base, base_logs, lo, hi)
        ns = np.concatenate([primes, pw_n])
        ws = np.concatenate([np.log(primes.astype(np.float64)), pw_w])
        order = np.argsort(ns, kind="stable")
        yield ns[order], ws[order]


def enumerate_prime_powers(config: SieveConfig) -> Iterator[PrimePowerEvent]:
    """Ascending stream of PrimePowerEvent up to config.limit inclusive."""
    for ns, ws in iter_event_blocks(config):
        for n, w in zip(ns.tolist(), ws.tolist()):
            yield PrimePowerEvent(n, w)


@dataclass
class EventSource:
    """Random access view of the events up to ``limit``.

    Small limits are materialised once; past PRELOAD_LIMIT each range
    request re-sieves just the span it needs, so huge limits never hold
    the full event list in memory.
    """

    limit: int
    segment_size: int = DEFAULT_SEGMENT
    preload: bool | None = None
    _arrays: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.limit > MAX_LIMIT:
            raise RangeLimitError(f"limit {self.limit} exceeds 64-bit key range")
        if self.preload is None:
            self.preload = self.limit <= PRELOAD_LIMIT

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._arrays is None:
            self._arrays = sieve_range(2, self.limit + 1)
        return self._arrays

    def range(self, lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
        """Events with lo <= n < hi."""
        if hi > self.limit + 1:
            raise CoverageError(
                f"event source covers n <= {self.limit}, requested up to {hi - 1}"
            )
        if self.preload or self._arrays is not None:
            ns, ws = self.arrays()
            i = np.searchsorted(ns, lo, side="left")
            j = np.searchsorted(ns, hi, side="left")
            return ns[i:j], ws[i:j]
        return sieve_range(lo, hi)

    def blocks(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        if self._arrays is not None:
            yield self._arrays
            return
        yield from iter_event_blocks(SieveConfig(self.limit, self.segment_size))

    def events(self) -> Iterator[PrimePowerEvent]:
        for ns, ws in self.blocks():
            for n, w in zip(ns.tolist(), ws.tolist()):
                yield PrimePowerEvent(n, w)


def psi(x: float, events: EventSource | None = None) -> float:
    """Chebyshev psi: compensated sum of weights over n <= x."""
    if x < 2:
        return 0.0
    n_max = int(math.floor(x))
    if events is None:
        events = EventSource(n_max)
    elif events.limit < n_max:
        raise CoverageError(f"event source covers n <= {events.limit}, psi needs {n_max}")
    total = math.fsum(
        math.fsum(ws[: np.searchsorted(ns, n_max, side="right")].tolist())
        for ns, ws in events.blocks()
    )
    return total


def persist_events(events, path: str) -> int:
    """Write events to ``path`` in the binary cache format; returns count.

    Accepts an EventSource, an iterable of PrimePowerEvent, or an
    (n_array, weight_array) pair.
    """
    if isinstance(events, EventSource):
        blocks = events.blocks()
    elif isinstance(events, tuple) and len(events) == 2:
        blocks = iter([events])
    else:
        ev = [(e.n, e.weight) for e in events]
        ns = np.array([n for n, _ in ev], dtype=np.int64)
        ws = np.array([w for _, w in ev], dtype=np.float64)
        blocks = iter([(ns, ws)])
    count = 0
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(np.uint64(0).tobytes())  # placeholder, fixed up below
        prev = 0
        for ns, ws in blocks:
            if ns.size == 0:
                continue
            if ns[0] <= prev or np.any(np.diff(ns) <= 0):
                raise ValueError("events must be strictly ascending")
            prev = int(ns[-1])
            rec = np.empty(ns.size, dtype=_RECORD_DTYPE)
            rec["n"] = ns
            rec["w"] = ws
            rec.tofile(f)
            count += ns.size
        f.seek(len(CACHE_MAGIC))
        f.write(np.uint64(count).tobytes())
    return count


def load_events(path: str) -> EventSource:
    """Validate and load a persisted event file into an EventSource."""
    try:
        size = os.path.getsize(path)
        with open(path, "rb") as f:
            header = f.read(16)
    except OSError as exc:
        raise CorruptCacheError(f"cannot read cache {path}: {exc}", 0) from None
    if len(header) < 16 or header[:8] != CACHE_MAGIC:
        raise CorruptCacheError("bad magic", 0)
    count = int(np.frombuffer(header[8:16], dtype="<u8")[0])
    body = size - 16
    n_records = body // _RECORD_DTYPE.itemsize
    if body % _RECORD_DTYPE.itemsize:
        raise CorruptCacheError(
            "truncated record", 16 + n_records * _RECORD_DTYPE.itemsize
        )
    if n_records != count:
        raise CorruptCacheError(
            f"header count {count} does not match {n_records} records on disk",
            16 + min(n_records, count) * _RECORD_DTYPE.itemsize,
        )
    rec = np.fromfile(path, dtype=_RECORD_DTYPE, offset=16)
    ns = rec["n"].astype(np.int64)
    ws = rec["w"].astype(np.float64)
    if ns.size:
        if ns[0] < 2:
            raise CorruptCacheError(f"event n={int(ns[0])} below 2", 16)
        bad = np.flatnonzero(np.diff(ns) <= 0)
        if bad.size:
            raise CorruptCacheError(
                "ordering violation",
                16 + (int(bad[0]) + 1) * _RECORD_DTYPE.itemsize,
            )
    limit = int(ns[-1]) if ns.size else 1
    src = EventSource(limit, preload=True)
    src._arrays = (ns, ws)
    return src
