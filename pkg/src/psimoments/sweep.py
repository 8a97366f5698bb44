"""Exact piecewise evaluation of moments of psi(x + width) - psi(x) - width.

The integrand is driven by the step function
    S(x) = sum of weights of prime powers n inside the window at x,
which only changes where an event enters or leaves.  For a fixed window of
width h the event n is inside iff x < n <= x + h, so it enters at n - h and
leaves at n.  For a scaled window the event is inside iff x < n <= x(1+delta),
entering at n/(1+delta) and leaving at n.

With h = hp/hq and delta = p/q rational, every breakpoint is an integer
multiple of 1/K (K = hq resp. p+q).  All breakpoints are therefore kept as
int64 keys n*hq - hp / n*hq resp. n*q / n*(p+q) and ordered by integer
comparison; floats only enter when a piece is integrated.

On a piece [a, b) the residual u(x) = S - h is constant (fixed) or
u(x) = S - delta x falls linearly (scaled).  Scaled pieces are integrated
in closed form through antiderivatives G with G' = g:
    signed    g(u) = u^m        G(u) = u^(m+1)/(m+1)
    absolute  g(u) = |u|^m      G(u) = sgn(u)|u|^(m+1)/(m+1)
    pos part  g(u) = max(u,0)^m G(u) = max(u,0)^(m+1)/(m+1)
    neg part  g(u) = min(u,0)^m G(u) = min(u,0)^(m+1)/(m+1)
each continuous at u = 0, so a piece whose residual changes sign is handled
exactly without an explicit split: the two half-piece integrals telescope.

The x range [1, X] is cut into chunks that are processed independently
(optionally in a thread pool) and combined in a fixed order, so results do
not depend on the thread count.  Within a chunk the running sum for S is
carried in extended precision and per-piece contributions are summed with
blockwise compensation.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .errors import (
    InvalidOrderError,
    InvalidWindowError,
    RangeLimitError,
)
from .sieve import EventSource

MAX_DELTA_DENOMINATOR = 10**9
_KEY_LIMIT = 1 << 62
DEFAULT_CHUNK_EVENTS = 1 << 20


class Kind(str, Enum):
    ABSOLUTE = "absolute"
    SIGNED = "signed"
    POSITIVE_PART = "positive_part"
    NEGATIVE_PART = "negative_part"


@dataclass(frozen=True)
class Fixed:
    h: Fraction

    def __post_init__(self):
        object.__setattr__(self, "h", Fraction(self.h))
        if self.h <= 0:
            raise InvalidWindowError(f"window width must be positive, got {self.h}")


@dataclass(frozen=True)
class Scaled:
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not 0 < self.delta < 1:
            raise InvalidWindowError(f"delta must lie in (0, 1), got {self.delta}")
        if self.delta.denominator > MAX_DELTA_DENOMINATOR:
            raise InvalidWindowError(
                f"delta denominator {self.delta.denominator} exceeds "
                f"{MAX_DELTA_DENOMINATOR}"
            )


@dataclass(frozen=True)
class WindowSpec:
    X: float
    geometry: Fixed | Scaled

    def __post_init__(self):
        if not self.X >= 1:
            raise InvalidWindowError(f"X must be at least 1, got {self.X}")
        if isinstance(self.geometry, Fixed) and self.X > 1:
            if self.geometry.h >= Fraction(self.X):
                raise InvalidWindowError(
                    f"fixed width h={self.geometry.h} must be below X={self.X}"
                )

    def limit(self) -> int:
        """Largest n any window position can contain."""
        xf = Fraction(self.X)
        if isinstance(self.geometry, Fixed):
            top = xf + self.geometry.h
        else:
            top = xf * (1 + self.geometry.delta)
        return int(math.floor(top))


@dataclass(frozen=True)
class MomentRequest:
    window: WindowSpec
    orders: Tuple[float, ...]
    kind: Kind


@dataclass(frozen=True)
class MomentResult:
    order: float
    kind: Kind
    value: float
    piece_count: int
    x_range: Tuple[float, float]


@dataclass
class SweepDiagnostics:
    piece_count: int = 0
    length_sum: float = 0.0
    wall_seconds: float = 0.0
    chunks: int = 0


def _validate_pairs(pairs: Sequence[Tuple[float, Kind]]):
    for order, kind in pairs:
        if not order > 0:
            raise InvalidOrderError(f"order must be positive, got {order}")
        if kind != Kind.ABSOLUTE and float(order) != int(order):
            raise InvalidOrderError(
                f"kind {kind.value} needs an integer order, got {order}"
            )


@dataclass(frozen=True)
class _Geometry:
    kind: str  # "fixed" | "scaled"
    K: int  # common key denominator
    entry_mul: int
    entry_sub: int
    exit_mul: int
    width64: float  # h or delta, rounded to float64 once


def _prepare_geometry(window: WindowSpec) -> _Geometry:
    g = window.geometry
    if isinstance(g, Fixed):
        hp, hq = g.h.numerator, g.h.denominator
        return _Geometry("fixed", hq, hq, hp, hq, hp / hq)
    p, q = g.delta.numerator, g.delta.denominator
    return _Geometry("scaled", p + q, q, 0, p + q, p / q)


def _neumaier_sum(arr: np.ndarray, block: int = 1 << 14) -> float:
    """Compensated sum: pairwise within blocks, Neumaier across blocks."""
    total = 0.0
    comp = 0.0
    for i in range(0, arr.size, block):
        x = float(np.sum(arr[i : i + block]))
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def _combine(partials: Sequence[float]) -> float:
    return math.fsum(partials)


def _chunk_moments(
    geom: _Geometry,
    entry: np.ndarray,
    exit_: np.ndarray,
    weights: np.ndarray,
    ka: int,
    kb: int,
    pairs: Sequence[Tuple[float, Kind]],
    x_end: float | None,
):
    """Integrate all requested (order, kind) pairs over x in [ka/K, kb/K).

    entry/exit_/weights hold exactly the events overlapping the chunk.
    x_end, when given, replaces the right endpoint of the final piece (used
    when X*K is not an integer, so the last sliver ends at X itself).
    """
    K = geom.K
    clamped_entry = np.maximum(entry, ka)
    clamped_exit = np.minimum(exit_, kb)
    keys = np.concatenate([clamped_entry, clamped_exit])
    deltas = np.concatenate([weights, -weights])
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    running = np.cumsum(deltas[order].astype(np.longdouble))

    lefts = np.concatenate([np.array([ka], dtype=np.int64), keys])
    rights = np.concatenate([keys, np.array([kb], dtype=np.int64)])
    svals = np.concatenate([np.zeros(1, dtype=np.longdouble), running])

    mask = rights > lefts
    lefts = lefts[mask]
    rights = rights[mask]
    svals = svals[mask]
    piece_count = int(lefts.size)

    xl = lefts.astype(np.longdouble) / K
    xr = rights.astype(np.longdouble) / K
    if x_end is not None and piece_count:
        xr[-1] = np.longdouble(x_end)
    lengths = (xr - xl).astype(np.float64)
    length_sum = _neumaier_sum(lengths)

    values = []
    if geom.kind == "fixed":
        resid = (svals - np.longdouble(geom.width64)).astype(np.float64)
        for order_, kind in pairs:
            m = float(order_)
            if kind == Kind.SIGNED or (kind == Kind.ABSOLUTE and m % 2 == 0):
                g = resid**m
            elif kind == Kind.ABSOLUTE:
                g = np.abs(resid) ** m
            elif kind == Kind.POSITIVE_PART:
                g = np.maximum(resid, 0.0) ** m
            else:
                g = np.minimum(resid, 0.0) ** m
            values.append(_neumaier_sum(g * lengths))
        return values, piece_count, length_sum

    delta_ld = np.longdouble(geom.width64)
    ul = (svals - delta_ld * xl).astype(np.float64)
    ur = (svals - delta_ld * xr).astype(np.float64)
    inv_delta = 1.0 / geom.width64
    for order_, kind in pairs:
        m = float(order_) + 1.0
        if kind == Kind.SIGNED or (kind == Kind.ABSOLUTE and float(order_) % 2 == 0):
            if order_ == 1:
                # midpoint form is exact for a linear integrand and avoids
                # the cancellation of G(ul) - G(ur)
                contrib = lengths * 0.5 * (ul + ur)
            else:
                contrib = (ul**m - ur**m) * (inv_delta / m)
        elif kind == Kind.ABSOLUTE:
            ga = np.sign(ul) * np.abs(ul) ** m
            gb = np.sign(ur) * np.abs(ur) ** m
            contrib = (ga - gb) * (inv_delta / m)
        elif kind == Kind.POSITIVE_PART:
            contrib = (np.maximum(ul, 0.0) ** m - np.maximum(ur, 0.0) ** m) * (
                inv_delta / m
            )
        else:
            contrib = (np.minimum(ul, 0.0) ** m - np.minimum(ur, 0.0) ** m) * (
                inv_delta / m
            )
        values.append(_neumaier_sum(contrib))
    return values, piece_count, length_sum


def sweep_moments(
    window: WindowSpec,
    pairs: Sequence[Tuple[float, Kind]],
    *,
    events: EventSource | None = None,
    threads: int = 1,
    chunk_events: int = DEFAULT_CHUNK_EVENTS,
) -> Tuple[list, SweepDiagnostics]:
    """All requested (order, kind) moments in one pass over the pieces.

    Returns (results, diagnostics); results align with ``pairs``.
    """
    pairs = [(float(o), Kind(k)) for o, k in pairs]
    _validate_pairs(pairs)
    start = time.monotonic()
    X = float(window.X)
    if X <= 1.0:
        diag = SweepDiagnostics(piece_count=1, wall_seconds=time.monotonic() - start)
        return (
            [MomentResult(o, k, 0.0, 1, (1.0, X)) for o, k in pairs],
            diag,
        )

    geom = _prepare_geometry(window)
    limit = window.limit()
    if limit * geom.exit_mul >= _KEY_LIMIT or limit * geom.entry_mul >= _KEY_LIMIT:
        raise RangeLimitError(
            f"keys for X={X} with denominator {geom.K} overflow 64-bit range"
        )
    if events is None:
        events = EventSource(limit)

    xf = Fraction(window.X)
    a_key = geom.K
    b_key_frac = xf * geom.K
    if b_key_frac.denominator == 1:
        # X sits on the key grid; the last piece ends exactly at X
        b_key = int(b_key_frac)
        x_end = None
    else:
        # no breakpoint falls strictly between floor and ceil, so rounding
        # up and trimming the final piece to X keeps the sweep exact
        b_key = int(math.floor(b_key_frac)) + 1
        x_end = X
    if b_key <= a_key:
        diag = SweepDiagnostics(piece_count=1, wall_seconds=time.monotonic() - start)
        return [MomentResult(o, k, 0.0, 1, (1.0, X)) for o, k in pairs], diag

    est_events = max(64, int(limit / max(math.log(max(limit, 3)), 1.0)))
    n_chunks = max(1, math.ceil(est_events / chunk_events))
    span = max(1, (b_key - a_key + n_chunks - 1) // n_chunks)
    bounds = [min(a_key + i * span, b_key) for i in range(n_chunks)] + [b_key]

    def load_chunk(i: int):
        ka, kb = bounds[i], bounds[i + 1]
        # events overlapping [ka, kb): exit > ka and entry < kb
        n_lo = ka // geom.exit_mul + 1  #  n*exit_mul > ka
        n_hi = (kb + geom.entry_sub + geom.entry_mul - 1) // geom.entry_mul
        n_hi = min(n_hi, limit + 1)
        ns, ws = events.range(n_lo, n_hi)
        entry = ns * geom.entry_mul - geom.entry_sub
        exit_ = ns * geom.exit_mul
        keep = (exit_ > ka) & (entry < kb)
        return entry[keep], exit_[keep], ws[keep], ka, kb

    def run_chunk(i: int):
        if bounds[i] >= bounds[i + 1]:
            return [0.0] * len(pairs), 0, 0.0
        entry, exit_, ws, ka, kb = load_chunk(i)
        return _chunk_moments(
            geom,
            entry,
            exit_,
            ws,
            ka,
            kb,
            pairs,
            x_end if i == n_chunks - 1 else None,
        )

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunk_results = list(pool.map(run_chunk, range(n_chunks)))
    else:
        chunk_results = [run_chunk(i) for i in range(n_chunks)]

    piece_count = max(1, sum(r[1] for r in chunk_results))
    length_sum = _combine([r[2] for r in chunk_results])
    results = []
    for j, (order, kind) in enumerate(pairs):
        value = _combine([r[0][j] for r in chunk_results])
        results.append(MomentResult(order, kind, value, piece_count, (1.0, X)))
    diag = SweepDiagnostics(
        piece_count=piece_count,
        length_sum=length_sum,
        wall_seconds=time.monotonic() - start,
        chunks=n_chunks,
    )
    return results, diag


def evaluate(request: MomentRequest, **kwargs) -> list:
    """MomentResult list for every order in the request."""
    pairs = [(o, request.kind) for o in request.orders]
    results, _ = sweep_moments(request.window, pairs, **kwargs)
    return results


def moment_fixed(
    X: float, h, order: float, kind: Kind = Kind.ABSOLUTE, **kwargs
) -> MomentResult:
    """Moment of psi(x+h) - psi(x) - h over x in [1, X], exact up to rounding."""
    window = WindowSpec(X, Fixed(Fraction(h)))
    results, _ = sweep_moments(window, [(order, kind)], **kwargs)
    return results[0]


def moment_scaled(
    X: float, delta, order: float, kind: Kind = Kind.ABSOLUTE, **kwargs
) -> MomentResult:
    """Moment of psi(x(1+delta)) - psi(x) - delta x over x in [1, X]."""
    window = WindowSpec(X, Scaled(Fraction(delta)))
    results, _ = sweep_moments(window, [(order, kind)], **kwargs)
    return results[0]


def first_moment_exact(window: WindowSpec, events: EventSource | None = None) -> float:
    """Signed first moment by direct per-event accounting.

    Each event n contributes weight(n) times the measure of x in [1, X]
    whose window contains n, and the linear part integrates in closed form.
    Shares nothing with the sweep except the event list, so it serves as an
    independent oracle for it.
    """
    X = float(window.X)
    if X <= 1.0:
        return 0.0
    geom = _prepare_geometry(window)
    limit = window.limit()
    if events is None:
        events = EventSource(limit)
    ns, ws = events.range(2, limit + 1)
    entry = (ns * geom.entry_mul - geom.entry_sub).astype(np.float64) / geom.K
    exit_ = (ns * geom.exit_mul).astype(np.float64) / geom.K
    overlap = np.minimum(exit_, X) - np.maximum(entry, 1.0)
    overlap = np.maximum(overlap, 0.0)
    positive = _neumaier_sum(ws * overlap)
    if geom.kind == "fixed":
        linear = geom.width64 * (X - 1.0)
    else:
        linear = geom.width64 * (X * X - 1.0) / 2.0
    return positive - linear


def grid_oracle(
    window: WindowSpec,
    order,
    kind: Kind,
    step: float,
    events: EventSource | None = None,
):
    """Midpoint-rule approximation sampling psi directly; converges to the
    sweep value as step -> 0.  Slow, only for modest X; independent of the
    sweep's piece machinery.

    ``order`` may be a scalar or a sequence; the scalar form returns a float.
    """
    X = float(window.X)
    scalar = isinstance(order, (int, float))
    orders = [float(order)] if scalar else [float(o) for o in order]
    _validate_pairs([(o, Kind(kind)) for o in orders])
    if X <= 1.0:
        return 0.0 if scalar else [0.0] * len(orders)
    if not 0 < step <= (X - 1.0) / 10.0:
        raise InvalidWindowError(f"step must lie in (0, (X-1)/10], got {step}")
    geom = _prepare_geometry(window)
    limit = window.limit()
    if events is None:
        events = EventSource(limit)
    ns, ws = events.range(2, limit + 1)
    prefix = np.concatenate(
        [np.zeros(1, dtype=np.longdouble), np.cumsum(ws.astype(np.longdouble))]
    )

    n_cells = int(math.ceil((X - 1.0) / step))
    width = (X - 1.0) / n_cells
    totals = np.zeros(len(orders), dtype=np.float64)
    block = 1 << 20
    for start_idx in range(0, n_cells, block):
        count = min(block, n_cells - start_idx)
        x = 1.0 + (start_idx + np.arange(count) + 0.5) * width
        if geom.kind == "fixed":
            hi = x + geom.width64
            resid_lin = geom.width64
        else:
            hi = x * (1.0 + geom.width64)
            resid_lin = geom.width64 * x
        lo_idx = np.searchsorted(ns, x, side="right")
        hi_idx = np.searchsorted(ns, hi, side="right")
        S = (prefix[hi_idx] - prefix[lo_idx]).astype(np.float64)
        u = S - resid_lin
        for j, o in enumerate(orders):
            if kind == Kind.SIGNED or (kind == Kind.ABSOLUTE and o % 2 == 0):
                g = u**o
            elif kind == Kind.ABSOLUTE:
                g = np.abs(u) ** o
            elif kind == Kind.POSITIVE_PART:
                g = np.maximum(u, 0.0) ** o
            else:
                g = np.minimum(u, 0.0) ** o
            totals[j] += np.sum(g)
    values = [float(t * width) for t in totals]
    return values[0] if scalar else values


def default_threads() -> int:
    return min(8, os.cpu_count() or 1)
