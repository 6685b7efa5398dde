"""Bit-exact discrete-time simulation of source -> encoder -> FIFO bit pipe -> decoder.

Slot conventions (these pin every number reported here):

* An arrival at integer slot t joins the buffer before the slot's bit is
  chosen; the chosen bit occupies the interval (t, t+1].
* A codeword whose last bit occupies (t, t+1] is decoded at t+1; the age
  then resets to t+1 minus the symbol's arrival slot.
* Idle framing starts the moment the buffer empties at a codeword
  boundary: the ideal scheme leaves the slot silent, the naive scheme
  sends a lone 0, the predictive/adaptive schemes start a null codeword
  (back to back while idleness persists).  An adaptive null in flight is
  abandoned for a new head-of-line arrival whose codeword extends the
  bits already sent.
* Before the first decode the age ramps from `initial_age`; that ramp
  contributes no peak sample.  A peak is the age just before a reset and
  is counted when its ramp lies entirely past the warm-up.

Internally the run is event-driven over arrivals (everything between
arrivals is deterministic), which keeps long sparse runs cheap while the
per-slot view stays exactly reproducible via `Trace.iter_slots`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, EmptySampleError, FormatError
from .schemes import SchemeKind, SchemeSpec
from .source import ArrivalSpec, SourcePMF

# A run is flagged divergent when this many mean service times of work are
# still queued at the horizon.
DIVERGENCE_FACTOR = 1000.0


@dataclass(frozen=True)
class SimConfig:
    scheme: SchemeSpec
    arrival: ArrivalSpec | None
    horizon: int
    warmup: int | None = None  # default: max(10_000, 100 * max wire length)
    seed: int = 0
    initial_age: int = 1
    source: SourcePMF | None = None
    scripted_arrivals: tuple[tuple[int, str], ...] | None = None

    def max_wire_len(self) -> int:
        longest = max(self.scheme.wire_lengths())
        if self.scheme.null_codeword is not None:
            longest = max(longest, len(self.scheme.null_codeword))
        return longest

    def resolved_warmup(self) -> int:
        if self.warmup is not None:
            return self.warmup
        return max(10_000, 100 * self.max_wire_len())

    def validate(self) -> None:
        if self.horizon < 10 * self.max_wire_len():
            raise ConfigError(
                f"horizon {self.horizon} shorter than 10 codeword lengths "
                f"({10 * self.max_wire_len()})"
            )
        warmup = self.resolved_warmup()
        if not (0 <= warmup < self.horizon):
            raise ConfigError(f"warmup {warmup} must be in [0, horizon={self.horizon})")
        if self.scripted_arrivals is None:
            if self.arrival is None:
                raise ConfigError("random runs need an ArrivalSpec")
            if self.source is None:
                raise ConfigError("random runs need a source to draw symbols from")
            if tuple(self.source.symbols) != tuple(self.scheme.message_codebook.symbols):
                raise ConfigError("source alphabet does not match the scheme codebook")
        else:
            prev = -1
            for slot, symbol in self.scripted_arrivals:
                if slot <= prev:
                    raise ConfigError("scripted arrival slots must be strictly increasing")
                if not (0 <= slot < self.horizon):
                    raise ConfigError(f"scripted arrival slot {slot} outside [0, horizon)")
                if symbol not in self.scheme.message_codebook.symbols:
                    raise ConfigError(f"scripted symbol {symbol!r} not in the codebook")
                prev = slot


@dataclass(frozen=True)
class SimStats:
    empirical_paoi: float | None
    mean_age: float
    idle_fraction: float
    mean_wait: float | None
    mean_service: float | None
    mean_interarrival: float | None
    peaks_count: int
    decoded_count: int
    arrivals_count: int
    pending_bits: int
    diverged: bool
    switches: int


class DecodeRecord(NamedTuple):
    symbol: str
    arrival: int
    service_start: int
    decode: int
    billable_len: int  # wire bits charged to this symbol (post-switch remainder)


class Emission(NamedTuple):
    kind: str  # 'phi' | 'zeros' | 'null' | 'msg'
    start: int
    length: int
    bits: str | None
    symbol: str | None
    billable_from: int | None
    decode: int | None


class _Run(NamedTuple):
    arrivals: list[tuple[int, str]]
    decodes: list[DecodeRecord]  # all, including decodes past the horizon
    emissions: list[Emission]
    gaps: list[tuple[int, int]]  # half-open idle intervals (no message bits pending)
    switches: int


def _draw_arrivals(config: SimConfig) -> list[tuple[int, str]]:
    if config.scripted_arrivals is not None:
        return [(int(t), s) for t, s in config.scripted_arrivals]
    children = np.random.SeedSequence(config.seed).spawn(2)
    coin_rng = np.random.default_rng(children[0])
    slots = np.nonzero(coin_rng.random(config.horizon) < config.arrival.q)[0]
    symbol_rng = np.random.default_rng(children[1])
    cum = np.cumsum(np.asarray(config.source.probs))
    picks = np.minimum(
        np.searchsorted(cum, symbol_rng.random(len(slots)), side="right"),
        len(cum) - 1,
    )
    symbols = config.source.symbols
    return [(int(t), symbols[int(i)]) for t, i in zip(slots, picks)]


def _engine(config: SimConfig) -> _Run:
    scheme = config.scheme
    kind = scheme.kind
    null_cw = scheme.null_codeword
    null_len = len(null_cw) if null_cw else 0
    wire = {s: scheme.wire_codeword(s) for s in scheme.message_codebook.symbols}

    arrivals = _draw_arrivals(config)
    emissions: list[Emission] = []
    decodes: list[DecodeRecord] = []
    gaps: list[tuple[int, int]] = []
    switches = 0
    free_at = 0  # next codeword boundary with no message pending

    def emit_gap(start: int, end: int) -> int:
        """Fill an idle stretch [start, end); returns the start of the null
        codeword still in flight at `end` (or `end` when none is)."""
        if kind == SchemeKind.IDEAL:
            if end > start:
                emissions.append(Emission("phi", start, end - start, None, None, None, None))
            return end
        if kind == SchemeKind.NAIVE:
            if end > start:
                emissions.append(
                    Emission("zeros", start, end - start, "0" * (end - start), None, None, None)
                )
            return end
        full = (end - start) // null_len
        for i in range(full):
            emissions.append(
                Emission("null", start + i * null_len, null_len, null_cw, None, None, None)
            )
        return start + full * null_len

    for a, symbol in arrivals:
        w = wire[symbol]
        if a <= free_at:
            service_start = free_at
            emissions.append(
                Emission("msg", free_at, len(w), w, symbol, free_at, free_at + len(w))
            )
            billable = len(w)
        else:
            gaps.append((free_at, a))
            cur_null_start = emit_gap(free_at, a)
            sent = a - cur_null_start  # bits of the in-flight null codeword
            if sent == 0:
                service_start = a
                emissions.append(Emission("msg", a, len(w), w, symbol, a, a + len(w)))
                billable = len(w)
            elif scheme.preemptible and len(w) > sent and w[:sent] == null_cw[:sent]:
                # Abandon the null: its sent bits double as the head of w.
                switches += 1
                service_start = a
                billable = len(w) - sent
                emissions.append(
                    Emission("msg", cur_null_start, len(w), w, symbol, a, cur_null_start + len(w))
                )
            else:
                emissions.append(
                    Emission("null", cur_null_start, null_len, null_cw, None, None, None)
                )
                service_start = cur_null_start + null_len
                emissions.append(
                    Emission(
                        "msg", service_start, len(w), w, symbol, service_start,
                        service_start + len(w),
                    )
                )
                billable = len(w)
        decode = service_start + billable
        free_at = decode
        decodes.append(DecodeRecord(symbol, a, service_start, decode, billable))

    if free_at < config.horizon:
        gaps.append((free_at, config.horizon))
        tail_null = emit_gap(free_at, config.horizon)
        if tail_null < config.horizon:  # truncated null at the horizon
            cut = config.horizon - tail_null
            emissions.append(
                Emission("null", tail_null, cut, null_cw[:cut], None, None, None)
            )
    return _Run(arrivals, decodes, emissions, gaps, switches)


def _overlap(start: int, end: int, lo: int, hi: int) -> int:
    return max(0, min(end, hi) - max(start, lo))


def _pending_at_horizon(run: _Run, horizon: int) -> int:
    pending = 0
    for rec in run.decodes:
        if rec.arrival >= horizon or rec.decode <= horizon:
            continue
        sent = _overlap(rec.decode - rec.billable_len, rec.decode, 0, horizon)
        pending += rec.billable_len - sent
    return pending


def _age_sum(run: _Run, initial_age: int, lo: int, hi: int) -> float:
    """Sum of the age sampled at integer slots in [lo, hi)."""

    def ramp(a: int, b: int, origin: float) -> float:
        # sum of (t - origin) for integer t in [a, b)
        n = b - a
        return (a + b - 1) * n / 2.0 - origin * n

    done = [r for r in run.decodes if r.decode < hi]
    total = 0.0
    first_decode = done[0].decode if done else hi
    if lo < first_decode:  # pre-first-decode ramp: age = t + initial_age
        total += ramp(lo, min(first_decode, hi), -initial_age)
    for i, rec in enumerate(done):
        seg_end = done[i + 1].decode if i + 1 < len(done) else hi
        a, b = max(rec.decode, lo), min(seg_end, hi)
        if b > a:
            total += ramp(a, b, rec.arrival)
    return total


def _stats(run: _Run, config: SimConfig) -> SimStats:
    horizon = config.horizon
    warmup = config.resolved_warmup()
    done = [r for r in run.decodes if r.decode <= horizon]

    peaks: list[int] = []
    waits: list[int] = []
    services: list[int] = []
    inter: list[int] = []
    for prev, rec in zip(done, done[1:]):
        if prev.decode >= warmup:
            peaks.append(rec.decode - prev.arrival)
            waits.append(rec.service_start - rec.arrival)
            services.append(rec.decode - rec.service_start)
            inter.append(rec.arrival - prev.arrival)

    idle = sum(_overlap(a, b, warmup, horizon) for a, b in run.gaps)
    window = horizon - warmup
    pending = _pending_at_horizon(run, horizon)
    mean_wire = config.scheme.mean_wire_len(config.source)

    def mean(xs):
        return sum(xs) / len(xs) if xs else None

    return SimStats(
        empirical_paoi=mean(peaks),
        mean_age=_age_sum(run, config.initial_age, warmup + 1, horizon + 1) / window,
        idle_fraction=idle / window,
        mean_wait=mean(waits),
        mean_service=mean(services),
        mean_interarrival=mean(inter),
        peaks_count=len(peaks),
        decoded_count=len(done),
        arrivals_count=len(run.arrivals),
        pending_bits=pending,
        diverged=pending > DIVERGENCE_FACTOR * mean_wire,
        switches=run.switches,
    )


@dataclass(frozen=True)
class Trace:
    """Full record of one run; per-slot rows come from `iter_slots`."""

    scheme: SchemeSpec
    horizon: int
    warmup: int
    initial_age: int
    arrivals: tuple[tuple[int, str], ...]
    decodes: tuple[DecodeRecord, ...]
    emissions: tuple[Emission, ...]
    gaps: tuple[tuple[int, int], ...]
    stats: SimStats

    def iter_slots(self) -> Iterator[tuple]:
        """Yield (t, pending_bits, bit, decoded, age, u, N) for t = 0..horizon.

        `bit` is '-' for silent (ideal-idle) slots and '' on the final row,
        which exists to expose a decode landing exactly at the horizon.
        `u` is None until the first decode.
        """
        arrivals_at = {}
        for slot, symbol in self.arrivals:
            arrivals_at.setdefault(slot, []).append(symbol)
        billable_add = {}
        for rec in self.decodes:
            billable_add[rec.arrival] = billable_add.get(rec.arrival, 0) + rec.billable_len
        decode_at = {rec.decode: rec for rec in self.decodes if rec.decode <= self.horizon}

        emissions = iter(self.emissions)
        cur = next(emissions, None)
        pending = 0
        n_seen = 0
        u = None

        for t in range(self.horizon + 1):
            if t in decode_at:
                u = decode_at[t].arrival
            n_seen += len(arrivals_at.get(t, ()))
            pending += billable_add.get(t, 0)
            if t < self.horizon:
                while cur is not None and t >= cur.start + cur.length:
                    cur = next(emissions, None)
                if cur is None or not (cur.start <= t < cur.start + cur.length):
                    raise AssertionError(f"no emission covers slot {t}")
                if cur.kind == "phi":
                    bit = "-"
                else:
                    bit = cur.bits[t - cur.start]
            else:
                bit = ""
            age = (t - u) if u is not None else self.initial_age + t
            decoded = decode_at[t].symbol if t in decode_at else None
            yield (t, pending, bit, decoded, age, u, n_seen)
            if (
                bit in ("0", "1")
                and cur.kind == "msg"
                and cur.billable_from is not None
                and t >= cur.billable_from
            ):
                pending -= 1

    def to_csv(self) -> str:
        lines = ["t,pending_bits,bit,decoded,age,u,N"]
        for t, pending, bit, decoded, age, u, n in self.iter_slots():
            lines.append(
                f"{t},{pending},{bit},{decoded or ''},{age},{'' if u is None else u},{n}"
            )
        return "\n".join(lines) + "\n"


def run(config: SimConfig) -> SimStats:
    """Run the slot simulation and return its summary statistics."""
    config.validate()
    rec = _engine(config)
    return _stats(rec, config)


def run_trace(config: SimConfig) -> Trace:
    """Run the slot simulation and keep the full per-slot record."""
    config.validate()
    rec = _engine(config)
    return Trace(
        scheme=config.scheme,
        horizon=config.horizon,
        warmup=config.resolved_warmup(),
        initial_age=config.initial_age,
        arrivals=tuple(rec.arrivals),
        decodes=tuple(rec.decodes),
        emissions=tuple(rec.emissions),
        gaps=tuple(rec.gaps),
        stats=_stats(rec, config),
    )


def empirical_moments(trace: Trace) -> tuple[float, float, float]:
    """Sample means of per-symbol (waiting, service, interarrival) slots."""
    s = trace.stats
    if s.mean_wait is None:
        raise EmptySampleError("no decoded symbols after warm-up")
    return (s.mean_wait, s.mean_service, s.mean_interarrival)


def idle_fraction(trace: Trace) -> float:
    """Fraction of post-warmup slots with zero message bits pending."""
    return trace.stats.idle_fraction


def decode_stream(scheme: SchemeSpec, slot_bits) -> list[str]:
    """Parse a per-slot emission sequence back into message symbols.

    `slot_bits` holds one entry per slot: '0'/'1', or '-' for a silent
    slot; '' entries are ignored.  Null codewords and naive idle bits are
    consumed and dropped.  A trailing partial codeword is ignored.
    """
    table = {w: s for s, w in zip(scheme.message_codebook.symbols,
                                  scheme.message_codebook.codewords)}
    if scheme.null_codeword is not None:
        table[scheme.null_codeword] = None
    max_len = max(len(w) for w in table)

    out: list[str] = []
    acc = ""
    expect_flag = scheme.kind == SchemeKind.NAIVE
    at_boundary = True
    for raw in slot_bits:
        if raw == "":
            continue
        if raw == "-":
            if acc:
                raise FormatError("silent slot inside a codeword")
            continue
        if expect_flag and at_boundary:
            if raw == "0":
                continue  # idle marker
            at_boundary = False  # flag consumed; codeword bits follow
            continue
        acc += raw
        if acc in table:
            if table[acc] is not None:
                out.append(table[acc])
            acc = ""
            at_boundary = True
        elif len(acc) > max_len:
            raise FormatError(f"undecodable bit run {acc!r}")
    return out
