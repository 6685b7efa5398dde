"""Discrete memoryless sources and the Bernoulli arrival process.

A source is a finite alphabet with a probability for each symbol.  Symbol
order in the list is canonical: every deterministic tie-break downstream
(codeword assignment, length-to-symbol mapping) uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import FormatError, InvalidSourceError

# Reserved identifier for the empty-buffer symbol in augmented codebooks.
NULL_SYMBOL = "NULL"

PROB_SUM_TOL = 1e-12
MIN_PROB = 1e-12


@dataclass(frozen=True)
class SourcePMF:
    """An ordered finite alphabet with per-symbol probabilities."""

    symbols: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "probs", probs)
        if len(symbols) < 2:
            raise InvalidSourceError(f"alphabet needs at least 2 symbols, got {len(symbols)}")
        if len(symbols) != len(probs):
            raise InvalidSourceError("symbols and probs must have the same length")
        if len(set(symbols)) != len(symbols):
            raise InvalidSourceError("symbol identifiers must be unique")
        for s in symbols:
            if not s or any(c.isspace() for c in s) or s.startswith("#"):
                raise InvalidSourceError(f"bad symbol identifier: {s!r}")
        for p in probs:
            if not (p >= MIN_PROB):
                raise InvalidSourceError(f"probability {p!r} below {MIN_PROB} (or not a number)")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidSourceError(f"probabilities sum to {total!r}, not 1")

    def __len__(self):
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)


@dataclass(frozen=True)
class ArrivalSpec:
    """Bernoulli arrival process: one symbol per slot with probability q."""

    q: float

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise InvalidSourceError(f"arrival probability must be in (0, 1), got {self.q!r}")

    @property
    def mean_interarrival(self) -> float:
        """Expected slots between arrivals (geometric interarrival)."""
        return 1.0 / self.q


def uniform_pmf(n: int) -> SourcePMF:
    """Uniform source over n symbols named x1..xn."""
    if n < 2:
        raise InvalidSourceError(f"alphabet needs at least 2 symbols, got {n}")
    p = 1.0 / n
    return SourcePMF(tuple(f"x{i}" for i in range(1, n + 1)), (p,) * n)


def zipf_pmf(n: int, s: float) -> SourcePMF:
    """Zipf source: rank-x symbol has probability (1/x^s) / sum_k (1/k^s)."""
    if n < 2:
        raise InvalidSourceError(f"alphabet needs at least 2 symbols, got {n}")
    if s < 0:
        raise InvalidSourceError(f"Zipf exponent must be >= 0, got {s!r}")
    weights = [1.0 / (k ** s) for k in range(1, n + 1)]
    total = math.fsum(weights)
    return SourcePMF(tuple(f"x{i}" for i in range(1, n + 1)), tuple(w / total for w in weights))


def entropy(pmf: SourcePMF) -> float:
    """Source entropy in bits per symbol."""
    return -math.fsum(p * math.log2(p) for p in pmf.probs)


def format_source(pmf: SourcePMF) -> str:
    """Serialize to the source-spec text format: one `<id> <prob>` line per symbol.

    Probabilities use shortest round-trip decimals, so parsing the output
    reproduces the exact same doubles.
    """
    lines = ["# source spec: <identifier> <probability>"]
    lines += [f"{s} {p!r}" for s, p in zip(pmf.symbols, pmf.probs)]
    return "\n".join(lines) + "\n"


def parse_source(text: str) -> SourcePMF:
    """Parse the source-spec text format; `#` starts a comment line."""
    symbols, probs = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected '<identifier> <probability>', got {raw!r}")
        try:
            prob = float(parts[1])
        except ValueError:
            raise FormatError(f"line {lineno}: bad probability {parts[1]!r}") from None
        symbols.append(parts[0])
        probs.append(prob)
    try:
        return SourcePMF(tuple(symbols), tuple(probs))
    except InvalidSourceError as exc:
        raise FormatError(f"invalid source spec: {exc}") from exc
