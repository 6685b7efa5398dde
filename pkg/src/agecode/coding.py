"""Prefix-free codebook construction.

Three layers:

* `min_linear_penalty_lengths` — package-merge solver for the codeword
  lengths minimizing alpha*E[L] + beta*E[L^2] under a maximum length.
* `boundary_codes` — enumerates every length multiset on the lower-left
  boundary of the (E[L], E[L^2]) convex hull by bisecting penalty weights.
* `age_optimal_code` — picks the boundary code with the smallest peak age
  at a given arrival rate and assigns canonical codewords.

`brute_force_optimal_lengths` is an independent exhaustive solver kept for
cross-checking the fast paths on small alphabets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    AlignmentError,
    FormatError,
    InfeasibleLengthsError,
    OracleSizeError,
    StabilityError,
)
from .source import ArrivalSpec, SourcePMF

# Relative margin a candidate must beat a hull segment's penalty by before
# it counts as a new boundary point; separates real vertices from float
# noise in the summed products.
HULL_IMPROVE_RTOL = 1e-9


@dataclass(frozen=True)
class CodeMoments:
    """First and second moments of the codeword length distribution."""

    mean_len: float
    second_moment: float

    def __post_init__(self):
        if self.mean_len < 1.0 - 1e-9:
            raise InfeasibleLengthsError(f"mean length {self.mean_len!r} below 1 bit")
        if self.second_moment < self.mean_len ** 2 - 1e-9:
            raise InfeasibleLengthsError(
                f"second moment {self.second_moment!r} below mean^2; not a length distribution"
            )


@dataclass(frozen=True)
class PenaltyWeights:
    """Weights (alpha, beta) of the linear penalty alpha*E[L] + beta*E[L^2]."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise InfeasibleLengthsError(
                f"penalty weights must be nonnegative and not both zero: ({self.alpha!r}, {self.beta!r})"
            )


@dataclass(frozen=True)
class Codebook:
    """A prefix-free binary code, aligned with a source's symbol order."""

    symbols: tuple[str, ...]
    codewords: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "codewords", tuple(self.codewords))
        if len(self.symbols) != len(self.codewords):
            raise AlignmentError("one codeword per symbol required")
        if len(set(self.symbols)) != len(self.symbols):
            raise InfeasibleLengthsError("duplicate symbols in codebook")
        for w in self.codewords:
            if not w or any(c not in "01" for c in w):
                raise InfeasibleLengthsError(f"codeword {w!r} is not a nonempty bit string")
        check_prefix_free(self.codewords)
        if kraft_sum(self.lengths) > 1.0 + 1e-12:
            raise InfeasibleLengthsError("Kraft sum exceeds 1")

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.codewords)

    @property
    def entries(self) -> dict[str, str]:
        return dict(zip(self.symbols, self.codewords))

    def codeword(self, symbol: str) -> str:
        return self.codewords[self.symbols.index(symbol)]


def check_prefix_free(codewords) -> None:
    """Raise if any codeword is a prefix of another."""
    # In lexicographic order a prefix sorts immediately before one of its
    # extensions, so checking neighbours covers all pairs.
    ordered = sorted(codewords)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            raise InfeasibleLengthsError(f"codeword {a!r} is a prefix of {b!r}")


def kraft_sum(lengths) -> float:
    """Sum of 2^-l over the given codeword lengths."""
    for l in lengths:
        if l < 1 or l != int(l):
            raise InfeasibleLengthsError(f"codeword lengths must be positive integers, got {l!r}")
    return math.fsum(2.0 ** -int(l) for l in lengths)


def _kraft_units(lengths, max_len: int) -> int:
    """Kraft sum in exact integer units of 2^-max_len."""
    return sum(1 << (max_len - l) for l in lengths)


def moments(pmf: SourcePMF, lengths) -> CodeMoments:
    """E[L] and E[L^2] of a length assignment aligned with the source order."""
    lengths = tuple(int(l) for l in lengths)
    if len(lengths) != len(pmf):
        raise AlignmentError(f"{len(lengths)} lengths for {len(pmf)} symbols")
    mean = math.fsum(p * l for p, l in zip(pmf.probs, lengths))
    second = math.fsum(p * l * l for p, l in zip(pmf.probs, lengths))
    return CodeMoments(mean, second)


def _check_feasible(n: int, max_len: int) -> None:
    if max_len < math.ceil(math.log2(n)):
        raise InfeasibleLengthsError(
            f"no complete code on {n} symbols fits within max length {max_len}"
        )


def _descending_prob_order(pmf: SourcePMF) -> list[int]:
    # Stable: equal probabilities keep their canonical order.
    return sorted(range(len(pmf)), key=lambda i: (-pmf.probs[i], i))


def _assign_multiset(pmf: SourcePMF, multiset) -> list[int]:
    """Assign a sorted length multiset: shortest lengths to the most probable symbols."""
    order = _descending_prob_order(pmf)
    out = [0] * len(pmf)
    for rank, length in enumerate(sorted(multiset)):
        out[order[rank]] = length
    return out


def min_linear_penalty_lengths(
    pmf: SourcePMF, weights: PenaltyWeights, max_len: int | None = None
) -> list[int]:
    """Codeword lengths minimizing alpha*E[L] + beta*E[L^2], Kraft sum exactly 1.

    Package-merge over the binary coin collector formulation: growing symbol
    i from depth l-1 to l costs p_i * (alpha + beta*(2l - 1)) and removes
    width 2^-l from the Kraft gap; a complete code needs total width n - 1
    collected over depths 1..max_len.  Per-depth increments are positive and
    nondecreasing (alpha, beta >= 0, not both 0), which makes the greedy
    package-merge selection optimal.

    Ties are broken deterministically: leaf items win over packages, then
    lower symbol rank.
    """
    n = len(pmf)
    if max_len is None:
        max_len = n - 1
    _check_feasible(n, max_len)

    order = _descending_prob_order(pmf)
    p = [pmf.probs[i] for i in order]
    alpha, beta = weights.alpha, weights.beta

    # Entries are (cost, kind, tiebreak, leaf_ranks); kind 0 = item, 1 = package.
    prev: list[tuple] = []
    pack_seq = 0
    for depth in range(max_len, 0, -1):
        step = alpha + beta * (2 * depth - 1)
        entries = [(p[j] * step, 0, j, (j,)) for j in range(n)]
        for a, b in zip(prev[0::2], prev[1::2]):
            entries.append((a[0] + b[0], 1, pack_seq, a[3] + b[3]))
            pack_seq += 1
        prev = sorted(entries, key=lambda e: (e[0], e[1], e[2]))

    need = 2 * (n - 1)
    if len(prev) < need:  # cannot happen when n <= 2^max_len
        raise InfeasibleLengthsError("package-merge ran out of width")
    counts = [0] * n
    for entry in prev[:need]:
        for j in entry[3]:
            counts[j] += 1

    if _kraft_units(counts, max_len) != 1 << max_len:
        raise InfeasibleLengthsError("package-merge produced an incomplete code")
    # Re-sort the multiset onto descending probabilities so ties in the
    # selection can never give a longer word to a more probable symbol.
    return _assign_multiset(pmf, counts)


def huffman_lengths(pmf: SourcePMF, max_len: int | None = None) -> list[int]:
    """Lengths of a minimum-E[L] (Huffman-optimal) code within max_len."""
    return min_linear_penalty_lengths(pmf, PenaltyWeights(1.0, 0.0), max_len)


def canonical_assign(pmf: SourcePMF, lengths) -> Codebook:
    """Assign canonical codewords for the given per-symbol lengths.

    Symbols are ranked by (length, position in the source order) and receive
    lexicographically increasing codewords.
    """
    lengths = [int(l) for l in lengths]
    if len(lengths) != len(pmf):
        raise AlignmentError(f"{len(lengths)} lengths for {len(pmf)} symbols")
    if any(l < 1 for l in lengths):
        raise InfeasibleLengthsError("codeword lengths must be >= 1")
    max_len = max(lengths)
    if _kraft_units(lengths, max_len) > 1 << max_len:
        raise InfeasibleLengthsError("Kraft sum exceeds 1; lengths are infeasible")

    words = [""] * len(pmf)
    code = 0
    prev_len = None
    for i in sorted(range(len(pmf)), key=lambda i: (lengths[i], i)):
        l = lengths[i]
        if prev_len is not None:
            code = (code + 1) << (l - prev_len)
        words[i] = format(code, f"0{l}b")
        prev_len = l
    return Codebook(pmf.symbols, tuple(words))


def boundary_codes(
    pmf: SourcePMF, max_len: int | None = None
) -> list[tuple[list[int], CodeMoments]]:
    """All length vectors on the lower-left boundary of the (E[L], E[L^2]) hull.

    Seeds with the two extreme penalty solutions, then recursively re-weights:
    for an adjacent pair of boundary points the weights (alpha, beta) =
    (E[L^2] drop, E[L] rise) make both ends score equally, and any code
    scoring strictly below that line is a new vertex between them.  Results
    are deduplicated by length multiset and returned sorted by E[L].
    """
    n = len(pmf)
    if max_len is None:
        max_len = n - 1
    _check_feasible(n, max_len)

    found: dict[tuple[int, ...], tuple[list[int], CodeMoments]] = {}

    def solve(alpha: float, beta: float) -> tuple[tuple[int, ...], CodeMoments]:
        lengths = min_linear_penalty_lengths(pmf, PenaltyWeights(alpha, beta), max_len)
        key = tuple(sorted(lengths))
        if key not in found:
            found[key] = (lengths, moments(pmf, lengths))
        return key, found[key][1]

    _, m_left = solve(1.0, 0.0)
    _, m_right = solve(0.0, 1.0)

    stack = [(m_left, m_right)]
    while stack:
        left, right = stack.pop()
        alpha = left.second_moment - right.second_moment
        beta = right.mean_len - left.mean_len
        if alpha <= 0 or beta <= 0:
            continue  # degenerate pair: same mean or same second moment
        _, m_new = solve(alpha, beta)
        f_seg = alpha * left.mean_len + beta * left.second_moment
        f_new = alpha * m_new.mean_len + beta * m_new.second_moment
        if f_seg - f_new > HULL_IMPROVE_RTOL * f_seg:
            stack.append((left, m_new))
            stack.append((m_new, right))

    points = sorted(found.values(), key=lambda lm: (lm[1].mean_len, lm[1].second_moment))
    # Pareto pass: drop points dominated on both moments (tie variants of
    # the extreme solutions can land here).
    pareto: list[tuple[list[int], CodeMoments]] = []
    best_second = math.inf
    for lengths, m in points:
        if m.second_moment < best_second - 1e-12:
            pareto.append((lengths, m))
            best_second = m.second_moment
    # Convexity pass: keep only vertices of the lower chain.
    hull: list[tuple[list[int], CodeMoments]] = []
    for item in pareto:
        while len(hull) >= 2:
            a, b = hull[-2][1], hull[-1][1]
            c = item[1]
            cross = (b.mean_len - a.mean_len) * (c.second_moment - a.second_moment) - (
                b.second_moment - a.second_moment
            ) * (c.mean_len - a.mean_len)
            if cross <= 1e-12 * max(1.0, abs(a.second_moment)):
                hull.pop()  # middle point is on or above the chord
            else:
                break
        hull.append(item)
    return hull


def _paoi_from_moments(q: float, m: CodeMoments) -> float:
    # Local copy of the closed form to avoid a circular import with analysis.
    z = 1.0 / q
    return (m.second_moment - m.mean_len) / (2.0 * (z - m.mean_len)) + m.mean_len + z


def age_optimal_code(
    pmf: SourcePMF, arrival: ArrivalSpec, max_len: int | None = None
) -> Codebook:
    """The boundary code minimizing peak age at arrival rate q, canonically assigned.

    Only queue-stable codes (E[L] < 1/q) compete; ties go to the smaller
    E[L], then to hull order.
    """
    lengths, _ = age_optimal_lengths(pmf, arrival, max_len)
    return canonical_assign(pmf, lengths)


def age_optimal_lengths(
    pmf: SourcePMF, arrival: ArrivalSpec, max_len: int | None = None
) -> tuple[list[int], CodeMoments]:
    """Like `age_optimal_code` but returns the raw lengths and their moments."""
    hull = boundary_codes(pmf, max_len)
    capacity = 1.0 / arrival.q
    stable = [(lengths, m) for lengths, m in hull if m.mean_len < capacity]
    if not stable:
        raise StabilityError(
            f"no stable code: min achievable E[L] = {hull[0][1].mean_len!r} "
            f">= 1/q = {capacity!r}",
            mean_service=hull[0][1].mean_len,
            capacity=capacity,
        )
    return min(
        stable,
        key=lambda lm: (_paoi_from_moments(arrival.q, lm[1]), lm[1].mean_len),
    )


def complete_length_multisets(n: int, max_len: int):
    """Yield every nondecreasing length multiset with Kraft sum exactly 1."""
    total = 1 << max_len

    def rec(prefix, remaining, min_len, left):
        if left == 0:
            if remaining == 0:
                yield list(prefix)
            return
        for l in range(min_len, max_len + 1):
            unit = 1 << (max_len - l)
            rest = remaining - unit
            # Later symbols use lengths >= l, so their units are <= unit and >= 1.
            if rest < left - 1 or rest > (left - 1) * unit:
                continue
            prefix.append(l)
            yield from rec(prefix, rest, l, left - 1)
            prefix.pop()

    yield from rec([], total, 1, n)


def brute_force_optimal_lengths(
    pmf: SourcePMF,
    *,
    weights: PenaltyWeights | None = None,
    q: float | None = None,
    max_len: int | None = None,
) -> list[int]:
    """Exhaustive oracle: best complete code under a penalty or peak-age objective.

    Enumerates every complete length multiset, assigns shorter lengths to more
    probable symbols, and returns the objective minimizer.  Guarded to small
    instances; this exists to check the fast solvers, not to be fast.
    """
    n = len(pmf)
    if max_len is None:
        max_len = n - 1
    if (weights is None) == (q is None):
        raise ValueError("pass exactly one of weights= or q=")
    if n > 8 or max_len > 8:
        raise OracleSizeError(f"refusing brute force at n={n}, max_len={max_len}")
    _check_feasible(n, max_len)

    best = None
    best_obj = math.inf
    for multiset in complete_length_multisets(n, max_len):
        lengths = _assign_multiset(pmf, multiset)
        m = moments(pmf, lengths)
        if weights is not None:
            obj = weights.alpha * m.mean_len + weights.beta * m.second_moment
        else:
            if m.mean_len >= 1.0 / q:
                continue
            obj = _paoi_from_moments(q, m)
        if obj < best_obj:
            best_obj = obj
            best = lengths
    if best is None:
        raise StabilityError(f"no stable code at q = {q!r}", capacity=1.0 / q)
    return best


# --- codebook text format ------------------------------------------------

def format_codebook(codebook: Codebook, headers: dict[str, str] | None = None) -> str:
    """Serialize to the codebook text format: `# key value` headers, then
    one `<identifier> <codeword-bits>` line per symbol."""
    lines = [f"# {k} {v}" for k, v in (headers or {}).items()]
    lines += [f"{s} {w}" for s, w in zip(codebook.symbols, codebook.codewords)]
    return "\n".join(lines) + "\n"


def parse_codebook(text: str) -> tuple[Codebook, dict[str, str]]:
    """Parse the codebook text format; returns the code and its header map."""
    headers: dict[str, str] = {}
    symbols, words = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].strip().split(None, 1)
            if len(parts) == 2:
                headers[parts[0]] = parts[1]
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected '<identifier> <codeword>', got {raw!r}")
        symbols.append(parts[0])
        words.append(parts[1])
    try:
        return Codebook(tuple(symbols), tuple(words)), headers
    except (InfeasibleLengthsError, AlignmentError) as exc:
        raise FormatError(f"invalid codebook: {exc}") from exc
