"""Empty-buffer encoding schemes.

A `SchemeSpec` tells the streaming encoder what to put on the wire: the
message codebook, how idle slots are filled, and whether an in-progress
null codeword may be preempted.

* ideal      — out-of-band idle marker; idle slots carry no bit.
* naive      — a lone 0 bit per idle slot; every message is sent as
               1 + codeword.
* predictive — the null symbol is a regular codeword, sized by predicting
               the buffer idle share from the load of the ideal system.
* adaptive   — predictive, plus preemption: a null codeword in flight is
               abandoned for a fresh arrival whose codeword extends the
               already-sent bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .coding import (
    Codebook,
    CodeMoments,
    _kraft_units,
    _paoi_from_moments,
    age_optimal_code,
    age_optimal_lengths,
    boundary_codes,
    canonical_assign,
    check_prefix_free,
    format_codebook,
    moments,
    parse_codebook,
)
from .errors import DegenerateLoadError, FormatError, InfeasibleLengthsError, StabilityError
from .source import NULL_SYMBOL, ArrivalSpec, SourcePMF


class SchemeKind(str, enum.Enum):
    IDEAL = "ideal"
    NAIVE = "naive"
    PREDICTIVE = "predictive"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class SchemeSpec:
    """A message codebook plus the framing rules for empty-buffer slots."""

    kind: SchemeKind
    message_codebook: Codebook
    null_codeword: str | None = None
    null_prob_used: float | None = None
    preemptible: bool = False

    def __post_init__(self):
        kind = SchemeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (SchemeKind.IDEAL, SchemeKind.NAIVE):
            if self.null_codeword is not None:
                raise InfeasibleLengthsError(f"{kind.value} scheme must not carry a null codeword")
        else:
            if not self.null_codeword:
                raise InfeasibleLengthsError(f"{kind.value} scheme requires a null codeword")
            union = list(self.message_codebook.codewords) + [self.null_codeword]
            check_prefix_free(union)
            max_len = max(len(w) for w in union)
            if _kraft_units([len(w) for w in union], max_len) != 1 << max_len:
                raise InfeasibleLengthsError(
                    "message codewords plus the null codeword must form a complete code"
                )
        if self.null_prob_used is not None and not (0.0 < self.null_prob_used < 1.0):
            raise DegenerateLoadError(
                f"null symbol probability must be in (0, 1), got {self.null_prob_used!r}"
            )
        if self.preemptible != (kind == SchemeKind.ADAPTIVE):
            raise InfeasibleLengthsError("preemption is allowed exactly for the adaptive scheme")

    def wire_codeword(self, symbol: str) -> str:
        """Bits actually transmitted for one message symbol."""
        word = self.message_codebook.codeword(symbol)
        return "1" + word if self.kind == SchemeKind.NAIVE else word

    def wire_lengths(self) -> tuple[int, ...]:
        pad = 1 if self.kind == SchemeKind.NAIVE else 0
        return tuple(l + pad for l in self.message_codebook.lengths)

    def mean_wire_len(self, pmf: SourcePMF | None) -> float:
        """Mean on-wire service time of a message, in slots.

        Falls back to the unweighted mean when no source is available
        (scripted runs).
        """
        lengths = self.wire_lengths()
        if pmf is None:
            return sum(lengths) / len(lengths)
        if tuple(pmf.symbols) != tuple(self.message_codebook.symbols):
            raise InfeasibleLengthsError("scheme codebook does not match the source alphabet")
        return math.fsum(p * l for p, l in zip(pmf.probs, lengths))


def build_ideal(pmf: SourcePMF, arrival: ArrivalSpec, max_len: int | None = None) -> SchemeSpec:
    """Age-optimal code with out-of-band empty-buffer signaling."""
    return SchemeSpec(SchemeKind.IDEAL, age_optimal_code(pmf, arrival, max_len))


def build_naive(
    pmf: SourcePMF,
    arrival: ArrivalSpec,
    max_len: int | None = None,
    *,
    reoptimize: bool = False,
    allow_unstable: bool = False,
) -> SchemeSpec:
    """Flag-bit scheme: 0 per idle slot, 1 + codeword per message.

    By default the message code is the same age-optimal code the ideal
    scheme would use; `reoptimize=True` instead picks the boundary code
    minimizing the flag-bit peak age (with the +1 bit folded into the
    moments).  `allow_unstable=True` skips the stability gate so sweeps can
    drive the scheme into its divergent region.
    """
    capacity = 1.0 / arrival.q
    if reoptimize:
        hull = boundary_codes(pmf, max_len)
        stable = [(l, m) for l, m in hull if m.mean_len + 1.0 < capacity]
        if not stable:
            raise StabilityError(
                f"flag-bit scheme unstable for every boundary code: min E[L] + 1 = "
                f"{hull[0][1].mean_len + 1.0!r} >= 1/q = {capacity!r}",
                mean_service=hull[0][1].mean_len + 1.0,
                capacity=capacity,
            )
        lengths, _ = min(
            stable,
            key=lambda lm: (
                _paoi_from_moments(
                    arrival.q,
                    CodeMoments(
                        lm[1].mean_len + 1.0,
                        lm[1].second_moment + 2.0 * lm[1].mean_len + 1.0,
                    ),
                ),
                lm[1].mean_len,
            ),
        )
        codebook = canonical_assign(pmf, lengths)
    else:
        codebook = age_optimal_code(pmf, arrival, max_len)
        if not allow_unstable:
            m = moments(pmf, codebook.lengths)
            if m.mean_len + 1.0 >= capacity:
                raise StabilityError(
                    f"flag-bit scheme unstable: E[L] + 1 = {m.mean_len + 1.0!r} "
                    f">= 1/q = {capacity!r}",
                    mean_service=m.mean_len + 1.0,
                    capacity=capacity,
                )
    return SchemeSpec(SchemeKind.NAIVE, codebook)


def augmented_pmf(pmf: SourcePMF, null_prob: float) -> SourcePMF:
    """Scale every symbol by (1 - p_null) and append the null symbol at p_null."""
    if NULL_SYMBOL in pmf.symbols:
        raise InfeasibleLengthsError(f"source already uses the reserved symbol {NULL_SYMBOL!r}")
    return SourcePMF(
        pmf.symbols + (NULL_SYMBOL,),
        tuple(p * (1.0 - null_prob) for p in pmf.probs) + (null_prob,),
    )


def build_predictive(
    pmf: SourcePMF, arrival: ArrivalSpec, max_len: int | None = None
) -> SchemeSpec:
    """Size the null codeword from the predicted buffer idle share.

    Steps: take the age-optimal code under free signaling; predict the idle
    fraction as p_null = 1 - q E[L]; fold the null symbol into the source at
    that probability; rerun the age-optimal construction on the augmented
    source at the same q.  Peak-age ties between augmented boundary codes
    break toward the shorter null codeword, then the smaller E[L].
    """
    _, base_moments = age_optimal_lengths(pmf, arrival, max_len)
    null_prob = 1.0 - arrival.q * base_moments.mean_len
    if not (0.0 < null_prob < 1.0):
        raise DegenerateLoadError(
            f"predicted idle share {null_prob!r} outside (0, 1); load q*E[L] = "
            f"{arrival.q * base_moments.mean_len!r}"
        )
    aug = augmented_pmf(pmf, null_prob)
    aug_max_len = None
    if max_len is not None:
        aug_max_len = max(max_len, math.ceil(math.log2(len(aug))))

    hull = boundary_codes(aug, aug_max_len)
    capacity = 1.0 / arrival.q
    stable = [(l, m) for l, m in hull if m.mean_len < capacity]
    if not stable:
        raise StabilityError(
            f"no stable code for the augmented source: min E[L] = {hull[0][1].mean_len!r} "
            f">= 1/q = {capacity!r}",
            mean_service=hull[0][1].mean_len,
            capacity=capacity,
        )
    null_index = len(aug) - 1
    best_paoi = min(_paoi_from_moments(arrival.q, m) for _, m in stable)
    lengths, _ = min(
        stable,
        key=lambda lm: (
            # ranked tie group: anything within float noise of the best
            (_paoi_from_moments(arrival.q, lm[1]) - best_paoi) > 1e-12 * best_paoi,
            lm[0][null_index],
            lm[1].mean_len,
        ),
    )
    union = canonical_assign(aug, lengths)
    return SchemeSpec(
        SchemeKind.PREDICTIVE,
        Codebook(pmf.symbols, union.codewords[:null_index]),
        null_codeword=union.codewords[null_index],
        null_prob_used=null_prob,
    )


def build_adaptive(base: SchemeSpec) -> SchemeSpec:
    """Allow the simulator to preempt an in-flight null codeword."""
    if base.null_codeword is None:
        raise InfeasibleLengthsError("adaptive scheme needs a base with a null codeword")
    return replace(base, kind=SchemeKind.ADAPTIVE, preemptible=True)


def build_scheme(
    kind: SchemeKind | str,
    pmf: SourcePMF,
    arrival: ArrivalSpec,
    max_len: int | None = None,
    *,
    allow_unstable: bool = False,
    naive_reoptimize: bool = False,
) -> SchemeSpec:
    """Construct any of the four schemes by name."""
    kind = SchemeKind(kind)
    if kind == SchemeKind.IDEAL:
        return build_ideal(pmf, arrival, max_len)
    if kind == SchemeKind.NAIVE:
        return build_naive(pmf, arrival, max_len, reoptimize=naive_reoptimize,
                           allow_unstable=allow_unstable)
    if kind == SchemeKind.PREDICTIVE:
        return build_predictive(pmf, arrival, max_len)
    return build_adaptive(build_predictive(pmf, arrival, max_len))


# --- scheme text format ----------------------------------------------------

def format_scheme(scheme: SchemeSpec, pmf: SourcePMF | None = None) -> str:
    """Codebook text format with headers naming the scheme kind and p_null."""
    headers: dict[str, str] = {"scheme": scheme.kind.value}
    if scheme.null_prob_used is not None:
        headers["p_null"] = repr(scheme.null_prob_used)
    if pmf is not None:
        m = moments(pmf, scheme.message_codebook.lengths)
        headers["E[L]"] = repr(m.mean_len)
        headers["E[L2]"] = repr(m.second_moment)
    book = scheme.message_codebook
    if scheme.null_codeword is not None:
        book = Codebook(book.symbols + (NULL_SYMBOL,), book.codewords + (scheme.null_codeword,))
    return format_codebook(book, headers)


def parse_scheme(text: str) -> tuple[SchemeSpec, dict[str, str]]:
    """Parse a scheme file back into a SchemeSpec plus its raw headers."""
    book, headers = parse_codebook(text)
    kind_name = headers.get("scheme", SchemeKind.IDEAL.value)
    try:
        kind = SchemeKind(kind_name)
    except ValueError:
        raise FormatError(f"unknown scheme kind {kind_name!r}") from None
    null_codeword = None
    symbols, words = list(book.symbols), list(book.codewords)
    if NULL_SYMBOL in symbols:
        i = symbols.index(NULL_SYMBOL)
        null_codeword = words.pop(i)
        symbols.pop(i)
    if kind in (SchemeKind.IDEAL, SchemeKind.NAIVE) and null_codeword is not None:
        raise FormatError(f"{kind.value} scheme file must not contain a {NULL_SYMBOL} row")
    null_prob = None
    if "p_null" in headers:
        try:
            null_prob = float(headers["p_null"])
        except ValueError:
            raise FormatError(f"bad p_null header: {headers['p_null']!r}") from None
    try:
        spec = SchemeSpec(
            kind,
            Codebook(tuple(symbols), tuple(words)),
            null_codeword=null_codeword,
            null_prob_used=null_prob,
            preemptible=kind == SchemeKind.ADAPTIVE,
        )
    except (InfeasibleLengthsError, DegenerateLoadError) as exc:
        raise FormatError(f"invalid scheme file: {exc}") from exc
    return spec, headers
