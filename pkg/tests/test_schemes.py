import random

import pytest

from agecode import (
    ArrivalSpec,
    Codebook,
    DegenerateLoadError,
    FormatError,
    InfeasibleLengthsError,
    NULL_SYMBOL,
    SchemeKind,
    SchemeSpec,
    SourcePMF,
    StabilityError,
    augmented_pmf,
    build_adaptive,
    build_ideal,
    build_naive,
    build_predictive,
    build_scheme,
    format_scheme,
    kraft_sum,
    parse_scheme,
    uniform_pmf,
    zipf_pmf,
)
from tests.test_coding import DYADIC, random_pmf


def test_ideal_uses_age_optimal_code():
    spec = build_ideal(DYADIC, ArrivalSpec(0.3))
    assert spec.kind == SchemeKind.IDEAL
    assert spec.message_codebook.entries == {"A": "0", "B": "10", "C": "110", "D": "111"}
    assert spec.null_codeword is None

    balanced = build_ideal(uniform_pmf(4), ArrivalSpec(0.25))
    assert sorted(balanced.message_codebook.codewords) == ["00", "01", "10", "11"]

    u20 = build_ideal(uniform_pmf(20), ArrivalSpec(0.15))
    assert sorted(u20.message_codebook.lengths) == [4] * 12 + [5] * 8


def test_naive_framing():
    spec = build_naive(DYADIC, ArrivalSpec(0.3))
    assert spec.kind == SchemeKind.NAIVE
    assert spec.wire_codeword("C") == "1110"  # flag + codeword, four bits on the wire
    assert spec.wire_lengths() == tuple(l + 1 for l in spec.message_codebook.lengths)


def test_naive_stability_gate():
    with pytest.raises(StabilityError):
        build_naive(uniform_pmf(4), ArrivalSpec(1 / 3))  # E[L]+1 == 1/q exactly
    spec = build_naive(uniform_pmf(4), ArrivalSpec(1 / 3), allow_unstable=True)
    assert spec.kind == SchemeKind.NAIVE
    reopt = build_naive(zipf_pmf(20, 1.0), ArrivalSpec(0.15), reoptimize=True)
    assert reopt.kind == SchemeKind.NAIVE


def test_predictive_follows_idle_share_recipe():
    spec = build_predictive(uniform_pmf(4), ArrivalSpec(0.25))
    assert spec.null_prob_used == pytest.approx(0.5, abs=1e-12)  # 1 - q E[L] = 1 - 0.5
    # the null symbol outweighs every scaled message, so it takes the 1-bit word
    assert spec.null_codeword == "0"
    assert sorted(spec.message_codebook.codewords) == ["100", "101", "110", "111"]


def test_augmented_pmf_scaling():
    aug = augmented_pmf(uniform_pmf(4), 0.5)
    assert aug.symbols[-1] == NULL_SYMBOL
    assert aug.probs == (0.125, 0.125, 0.125, 0.125, 0.5)
    with pytest.raises(InfeasibleLengthsError):
        augmented_pmf(SourcePMF(("NULL", "x"), (0.5, 0.5)), 0.4)


def test_predictive_degenerate_load():
    # q E[L] >= 1 leaves no idle share to predict
    with pytest.raises((DegenerateLoadError, StabilityError)):
        build_predictive(uniform_pmf(4), ArrivalSpec(0.6))


def test_predictive_single_bit_null_when_mostly_idle():
    for pmf in (uniform_pmf(8), zipf_pmf(8, 1.0)):
        spec = build_predictive(pmf, ArrivalSpec(0.02))
        assert spec.null_prob_used > 0.9
        assert len(spec.null_codeword) == 1  # degenerates to flag-bit framing


def test_predictive_union_is_complete_and_prefix_free():
    rng = random.Random(11)
    for _ in range(25):
        pmf = random_pmf(rng, rng.randint(2, 9))
        mean = 2.0  # rough cap; pick a q that keeps things stable
        q = rng.uniform(0.1, 0.7) / max(mean, 1.5)
        try:
            spec = build_predictive(pmf, ArrivalSpec(q))
        except (DegenerateLoadError, StabilityError):
            continue
        union = list(spec.message_codebook.codewords) + [spec.null_codeword]
        assert kraft_sum([len(w) for w in union]) == 1.0
        ordered = sorted(union)
        for a, b in zip(ordered, ordered[1:]):
            assert not b.startswith(a)


def test_adaptive_wraps_predictive():
    base = build_predictive(zipf_pmf(8, 1.0), ArrivalSpec(0.25))
    spec = build_adaptive(base)
    assert spec.kind == SchemeKind.ADAPTIVE
    assert spec.preemptible
    assert spec.message_codebook is base.message_codebook
    assert spec.null_codeword == base.null_codeword
    with pytest.raises(InfeasibleLengthsError):
        build_adaptive(build_ideal(uniform_pmf(4), ArrivalSpec(0.25)))


def test_spec_invariants():
    book = Codebook(("A", "B"), ("0", "1"))
    with pytest.raises(InfeasibleLengthsError):
        SchemeSpec(SchemeKind.IDEAL, book, null_codeword="10")
    with pytest.raises(InfeasibleLengthsError):
        SchemeSpec(SchemeKind.PREDICTIVE, book)  # null required
    incomplete = Codebook(("A", "B"), ("0", "10"))
    with pytest.raises(InfeasibleLengthsError):
        SchemeSpec(SchemeKind.PREDICTIVE, incomplete, null_codeword="110")
    with pytest.raises(InfeasibleLengthsError):
        SchemeSpec(SchemeKind.PREDICTIVE, incomplete, null_codeword="11", preemptible=True)
    table2 = SchemeSpec(
        SchemeKind.PREDICTIVE,
        Codebook(("A", "B", "C", "D"), ("0", "100", "110", "111")),
        null_codeword="101",
    )
    assert table2.null_codeword == "101"
    with pytest.raises(DegenerateLoadError):
        SchemeSpec(
            SchemeKind.PREDICTIVE,
            Codebook(("A", "B", "C", "D"), ("0", "100", "110", "111")),
            null_codeword="101",
            null_prob_used=1.5,
        )


def test_scheme_serialization_roundtrip():
    pmf = zipf_pmf(8, 1.0)
    for kind in SchemeKind:
        spec = build_scheme(kind, pmf, ArrivalSpec(0.25))
        text = format_scheme(spec, pmf)
        back, headers = parse_scheme(text)
        assert back == spec
        assert headers["scheme"] == kind.value
        if kind in (SchemeKind.PREDICTIVE, SchemeKind.ADAPTIVE):
            assert NULL_SYMBOL in text
            assert float(headers["p_null"]) == spec.null_prob_used


def test_parse_scheme_errors():
    with pytest.raises(FormatError):
        parse_scheme("# scheme nosuch\nA 0\nB 1\n")
    with pytest.raises(FormatError):
        parse_scheme("# scheme ideal\nA 0\nNULL 1\n")  # ideal must not carry a null row
