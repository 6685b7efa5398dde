import math
import random
from fractions import Fraction

import pytest

from agecode import (
    AlignmentError,
    ArrivalSpec,
    CodeMoments,
    FormatError,
    InfeasibleLengthsError,
    OracleSizeError,
    PenaltyWeights,
    SourcePMF,
    StabilityError,
    age_optimal_code,
    age_optimal_lengths,
    boundary_codes,
    brute_force_optimal_lengths,
    canonical_assign,
    entropy,
    format_codebook,
    huffman_lengths,
    kraft_sum,
    min_linear_penalty_lengths,
    moments,
    parse_codebook,
    uniform_pmf,
)

DYADIC = SourcePMF(("A", "B", "C", "D"), (0.5, 0.25, 0.125, 0.125))


def random_pmf(rng, n):
    while True:
        w = [rng.random() + 1e-3 for _ in range(n)]
        total = sum(w)
        p = [x / total for x in w]
        if min(p) > 1e-9:
            return SourcePMF(tuple(f"s{i}" for i in range(n)), tuple(p))


# --- independent oracles (kept deliberately separate from the library code) --

def iter_complete_multisets(n, max_len):
    """Every nondecreasing length multiset with an exact Kraft sum of 1."""
    results = []

    def rec(prefix, remaining, lo):
        left = n - len(prefix)
        if left == 0:
            if remaining == 0:
                results.append(tuple(prefix))
            return
        for l in range(lo, max_len + 1):
            unit = Fraction(1, 2 ** l)
            rest = remaining - unit
            # the remaining symbols use units within [2^-max_len, unit]
            if rest < (left - 1) * Fraction(1, 2 ** max_len) or rest > (left - 1) * unit:
                continue
            prefix.append(l)
            rec(prefix, rest, l)
            prefix.pop()

    rec([], Fraction(1), 1)
    return results


def oracle_assign(pmf, multiset):
    order = sorted(range(len(pmf)), key=lambda i: (-pmf.probs[i], i))
    lengths = [0] * len(pmf)
    for rank, l in enumerate(sorted(multiset)):
        lengths[order[rank]] = l
    return lengths


def oracle_penalty(pmf, lengths, alpha, beta):
    return math.fsum(p * (alpha * l + beta * l * l) for p, l in zip(pmf.probs, lengths))


def oracle_hull(pmf, max_len):
    """Brute-force lower-left hull over all complete multisets."""
    pts = []
    for ms in iter_complete_multisets(len(pmf), max_len):
        lengths = oracle_assign(pmf, ms)
        mean = math.fsum(p * l for p, l in zip(pmf.probs, lengths))
        second = math.fsum(p * l * l for p, l in zip(pmf.probs, lengths))
        pts.append((mean, second, ms))
    pts.sort()
    pareto = []
    best = math.inf
    for mean, second, ms in pts:
        if second < best - 1e-12:
            pareto.append((mean, second, ms))
            best = second
    hull = []
    for p in pareto:
        while len(hull) >= 2:
            (ax, ay, _), (bx, by, _) = hull[-2], hull[-1]
            if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) <= 1e-12:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


# --- kraft / moments ---------------------------------------------------------

def test_kraft_sum_values():
    assert kraft_sum([1, 2, 3, 3]) == 1.0
    assert kraft_sum([1, 1]) == 1.0
    assert kraft_sum([2, 2, 2]) == 0.75
    with pytest.raises(InfeasibleLengthsError):
        kraft_sum([0, 1])


def test_moments_values():
    assert moments(uniform_pmf(4), [2, 2, 2, 2]) == CodeMoments(2.0, 4.0)
    assert moments(DYADIC, [1, 2, 3, 3]) == CodeMoments(1.75, 3.75)
    u20 = moments(uniform_pmf(20), [4] * 12 + [5] * 8)
    assert u20.mean_len == pytest.approx(4.4, abs=1e-12)
    assert u20.second_moment == pytest.approx(19.6, abs=1e-12)
    with pytest.raises(AlignmentError):
        moments(uniform_pmf(4), [2, 2, 2])


def test_code_moments_invariants():
    with pytest.raises(InfeasibleLengthsError):
        CodeMoments(0.8, 2.0)  # mean below one bit
    with pytest.raises(InfeasibleLengthsError):
        CodeMoments(2.0, 3.0)  # second moment below mean^2


# --- package-merge -----------------------------------------------------------

def test_penalty_solver_textbook_cases():
    assert sorted(min_linear_penalty_lengths(DYADIC, PenaltyWeights(1, 0), 4)) == [1, 2, 3, 3]
    assert min_linear_penalty_lengths(uniform_pmf(4), PenaltyWeights(1, 0)) == [2, 2, 2, 2]
    assert min_linear_penalty_lengths(uniform_pmf(4), PenaltyWeights(0, 1)) == [2, 2, 2, 2]


def test_penalty_solver_matches_bruteforce_mean_length():
    rng = random.Random(101)
    for _ in range(100):
        n = rng.randint(2, 8)
        pmf = random_pmf(rng, n)
        fast = huffman_lengths(pmf)
        slow = brute_force_optimal_lengths(pmf, weights=PenaltyWeights(1, 0))
        assert moments(pmf, fast).mean_len == pytest.approx(
            moments(pmf, slow).mean_len, abs=1e-12
        )


def test_penalty_solver_matches_bruteforce_general_weights():
    rng = random.Random(202)
    for _ in range(100):
        n = rng.randint(2, 6)
        max_len = rng.randint(math.ceil(math.log2(n)), 6)
        pmf = random_pmf(rng, n)
        alpha, beta = rng.random(), rng.random()
        w = PenaltyWeights(alpha, beta)
        fast = min_linear_penalty_lengths(pmf, w, max_len)
        slow = brute_force_optimal_lengths(pmf, weights=w, max_len=max_len)
        assert oracle_penalty(pmf, fast, alpha, beta) == pytest.approx(
            oracle_penalty(pmf, slow, alpha, beta), abs=1e-12
        )


def test_penalty_solver_scale_invariance():
    rng = random.Random(303)
    for _ in range(30):
        pmf = random_pmf(rng, rng.randint(2, 7))
        alpha, beta = rng.random(), rng.random()
        c = rng.uniform(1e-3, 1e3)
        base = min_linear_penalty_lengths(pmf, PenaltyWeights(alpha, beta))
        scaled = min_linear_penalty_lengths(pmf, PenaltyWeights(c * alpha, c * beta))
        assert sorted(base) == sorted(scaled)


def test_penalty_solver_respects_max_len():
    pmf = SourcePMF(("a", "b", "c", "d"), (0.97, 0.01, 0.01, 0.01))
    lengths = min_linear_penalty_lengths(pmf, PenaltyWeights(1, 0), max_len=2)
    assert lengths == [2, 2, 2, 2]
    with pytest.raises(InfeasibleLengthsError):
        min_linear_penalty_lengths(pmf, PenaltyWeights(1, 0), max_len=1)


def test_emitted_codes_are_complete_and_above_entropy():
    rng = random.Random(404)
    for _ in range(50):
        pmf = random_pmf(rng, rng.randint(2, 9))
        lengths = min_linear_penalty_lengths(pmf, PenaltyWeights(rng.random(), rng.random()))
        assert kraft_sum(lengths) == 1.0
        assert moments(pmf, lengths).mean_len >= entropy(pmf) - 1e-9


# --- canonical assignment ----------------------------------------------------

def test_canonical_four_symbol_layout():
    book = canonical_assign(DYADIC, [1, 2, 3, 3])
    assert book.entries == {"A": "0", "B": "10", "C": "110", "D": "111"}


def test_canonical_mid_order_null_layout():
    pmf = SourcePMF(("A", "B", "NULL", "C", "D"), (0.4, 0.15, 0.15, 0.15, 0.15))
    book = canonical_assign(pmf, [1, 3, 3, 3, 3])
    assert book.entries == {"A": "0", "B": "100", "NULL": "101", "C": "110", "D": "111"}


def test_canonical_two_symbols():
    book = canonical_assign(uniform_pmf(2), [1, 1])
    assert book.codewords == ("0", "1")


def test_canonical_rejects_kraft_violation():
    with pytest.raises(InfeasibleLengthsError):
        canonical_assign(uniform_pmf(4), [1, 1, 2, 2])


def test_canonical_output_is_prefix_free():
    rng = random.Random(505)
    for _ in range(40):
        pmf = random_pmf(rng, rng.randint(2, 9))
        book = canonical_assign(pmf, huffman_lengths(pmf))
        words = sorted(book.codewords)
        for a, b in zip(words, words[1:]):
            assert not b.startswith(a)


# --- hull --------------------------------------------------------------------

def test_hull_single_point_for_uniform_four():
    hull = boundary_codes(uniform_pmf(4))
    assert len(hull) == 1
    assert hull[0][1] == CodeMoments(2.0, 4.0)


def test_hull_contains_dyadic_point():
    hull = boundary_codes(DYADIC, max_len=4)
    assert (1.75, 3.75) in [(m.mean_len, m.second_moment) for _, m in hull]
    expected = oracle_hull(DYADIC, 4)
    assert len(hull) == len(expected)


def test_hull_uniform_twenty():
    hull = boundary_codes(uniform_pmf(20), max_len=6)
    got = [(m.mean_len, m.second_moment) for _, m in hull]
    expected = [(m, s) for m, s, _ in oracle_hull(uniform_pmf(20), 6)]
    assert len(got) == len(expected)
    for (gm, gs), (em, es) in zip(got, expected):
        assert gm == pytest.approx(em, abs=1e-12)
        assert gs == pytest.approx(es, abs=1e-12)
    assert got[0] == (pytest.approx(4.4, abs=1e-12), pytest.approx(19.6, abs=1e-12))


def test_hull_matches_bruteforce_on_random_sources():
    rng = random.Random(606)
    for _ in range(40):
        n = rng.randint(2, 7)
        max_len = rng.randint(math.ceil(math.log2(n)), 7)
        pmf = random_pmf(rng, n)
        got = boundary_codes(pmf, max_len)
        expected = oracle_hull(pmf, max_len)
        assert len(got) == len(expected), pmf.probs
        for (_, m), (em, es, _) in zip(got, expected):
            assert m.mean_len == pytest.approx(em, abs=1e-12)
            assert m.second_moment == pytest.approx(es, abs=1e-12)


def test_hull_is_a_convex_chain():
    rng = random.Random(707)
    for _ in range(40):
        pmf = random_pmf(rng, rng.randint(2, 10))
        hull = boundary_codes(pmf)
        ms = [m for _, m in hull]
        prev_slope = None
        for a, b in zip(ms, ms[1:]):
            assert b.mean_len > a.mean_len
            assert b.second_moment < a.second_moment
            slope = (b.second_moment - a.second_moment) / (b.mean_len - a.mean_len)
            if prev_slope is not None:
                assert slope > prev_slope  # flattening: each step less steep
            prev_slope = slope


# --- age-optimal code --------------------------------------------------------

def test_age_optimal_uniform_four():
    book = age_optimal_code(uniform_pmf(4), ArrivalSpec(0.25))
    assert sorted(book.lengths) == [2, 2, 2, 2]


def test_age_optimal_unstable_reports_min_mean():
    with pytest.raises(StabilityError) as exc:
        age_optimal_code(uniform_pmf(4), ArrivalSpec(0.6))
    assert exc.value.mean_service == 2.0
    assert exc.value.capacity == pytest.approx(1 / 0.6)


def test_age_optimal_agrees_with_bruteforce():
    rng = random.Random(808)
    for _ in range(30):
        n = rng.randint(2, 7)
        pmf = random_pmf(rng, n)
        mean = moments(pmf, huffman_lengths(pmf)).mean_len
        q = rng.uniform(0.3, 0.95) / mean
        lengths, m = age_optimal_lengths(pmf, ArrivalSpec(q))
        best = brute_force_optimal_lengths(pmf, q=q)
        bm = moments(pmf, best)

        def paoi(mm):
            return (mm.second_moment - mm.mean_len) / (2 * (1 / q - mm.mean_len)) + mm.mean_len + 1 / q

        assert paoi(m) == pytest.approx(paoi(bm), rel=1e-12)


def test_bruteforce_guard():
    with pytest.raises(OracleSizeError):
        brute_force_optimal_lengths(uniform_pmf(9), weights=PenaltyWeights(1, 0))
    with pytest.raises(OracleSizeError):
        brute_force_optimal_lengths(uniform_pmf(4), weights=PenaltyWeights(1, 0), max_len=9)


# --- text format ---------------------------------------------------------------

def test_codebook_roundtrip():
    book = canonical_assign(DYADIC, [1, 2, 3, 3])
    text = format_codebook(book, {"E[L]": "1.75", "E[L2]": "3.75"})
    back, headers = parse_codebook(text)
    assert back.entries == book.entries
    assert headers == {"E[L]": "1.75", "E[L2]": "3.75"}


def test_parse_codebook_rejects_prefix_violation():
    with pytest.raises(FormatError):
        parse_codebook("A 0\nB 01\n")
