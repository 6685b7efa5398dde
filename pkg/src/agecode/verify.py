"""Self-check suite behind `agecode verify`.

Runs the oracle cross-checks that define "working": the penalty solver
against brute-force enumeration, the hull chain invariants, the frozen
scripted traces, closed-form identities, simulator convergence to the
closed forms, and decoder inversion.  `quick` finishes in seconds; `full`
adds the million-slot convergence and divergence runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis, coding, scenarios
from .coding import CodeMoments, PenaltyWeights
from .errors import AgecodeError
from .schemes import SchemeKind, build_scheme
from .simulator import SimConfig, decode_stream, run, run_trace
from .source import ArrivalSpec, SourcePMF, entropy, uniform_pmf, zipf_pmf

# Frozen fixture where the hull has two vertices and the age-optimal code
# strictly beats the minimum-E[L] code (checked against brute force in the
# test suite).
DOMINANCE_PMF = SourcePMF(("A", "B", "C", "D", "E"), (0.336, 0.33, 0.229, 0.091, 0.014))
DOMINANCE_Q = 0.25

# Frozen exact stability boundary: E[L] = 1.75 and q = 1/1.75 round-trips
# to exactly 1/q = 1.75.  Seed 18 leaves a queue well past the divergence
# threshold after a million slots.
BOUNDARY_PMF = SourcePMF(("A", "B", "C", "D"), (0.5, 0.25, 0.125, 0.125))
BOUNDARY_LENGTHS = (1, 2, 3, 3)
BOUNDARY_Q = 1 / 1.75
BOUNDARY_SEED = 18


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _random_pmf(rng: np.random.Generator, n: int) -> SourcePMF:
    while True:
        w = rng.random(n) + 1e-3
        p = w / w.sum()
        if p.min() > 1e-9:
            return SourcePMF(tuple(f"s{i}" for i in range(n)), tuple(p.tolist()))


def check_penalty_solver(trials: int) -> CheckResult:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        max_len = int(rng.integers(math.ceil(math.log2(n)), 7))
        pmf = _random_pmf(rng, n)
        alpha, beta = float(rng.random()), float(rng.random())
        if alpha + beta == 0:
            alpha = 1.0
        w = PenaltyWeights(alpha, beta)
        fast = coding.min_linear_penalty_lengths(pmf, w, max_len)
        slow = coding.brute_force_optimal_lengths(pmf, weights=w, max_len=max_len)

        def penalty(lengths):
            return math.fsum(p * (alpha * l + beta * l * l) for p, l in zip(pmf.probs, lengths))

        gap = abs(penalty(fast) - penalty(slow))
        worst = max(worst, gap)
        if gap > 1e-12:
            return CheckResult("penalty-solver-vs-bruteforce", False,
                               f"penalty gap {gap!r} on {pmf.probs}")
        hl = coding.huffman_lengths(pmf, max_len)
        bf = coding.brute_force_optimal_lengths(
            pmf, weights=PenaltyWeights(1.0, 0.0), max_len=max_len
        )
        m1, m2 = coding.moments(pmf, hl), coding.moments(pmf, bf)
        if abs(m1.mean_len - m2.mean_len) > 1e-12:
            return CheckResult("penalty-solver-vs-bruteforce", False,
                               f"Huffman E[L] gap on {pmf.probs}")
    return CheckResult("penalty-solver-vs-bruteforce", True,
                       f"{trials} instances, worst penalty gap {worst:.2e}")


def check_hull_chain(trials: int) -> CheckResult:
    rng = np.random.default_rng(7)
    for _ in range(trials):
        n = int(rng.integers(2, 10))
        pmf = _random_pmf(rng, n)
        hull = coding.boundary_codes(pmf)
        h = entropy(pmf)
        prev = None
        prev_slope = None
        for lengths, m in hull:
            if m.mean_len < h - 1e-9:
                return CheckResult("hull-chain", False, "code beats the entropy bound")
            book = coding.canonical_assign(pmf, lengths)
            if abs(coding.kraft_sum(book.lengths) - 1.0) > 1e-12:
                return CheckResult("hull-chain", False, "hull code not complete")
            if prev is not None:
                if not (m.mean_len > prev.mean_len and m.second_moment < prev.second_moment):
                    return CheckResult("hull-chain", False, "chain not monotone")
                slope = (m.second_moment - prev.second_moment) / (m.mean_len - prev.mean_len)
                if prev_slope is not None and slope <= prev_slope:
                    return CheckResult("hull-chain", False, "chain not convex")
                prev_slope = slope
            prev = m
    return CheckResult("hull-chain", True, f"{trials} random sources")


def check_golden_traces() -> CheckResult:
    for name, config_fn, expected in scenarios.ALL_SCENARIOS:
        got = run_trace(config_fn()).to_csv()
        if got != expected:
            return CheckResult("golden-traces", False, f"{name} trace drifted")
    return CheckResult("golden-traces", True, "3 scripted traces byte-exact")


def check_closed_forms() -> CheckResult:
    m = CodeMoments(2.0, 4.0)
    cases = [
        (analysis.paoi_ideal(0.25, m), 6.5),
        (analysis.paoi_naive(0.2, m), 9.5),
        (analysis.optimal_arrival_rate(m).q_star, 1 / 3),
        (analysis.optimal_arrival_rate(m).paoi, 6.0),
    ]
    for got, want in cases:
        if abs(got - want) > 1e-12:
            return CheckResult("closed-forms", False, f"{got!r} != {want!r}")
    # flag-bit peak age is the plain formula shifted to the moments of L + 1
    for q in (0.05, 0.1, 0.2, 0.3):
        lhs = analysis.paoi_naive(q, m)
        rhs = analysis.paoi_ideal(q, CodeMoments(m.mean_len + 1, m.second_moment + 2 * m.mean_len + 1))
        if abs(lhs - rhs) > 1e-12:
            return CheckResult("closed-forms", False, "L+1 identity broken")
    return CheckResult("closed-forms", True, "hand values and identities hold")


def check_qstar_grid(trials: int, step: float) -> CheckResult:
    rng = np.random.default_rng(11)
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        pmf = _random_pmf(rng, n)
        m = coding.moments(pmf, coding.huffman_lengths(pmf))
        opt = analysis.optimal_arrival_rate(m)
        hi = min(1.0, 1.0 / m.mean_len)
        grid = np.arange(step, hi, step)
        z = 1.0 / grid
        paoi = (m.second_moment - m.mean_len) / (2.0 * (z - m.mean_len)) + m.mean_len + z
        q_grid = float(grid[int(np.argmin(paoi))])
        if abs(q_grid - opt.q_star) > 2 * step:
            return CheckResult("optimal-rate-grid", False,
                               f"grid argmin {q_grid!r} vs closed form {opt.q_star!r}")
        if opt.q_star < hi:
            direct = analysis.paoi_ideal(opt.q_star, m)
            if abs(direct - opt.paoi) > 1e-9:
                return CheckResult("optimal-rate-grid", False, "closed-form value mismatch")
    return CheckResult("optimal-rate-grid", True, f"{trials} sources, step {step}")


def check_hull_dominance(trials: int) -> CheckResult:
    rng = np.random.default_rng(5)
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        pmf = _random_pmf(rng, n)
        hm = coding.moments(pmf, coding.huffman_lengths(pmf))
        q = float(rng.uniform(0.2, 0.95)) / hm.mean_len
        if not (0 < q < 1):
            continue
        _, m = coding.age_optimal_lengths(pmf, ArrivalSpec(q))
        if analysis.paoi_ideal(q, m) > analysis.paoi_ideal(q, hm) + 1e-9:
            return CheckResult("hull-dominance", False, f"worse than Huffman at q={q!r}")
    _, m = coding.age_optimal_lengths(DOMINANCE_PMF, ArrivalSpec(DOMINANCE_Q))
    hm = coding.moments(DOMINANCE_PMF, coding.huffman_lengths(DOMINANCE_PMF))
    gain = analysis.paoi_ideal(DOMINANCE_Q, hm) - analysis.paoi_ideal(DOMINANCE_Q, m)
    if gain <= 1e-9:
        return CheckResult("hull-dominance", False, "no strict improvement on the fixture")
    return CheckResult("hull-dominance", True,
                       f"{trials} sources; fixture gains {gain:.4f} slots")


def _convergence_cases(full: bool):
    if full:
        sources = [("uniform-20", uniform_pmf(20)), ("zipf-20", zipf_pmf(20, 1.0))]
        qs, horizon, tol = (0.05, 0.10, 0.15), 10**6, 0.02
    else:
        sources = [("uniform-4", uniform_pmf(4))]
        qs, horizon, tol = (0.25,), 2 * 10**5, 0.03
    return sources, qs, horizon, tol


def check_convergence(kind: SchemeKind, full: bool) -> CheckResult:
    name = f"simulated-vs-analytic-{kind.value}"
    sources, qs, horizon, tol = _convergence_cases(full)
    worst = 0.0
    for label, pmf in sources:
        for q in qs:
            arrival = ArrivalSpec(q)
            scheme = build_scheme(kind, pmf, arrival)
            m = coding.moments(pmf, scheme.message_codebook.lengths)
            target = (
                analysis.paoi_ideal(q, m)
                if kind == SchemeKind.IDEAL
                else analysis.paoi_naive(q, m)
            )
            stats = run(
                SimConfig(scheme=scheme, arrival=arrival, horizon=horizon,
                          warmup=10_000, seed=1, source=pmf)
            )
            rel = abs(stats.empirical_paoi - target) / target
            worst = max(worst, rel)
            if rel > tol:
                return CheckResult(
                    name, False, f"{label} q={q}: {stats.empirical_paoi:.4f} vs {target:.4f}"
                )
    return CheckResult(name, True, f"worst relative error {worst:.3%}")


def check_idle_fraction(full: bool) -> CheckResult:
    pmf = uniform_pmf(4)
    q = 0.25
    horizon = 10**6 if full else 2 * 10**5
    arrival = ArrivalSpec(q)
    for kind, expect in ((SchemeKind.IDEAL, 1 - q * 2.0), (SchemeKind.NAIVE, 1 - q * 3.0)):
        scheme = build_scheme(kind, pmf, arrival)
        stats = run(SimConfig(scheme=scheme, arrival=arrival, horizon=horizon,
                              warmup=10_000, seed=3, source=pmf))
        if abs(stats.idle_fraction - expect) > 0.01:
            return CheckResult("idle-fraction", False,
                               f"{kind.value}: {stats.idle_fraction:.4f} vs {expect:.4f}")
    return CheckResult("idle-fraction", True, "matches 1 - load for ideal and naive")


def check_decoder_inversion(full: bool) -> CheckResult:
    horizon = 10**5 if full else 2 * 10**4
    pmf = zipf_pmf(8, 1.0)
    # q sized so the predictive null codeword is 2 bits: adaptive switches occur
    arrival = ArrivalSpec(0.25)
    switches = 0
    for kind in SchemeKind:
        scheme = build_scheme(kind, pmf, arrival)
        trace = run_trace(SimConfig(scheme=scheme, arrival=arrival, horizon=horizon,
                                    warmup=0, seed=9, source=pmf))
        decoded = decode_stream(scheme, (row[2] for row in trace.iter_slots()))
        sent = [s for _, s in trace.arrivals][: len(decoded)]
        if decoded != sent or len(decoded) != trace.stats.decoded_count:
            return CheckResult("decoder-inversion", False, f"{kind.value} stream mismatch")
        switches += trace.stats.switches
    if switches == 0:
        return CheckResult("decoder-inversion", False, "adaptive run showed no switches")
    return CheckResult("decoder-inversion", True,
                       f"4 schemes over {horizon} slots; {switches} switches")


def check_divergence_boundary() -> CheckResult:
    m = coding.moments(BOUNDARY_PMF, BOUNDARY_LENGTHS)
    if analysis.is_stable(BOUNDARY_Q, m):
        return CheckResult("stability-boundary", False, "boundary case reported stable")
    config = SimConfig(
        scheme=build_boundary_scheme(),
        arrival=ArrivalSpec(BOUNDARY_Q),
        horizon=10**6,
        warmup=10_000,
        seed=BOUNDARY_SEED,
        source=BOUNDARY_PMF,
    )
    stats = run(config)
    if not stats.diverged:
        return CheckResult("stability-boundary", False,
                           f"threshold not tripped (pending {stats.pending_bits})")
    return CheckResult("stability-boundary", True,
                       f"pending {stats.pending_bits} bits at horizon")


def build_boundary_scheme():
    from .schemes import SchemeSpec

    return SchemeSpec(
        SchemeKind.IDEAL, coding.canonical_assign(BOUNDARY_PMF, BOUNDARY_LENGTHS)
    )


def check_codebook_file(text: str) -> list[str]:
    """Validate one codebook/scheme file; returns the names of violated invariants."""
    violations = []
    symbols, words = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 or any(c not in "01" for c in parts[1]):
            violations.append("format")
            return violations
        symbols.append(parts[0])
        words.append(parts[1])
    if len(set(symbols)) != len(symbols):
        violations.append("unique-symbols")
    try:
        coding.check_prefix_free(words)
    except AgecodeError:
        violations.append("prefix-free")
    if abs(coding.kraft_sum([len(w) for w in words]) - 1.0) > 1e-12:
        violations.append("kraft-sum")
    return violations


def run_checks(level: str = "quick", codebook_texts: dict[str, str] | None = None,
               emit: Callable[[str], None] = print) -> bool:
    """Run the suite; prints one PASS/FAIL line per check, returns overall health."""
    full = level == "full"
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_penalty_solver(200 if full else 40),
        lambda: check_hull_chain(60 if full else 20),
        check_golden_traces,
        check_closed_forms,
        lambda: check_qstar_grid(100 if full else 15, 1e-4 if full else 1e-3),
        lambda: check_hull_dominance(100 if full else 25),
        lambda: check_convergence(SchemeKind.IDEAL, full),
        lambda: check_convergence(SchemeKind.NAIVE, full),
        lambda: check_idle_fraction(full),
        lambda: check_decoder_inversion(full),
    ]
    if full:
        checks.append(check_divergence_boundary)

    ok = True
    for check in checks:
        result = check()
        ok &= result.ok
        emit(f"{'PASS' if result.ok else 'FAIL'} {result.name}: {result.detail}")
    for name, text in (codebook_texts or {}).items():
        violations = check_codebook_file(text)
        if violations:
            ok = False
            emit(f"FAIL codebook-file {name}: violated {', '.join(violations)}")
        else:
            emit(f"PASS codebook-file {name}: invariants hold")
    return ok
