"""Closed-form peak-age and stability formulas for the slotted FIFO bit pipe.

With Bernoulli(q) arrivals and service time equal to codeword length, the
system is a discrete-time Geo/G/1 queue.  Everything here is a pure
function of the arrival probability and the code length moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coding import CodeMoments
from .errors import StabilityError


def is_stable(q: float, m: CodeMoments) -> bool:
    """Queue stability: E[L] strictly below the slot budget 1/q."""
    return m.mean_len < 1.0 / q


def _require_stable(q: float, mean_service: float, what: str) -> None:
    if mean_service >= 1.0 / q:
        raise StabilityError(
            f"{what} unstable: mean service {mean_service!r} slots >= 1/q = {(1.0 / q)!r}",
            mean_service=mean_service,
            capacity=1.0 / q,
        )


def expected_waiting(q: float, m: CodeMoments) -> float:
    """Mean queueing delay E[W] = (E[L^2] - E[L]) / (2 (1/q - E[L]))."""
    _require_stable(q, m.mean_len, "queue")
    return (m.second_moment - m.mean_len) / (2.0 * (1.0 / q - m.mean_len))


def paoi_ideal(q: float, m: CodeMoments) -> float:
    """Peak age with free empty-buffer signaling: E[W] + E[L] + 1/q."""
    return expected_waiting(q, m) + m.mean_len + 1.0 / q


def paoi_naive(q: float, m: CodeMoments) -> float:
    """Peak age of the flag-bit scheme; every codeword grows by one bit.

    Equals `paoi_ideal` evaluated at the moments of L + 1, which expands to
    (E[L^2] + E[L]) / (2 (1/q - E[L] - 1)) + E[L] + 1 + 1/q.
    """
    _require_stable(q, m.mean_len + 1.0, "flag-bit scheme")
    return (m.second_moment + m.mean_len) / (2.0 * (1.0 / q - m.mean_len - 1.0)) + (
        m.mean_len + 1.0
    ) + 1.0 / q


@dataclass(frozen=True)
class OptimalRate:
    """Arrival probability minimizing peak age for fixed code moments."""

    q_star: float
    paoi: float
    feasible: bool  # False when the unconstrained optimum lands above q = 1


def optimal_arrival_rate(m: CodeMoments) -> OptimalRate:
    """Minimize peak age over q: 1/q* = sqrt((E[L^2] - E[L]) / 2) + E[L].

    The minimized peak age is sqrt(2 (E[L^2] - E[L])) + 2 E[L].  Since q is
    a probability, q* > 1 is reported infeasible rather than clamped.
    """
    spread = m.second_moment - m.mean_len
    inv_q = math.sqrt(spread / 2.0) + m.mean_len
    q_star = 1.0 / inv_q
    paoi = math.sqrt(2.0 * spread) + 2.0 * m.mean_len
    return OptimalRate(q_star=q_star, paoi=paoi, feasible=q_star <= 1.0)


@dataclass(frozen=True)
class AnalyticReport:
    """Closed-form summary for one (code, arrival rate) pair.

    The peak-age fields are populated only when the queue is stable; the
    optimal-rate fields depend on the moments alone and are always present.
    `paoi` always equals waiting + service + interarrival.
    """

    stable: bool
    load: float
    interarrival: float
    service: float
    waiting: float | None = None
    paoi: float | None = None
    q_star: float | None = None
    paoi_at_q_star: float | None = None


def report(q: float, m: CodeMoments) -> AnalyticReport:
    """Assemble the full analytic picture for one operating point."""
    stable = is_stable(q, m)
    opt = optimal_arrival_rate(m)
    waiting = expected_waiting(q, m) if stable else None
    return AnalyticReport(
        stable=stable,
        load=q * m.mean_len,
        interarrival=1.0 / q,
        service=m.mean_len,
        waiting=waiting,
        paoi=None if waiting is None else waiting + m.mean_len + 1.0 / q,
        q_star=opt.q_star,
        paoi_at_q_star=opt.paoi,
    )
