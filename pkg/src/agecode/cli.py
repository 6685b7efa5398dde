"""Command-line front-end.

Subcommands: `code` builds a scheme file and prints its analytic report,
`simulate` runs one simulation and prints a stats CSV row, `trace` writes
the full per-slot CSV, `sweep` reproduces peak-age-versus-q curves, and
`verify` runs the self-check suite.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, coding, sweep as sweep_mod, verify as verify_mod
from .errors import AgecodeError
from .schemes import build_scheme, format_scheme, parse_scheme
from .simulator import SimConfig, run_trace
from .source import ArrivalSpec, entropy, parse_source


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise AgecodeError(f"cannot read {path}: {exc}") from exc


def _parse_arrivals(path: str) -> tuple[tuple[int, str], ...]:
    rows = []
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line == "slot,symbol":
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise AgecodeError(f"{path}:{lineno}: expected 'slot,symbol'")
        try:
            rows.append((int(parts[0]), parts[1]))
        except ValueError:
            raise AgecodeError(f"{path}:{lineno}: bad slot {parts[0]!r}") from None
    return tuple(rows)


def cmd_code(args) -> int:
    pmf = parse_source(_read(args.source))
    arrival = ArrivalSpec(args.q)
    scheme = build_scheme(args.kind, pmf, arrival, args.max_len,
                          naive_reoptimize=args.naive_reoptimize)
    m = coding.moments(pmf, scheme.message_codebook.lengths)

    print(f"scheme {scheme.kind.value}")
    print(f"entropy {entropy(pmf)!r}")
    print(f"E[L] {m.mean_len!r}")
    print(f"E[L2] {m.second_moment!r}")
    if scheme.null_prob_used is not None:
        print(f"p_null {scheme.null_prob_used!r}")
    if scheme.kind.value == "naive":
        # closed form applies to the on-wire length L + 1
        wire = coding.CodeMoments(m.mean_len + 1.0, m.second_moment + 2.0 * m.mean_len + 1.0)
        rep = analysis.report(args.q, wire)
    else:
        rep = analysis.report(args.q, m)
    print(f"load {rep.load!r}")
    print(f"stable {'true' if rep.stable else 'false'}")
    if scheme.kind.value in ("ideal", "naive"):
        if rep.paoi is not None:
            print(f"E[W] {rep.waiting!r}")
            print(f"paoi {rep.paoi!r}")
        print(f"q_star {rep.q_star!r}")
        print(f"paoi_at_q_star {rep.paoi_at_q_star!r}")
    else:
        print("paoi n/a (no closed form for null-codeword framing; use simulate)")
    if args.out:
        Path(args.out).write_text(format_scheme(scheme, pmf))
        print(f"wrote {args.out}")
    return 0


def _sim_config(args) -> SimConfig:
    scheme, _ = parse_scheme(_read(args.scheme))
    source = parse_source(_read(args.source)) if args.source else None
    scripted = _parse_arrivals(args.arrivals) if args.arrivals else None
    arrival = ArrivalSpec(args.q) if args.q is not None else None
    return SimConfig(
        scheme=scheme,
        arrival=arrival,
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
        source=source,
        scripted_arrivals=scripted,
    )


_STATS_FIELDS = (
    "empirical_paoi", "mean_age", "idle_fraction", "mean_wait", "mean_service",
    "mean_interarrival", "peaks_count", "decoded_count", "arrivals_count",
    "pending_bits", "diverged", "switches",
)


def _stats_csv(stats) -> str:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        return repr(v) if isinstance(v, float) else str(v)

    header = ",".join(_STATS_FIELDS)
    row = ",".join(cell(getattr(stats, f)) for f in _STATS_FIELDS)
    return f"{header}\n{row}\n"


def cmd_simulate(args) -> int:
    trace = run_trace(_sim_config(args))
    sys.stdout.write(_stats_csv(trace.stats))
    if args.trace_out:
        Path(args.trace_out).write_text(trace.to_csv())
    return 0


def cmd_trace(args) -> int:
    trace = run_trace(_sim_config(args))
    Path(args.out).write_text(trace.to_csv())
    print(f"wrote {args.out}")
    return 0


def cmd_sweep(args) -> int:
    spec_path = Path(args.spec)
    spec = sweep_mod.parse_sweep_spec(_read(args.spec), base_dir=spec_path.parent)
    rows = sweep_mod.run_sweep(spec, jobs=args.jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.csv").write_text(sweep_mod.rows_to_csv(rows))
    (out_dir / "sweep.svg").write_text(sweep_mod.rows_to_svg(rows))
    print(f"wrote {out_dir / 'sweep.csv'} and {out_dir / 'sweep.svg'}")
    return 0


def cmd_verify(args) -> int:
    texts = {path: _read(path) for path in args.codebook}
    ok = verify_mod.run_checks(args.level, codebook_texts=texts)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agecode", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("code", help="build a scheme file and report its closed forms")
    p.add_argument("--source", required=True, help="source-spec file")
    p.add_argument("--q", type=float, required=True, help="arrival probability")
    p.add_argument("--max-len", type=int, default=None, help="codeword length cap")
    p.add_argument("--kind", default="ideal",
                   choices=["ideal", "naive", "predictive", "adaptive"])
    p.add_argument("--naive-reoptimize", action="store_true",
                   help="pick the naive message code by its own flag-bit peak age "
                        "instead of reusing the ideal scheme's code")
    p.add_argument("--out", help="write the scheme file here")
    p.set_defaults(fn=cmd_code)

    for name, fn in (("simulate", cmd_simulate), ("trace", cmd_trace)):
        p = sub.add_parser(name, help=f"{name} one run")
        p.add_argument("--scheme", required=True, help="scheme file from `code`")
        p.add_argument("--source", help="source-spec file (needed for random arrivals)")
        p.add_argument("--q", type=float, default=None, help="arrival probability")
        p.add_argument("--horizon", type=int, required=True)
        p.add_argument("--warmup", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--arrivals", help="scripted arrivals CSV (slot,symbol)")
        if name == "simulate":
            p.add_argument("--trace-out", help="also write the per-slot CSV here")
        else:
            p.add_argument("--out", required=True, help="per-slot CSV destination")
        p.set_defaults(fn=fn)

    p = sub.add_parser("sweep", help="peak age versus q for several schemes")
    p.add_argument("--spec", required=True, help="sweep-spec file (key = value lines)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1, help="concurrent simulation processes")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--level", default="quick", choices=["quick", "full"])
    p.add_argument("--codebook", action="append", default=[],
                   help="also validate this codebook/scheme file (repeatable)")
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except AgecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
