"""Arrival-rate sweeps: build the schemes, simulate every grid point, and
emit a CSV plus a self-drawn SVG of peak age versus q.

Every point uses the same seed, so the arrival sample paths are paired
across schemes and the curves can be compared point by point.  Points
where no stable code can even be constructed are recorded as diverged
rather than failing the sweep.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .analysis import paoi_ideal, paoi_naive
from .coding import moments
from .errors import ConfigError, DegenerateLoadError, FormatError, StabilityError
from .schemes import SchemeKind, build_scheme
from .simulator import SimConfig, run
from .source import ArrivalSpec, SourcePMF, entropy, parse_source

DEFAULT_GRID_POINTS = 50
DEFAULT_GRID_MIN = 0.01


@dataclass(frozen=True)
class SweepSpec:
    source: SourcePMF
    schemes: tuple[SchemeKind, ...]
    q_grid: tuple[float, ...]
    horizon: int
    warmup: int | None = None
    seed: int = 0
    analytic: bool = True
    max_len: int | None = None

    def __post_init__(self):
        if not self.schemes:
            raise ConfigError("sweep needs at least one scheme")
        if not self.q_grid:
            raise ConfigError("sweep needs at least one q value")
        prev = 0.0
        for q in self.q_grid:
            if not (0.0 < q < 1.0) or q <= prev:
                raise ConfigError("q grid must be strictly increasing within (0, 1)")
            prev = q


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    q: float
    analytic_paoi: float | None
    empirical_paoi: float | None
    idle_fraction: float | None
    diverged: bool


def default_q_grid(pmf: SourcePMF, points: int = DEFAULT_GRID_POINTS) -> tuple[float, ...]:
    """Evenly spaced grid from 0.01 up to 1/H(X) (capped below 1)."""
    hi = min(1.0 / entropy(pmf), 0.99)
    if hi <= DEFAULT_GRID_MIN:
        raise ConfigError(f"degenerate default grid: 1/H(X) = {hi!r}")
    step = (hi - DEFAULT_GRID_MIN) / (points - 1)
    return tuple(DEFAULT_GRID_MIN + i * step for i in range(points))


def _analytic_paoi(kind: SchemeKind, q: float, scheme, pmf: SourcePMF) -> float | None:
    if kind not in (SchemeKind.IDEAL, SchemeKind.NAIVE):
        return None
    m = moments(pmf, scheme.message_codebook.lengths)
    try:
        return paoi_ideal(q, m) if kind == SchemeKind.IDEAL else paoi_naive(q, m)
    except StabilityError:
        return None


def _run_point(spec: SweepSpec, kind: SchemeKind, q: float) -> SweepRow:
    arrival = ArrivalSpec(q)
    try:
        scheme = build_scheme(kind, spec.source, arrival, spec.max_len, allow_unstable=True)
    except (StabilityError, DegenerateLoadError):
        return SweepRow(kind.value, q, None, None, None, True)
    stats = run(
        SimConfig(
            scheme=scheme,
            arrival=arrival,
            horizon=spec.horizon,
            warmup=spec.warmup,
            seed=spec.seed,
            source=spec.source,
        )
    )
    return SweepRow(
        kind.value,
        q,
        _analytic_paoi(kind, q, scheme, spec.source) if spec.analytic else None,
        stats.empirical_paoi,
        stats.idle_fraction,
        stats.diverged,
    )


def _point_task(args) -> SweepRow:
    return _run_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """All (q, scheme) points, assembled in q-then-scheme order."""
    tasks = [(spec, kind, q) for q in spec.q_grid for kind in spec.schemes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_point_task, tasks))
    else:
        rows = [_point_task(t) for t in tasks]
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value)


def rows_to_csv(rows) -> str:
    lines = ["scheme,q,analytic_paoi,empirical_paoi,idle_fraction,diverged"]
    for r in rows:
        lines.append(
            f"{r.scheme},{_cell(r.q)},{_cell(r.analytic_paoi)},"
            f"{_cell(r.empirical_paoi)},{_cell(r.idle_fraction)},{_cell(r.diverged)}"
        )
    return "\n".join(lines) + "\n"


# --- sweep-spec text format -------------------------------------------------

def parse_sweep_spec(text: str, base_dir: Path | None = None) -> SweepSpec:
    """Parse `key = value` lines; `#` comments allowed.

    Keys: source (path), schemes (comma list), q_grid (comma list of
    probabilities, optional), q_points (grid size when q_grid omitted),
    horizon, warmup, seed, analytic, max_len.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()

    if "source" not in values:
        raise FormatError("sweep spec needs a source = <path> line")
    source_path = Path(values["source"])
    if base_dir is not None and not source_path.is_absolute():
        source_path = base_dir / source_path
    try:
        pmf = parse_source(source_path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read source file {source_path}: {exc}") from exc

    try:
        schemes = tuple(
            SchemeKind(name.strip())
            for name in values.get("schemes", "ideal").split(",")
            if name.strip()
        )
    except ValueError as exc:
        raise FormatError(f"bad schemes list: {exc}") from None

    try:
        if "q_grid" in values:
            q_grid = tuple(float(x) for x in values["q_grid"].split(",") if x.strip())
        else:
            q_grid = default_q_grid(pmf, int(values.get("q_points", DEFAULT_GRID_POINTS)))
        spec = SweepSpec(
            source=pmf,
            schemes=schemes,
            q_grid=q_grid,
            horizon=int(values.get("horizon", 10**6)),
            warmup=int(values["warmup"]) if "warmup" in values else None,
            seed=int(values.get("seed", 0)),
            analytic=values.get("analytic", "true").lower() in ("true", "1", "yes"),
            max_len=int(values["max_len"]) if "max_len" in values else None,
        )
    except ValueError as exc:
        raise FormatError(f"bad sweep spec value: {exc}") from None
    except ConfigError as exc:
        raise FormatError(f"bad sweep spec: {exc}") from exc
    return spec


# --- plot --------------------------------------------------------------------

_PALETTE = {
    "ideal": "#1f77b4",
    "naive": "#d62728",
    "predictive": "#2ca02c",
    "adaptive": "#9467bd",
}


def rows_to_svg(rows, width: int = 640, height: int = 440) -> str:
    """Draw peak age versus q as a standalone SVG (no plotting library)."""
    finite = [r for r in rows if r.empirical_paoi is not None and not r.diverged]
    ml, mr, mt, mb = 56, 16, 24, 44
    px, py = width - ml - mr, height - mt - mb
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if not finite:
        parts.append(f'<text x="{width / 2}" y="{height / 2}">no stable points</text></svg>')
        return "\n".join(parts)

    xs = [r.q for r in finite]
    ys = [r.empirical_paoi for r in finite]
    x0, x1 = min(xs), max(xs)
    y0, y1 = 0.0, max(ys) * 1.05
    if x1 == x0:
        x1 = x0 + 1e-9

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * px

    def sy(y):
        return mt + py - (y - y0) / (y1 - y0) * py

    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{px}" height="{py}" fill="none" stroke="#888"/>'
    )
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        parts.append(
            f'<line x1="{sx(xv):.1f}" y1="{mt + py}" x2="{sx(xv):.1f}" y2="{mt + py + 4}" stroke="#888"/>'
            f'<text x="{sx(xv):.1f}" y="{mt + py + 18}" text-anchor="middle">{xv:.3f}</text>'
            f'<line x1="{ml - 4}" y1="{sy(yv):.1f}" x2="{ml}" y2="{sy(yv):.1f}" stroke="#888"/>'
            f'<text x="{ml - 8}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.1f}</text>'
        )
    parts.append(
        f'<text x="{ml + px / 2}" y="{height - 8}" text-anchor="middle">arrival probability q</text>'
        f'<text x="14" y="{mt + py / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {mt + py / 2})">peak age (slots)</text>'
    )
    seen = []
    for name in dict.fromkeys(r.scheme for r in rows):
        pts = [(r.q, r.empirical_paoi) for r in finite if r.scheme == name]
        if not pts:
            continue
        color = _PALETTE.get(name, "#333")
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in sorted(pts))
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        seen.append((name, color))
    for i, (name, color) in enumerate(seen):
        y = mt + 14 + 16 * i
        parts.append(
            f'<line x1="{ml + 10}" y1="{y - 4}" x2="{ml + 34}" y2="{y - 4}" '
            f'stroke="{color}" stroke-width="1.5"/><text x="{ml + 40}" y="{y}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
