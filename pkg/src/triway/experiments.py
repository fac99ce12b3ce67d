"""Batch drivers: SNR sweeps, gap statistics over random channels, the
cut-set/genie crossover search, and byte-stable report serialization.

Every driver is a pure function of (spec, seed).  Ensemble trial t draws from
its own stream default_rng([seed, t]), so statistics are identical whether
trials run serially or in parallel.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import bounds
from ._version import __version__
from .model import ChannelConfig, ChannelGains, ValidationError, canonicalize, validate

# column registry for sweep tables, in emission order
BOUND_COLUMNS = {
    "out1": lambda cfg: bounds.cutset_bounds(cfg).out1,
    "out2": lambda cfg: bounds.cutset_bounds(cfg).out2,
    "out3": lambda cfg: bounds.cutset_bounds(cfg).out3,
    "outgoing_cutset_sum": bounds.outgoing_cutset_sum,
    "lemma1": bounds.lemma1_bound,
    "lemma2": bounds.lemma2_bound,
    "theorem2_upper": bounds.theorem2_sum_upper,
    "tightened_upper": bounds.tightened_sum_upper,
    "achievable_lower": bounds.achievable_sum_lower,
}


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    p_lo: float
    p_hi: float
    points: int
    gains: ChannelGains | None = None  # None: standard-normal ensemble, canonicalized
    ensemble: int = 1
    seed: int = 0
    bounds: tuple[str, ...] = tuple(BOUND_COLUMNS)


@dataclasses.dataclass(frozen=True)
class GapStatistics:
    ensemble: int
    min_gap: float
    max_gap: float
    mean_gap: float
    violations: int  # count of gaps outside [0, 2]; must stay 0
    worst_config: ChannelConfig


@dataclasses.dataclass(frozen=True)
class CrossoverResult:
    p_star: float | None
    status: str  # found | already-crossed | none


@dataclasses.dataclass(frozen=True)
class ReportTable:
    kind: str
    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    meta: dict


def power_grid(spec: SweepSpec) -> np.ndarray:
    if spec.points < 1:
        raise ValidationError("points must be >= 1")
    if not (0 < spec.p_lo and 0 < spec.p_hi):
        raise ValidationError("power bounds must be positive")
    if spec.points > 1 and not spec.p_lo < spec.p_hi:
        raise ValidationError("power grid must be strictly increasing: need p_lo < p_hi")
    if spec.ensemble < 1:
        raise ValidationError("ensemble size must be >= 1")
    if spec.points == 1:
        return np.array([spec.p_lo])
    return np.logspace(math.log10(spec.p_lo), math.log10(spec.p_hi), spec.points)


def spec_echo(spec: SweepSpec) -> dict:
    echo = dataclasses.asdict(spec)
    echo["gains"] = None if spec.gains is None else dataclasses.asdict(spec.gains)
    echo["bounds"] = list(spec.bounds)
    return echo


def _meta(spec: SweepSpec) -> dict:
    return {"spec": spec_echo(spec), "seed": spec.seed, "version": __version__}


def sweep_snr(spec: SweepSpec) -> ReportTable:
    """One row per grid power: (P, selected bounds, gap)."""
    if spec.gains is None:
        raise ValidationError("sweep_snr needs a fixed gain triple")
    unknown = [name for name in spec.bounds if name not in BOUND_COLUMNS]
    if unknown:
        raise ValidationError(f"unknown bound columns: {unknown}")
    grid = power_grid(spec)
    rows = []
    for P in grid:
        cfg = validate(ChannelConfig(gains=spec.gains, power=float(P)))
        _, _, gap = bounds.sum_capacity_interval(cfg)
        rows.append((float(P), *(float(BOUND_COLUMNS[name](cfg)) for name in spec.bounds), gap))
    return ReportTable(kind="sweep", header=("P", *spec.bounds, "gap"),
                       rows=tuple(rows), meta=_meta(spec))


def gap_ensemble(spec: SweepSpec) -> GapStatistics:
    """Sample configurations, evaluate the sum-capacity interval, aggregate gaps.

    Trial t uses gains drawn from default_rng([seed, t]) (or the fixed triple)
    and the grid power at index t mod points, so a large ensemble covers every
    grid power evenly.
    """
    grid = power_grid(spec)
    worst = None
    gaps_min, gaps_max, total, violations = math.inf, -math.inf, 0.0, 0
    for t in range(spec.ensemble):
        if spec.gains is None:
            g = np.random.default_rng([spec.seed, t]).standard_normal(3)
            gains, _ = canonicalize(g[0], g[1], g[2])
        else:
            gains = spec.gains
        cfg = validate(ChannelConfig(gains=gains, power=float(grid[t % len(grid)])))
        _, _, gap = bounds.sum_capacity_interval(cfg)
        if gap < 0.0 or gap > 2.0:
            violations += 1
        total += gap
        gaps_min = min(gaps_min, gap)
        if gap > gaps_max:
            gaps_max, worst = gap, cfg
    return GapStatistics(ensemble=spec.ensemble, min_gap=gaps_min, max_gap=gaps_max,
                         mean_gap=total / spec.ensemble, violations=violations,
                         worst_config=worst)


def gap_statistics_table(stats: GapStatistics, spec: SweepSpec) -> ReportTable:
    cfg = stats.worst_config
    header = ("ensemble", "min_gap", "max_gap", "mean_gap", "violations",
              "worst_g12", "worst_g13", "worst_g23", "worst_power")
    row = (float(stats.ensemble), stats.min_gap, stats.max_gap, stats.mean_gap,
           float(stats.violations), cfg.gains.h3, cfg.gains.h2, cfg.gains.h1, cfg.power)
    return ReportTable(kind="gap-ensemble", header=header, rows=(row,), meta=_meta(spec))


def find_crossover(gains: ChannelGains, p_lo: float, p_hi: float,
                   rel_tol: float = 1e-6) -> CrossoverResult:
    """Smallest P in [p_lo, p_hi] where the lemma sum beats the outgoing cut-set sum.

    Bisection on d(P) = outgoing cut-set sum - tightened upper; assumes one
    sign change inside the bracket.  d > 0 already at p_lo reports the bracket
    as already crossed; no sign change reports none.
    """
    if not (0 < p_lo < p_hi) or not (math.isfinite(p_lo) and math.isfinite(p_hi)):
        raise ValidationError(f"invalid bracket [{p_lo!r}, {p_hi!r}]")

    def margin(P: float) -> float:
        cfg = validate(ChannelConfig(gains=gains, power=P))
        return bounds.outgoing_cutset_sum(cfg) - bounds.tightened_sum_upper(cfg)

    lo, hi = float(p_lo), float(p_hi)
    if margin(lo) > 0:
        return CrossoverResult(p_star=lo, status="already-crossed")
    if margin(hi) <= 0:
        return CrossoverResult(p_star=None, status="none")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0:
            hi = mid
        else:
            lo = mid
    return CrossoverResult(p_star=hi, status="found")


def crossover_table(result: CrossoverResult, gains: ChannelGains,
                    p_lo: float, p_hi: float) -> ReportTable:
    header = ("p_star", "status_code", "g12", "g13", "g23", "p_lo", "p_hi")
    code = {"found": 0.0, "already-crossed": 1.0, "none": 2.0}[result.status]
    p_star = math.nan if result.p_star is None else result.p_star
    row = (p_star, code, gains.h3, gains.h2, gains.h1, float(p_lo), float(p_hi))
    meta = {"status": result.status, "version": __version__}
    return ReportTable(kind="crossover", header=header, rows=(row,), meta=meta)


def table_to_csv(table: ReportTable) -> str:
    lines = [",".join(table.header)]
    for row in table.rows:
        lines.append(",".join(f"{v:.6f}" for v in row))
    return "\n".join(lines) + "\n"


def table_to_json(table: ReportTable) -> str:
    obj = {
        "kind": table.kind,
        "meta": table.meta,
        "header": list(table.header),
        "rows": [list(row) for row in table.rows],
    }
    return json.dumps(obj, indent=2, sort_keys=True)


def table_from_json(text: str) -> ReportTable:
    obj = json.loads(text)
    return ReportTable(kind=obj["kind"], header=tuple(obj["header"]),
                       rows=tuple(tuple(row) for row in obj["rows"]), meta=obj["meta"])


def export_report(table: ReportTable, format: str, path) -> str:
    """Serialize a table and write it to path; returns the exact bytes written.

    CSV is header plus 6-decimal rows; JSON carries full precision plus the
    spec echo, seed, and toolkit version.  Identical inputs give identical
    bytes.
    """
    if format == "csv":
        text = table_to_csv(table)
    elif format == "json":
        text = table_to_json(table) + "\n"
    else:
        raise ValidationError(f"format must be csv or json, got {format!r}")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def load_report_json(path) -> ReportTable:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return table_from_json(fh.read())
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc}") from exc
