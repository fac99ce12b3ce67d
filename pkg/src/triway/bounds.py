"""Closed-form rate bounds for the three-user full-duplex Gaussian network.

Everything here is a pure function of a validated ChannelConfig.  All rates
are in bits per channel use; cap(x) = 0.5*log2(1+x) fixes the unit.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .model import ChannelConfig, ChannelGains, ValidationError, validate

_LN2 = math.log(2.0)


def cap(x: float) -> float:
    """0.5*log2(1+x) for x >= 0.

    log1p keeps full relative accuracy for tiny x, which the near-zero
    SNR regime needs.
    """
    if math.isnan(x) or x < 0:
        raise ValidationError(f"cap argument must be >= 0, got {x!r}")
    return 0.5 * math.log1p(x) / _LN2


@dataclasses.dataclass(frozen=True)
class CutsetBounds:
    """Pair-rate cut-set bounds; outK bounds user K's outgoing pair, inK the incoming.

    Reciprocity makes outK == inK for every user.
    """

    out1: float  # r12 + r13
    in1: float   # r21 + r31
    out2: float  # r21 + r23
    in2: float   # r12 + r32
    out3: float  # r31 + r32
    in3: float   # r13 + r23

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class BoundReport:
    config: ChannelConfig
    cutset: CutsetBounds
    lemma1: float
    lemma2: float
    theorem2_upper: float
    tightened_upper: float
    achievable_lower: float
    gap: float
    relay_lattice_rate: float
    relay_direct_rate: float
    relay_improves: bool


def cutset_bounds(cfg: ChannelConfig) -> CutsetBounds:
    """out1 = in1 = cap((h3^2+h2^2)P), out2 = in2 = cap((h3^2+h1^2)P), out3 = in3 = cap((h2^2+h1^2)P)."""
    validate(cfg)
    s1, s2, s3 = cfg.gains.squared()
    P = cfg.power
    b1 = cap((s3 + s2) * P)
    b2 = cap((s3 + s1) * P)
    b3 = cap((s2 + s1) * P)
    return CutsetBounds(out1=b1, in1=b1, out2=b2, in2=b2, out3=b3, in3=b3)


def outgoing_cutset_sum(cfg: ChannelConfig) -> float:
    """Sum of the three outgoing cut-set bounds; scales like 3 degrees of freedom."""
    cs = cutset_bounds(cfg)
    return cs.out1 + cs.out2 + cs.out3


def _gain_ratio(cfg: ChannelConfig) -> float:
    # h2 = 0 forces h1 = 0 by the ordering; the ratio term is 0 by convention
    s1, s2, _ = cfg.gains.squared()
    if s2 == 0.0:
        return 0.0
    return s1 / s2


def lemma1_bound(cfg: ChannelConfig) -> float:
    """cap(h3^2 P + h2^2 P) + cap(h1^2/h2^2); bounds r21 + r31 + r32."""
    validate(cfg)
    s1, s2, s3 = cfg.gains.squared()
    return cap((s3 + s2) * cfg.power) + cap(_gain_ratio(cfg))


def lemma2_bound(cfg: ChannelConfig) -> float:
    """cap(h3^2 P (1 + h1^2/h2^2)) + 1/2; bounds r12 + r13 + r23."""
    validate(cfg)
    _, _, s3 = cfg.gains.squared()
    return cap(s3 * cfg.power * (1.0 + _gain_ratio(cfg))) + 0.5


def theorem2_sum_upper(cfg: ChannelConfig) -> float:
    """2 cap(h3^2 P) + 2."""
    validate(cfg)
    _, _, s3 = cfg.gains.squared()
    return 2.0 * cap(s3 * cfg.power) + 2.0


def tightened_sum_upper(cfg: ChannelConfig) -> float:
    """lemma1_bound + lemma2_bound; always strictly below theorem2_sum_upper."""
    return lemma1_bound(cfg) + lemma2_bound(cfg)


def achievable_sum_lower(cfg: ChannelConfig) -> float:
    """2 cap(h3^2 P): the strongest pair runs a two-way exchange, user 3 stays silent."""
    validate(cfg)
    _, _, s3 = cfg.gains.squared()
    return 2.0 * cap(s3 * cfg.power)


def sum_capacity_interval(cfg: ChannelConfig, lp_upper: float | None = None) -> tuple[float, float, float]:
    """(lower, upper, gap) bracketing the sum capacity.

    upper is the minimum of the closed-form sum bounds (and the rate-region LP
    value when the caller supplies one).  The theorem-2 candidate exceeds the
    lower bound by exactly 2 in real arithmetic, so its gap contribution is
    taken as the literal 2.0; computing fl(2c+2) - 2c can overshoot 2 by one
    ulp and would falsify the gap invariant spuriously.
    """
    lower = achievable_sum_lower(cfg)
    candidates = [2.0, tightened_sum_upper(cfg) - lower]
    if lp_upper is not None:
        candidates.append(lp_upper - lower)
    gap = max(0.0, min(candidates))
    return lower, lower + gap, gap


def relay_rates(cfg: ChannelConfig) -> tuple[float, float, bool]:
    """Bi-directional relaying of the weak pair through user 1.

    lattice = cap(max(0, h2^2 P - 1/2)) is the structured-code rate through the
    bottleneck uplink; direct = cap(h1^2 P) is the unaided rate; improves tests
    h2^2 >= h1^2 + 1/(2P).  The lattice argument is clamped at 0 where the
    expression goes negative.
    """
    validate(cfg)
    s1, s2, _ = cfg.gains.squared()
    P = cfg.power
    lattice = cap(max(0.0, s2 * P - 0.5))
    direct = cap(s1 * P)
    improves = s2 >= s1 + 0.5 / P
    return lattice, direct, improves


def dof_estimate(gains: ChannelGains, power_grid, bound_selector) -> float:
    """Least-squares slope of bound_selector(config) against 0.5*log2(P).

    Fits only the last half of the grid: the low-SNR transient is not the
    asymptote the slope is meant to expose.  Requires >= 8 strictly increasing
    points spanning >= 4 decades.
    """
    grid = [float(p) for p in power_grid]
    if len(grid) < 8:
        raise ValidationError(f"power grid needs >= 8 points, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("power grid must be strictly increasing")
    if grid[0] <= 0:
        raise ValidationError("power grid must be positive")
    if grid[-1] / grid[0] < 1e4:
        raise ValidationError("power grid must span at least 4 decades")
    xs, ys = [], []
    for P in grid:
        cfg = validate(ChannelConfig(gains=gains, power=P))
        xs.append(0.5 * math.log2(P))
        ys.append(float(bound_selector(cfg)))
    half = len(grid) // 2
    slope, _ = np.polyfit(xs[half:], ys[half:], 1)
    return float(slope)


def bound_report(cfg: ChannelConfig) -> BoundReport:
    validate(cfg)
    lower, _, gap = sum_capacity_interval(cfg)
    lattice, direct, improves = relay_rates(cfg)
    return BoundReport(
        config=cfg,
        cutset=cutset_bounds(cfg),
        lemma1=lemma1_bound(cfg),
        lemma2=lemma2_bound(cfg),
        theorem2_upper=theorem2_sum_upper(cfg),
        tightened_upper=tightened_sum_upper(cfg),
        achievable_lower=lower,
        gap=gap,
        relay_lattice_rate=lattice,
        relay_direct_rate=direct,
        relay_improves=improves,
    )


# One-row CSV header for BoundReport; floats are printed with 6 decimals,
# relay_improves as 0/1.
REPORT_CSV_HEADER = (
    "g12,g13,g23,power,"
    "out1,in1,out2,in2,out3,in3,"
    "lemma1,lemma2,theorem2_upper,tightened_upper,achievable_lower,gap,"
    "relay_lattice_rate,relay_direct_rate,relay_improves"
)


def report_to_csv(report: BoundReport) -> str:
    cfg = report.config
    cs = report.cutset
    floats = [
        cfg.gains.h3, cfg.gains.h2, cfg.gains.h1, cfg.power,
        cs.out1, cs.in1, cs.out2, cs.in2, cs.out3, cs.in3,
        report.lemma1, report.lemma2, report.theorem2_upper,
        report.tightened_upper, report.achievable_lower, report.gap,
        report.relay_lattice_rate, report.relay_direct_rate,
    ]
    cells = [f"{v:.6f}" for v in floats] + [str(int(report.relay_improves))]
    return REPORT_CSV_HEADER + "\n" + ",".join(cells) + "\n"


def report_to_json(report: BoundReport) -> str:
    cfg = report.config
    obj = {
        "config": {
            "g12": cfg.gains.h3,
            "g13": cfg.gains.h2,
            "g23": cfg.gains.h1,
            "power": cfg.power,
        },
        "cutset": report.cutset.as_dict(),
        "lemma1": report.lemma1,
        "lemma2": report.lemma2,
        "theorem2_upper": report.theorem2_upper,
        "tightened_upper": report.tightened_upper,
        "achievable_lower": report.achievable_lower,
        "gap": report.gap,
        "relay_lattice_rate": report.relay_lattice_rate,
        "relay_direct_rate": report.relay_direct_rate,
        "relay_improves": report.relay_improves,
    }
    return json.dumps(obj, indent=2, sort_keys=True)
