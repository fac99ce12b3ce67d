"""Batch drivers: sweep tables, gap ensembles, crossover search, and the
byte-stable report serialization they share."""

import json
import math

import numpy as np
import pytest

from triway.bounds import outgoing_cutset_sum, sum_capacity_interval, tightened_sum_upper
from triway.experiments import (
    BOUND_COLUMNS,
    CrossoverResult,
    SweepSpec,
    crossover_table,
    export_report,
    find_crossover,
    gap_ensemble,
    gap_statistics_table,
    load_report_json,
    power_grid,
    sweep_snr,
    table_from_json,
    table_to_csv,
    table_to_json,
)
from triway.model import ChannelConfig, ChannelGains, ValidationError, validate

SYM = ChannelGains(1.0, 1.0, 1.0)


def _col(table, name):
    return np.array([row[table.header.index(name)] for row in table.rows])


def _slope(table, name):
    x = 0.5 * np.log2(_col(table, "P"))
    return float(np.polyfit(x, _col(table, name), 1)[0])


def test_sweep_slopes_show_degrees_of_freedom():
    spec = SweepSpec(p_lo=1e2, p_hi=1e8, points=9, gains=SYM)
    table = sweep_snr(spec)
    assert table.kind == "sweep"
    assert table.header == ("P", *spec.bounds, "gap")
    assert len(table.rows) == 9
    assert abs(_slope(table, "theorem2_upper") - 2.0) < 0.05
    assert abs(_slope(table, "achievable_lower") - 2.0) < 0.05
    assert abs(_slope(table, "outgoing_cutset_sum") - 3.0) < 0.05


def test_sweep_rows_match_direct_evaluation():
    spec = SweepSpec(p_lo=0.5, p_hi=50.0, points=5, gains=ChannelGains(0.5, 1.0, 1.5),
                     bounds=("lemma1", "tightened_upper"))
    table = sweep_snr(spec)
    for row in table.rows:
        cfg = validate(ChannelConfig(gains=spec.gains, power=row[0]))
        assert row[table.header.index("tightened_upper")] == pytest.approx(
            tightened_sum_upper(cfg), rel=1e-12)
        assert row[-1] == pytest.approx(sum_capacity_interval(cfg)[2], rel=1e-12)


def test_single_point_grid():
    spec = SweepSpec(p_lo=7.0, p_hi=7.0, points=1, gains=SYM)
    grid = power_grid(spec)
    assert grid.tolist() == [7.0]
    table = sweep_snr(spec)
    assert len(table.rows) == 1 and table.rows[0][0] == 7.0


def test_spec_validation():
    with pytest.raises(ValidationError, match="points"):
        power_grid(SweepSpec(p_lo=1.0, p_hi=10.0, points=0))
    with pytest.raises(ValidationError, match="positive"):
        power_grid(SweepSpec(p_lo=0.0, p_hi=10.0, points=3))
    with pytest.raises(ValidationError, match="increasing"):
        power_grid(SweepSpec(p_lo=10.0, p_hi=1.0, points=3))
    with pytest.raises(ValidationError, match="ensemble"):
        power_grid(SweepSpec(p_lo=1.0, p_hi=10.0, points=3, ensemble=0))
    with pytest.raises(ValidationError, match="unknown bound columns"):
        sweep_snr(SweepSpec(p_lo=1.0, p_hi=10.0, points=3, gains=SYM, bounds=("nope",)))
    with pytest.raises(ValidationError, match="fixed gain"):
        sweep_snr(SweepSpec(p_lo=1.0, p_hi=10.0, points=3, gains=None))


def test_sweep_deterministic_and_export_byte_stable(tmp_path):
    spec = SweepSpec(p_lo=1.0, p_hi=100.0, points=4, gains=SYM)
    t1, t2 = sweep_snr(spec), sweep_snr(spec)
    assert t1 == t2
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    text1 = export_report(t1, "json", p1)
    text2 = export_report(t2, "json", p2)
    assert text1 == text2
    assert p1.read_bytes() == p2.read_bytes() == text1.encode()


def test_gap_ensemble_statistics():
    spec = SweepSpec(p_lo=0.1, p_hi=1e4, points=6, ensemble=2000, seed=0)
    stats = gap_ensemble(spec)
    assert stats.ensemble == 2000
    assert stats.violations == 0
    assert 0.0 <= stats.min_gap <= stats.mean_gap <= stats.max_gap <= 2.0
    assert isinstance(stats.worst_config, ChannelConfig)
    assert gap_ensemble(spec) == stats  # trial streams make reruns identical


def test_gap_ensemble_fixed_gains_single_trial():
    spec = SweepSpec(p_lo=9.0, p_hi=9.0, points=1, gains=SYM, ensemble=1, seed=5)
    stats = gap_ensemble(spec)
    cfg = validate(ChannelConfig(gains=SYM, power=9.0))
    gap = sum_capacity_interval(cfg)[2]
    assert stats.min_gap == stats.max_gap == stats.mean_gap == gap
    assert stats.worst_config == cfg


def test_gap_approaches_two_for_symmetric_gains():
    spec = SweepSpec(p_lo=1e8, p_hi=1e8, points=1, gains=SYM, ensemble=1)
    stats = gap_ensemble(spec)
    assert 1.999 <= stats.max_gap <= 2.0


def test_gap_statistics_table_layout():
    spec = SweepSpec(p_lo=1.0, p_hi=10.0, points=2, ensemble=50, seed=1)
    stats = gap_ensemble(spec)
    table = gap_statistics_table(stats, spec)
    assert table.kind == "gap-ensemble"
    assert table.header == ("ensemble", "min_gap", "max_gap", "mean_gap", "violations",
                            "worst_g12", "worst_g13", "worst_g23", "worst_power")
    row = table.rows[0]
    assert row[0] == 50.0 and row[4] == 0.0
    cfg = stats.worst_config
    assert row[5:] == (cfg.gains.h3, cfg.gains.h2, cfg.gains.h1, cfg.power)


def test_crossover_symmetric_gains():
    res = find_crossover(SYM, 0.1, 100.0)
    assert res.status == "found"
    assert abs(res.p_star - 1.5) / 1.5 <= 1e-6


def test_crossover_analytic_second_family():
    # h = (0, 1, 1): outgoing sum minus lemma total is cap(P) - 1/2, zero at P = 1
    res = find_crossover(ChannelGains(0.0, 1.0, 1.0), 0.5, 50.0)
    assert res.status == "found"
    assert abs(res.p_star - 1.0) <= 1e-6


def test_crossover_bracket_edges():
    assert find_crossover(SYM, 2.0, 10.0) == CrossoverResult(p_star=2.0, status="already-crossed")
    assert find_crossover(SYM, 1e-4, 1e-3) == CrossoverResult(p_star=None, status="none")


def test_crossover_margin_brackets_the_root():
    res = find_crossover(SYM, 0.1, 100.0)

    def margin(P):
        cfg = validate(ChannelConfig(gains=SYM, power=P))
        return outgoing_cutset_sum(cfg) - tightened_sum_upper(cfg)

    assert margin(res.p_star) > 0.0
    assert margin(res.p_star * (1.0 - 1e-5)) < 0.0


def test_crossover_bracket_validation():
    for lo, hi in ((0.0, 10.0), (5.0, 5.0), (10.0, 2.0), (1.0, math.inf), (-1.0, 2.0)):
        with pytest.raises(ValidationError, match="bracket"):
            find_crossover(SYM, lo, hi)


def test_crossover_table_encodes_status():
    res = find_crossover(SYM, 0.1, 100.0)
    table = crossover_table(res, SYM, 0.1, 100.0)
    assert table.header == ("p_star", "status_code", "g12", "g13", "g23", "p_lo", "p_hi")
    assert table.rows[0][1] == 0.0 and table.meta["status"] == "found"
    none_res = CrossoverResult(p_star=None, status="none")
    none_table = crossover_table(none_res, SYM, 1.0, 2.0)
    assert math.isnan(none_table.rows[0][0]) and none_table.rows[0][1] == 2.0


def test_csv_has_six_decimal_cells():
    spec = SweepSpec(p_lo=1.0, p_hi=100.0, points=3, gains=SYM, bounds=("lemma1",))
    table = sweep_snr(spec)
    lines = table_to_csv(table).strip().split("\n")
    assert lines[0] == "P,lemma1,gap"
    for line, row in zip(lines[1:], table.rows):
        assert line == ",".join(f"{v:.6f}" for v in row)


def test_json_roundtrip_is_exact():
    spec = SweepSpec(p_lo=0.3, p_hi=77.0, points=4, gains=ChannelGains(0.5, 1.0, 1.5))
    table = sweep_snr(spec)
    back = table_from_json(table_to_json(table))
    assert back == table  # repr-level float fidelity survives JSON


def test_export_and_load_files(tmp_path):
    spec = SweepSpec(p_lo=1.0, p_hi=10.0, points=2, gains=SYM)
    table = sweep_snr(spec)
    path = tmp_path / "report.json"
    text = export_report(table, "json", path)
    assert path.read_text() == text
    assert load_report_json(path) == table
    csv_path = tmp_path / "report.csv"
    csv_text = export_report(table, "csv", csv_path)
    assert csv_path.read_text() == csv_text == table_to_csv(table)
    assert export_report(table, "csv", None) == csv_text  # None leaves files alone


def test_export_error_paths(tmp_path):
    spec = SweepSpec(p_lo=1.0, p_hi=10.0, points=2, gains=SYM)
    table = sweep_snr(spec)
    with pytest.raises(ValidationError, match="format"):
        export_report(table, "xml", None)
    with pytest.raises(OSError, match="cannot write report to"):
        export_report(table, "csv", tmp_path / "missing-dir" / "x.csv")
    with pytest.raises(OSError, match="cannot read report from"):
        load_report_json(tmp_path / "absent.json")


def test_empty_rows_yield_header_only_csv():
    from triway.experiments import ReportTable
    table = ReportTable(kind="sweep", header=("P", "gap"), rows=(), meta={})
    assert table_to_csv(table) == "P,gap\n"


def test_meta_echoes_spec():
    spec = SweepSpec(p_lo=1.0, p_hi=10.0, points=2, gains=SYM, seed=42)
    table = sweep_snr(spec)
    echo = table.meta["spec"]
    assert echo["seed"] == 42 and echo["points"] == 2
    assert echo["gains"] == {"h1": 1.0, "h2": 1.0, "h3": 1.0}
    assert table.meta["seed"] == 42
    obj = json.loads(table_to_json(table))
    assert obj["meta"]["spec"]["p_hi"] == 10.0


def test_bound_column_registry_is_complete():
    assert tuple(BOUND_COLUMNS) == ("out1", "out2", "out3", "outgoing_cutset_sum",
                                    "lemma1", "lemma2", "theorem2_upper",
                                    "tightened_upper", "achievable_lower")
