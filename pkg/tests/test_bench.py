import numpy as np
import pytest

from sbesearch.bench import (
    CampaignConfig,
    CampaignStats,
    campaign_steps,
    export_series,
    lln_suspect,
    load_manifest,
    multi_start_table,
    read_series,
    run_campaign,
    write_manifest,
)
from sbesearch.tuner import EaConfig


def test_config_validation():
    with pytest.raises(ValueError):
        CampaignConfig("fts", 64, 0)
    with pytest.raises(ValueError):
        CampaignConfig("nope", 64, 10)


def test_single_run_stats():
    st = run_campaign(CampaignConfig("exhaustive", 32, 1, seed=4))
    assert st.mean == st.min == st.max
    assert st.std == 0.0


def test_aggregation_matches_series():
    st = run_campaign(CampaignConfig("fts", 64, 300, seed=2, params={"t": 20, "d": 5, "c": 2}))
    s = st.series
    assert st.mean == pytest.approx(s.mean(), rel=0, abs=1e-9)
    assert (st.min, st.max) == (s.min(), s.max())
    assert st.std == pytest.approx(np.std(s, ddof=1))
    assert st.stderr == pytest.approx(st.std / np.sqrt(300))
    assert st.min <= st.mean <= st.max


def test_workers_do_not_change_results():
    base = CampaignConfig("vns3", 64, 120, seed=7, params={"t": 50, "d": 9, "g": 2})
    one = campaign_steps(base)
    base.workers = 4
    assert np.array_equal(one, campaign_steps(base))


def test_exhaustive_small_baseline():
    st = run_campaign(CampaignConfig("exhaustive", 64, 4000, seed=1))
    assert abs(st.mean - 2048.5) < 5 * st.stderr
    assert not st.suspect


def test_lln_gate_flags_bias():
    biased = CampaignStats.from_series(np.full(100, 3000) + np.arange(100))
    assert lln_suspect(biased, 64, 64)


def test_manifest_round_trip(tmp_path):
    cfg = CampaignConfig("fts", 128, 50, seed=11, params={"t": 5, "d": 3, "c": 2}, restarts=2)
    write_manifest(cfg, tmp_path / "m.json", note="x")
    assert load_manifest(tmp_path / "m.json") == cfg


def test_series_round_trip(tmp_path):
    st = run_campaign(CampaignConfig("exhaustive", 32, 25, seed=3))
    path = tmp_path / "s.csv"
    export_series(st, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + 25 + 1
    steps, mean = read_series(path)
    assert np.array_equal(steps, st.series)
    assert mean == st.mean
    assert float(lines[-2].split(",")[2]) == st.mean


def test_series_bad_path(tmp_path):
    st = run_campaign(CampaignConfig("exhaustive", 32, 3, seed=3))
    with pytest.raises(OSError, match="missing"):
        export_series(st, tmp_path / "missing" / "s.csv")


def test_table_shape_and_winners(tmp_path):
    cfg = EaConfig(max_steps=10, runs_per_fitness=4)
    table = multi_start_table(["fts", "exhaustive"], 32, 3, 50, seed=1, tuner=cfg)
    rows = list(table.rows())
    assert [r[0] for r in rows] == ["1", "2", "3", "mean", "lowest"]
    for _, vals, win in rows:
        assert win == min(vals, key=vals.get)
    table.to_csv(tmp_path / "t.csv")
    again = multi_start_table(["fts", "exhaustive"], 32, 3, 50, seed=1, tuner=cfg)
    again.to_csv(tmp_path / "u.csv")
    assert (tmp_path / "t.csv").read_bytes() == (tmp_path / "u.csv").read_bytes()
    for row in table.cells:
        assert abs(row["exhaustive"].mean - 512.5) < 6 * row["exhaustive"].stderr + 1


def test_unconverged_tuner_folds_tuning_runs():
    cfg = EaConfig(max_steps=2, runs_per_fitness=3)
    table = multi_start_table(["fts"], 32, 1, 20, seed=2, tuner=cfg)
    tuned = table.tuned[0]["fts"]
    assert not tuned.converged
    assert table.cells[0]["fts"].n == 20 + len(tuned.run_steps)
