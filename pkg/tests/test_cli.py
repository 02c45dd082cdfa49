import json

import numpy as np
import pytest

from ewbubbles.audio import read_wav
from ewbubbles.cli import main, read_coverage_csv, read_events_csv, write_events_csv
from ewbubbles.config import CONFIG_ENV, load_config, parse_override, resolve
from ewbubbles.errors import ConfigParseError, ConfigValidationError
from ewbubbles.nucleation import EventRow, simulate, table_from_onsets

SMALL_FRAMES = ["--set", "frames.width=32", "--set", "frames.height=32", "--fps", "2"]


def run(*argv):
    return main([str(a) for a in argv])


def test_empty_config_gives_defaults(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    res = resolve(load_config())
    assert res.config.higgs_mass == 35.0 and res.sim.bubble_count == 30
    assert res.sim.domain_size == 300.0 and res.render.sample_rate == 44100
    assert res.window.total_duration == 13.0 and res.frames.frame_count == 390


def test_flags_override_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 1, "simulation": {"bubble_count": 12}}))
    cfg = load_config(path, {"seed": 42})
    assert cfg.seed == 42 and cfg.simulation.bubble_count == 12


def test_env_fallback(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"higgs_mass": 40.0}))
    monkeypatch.setenv(CONFIG_ENV, str(path))
    assert load_config().higgs_mass == 40.0
    assert load_config(use_env=False).higgs_mass == 35.0


def test_validation_errors_carry_paths(tmp_path):
    with pytest.raises(ConfigValidationError) as info:
        load_config(overrides={"simulation.bubble_count": -1}, use_env=False)
    assert info.value.path == "simulation.bubble_count"
    with pytest.raises(ConfigValidationError) as info:
        load_config(overrides={"audio.volume": 3}, use_env=False)
    assert info.value.path == "audio.volume"
    with pytest.raises(ConfigValidationError) as info:
        load_config(overrides={"physics.wall_velocity_table": [[40, 0.3], [30, 0.4]]}, use_env=False)
    assert info.value.path == "physics.wall_velocity_table"
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigParseError):
        load_config(bad)


def test_parse_override():
    assert parse_override("simulation.bubble_count=5") == ("simulation.bubble_count", 5)
    assert parse_override("output_dir=runs/a") == ("output_dir", "runs/a")
    with pytest.raises(ConfigParseError):
        parse_override("novalue")


def test_events_csv_roundtrip(tmp_path, sim_cfg, window, params):
    sim = simulate(sim_cfg, window, params, 11)
    path = tmp_path / "events.csv"
    write_events_csv(sim.table, path)
    back = read_events_csv(path)
    assert len(back) == len(sim.table)
    for a, b in zip(sim.table, back):
        assert a.id == b.id and a.critical == b.critical
        for key in ("A", "B", "C", "D", "E", "r0"):
            assert getattr(b, key) == float(f"{getattr(a, key):.6f}")
    write_events_csv(back, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_text() == path.read_text()


def test_events_csv_minimal_columns(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("id,A,B,C,D,E\n1,5.6,10,20,7.4,0.53\n")
    assert read_events_csv(path) == [EventRow(1, 5.6, 10.0, 20.0, 7.4, 0.53, 0.0, True)]


def test_simulate_writes_consistent_files(tmp_path):
    assert run("simulate", "--seed", 5, "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    rows = read_events_csv(tmp_path / "events.csv")
    assert summary["events_critical"] == len(rows)
    assert summary["wall_velocity"] == 0.375
    assert len(json.loads((tmp_path / "events.json").read_text())["events"]) == summary["events_placed"]
    curve = read_coverage_csv(tmp_path / "coverage.csv", 10.0)
    assert summary["physical"] == curve.physical
    for r in rows:
        assert r.D == pytest.approx(13.0 - r.A, abs=2e-6)
    for r, nxt in zip(rows, rows[1:]):
        assert r.E == pytest.approx(nxt.A - r.A, abs=2e-6)
    assert rows[-1].E == 0.0


def test_summary_reports_unphysical_run(tmp_path):
    # three bubbles cannot fill the domain by 10 s
    assert run("simulate", "--seed", 1, "--bubble-count", 3, "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["physical"] is False and summary["completion_time"] is None


def test_sonify_table_rows(tmp_path):
    onsets = [5.6, 6.13, 7.92, 8.0, 8.06, 8.77]
    rows = table_from_onsets(onsets, 13.0, xs=[150] * 6, ys=[150] * 6)
    lines = ["id,A,B,C,D,E"] + [f"{r.id},{r.A},{r.B},{r.C},{r.D:.2f},{r.E:.2f}" for r in rows]
    (tmp_path / "events.csv").write_text("\n".join(lines) + "\n")
    t = np.linspace(0, 13, 1301)
    (tmp_path / "coverage.csv").write_text("t,broken_fraction\n" + "".join(f"{x:.6f},1.000000\n" for x in t))
    assert run("sonify", "--out", tmp_path) == 0
    data, sr = read_wav(tmp_path / "bubbles.wav")
    assert sr == 44100 and len(data) == 13 * 44100
    # the grain rises from zero, so its first few samples quantize to 0
    first = np.flatnonzero(data[:, 0])[0]
    assert int(5.6 * sr) <= first <= int(5.6 * sr) + 16


def test_run_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert run("run", "--seed", 42, "--out", tmp_path / name, *SMALL_FRAMES) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 5 + 26
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_seed_changes_output(tmp_path):
    run("simulate", "--seed", 1, "--out", tmp_path / "a")
    run("simulate", "--seed", 2, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "events.csv").read_bytes() != (tmp_path / "b" / "events.csv").read_bytes()


def test_errors_are_json(tmp_path, capsys):
    assert run("simulate", "--bubble-count", -1, "--out", tmp_path) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigValidationError" and err["path"] == "simulation.bubble_count"
    assert run("sonify", "--out", tmp_path / "empty") == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "IoFailure"


def test_potential_and_pdf_outputs(tmp_path):
    assert run("potential", "--out", tmp_path, "--temps", "60,70") == 0
    data = np.loadtxt(tmp_path / "potential.csv", delimiter=",", skiprows=1)
    assert data.shape == (802, 3) and data[0, 2] == 0.0
    assert run("pdf", "--out", tmp_path, "--points", 101) == 0
    time_pdf = np.loadtxt(tmp_path / "pdf_time.csv", delimiter=",", skiprows=1)
    assert time_pdf.shape == (101, 3) and np.all(time_pdf[:, 2] > 0)
    radius_pdf = np.loadtxt(tmp_path / "pdf_radius.csv", delimiter=",", skiprows=1)
    assert radius_pdf.shape == (303, 3)
