"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines are
printed even when output capture is on.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from oracles import dominant_frequency, mc_coverage, overlap_violations_fast

from ewbubbles.audio import (
    RenderSpec,
    chime_envelope,
    comp_gain,
    dust_impulses,
    formant_grains,
    midi_from_y,
    midi_to_hz,
    pan_position,
    render_dust,
    sweep_value,
)
from ewbubbles.errors import PlacementExhausted
from ewbubbles.nucleation import (
    CoverageCurve,
    SimConfig,
    generate_events,
    nearest_neighbor_spacing,
    simulate,
    table_from_onsets,
)
from ewbubbles.physics import (
    PotentialParams,
    TransitionWindow,
    broken_minimum,
    critical_temperature,
    potential,
    wall_velocity,
)
from ewbubbles.stochastic import RngStream, Stream


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} ({detail})")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def default_runs():
    """200 seeded default simulations shared by the spacing and physicality criteria."""
    params = PotentialParams.standard_model()
    window = TransitionWindow(critical_temperature(params))
    start = time.perf_counter()
    sims = [simulate(SimConfig(), window, params, seed) for seed in range(200)]
    return sims, time.perf_counter() - start


def test_criterion_01_critical_temperature(report):
    start = time.perf_counter()
    critical_temperature.cache_clear()
    t_c = critical_temperature(PotentialParams.standard_model())
    heavy_top = critical_temperature(PotentialParams.standard_model(mass_top=165.5))
    calibrated = critical_temperature(PotentialParams.standard_model().calibrated_to(71.4))
    elapsed = time.perf_counter() - start
    ok = abs(t_c - 71.4) <= 0.1 * 71.4 and abs(heavy_top - 71.4) <= 1.0 and abs(calibrated - 71.4) <= 1.0
    ok = ok and elapsed < 1.0
    detail = f"default {t_c:.3f} GeV, m_t=165.5 gives {heavy_top:.3f}, calibrated {calibrated:.6f}, {elapsed:.3f} s"
    report(1, "critical temperature", ok, detail)


def test_criterion_02_degeneracy(report):
    params = PotentialParams.standard_model()
    t_c = critical_temperature(params)
    phi_p = broken_minimum(t_c, params)
    ratio = abs(potential(0.0, t_c, params) - potential(phi_p, t_c, params)) / abs(potential(phi_p / 2, t_c, params))
    report(2, "degenerate minima at T_c", ratio < 1e-6, f"ratio {ratio:.2e}")


def test_criterion_03_wall_velocity(report):
    v = wall_velocity(35.0)
    report(3, "wall velocity at 35 GeV", v == 0.375, f"{v!r}")


def test_criterion_04_spacing(report, default_runs):
    sims, elapsed = default_runs
    spacing = float(np.mean([nearest_neighbor_spacing(s.events) for s in sims]))
    ok = 26.0 <= spacing <= 33.0 and elapsed < 60
    report(4, "mean nearest-neighbor spacing", ok, f"{spacing:.2f} units over {len(sims)} runs, {elapsed:.1f} s")


def test_criterion_05_table_arithmetic(report):
    rows = table_from_onsets([5.6, 6.13, 7.92, 8, 8.06, 8.77], 13.0)
    d_ref = [7.4, 6.87, 5.08, 5, 4.94, 4.23]
    e_ref = [0.53, 1.79, 0.08, 0.06, 0.71, 0]
    d = [r.D for r in rows]
    e = [r.E for r in rows]
    close = np.allclose(d, d_ref, rtol=0, atol=1e-9) and np.allclose(e, e_ref, rtol=0, atol=1e-9)
    shown = [f"{v:.2f}" for v in d] == [f"{v:.2f}" for v in d_ref] and [f"{v:.2f}" for v in e] == [
        f"{v:.2f}" for v in e_ref
    ]
    report(5, "table D and E columns", close and shown, f"D={[round(v, 2) for v in d]} E={[round(v, 2) for v in e]}")


def test_criterion_06_physicality(report, default_runs):
    sims, elapsed = default_runs
    frac = float(np.mean([s.physical for s in sims]))
    ok = 0.0 < frac < 0.5 and elapsed < 60
    report(6, "fraction of physical runs", ok, f"{frac:.3f} over {len(sims)} runs")


def test_criterion_07_birth_non_overlap(report):
    params = PotentialParams.standard_model()
    window = TransitionWindow(critical_temperature(params))
    cfg = SimConfig()
    start = time.perf_counter()
    violations = events = 0
    for seed in range(10_000):
        try:
            placed = generate_events(cfg, window, params, RngStream(seed, Stream.NUCLEATION))
        except PlacementExhausted as exc:
            placed = exc.events
        events += len(placed)
        violations += overlap_violations_fast(placed, cfg.wall_speed_sim)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 300
    report(7, "no bubble born inside a live one", ok, f"{violations} violations in {events} events, {elapsed:.0f} s")


def test_criterion_08_mappings(report):
    env = chime_envelope(5.0, 7.4)
    checks = {
        "comp_gain": (comp_gain(40), comp_gain(60)) == (2.0, 1.0),
        "pan": (pan_position(0.0), pan_position(300.0)) == (-1.0, 1.0),
        "midi": (midi_from_y(0.0), midi_from_y(300.0)) == (40.0, 60.0),
        "sweep": (sweep_value(0.0, 7.4), sweep_value(7.4, 7.4)) == (100.0, 1000.0),
        "envelope": (env(0.0), env(1.0), env(5.0)) == (1.0, 0.3, 5.0 / 7.4),
    }
    failed = [k for k, v in checks.items() if not v]
    report(8, "sonification mapping endpoints", not failed, f"failed: {failed}" if failed else "all exact")


def test_criterion_09_dust(report):
    start = time.perf_counter()
    spec = RenderSpec()
    count = int(np.count_nonzero(dust_impulses(spec.n_samples, 1000.0, spec.sample_rate, RngStream(9, Stream.DUST))))
    t_star = 7.5
    t = np.arange(1301) / 100.0
    curve = CoverageCurve(t, np.clip(t / t_star, 0.0, 1.0), True)
    dust = render_dust(curve, spec, RngStream(9, Stream.DUST))
    after = np.arange(spec.n_samples) / spec.sample_rate > t_star
    silent = bool(np.all(dust[after] == 0.0))
    elapsed = time.perf_counter() - start
    ok = abs(count - 13000) <= 4 * math.sqrt(13000) and silent and elapsed < 10
    report(9, "dust density and silence", ok, f"{count} impulses, silent after {t_star} s: {silent}, {elapsed:.2f} s")


def test_criterion_10_determinism(report, tmp_path):
    env = {k: v for k, v in os.environ.items() if k != "EWBUBBLES_CONFIG"}
    durations = []
    for name in ("a", "b"):
        start = time.perf_counter()
        cmd = [sys.executable, "-m", "ewbubbles", "run", "--seed", "42", "--out", str(tmp_path / name)]
        subprocess.run(cmd, check=True, env=env)
        durations.append(time.perf_counter() - start)
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    frames = [p for p in files if p.suffix == ".ppm"]
    differ = [str(p) for p in files if (tmp_path / "a" / p).read_bytes() != (tmp_path / "b" / p).read_bytes()]
    expected = {"bubbles.wav", "events.csv", "coverage.csv", "summary.json"}
    ok = not differ and len(frames) == 390 and expected <= {str(p) for p in files} and max(durations) < 60
    detail = f"{len(files)} files, {len(frames)} frames, {len(differ)} differ, {max(durations):.1f} s per run"
    report(10, "end-to-end determinism", ok, detail)


def test_criterion_11_coverage_oracle(report):
    params = PotentialParams.standard_model()
    window = TransitionWindow(critical_temperature(params))
    cfg = SimConfig()
    times = np.round(np.arange(0.0, 13.0 + 1e-9, 0.1), 10)
    start = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        sim = simulate(cfg, window, params, 1000 + seed)
        raster = np.interp(times, sim.curve.times, sim.curve.broken_fraction)
        mc = mc_coverage(sim.events, cfg.domain_size, cfg.wall_speed_sim, times, 1_000_000, seed)
        worst = max(worst, float(np.max(np.abs(raster - mc))))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.01 and elapsed < 60
    report(11, "raster coverage vs Monte Carlo", ok, f"sup-norm {worst:.4f} over 10 sets, {elapsed:.1f} s")


def test_criterion_12_spectral_tracking(report):
    start = time.perf_counter()
    sr = 44100
    f0 = midi_to_hz(40)
    sweep = 7.4
    mono = formant_grains(f0, sweep, sweep, sr)
    errors = []
    for probe in (1.0, 3.7, 6.5):
        peak = dominant_frequency(mono, sr, probe, 8, f0)
        errors.append(float(abs(peak - sweep_value(probe, sweep)) / f0))
    elapsed = time.perf_counter() - start
    ok = max(errors) <= 1.0 and elapsed < 10
    detail = f"peak offsets {[round(e, 2) for e in errors]} bins (bin = f0 = {f0:.1f} Hz), {elapsed:.2f} s"
    report(12, "formant peak tracks the sweep", ok, detail)
