"""Command-line entry point: ``ewbubbles {potential|pdf|simulate|sonify|frames|run}``.

Every subcommand accepts ``--config``, ``--seed``, ``--out`` and a handful of
per-field override flags; ``--set section.key=value`` reaches any other
field. Failures print one JSON object on stderr and exit nonzero (2 for bad
configuration, 1 for anything else).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .audio import render_sonification, write_wav
from .config import Resolved, load_config, parse_override, resolve
from .errors import ConfigError, EWBubblesError, IoFailure
from .frames import write_frame_sequence
from .nucleation import BubbleEvent, CoverageCurve, EventRow, is_physical, nearest_neighbor_spacing, simulate
from .physics import (
    broken_minimum,
    critical_radius,
    critical_temperature,
    potential,
    surface_tension,
    temperature_at,
    wall_velocity,
)
from .stochastic import RngStream, Stream, formation_time_pdf, radius_max, radius_pdf

log = logging.getLogger("ewbubbles")

EVENTS_CSV = "events.csv"
EVENTS_JSON = "events.json"
COVERAGE_CSV = "coverage.csv"
SUMMARY_JSON = "summary.json"
WAV_FILE = "bubbles.wav"
FRAMES_DIR = "frames"
EVENT_FIELDS = ("id", "A", "B", "C", "D", "E", "r0", "critical")


def _f6(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


# --- file formats ----------------------------------------------------------------------


def write_events_csv(rows, path) -> None:
    lines = [",".join(EVENT_FIELDS)]
    for r in rows:
        vals = [_f6(v) for v in (r.A, r.B, r.C, r.D, r.E, r.r0)]
        lines.append(",".join([str(r.id), *vals, "1" if r.critical else "0"]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_events_csv(path) -> list[EventRow]:
    """Parse an events table. ``r0`` and ``critical`` columns are optional."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"A", "B", "C", "D", "E"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        rows = []
        for n, rec in enumerate(reader, start=1):
            crit = rec.get("critical")
            rows.append(
                EventRow(
                    id=int(rec["id"]) if rec.get("id") else n,
                    A=float(rec["A"]),
                    B=float(rec["B"]),
                    C=float(rec["C"]),
                    D=float(rec["D"]),
                    E=float(rec["E"]),
                    r0=float(rec["r0"]) if rec.get("r0") else 0.0,
                    critical=crit is None or crit.strip().lower() in ("1", "true", ""),
                )
            )
    return rows


def write_coverage_csv(curve: CoverageCurve, path) -> None:
    lines = ["t,broken_fraction"]
    lines += [f"{_f6(t)},{_f6(f)}" for t, f in zip(curve.times, curve.broken_fraction)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_coverage_csv(path, deadline: float) -> CoverageCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    curve = CoverageCurve(data[:, 0], data[:, 1], False)
    return CoverageCurve(curve.times, curve.broken_fraction, is_physical(curve, deadline))


def write_events_json(events, res: Resolved, path) -> None:
    doc = {
        "domain_size": res.sim.domain_size,
        "wall_speed_sim": res.sim.wall_speed_sim,
        "total_duration": res.sim.total_duration,
        "events": [asdict(ev) for ev in events],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_events_json(path) -> tuple[list[BubbleEvent], dict]:
    doc = json.loads(Path(path).read_text())
    return [BubbleEvent(**ev) for ev in doc["events"]], doc


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --- subcommands -----------------------------------------------------------------------


def cmd_potential(res: Resolved, args) -> list[Path]:
    t_c = critical_temperature(res.params)
    temps = args.temps or [t_c, res.window.temp_start, res.window.temp_end]
    phi = np.linspace(0.0, args.phi_max, args.phi_points)
    lines = ["phi,temp,V"]
    for temp in temps:
        v = potential(phi, temp, res.params)
        lines += [f"{_f6(p)},{_f6(temp)},{_f6(x)}" for p, x in zip(phi, v)]
    out = res.output_dir / "potential.csv"
    out.write_text("\n".join(lines) + "\n")
    return [out]


def cmd_pdf(res: Resolved, args) -> list[Path]:
    w, cfg = res.window, res.sim
    time_pdf = formation_time_pdf(w, res.params, cfg.time_exponent_scale)
    ts = np.linspace(0.0, w.sim_duration, args.points)
    temps = temperature_at(ts, w)
    lines = ["t,temp,density"] + [f"{_f6(t)},{_f6(T)},{d:.6e}" for t, T, d in zip(ts, temps, time_pdf(ts))]
    time_path = res.output_dir / "pdf_time.csv"
    time_path.write_text("\n".join(lines) + "\n")

    rs = np.linspace(0.0, radius_max(res.params, w), args.points)
    lines = ["temp,r,density"]
    for temp in (w.temp_start, temperature_at(w.sim_duration / 2, w), w.temp_end):
        dens = radius_pdf(temp, res.params, w, cfg.radius_exponent_scale)(rs)
        lines += [f"{_f6(temp)},{_f6(r)},{d:.6e}" for r, d in zip(rs, dens)]
    radius_path = res.output_dir / "pdf_radius.csv"
    radius_path.write_text("\n".join(lines) + "\n")
    return [time_path, radius_path]


def _summary(res: Resolved, sim) -> dict:
    params, w = res.params, res.window
    rc = (critical_radius(w.temp_start, params), critical_radius(w.temp_end, params))
    full = np.nonzero(sim.curve.broken_fraction >= 1.0 - 1e-9)[0]
    try:
        spacing = nearest_neighbor_spacing(sim.events)
    except EWBubblesError:
        spacing = None
    return {
        "seed": res.seed,
        "higgs_mass": res.config.higgs_mass,
        "critical_temperature": critical_temperature(params),
        "broken_minimum_at_tc": float(broken_minimum(critical_temperature(params), params)),
        "surface_tension": surface_tension(params),
        "wall_velocity": wall_velocity(res.config.higgs_mass, res.config.physics.wall_velocity_table),
        "critical_radius_range": [rc[0], rc[1]],
        "critical_radius_range_units": [rc[0] * res.sim.length_scale, rc[1] * res.sim.length_scale],
        "events_placed": len(sim.events),
        "events_critical": len(sim.table),
        "placement_exhausted": sim.placement_exhausted,
        "mean_nn_spacing": spacing,
        "physical": sim.physical,
        "completion_time": float(sim.curve.times[full[0]]) if full.size else None,
    }


def cmd_simulate(res: Resolved, args) -> list[Path]:
    sim = simulate(res.sim, res.window, res.params, res.seed)
    for note in sim.notes:
        log.info("%s", note)
    out = res.output_dir
    paths = [out / EVENTS_CSV, out / EVENTS_JSON, out / COVERAGE_CSV, out / SUMMARY_JSON]
    write_events_csv(sim.table, paths[0])
    write_events_json(sim.events, res, paths[1])
    write_coverage_csv(sim.curve, paths[2])
    _write_json(_summary(res, sim), paths[3])
    return paths


def cmd_sonify(res: Resolved, args) -> list[Path]:
    out = res.output_dir
    events = Path(args.events) if getattr(args, "events", None) else out / EVENTS_CSV
    coverage = Path(args.coverage) if getattr(args, "coverage", None) else out / COVERAGE_CSV
    try:
        rows = read_events_csv(events)
        curve = read_coverage_csv(coverage, res.window.sim_duration)
    except OSError as exc:
        raise IoFailure(f"cannot read sonification input: {exc}") from exc
    rng = RngStream(res.seed, Stream.DUST)
    mix = render_sonification(rows, curve, res.render, rng, res.sim.domain_size, res.config.audio.quantize_pitch)
    path = out / WAV_FILE
    write_wav(mix, res.render, path)
    return [path]


def cmd_frames(res: Resolved, args) -> list[Path]:
    out = res.output_dir
    source = Path(args.events_json) if getattr(args, "events_json", None) else out / EVENTS_JSON
    try:
        events, doc = read_events_json(source)
    except OSError as exc:
        raise IoFailure(f"cannot read {source}: {exc}") from exc
    return write_frame_sequence(events, res.frames, out / FRAMES_DIR, res.seed, doc["wall_speed_sim"])


def cmd_run(res: Resolved, args) -> list[Path]:
    paths = cmd_simulate(res, args)
    paths += cmd_sonify(res, args)
    if res.config.frames.enabled:
        paths += cmd_frames(res, args)
    return paths


COMMANDS = {
    "potential": cmd_potential,
    "pdf": cmd_pdf,
    "simulate": cmd_simulate,
    "sonify": cmd_sonify,
    "frames": cmd_frames,
    "run": cmd_run,
}


# --- argument handling -----------------------------------------------------------------

# flag dest -> dotted config key
FLAG_FIELDS = {
    "seed": "seed",
    "higgs_mass": "higgs_mass",
    "bubble_count": "simulation.bubble_count",
    "wall_speed": "simulation.wall_speed_sim",
    "sample_rate": "audio.sample_rate",
    "fps": "frames.fps",
    "out": "output_dir",
}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: $EWBUBBLES_CONFIG)")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--out", help="output directory")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config field")
    common.add_argument("--higgs-mass", type=float)
    common.add_argument("--bubble-count", type=int)
    common.add_argument("--wall-speed", type=float, help="wall speed in grid units per second")
    common.add_argument("--sample-rate", type=int)
    common.add_argument("--fps", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ewbubbles", description="Bubble nucleation simulation and sonification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", parents=[common], help="write V(phi, T) curves to potential.csv")
    p.add_argument("--temps", type=_float_list, help="comma-separated temperatures in GeV")
    p.add_argument("--phi-max", type=float, default=200.0)
    p.add_argument("--phi-points", type=int, default=401)

    p = sub.add_parser("pdf", parents=[common], help="write the nucleation densities to CSV")
    p.add_argument("--points", type=int, default=501)

    sub.add_parser("simulate", parents=[common], help="generate events, coverage and summary")

    p = sub.add_parser("sonify", parents=[common], help="render the WAV from events and coverage CSVs")
    p.add_argument("--events", help=f"events CSV (default: OUT/{EVENTS_CSV})")
    p.add_argument("--coverage", help=f"coverage CSV (default: OUT/{COVERAGE_CSV})")

    p = sub.add_parser("frames", parents=[common], help="render PPM frames from events.json")
    p.add_argument("--events-json", help=f"events dump (default: OUT/{EVENTS_JSON})")

    sub.add_parser("run", parents=[common], help="simulate, sonify and render frames")
    return parser


def _overrides(args) -> dict:
    overrides = dict(parse_override(item) for item in args.set)
    for dest, key in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _fail(exc: Exception, command: str | None, code: int) -> int:
    err = {"error": type(exc).__name__, "message": getattr(exc, "message", None) or str(exc), "command": command}
    if getattr(exc, "path", ""):
        err["path"] = exc.path
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args))
        res = resolve(cfg)
        res.output_dir.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](res, args)
    except ConfigError as exc:
        return _fail(exc, args.command, 2)
    except (EWBubblesError, OSError, ValueError, KeyError) as exc:
        return _fail(exc, args.command, 1)
    log.info("wrote %d files under %s", len(paths), res.output_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
