"""Bubble event generation, radius evolution, coverage and the exported event table.

Grid lengths are abstract "units" on a square domain (300 x 300 by default);
physical radii in GeV^-1 are mapped onto it by ``SimConfig.length_scale``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import BeforeFormation, ParameterError, PlacementExhausted, TooFewEvents
from .physics import PotentialParams, TransitionWindow, critical_radius, temperature_at
from .stochastic import (
    DEFAULT_RADIUS_EXPONENT_SCALE,
    DEFAULT_TIME_EXPONENT_SCALE,
    RngStream,
    Stream,
    build_sampler,
    formation_time_pdf,
    radius_max,
    radius_pdf,
    sample,
)

log = logging.getLogger(__name__)

FULL_COVERAGE = 1.0 - 1e-9


@dataclass(frozen=True)
class SimConfig:
    domain_size: float = 300.0
    bubble_count: int = 30
    wall_speed_sim: float = 15.0
    total_duration: float = 13.0
    coverage_rate: float = 100.0
    max_placement_attempts: int = 1000
    # position-only retries before the radius is redrawn too
    position_tries: int = 100
    coverage_cells: int = 300
    # grid units per GeV^-1
    length_scale: float = 4.0
    time_exponent_scale: float = DEFAULT_TIME_EXPONENT_SCALE
    radius_exponent_scale: float = DEFAULT_RADIUS_EXPONENT_SCALE

    def __post_init__(self):
        checks = (
            ("domain_size", self.domain_size > 0, "must be > 0"),
            ("bubble_count", self.bubble_count >= 0, "must be >= 0"),
            ("wall_speed_sim", self.wall_speed_sim > 0, "must be > 0"),
            ("total_duration", self.total_duration > 0, "must be > 0"),
            ("coverage_rate", self.coverage_rate > 0, "must be > 0"),
            ("max_placement_attempts", self.max_placement_attempts >= 1, "must be >= 1"),
            ("position_tries", self.position_tries >= 1, "must be >= 1"),
            ("coverage_cells", self.coverage_cells >= 1, "must be >= 1"),
            ("length_scale", self.length_scale > 0, "must be > 0"),
            ("time_exponent_scale", self.time_exponent_scale > 0, "must be > 0"),
            ("radius_exponent_scale", self.radius_exponent_scale > 0, "must be > 0"),
        )
        for name, ok, msg in checks:
            if not ok:
                raise ParameterError(name, msg)


@dataclass(frozen=True)
class BubbleEvent:
    id: int
    t_form: float
    x: float
    y: float
    r0: float
    critical: bool

    @property
    def fate(self) -> str:
        return "grows" if self.critical else "shrinks"


@dataclass(frozen=True, eq=False)
class CoverageCurve:
    times: np.ndarray
    broken_fraction: np.ndarray
    physical: bool


@dataclass(frozen=True)
class EventRow:
    """One line of the exported table: A=onset, B=x, C=y, D=time left, E=gap to next."""

    id: int
    A: float
    B: float
    C: float
    D: float
    E: float
    r0: float = 0.0
    critical: bool = True


def radius_at(ev: BubbleEvent, t: float, cfg: SimConfig) -> float:
    if t < ev.t_form:
        raise BeforeFormation(f"bubble {ev.id} forms at {ev.t_form} s, asked for t={t}")
    grown = cfg.wall_speed_sim * (t - ev.t_form)
    if ev.critical:
        return ev.r0 + grown
    return max(0.0, ev.r0 - grown)


def _live_radii(t, t_form, r0, critical, speed):
    grown = speed * (t - t_form)
    return np.where(critical, r0 + grown, np.maximum(0.0, r0 - grown))


def generate_events(
    cfg: SimConfig,
    window: TransitionWindow,
    params: PotentialParams,
    rng: RngStream,
) -> list[BubbleEvent]:
    """Draw ``cfg.bubble_count`` bubbles, rejecting any that would overlap a live disk.

    Formation times come from the formation-time density and are sorted;
    radii from the initial-radius density at each bubble's temperature;
    centers uniformly over the square. A rejected candidate keeps its time
    and redraws its position (and, after ``position_tries`` failures, its
    radius as well). Raises PlacementExhausted, carrying the bubbles placed
    so far, when ``max_placement_attempts`` candidates in a row are rejected.
    """
    if cfg.bubble_count == 0:
        return []
    size = cfg.domain_size
    times_pdf = formation_time_pdf(window, params, cfg.time_exponent_scale)
    times_tab = build_sampler(times_pdf, times_pdf.domain)
    times = np.sort(sample(times_tab, rng, cfg.bubble_count))
    r_max = radius_max(params, window)

    t_arr = np.empty(cfg.bubble_count)
    x_arr = np.empty(cfg.bubble_count)
    y_arr = np.empty(cfg.bubble_count)
    r_arr = np.empty(cfg.bubble_count)
    c_arr = np.zeros(cfg.bubble_count, dtype=bool)
    events: list[BubbleEvent] = []

    for n, t in enumerate(times):
        t = float(t)
        temp = temperature_at(t, window)
        radius_tab = build_sampler(radius_pdf(temp, params, window, cfg.radius_exponent_scale), (0.0, r_max))
        rc = critical_radius(temp, params) * cfg.length_scale

        def draw_radius():
            r = 0.0
            while r <= 0.0:
                r = sample(radius_tab, rng) * cfg.length_scale
            return r

        r0 = draw_radius()
        live = _live_radii(t, t_arr[:n], r_arr[:n], c_arr[:n], cfg.wall_speed_sim)
        keep = live > 0
        lx, ly, lr = x_arr[:n][keep], y_arr[:n][keep], live[keep]
        for attempt in range(cfg.max_placement_attempts):
            if attempt >= cfg.position_tries:
                r0 = draw_radius()
            x, y = rng.uniform(0.0, size, 2)
            if np.all(np.hypot(lx - x, ly - y) >= r0 + lr):
                break
        else:
            raise PlacementExhausted(
                f"no room for bubble {n + 1} at t={t:.4f} s after {cfg.max_placement_attempts} attempts",
                events,
            )
        t_arr[n], x_arr[n], y_arr[n], r_arr[n], c_arr[n] = t, x, y, r0, r0 > rc
        events.append(BubbleEvent(n + 1, t, float(x), float(y), float(r0), bool(r0 > rc)))
    return events


def coverage_timeline(events, cfg: SimConfig, deadline: float = 10.0) -> CoverageCurve:
    """Broken-phase area fraction sampled at ``cfg.coverage_rate`` Hz.

    Counts raster cells whose centers lie inside at least one growing
    bubble; shrinking (subcritical) bubbles never contribute.
    """
    n_samples = int(round(cfg.total_duration * cfg.coverage_rate)) + 1
    times = np.arange(n_samples) / cfg.coverage_rate
    cells = cfg.coverage_cells
    centers = (np.arange(cells) + 0.5) * (cfg.domain_size / cells)
    cx, cy = np.meshgrid(centers, centers)
    # earliest time each cell center is reached by some growing wall
    reached = np.full(cx.shape, np.inf)
    for ev in events:
        if not ev.critical:
            continue
        dist = np.hypot(cx - ev.x, cy - ev.y)
        np.minimum(reached, ev.t_form + np.maximum(dist - ev.r0, 0.0) / cfg.wall_speed_sim, out=reached)
    order = np.sort(reached, axis=None)
    covered = np.searchsorted(order, times, side="right")
    fraction = covered / order.size
    curve = CoverageCurve(times, fraction, False)
    return CoverageCurve(times, fraction, is_physical(curve, deadline))


def is_physical(curve: CoverageCurve, deadline: float = 10.0) -> bool:
    """True when the whole domain is broken at some sample no later than ``deadline``."""
    done = (curve.broken_fraction >= FULL_COVERAGE) & (curve.times <= deadline)
    return bool(np.any(done))


def nearest_neighbor_spacing(events) -> float:
    """Mean distance from each bubble center to its nearest neighbor."""
    if len(events) < 2:
        raise TooFewEvents("need at least two events")
    pts = np.array([(ev.x, ev.y) for ev in events])
    dist = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    np.fill_diagonal(dist, np.inf)
    return float(dist.min(axis=1).mean())


def to_event_table(events, total_duration: float) -> list[EventRow]:
    """Rows for the growing bubbles, ordered by onset."""
    crit = sorted((ev for ev in events if ev.critical), key=lambda ev: (ev.t_form, ev.id))
    rows = []
    for i, ev in enumerate(crit):
        gap = crit[i + 1].t_form - ev.t_form if i + 1 < len(crit) else 0.0
        rows.append(EventRow(ev.id, ev.t_form, ev.x, ev.y, total_duration - ev.t_form, gap, ev.r0, True))
    return rows


def table_from_onsets(onsets, total_duration: float, xs=None, ys=None) -> list[EventRow]:
    """Build table rows directly from onset times (and optional positions)."""
    n = len(onsets)
    xs = [0.0] * n if xs is None else list(xs)
    ys = [0.0] * n if ys is None else list(ys)
    events = [BubbleEvent(i + 1, float(a), xs[i], ys[i], 1.0, True) for i, a in enumerate(onsets)]
    return to_event_table(events, total_duration)


@dataclass
class Simulation:
    events: list[BubbleEvent]
    table: list[EventRow]
    curve: CoverageCurve
    placement_exhausted: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def physical(self) -> bool:
        return self.curve.physical


def simulate(cfg: SimConfig, window: TransitionWindow, params: PotentialParams, seed: int) -> Simulation:
    """Run event generation and coverage from one seed.

    Exhausted placement means no symmetric phase was left to nucleate in;
    the bubbles placed up to then are kept and the run continues.
    """
    rng = RngStream(seed, Stream.NUCLEATION)
    notes = []
    try:
        events = generate_events(cfg, window, params, rng)
        exhausted = False
    except PlacementExhausted as exc:
        log.info("seed %d: %s", seed, exc)
        events, exhausted = exc.events, True
        notes.append(str(exc))
    curve = coverage_timeline(events, cfg, deadline=window.sim_duration)
    return Simulation(events, to_event_table(events, cfg.total_duration), curve, exhausted, notes)
