"""Offline rendering of the bubble sonification.

Each growing bubble becomes a formant "chime": x position -> equal-power
pan, y position -> pitch (MIDI 40..60), a formant sweep 100 Hz -> 1000 Hz,
and a cubic intensity envelope. Under the chimes runs a bed of random
impulses whose level follows the fraction of space still in the symmetric
phase. Buffers are float64 arrays of shape (n_samples, 2).
"""

from __future__ import annotations

import math
import wave
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IoFailure, NonPositiveDuration, OutOfDomain, OutOfRange, ParameterError
from .nucleation import CoverageCurve, EventRow
from .stochastic import RngStream

MIDI_LOW = 40
MIDI_HIGH = 60
SWEEP_LOW = 100.0
SWEEP_HIGH = 1000.0
ENVELOPE_DIP = 0.3
DIP_TIME = 1.0


@dataclass(frozen=True)
class RenderSpec:
    sample_rate: int = 44100
    channels: int = 2
    bit_depth: int = 16
    total_duration: float = 13.0
    master_peak: float = 0.9
    dust_density: float = 1000.0

    def __post_init__(self):
        if self.sample_rate < 8000:
            raise ParameterError("sample_rate", "must be >= 8000")
        if self.channels != 2:
            raise ParameterError("channels", "only stereo output is supported")
        if self.bit_depth != 16:
            raise ParameterError("bit_depth", "only 16-bit PCM is supported")
        if not self.total_duration > 0:
            raise ParameterError("total_duration", "must be > 0")
        if not 0 < self.master_peak <= 1:
            raise ParameterError("master_peak", "must be in (0, 1]")
        if not 0 <= self.dust_density < self.sample_rate:
            raise ParameterError("dust_density", "must be in [0, sample_rate)")

    @property
    def n_samples(self) -> int:
        return int(round(self.total_duration * self.sample_rate))


# --- parameter mappings -------------------------------------------------------------


def pan_position(x: float, domain_size: float = 300.0) -> float:
    if not 0 <= x <= domain_size:
        raise OutOfDomain(f"x={x} outside [0, {domain_size}]")
    return 2.0 * x / domain_size - 1.0


def equal_power_gains(pan: float) -> tuple[float, float]:
    angle = (pan + 1.0) * math.pi / 4.0
    return math.cos(angle), math.sin(angle)


def midi_from_y(y: float, domain_size: float = 300.0, quantize: bool = True) -> float:
    if not 0 <= y <= domain_size:
        raise OutOfDomain(f"y={y} outside [0, {domain_size}]")
    m = MIDI_LOW + (MIDI_HIGH - MIDI_LOW) * y / domain_size
    return float(round(m)) if quantize else m


def midi_to_hz(m: float) -> float:
    return 440.0 * 2.0 ** ((m - 69.0) / 12.0)


def comp_gain(m: float) -> float:
    """Loudness compensation: 2x at the lowest note, 1x at the highest, linear between."""
    if not MIDI_LOW <= m <= MIDI_HIGH:
        raise OutOfRange(f"MIDI note {m} outside [{MIDI_LOW}, {MIDI_HIGH}]")
    return 2.0 - (m - MIDI_LOW) / (MIDI_HIGH - MIDI_LOW)


def sweep_value(t_local, sweep_duration: float):
    """Exponential 100 -> 1000 Hz ramp over ``sweep_duration``, held afterwards."""
    frac = np.minimum(np.asarray(t_local, dtype=float), sweep_duration) / sweep_duration
    out = SWEEP_LOW * (SWEEP_HIGH / SWEEP_LOW) ** frac
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Envelope:
    """Breakpoint envelope with cubic segments v0 + (v1 - v0) u^3."""

    breakpoints: tuple[tuple[float, float], ...]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        bp = self.breakpoints
        out = np.full(t.shape, bp[-1][1])
        out = np.where(t <= bp[0][0], bp[0][1], out)
        for (t0, v0), (t1, v1) in zip(bp[:-1], bp[1:]):
            seg = (t >= t0) & (t <= t1)
            u = (t[seg] - t0) / (t1 - t0)
            out[seg] = v0 + (v1 - v0) * u**3
        return out if out.ndim else float(out)


def chime_envelope(d_own: float, d_max: float) -> Envelope:
    if not d_own > 0 or not d_max > 0:
        raise NonPositiveDuration(f"durations must be positive (d_own={d_own}, d_max={d_max})")
    if d_max < d_own:
        raise ValueError(f"d_max={d_max} < d_own={d_own}")
    end = (d_own, d_own / d_max)
    if d_own <= DIP_TIME:
        return Envelope(((0.0, 1.0), end))
    return Envelope(((0.0, 1.0), (DIP_TIME, ENVELOPE_DIP), end))


@dataclass(frozen=True)
class ChimeVoice:
    onset: float
    pan: float
    midi: float
    fundamental: float
    sweep_duration: float
    voice_duration: float
    env: Envelope
    comp_gain: float


def voices_from_table(rows: Sequence[EventRow], domain_size: float = 300.0, quantize: bool = True) -> list[ChimeVoice]:
    """One chime per table row; the first row's D sets every voice's sweep time."""
    if not rows:
        return []
    d_max = rows[0].D
    voices = []
    for row in rows:
        m = midi_from_y(row.C, domain_size, quantize)
        voices.append(
            ChimeVoice(
                onset=row.A,
                pan=pan_position(row.B, domain_size),
                midi=m,
                fundamental=midi_to_hz(m),
                sweep_duration=d_max,
                voice_duration=row.D,
                env=chime_envelope(row.D, d_max),
                comp_gain=comp_gain(m),
            )
        )
    return voices


# --- synthesis ------------------------------------------------------------------------


def formant_grains(fundamental: float, sweep_duration: float, duration: float, sample_rate: int) -> np.ndarray:
    """Mono formant oscillator: one windowed sine grain per fundamental period.

    Each grain is a sine at the current formant frequency under a raised
    cosine 2 / f_pw seconds long, where the pulse-width frequency f_pw follows
    the same sweep as the formant. Overlapping grains are scaled down so the
    train stays near unit amplitude.
    """
    n = int(round(duration * sample_rate))
    out = np.zeros(n)
    if n == 0:
        return out
    period = 1.0 / fundamental
    for k in range(int(math.ceil(duration * fundamental))):
        start = k * period
        f = sweep_value(start, sweep_duration)
        width = 2.0 / f
        first = int(math.ceil(start * sample_rate))
        last = min(n - 1, int(math.floor((start + width) * sample_rate)))
        if first > last:
            continue
        idx = np.arange(first, last + 1)
        s = idx / sample_rate - start
        grain = np.sin(2 * math.pi * f * s) * 0.5 * (1.0 - np.cos(2 * math.pi * s / width))
        out[first : last + 1] += grain / max(1.0, width * fundamental)
    return out


def render_chime(voice: ChimeVoice, spec: RenderSpec) -> np.ndarray:
    n = int(round(voice.voice_duration * spec.sample_rate))
    if n <= 0:
        return np.zeros((0, 2))
    mono = formant_grains(voice.fundamental, voice.sweep_duration, voice.voice_duration, spec.sample_rate)
    t = np.arange(n) / spec.sample_rate
    mono *= voice.env(t) * voice.comp_gain
    left, right = equal_power_gains(voice.pan)
    return np.column_stack((mono * left, mono * right))


def dust_impulses(n: int, density: float, sample_rate: int, rng: RngStream) -> np.ndarray:
    """Random bipolar impulses: on average ``density`` per second, amplitudes uniform in (-1, 1)."""
    hits = rng.random(n) < density / sample_rate
    out = np.zeros(n)
    out[hits] = rng.uniform(-1.0, 1.0, int(hits.sum()))
    return out


def dust_envelope(curve: CoverageCurve, t) -> np.ndarray:
    """Symmetric-phase fraction, linearly interpolated between curve samples."""
    return np.interp(t, curve.times, 1.0 - curve.broken_fraction)


def render_dust(curve: CoverageCurve, spec: RenderSpec, rng: RngStream) -> np.ndarray:
    n = spec.n_samples
    impulses = dust_impulses(n, spec.dust_density, spec.sample_rate, rng)
    mono = impulses * dust_envelope(curve, np.arange(n) / spec.sample_rate)
    return np.column_stack((mono, mono))


def mix_master(chimes: Iterable[tuple[float, np.ndarray]], dust: np.ndarray | None, spec: RenderSpec) -> np.ndarray:
    """Sum chimes at their onset samples (in the given order), then dust; scale down only on overflow."""
    n = spec.n_samples
    mix = np.zeros((n, 2))
    for onset, buf in chimes:
        start = int(math.floor(onset * spec.sample_rate))
        if start >= n or len(buf) == 0:
            continue
        stop = min(n, start + len(buf))
        mix[start:stop] += buf[: stop - start]
    if dust is not None:
        mix[: len(dust)] += dust[:n]
    peak = float(np.max(np.abs(mix))) if n else 0.0
    if peak > spec.master_peak:
        mix *= spec.master_peak / peak
    return mix


def render_sonification(
    rows: Sequence[EventRow],
    curve: CoverageCurve,
    spec: RenderSpec,
    rng: RngStream,
    domain_size: float = 300.0,
    quantize: bool = True,
) -> np.ndarray:
    """Full stereo mix for an event table and coverage curve."""
    voices = voices_from_table(rows, domain_size, quantize)
    chimes = [(v.onset, render_chime(v, spec)) for v in voices]
    return mix_master(chimes, render_dust(curve, spec, rng), spec)


# --- WAV I/O --------------------------------------------------------------------------


def to_pcm16(buffer: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(buffer) * 32767.0), -32768, 32767).astype("<i2")


def write_wav(buffer: np.ndarray, spec: RenderSpec, path) -> None:
    """16-bit little-endian PCM, interleaved L/R."""
    buffer = np.asarray(buffer, dtype=float)
    if not np.all(np.isfinite(buffer)):
        raise ValueError("buffer contains non-finite samples")
    frames = to_pcm16(buffer.reshape(-1, spec.channels))
    try:
        with open(path, "wb") as raw, wave.open(raw, "wb") as fh:
            fh.setnchannels(spec.channels)
            fh.setsampwidth(2)
            fh.setframerate(spec.sample_rate)
            fh.writeframes(frames.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM file back as floats in [-1, 1] (divided by 32767)."""
    with wave.open(str(path), "rb") as fh:
        if fh.getsampwidth() != 2:
            raise ValueError("only 16-bit PCM is supported")
        data = np.frombuffer(fh.readframes(fh.getnframes()), dtype="<i2")
        return data.reshape(-1, fh.getnchannels()) / 32767.0, fh.getframerate()
