"""Image frames of the simulation: white bubbles on grayscale static, as binary PPM."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure, ParameterError
from .stochastic import RngStream, Stream

BROKEN = 255


@dataclass(frozen=True)
class FrameSpec:
    width: int = 300
    height: int = 300
    fps: float = 30.0
    total_duration: float = 13.0
    domain_size: float = 300.0

    def __post_init__(self):
        for name in ("width", "height", "fps", "total_duration", "domain_size"):
            if not getattr(self, name) > 0:
                raise ParameterError(name, "must be > 0")

    @property
    def frame_count(self) -> int:
        return int(round(self.total_duration * self.fps))


def live_radii(events, t: float, wall_speed: float) -> np.ndarray:
    """Radius of every bubble at ``t``; 0 for unborn or vanished ones."""
    out = np.zeros(len(events))
    for i, ev in enumerate(events):
        if t < ev.t_form:
            continue
        grown = wall_speed * (t - ev.t_form)
        out[i] = ev.r0 + grown if ev.critical else max(0.0, ev.r0 - grown)
    return out


def broken_mask(events, t: float, spec: FrameSpec, wall_speed: float) -> np.ndarray:
    """Boolean (height, width) grid of pixels inside a live bubble. Row 0 is the top (y = domain_size)."""
    sx = spec.domain_size / spec.width
    sy = spec.domain_size / spec.height
    xs = (np.arange(spec.width) + 0.5) * sx
    ys = spec.domain_size - (np.arange(spec.height) + 0.5) * sy
    mask = np.zeros((spec.height, spec.width), dtype=bool)
    for ev, r in zip(events, live_radii(events, t, wall_speed)):
        if r <= 0:
            continue
        # only touch the bounding box
        c0 = max(0, int(math.floor((ev.x - r) / sx)))
        c1 = min(spec.width, int(math.ceil((ev.x + r) / sx)) + 1)
        r0 = max(0, int(math.floor((spec.domain_size - ev.y - r) / sy)))
        r1 = min(spec.height, int(math.ceil((spec.domain_size - ev.y + r) / sy)) + 1)
        if c0 < c1 and r0 < r1:
            dx = xs[c0:c1][None, :] - ev.x
            dy = ys[r0:r1][:, None] - ev.y
            mask[r0:r1, c0:c1] |= dx * dx + dy * dy <= r * r
        # the pixel holding the center is lit even when r is below a pixel
        col = min(spec.width - 1, int(ev.x / sx))
        row = min(spec.height - 1, int((spec.domain_size - ev.y) / sy))
        mask[row, col] = True
    return mask


def render_frame(events, t: float, spec: FrameSpec, rng: RngStream, wall_speed: float) -> np.ndarray:
    """Grayscale uint8 frame: static where symmetric, 255 inside live bubbles."""
    if not 0 <= t <= spec.total_duration:
        raise ValueError(f"t={t} outside [0, {spec.total_duration}]")
    static = np.floor(rng.random((spec.height, spec.width)) * 256).astype(np.uint8)
    return np.where(broken_mask(events, t, spec, wall_speed), np.uint8(BROKEN), static)


def ppm_bytes(gray: np.ndarray) -> bytes:
    h, w = gray.shape
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_frame_sequence(events, spec: FrameSpec, out_dir, seed: int, wall_speed: float) -> list[Path]:
    """Write ``frame_000001.ppm`` ... one per 1/fps seconds starting at t = 0.

    Frame k's static comes from its own substream of the frames stream, so
    output does not depend on rendering order.
    """
    out_dir = Path(out_dir)
    base = RngStream(seed, Stream.FRAMES)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for k in range(spec.frame_count):
            t = min(k / spec.fps, spec.total_duration)
            gray = render_frame(events, t, spec, base.substream(k), wall_speed)
            path = out_dir / f"frame_{k + 1:06d}.ppm"
            path.write_bytes(ppm_bytes(gray))
            paths.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write frames to {out_dir}: {exc}") from exc
    return paths


def read_ppm(path) -> np.ndarray:
    """Parse a P6 file written by :func:`ppm_bytes` into an (h, w, 3) uint8 array."""
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P6" or maxval != b"255":
        raise ValueError(f"{path}: not an 8-bit P6 file")
    w, h = (int(v) for v in dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)

