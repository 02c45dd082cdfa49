"""Seedable random streams and inverse-transform sampling from tabulated densities.

Every random draw in the package goes through :class:`RngStream`. A stream is
a numpy ``PCG64`` generator seeded from ``SeedSequence(seed, spawn_key=(stream
id, ...))``, so streams with different purpose tags never share state and the
same ``(seed, stream)`` pair replays the same sequence on any platform. Only
``Generator.random`` (53-bit uniform doubles) is used.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import NegativeDensity, ZeroMass
from .physics import (
    PotentialParams,
    TransitionWindow,
    critical_radius,
    delta_v,
    surface_tension,
    temperature_at,
)

DEFAULT_KNOTS = 1024
# Softening of the Boltzmann exponents; 1.0 reproduces the bare physical forms.
DEFAULT_TIME_EXPONENT_SCALE = 100.0
DEFAULT_RADIUS_EXPONENT_SCALE = 1000.0


class Stream(enum.IntEnum):
    NUCLEATION = 0
    DUST = 1
    FRAMES = 2


class RngStream:
    """Uniform random source tied to a seed and a purpose tag.

    >>> a = RngStream(42, Stream.DUST)
    >>> b = RngStream(42, Stream.DUST)
    >>> a.random() == b.random()
    True
    """

    def __init__(self, seed: int, stream_id: Stream | int, index: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.stream_id = Stream(stream_id)
        self.index = tuple(int(i) for i in index)
        seq = np.random.SeedSequence(seed, spawn_key=(int(self.stream_id), *self.index))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id.name}, index={self.index})"

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, low, high, size=None):
        return low + (high - low) * self._gen.random(size)

    def substream(self, *index: int) -> "RngStream":
        """Independent stream derived from this one's seed, tag and ``index``.

        Does not consume from this stream.
        """
        return RngStream(self.seed, self.stream_id, self.index + tuple(index))


@dataclass(frozen=True, eq=False)
class TabulatedPdf:
    """Knot table of a density with its trapezoid-accumulated CDF (normalized)."""

    domain: tuple[float, float]
    x: np.ndarray
    density: np.ndarray
    cdf_values: np.ndarray

    def pdf(self, x):
        return np.interp(x, self.x, self.density, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(x, self.x, self.cdf_values, left=0.0, right=1.0)

    def ppf(self, u):
        """Inverse CDF, linear between knots."""
        return np.interp(u, self.cdf_values, self.x)


def build_sampler(pdf_fn: Callable, domain: tuple[float, float], knot_count: int = DEFAULT_KNOTS) -> TabulatedPdf:
    """Tabulate ``pdf_fn`` on ``knot_count`` evenly spaced knots over ``domain``."""
    if knot_count < 16:
        raise ValueError(f"knot_count must be >= 16, got {knot_count}")
    lo, hi = float(domain[0]), float(domain[1])
    if not hi > lo:
        raise ValueError(f"empty domain {domain}")
    x = np.linspace(lo, hi, knot_count)
    try:
        dens = np.asarray(pdf_fn(x), dtype=float)
        if dens.shape != x.shape:
            raise ValueError
    except (TypeError, ValueError):
        dens = np.array([float(pdf_fn(xi)) for xi in x])
    if not np.all(np.isfinite(dens)):
        raise ZeroMass("density is not finite on the domain")
    if dens.min() < -1e-12:
        raise NegativeDensity(f"density {dens.min():.3e} < 0 at x={x[np.argmin(dens)]}")
    dens = np.clip(dens, 0.0, None)
    cum = integrate.cumulative_trapezoid(dens, x, initial=0.0)
    mass = cum[-1]
    if not mass > 0:
        raise ZeroMass("density integrates to zero over the domain")
    cdf = cum / mass
    cdf[-1] = 1.0
    return TabulatedPdf((lo, hi), x, dens / mass, cdf)


def sample(tab: TabulatedPdf, rng: RngStream, size=None):
    """Inverse-CDF draw(s) from ``tab``."""
    u = rng.random(size)
    out = tab.ppf(u)
    return float(out) if size is None else out


@dataclass(frozen=True, eq=False)
class Density:
    """A normalized density on ``domain``; call it like a function."""

    fn: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    norm: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        inside = (x >= lo) & (x <= hi)
        out = np.where(inside, self.fn(np.clip(x, lo, hi)), 0.0) / self.norm
        return out if out.ndim else float(out)


def _normalized(fn, domain, points=2049) -> Density:
    x = np.linspace(domain[0], domain[1], points)
    norm = integrate.simpson(fn(x), x=x)
    if not norm > 0:
        raise ZeroMass("density integrates to zero over the domain")
    return Density(fn, domain, float(norm))


def radius_max(params: PotentialParams, window: TransitionWindow) -> float:
    """Upper end of the initial-radius domain: twice R_c at the window's coldest point."""
    return 2.0 * critical_radius(window.temp_end, params)


def radius_pdf(
    temp: float,
    params: PotentialParams,
    window: TransitionWindow,
    exponent_scale: float = DEFAULT_RADIUS_EXPONENT_SCALE,
) -> Density:
    """Initial-radius density at ``temp``: Boltzmann weight of the bubble free energy.

    P(r) ~ exp(-dF(r, T) / (s T)),  dF = 4 pi sigma r^2 - (4/3) pi dV(T) r^3,
    on (0, r_max] with r_max = 2 R_c(T_end). Radii are in GeV^-1.
    """
    critical_radius(temp, params)  # DivergentRadius for temp >= T_c
    sigma = surface_tension(params)
    dv = delta_v(temp, params)
    r_max = radius_max(params, window)
    beta = 1.0 / (exponent_scale * temp)

    def free_energy(r):
        return 4 * math.pi * sigma * r * r - (4.0 / 3.0) * math.pi * dv * r**3

    # dF is 0 at r=0, rises to the barrier, then falls; its minimum on the domain is at an end.
    shift = min(0.0, free_energy(r_max)) * beta

    def fn(r):
        return np.exp(-free_energy(np.asarray(r, dtype=float)) * beta + shift)

    return _normalized(fn, (0.0, r_max))


def nucleation_exponent(temp, params: PotentialParams):
    """Thin-wall S3/T = 16 pi sigma^3 / (3 dV^2 T)."""
    sigma = surface_tension(params)
    return 16 * math.pi * sigma**3 / (3 * np.asarray(delta_v(temp, params)) ** 2 * temp)


def formation_time_pdf(
    window: TransitionWindow,
    params: PotentialParams,
    exponent_scale: float = DEFAULT_TIME_EXPONENT_SCALE,
) -> Density:
    """Formation-time density over [0, sim_duration] seconds.

    P(t) ~ T^4 exp(-S3/T / s) with T = T(t). Increasing in t: the exponent
    falls as the universe cools.
    """
    s_min = float(nucleation_exponent(window.temp_end, params))

    def fn(t):
        temp = temperature_at(np.asarray(t, dtype=float), window)
        rel = temp / window.temp_start
        return rel**4 * np.exp(-(nucleation_exponent(temp, params) - s_min) / exponent_scale)

    return _normalized(fn, (0.0, window.sim_duration))
