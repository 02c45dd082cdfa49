"""Finite-temperature Higgs potential and the thin-wall quantities built on it.

The potential is the one-loop high-temperature quartic

    V(phi, T) = D (T^2 - T0^2) phi^2 - E T phi^3 + (lambda / 4) phi^4

with V(0, T) = 0 as the reference level. Energies are in GeV, lengths in
GeV^-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import (
    DivergentRadius,
    EmptyTable,
    NoBrokenMinimum,
    NoTransition,
    OutOfWindow,
    ParameterError,
    QuadratureFailure,
)

DEFAULT_WALL_VELOCITY_TABLE = ((20.0, 0.30), (35.0, 0.375), (50.0, 0.45))


@dataclass(frozen=True)
class PotentialParams:
    higgs_mass: float
    vev: float
    mass_w: float
    mass_z: float
    mass_top: float
    coeff_d: float
    coeff_e: float
    coeff_t0_sq: float
    coeff_lambda: float

    def __post_init__(self):
        for name in ("higgs_mass", "vev", "mass_w", "mass_z", "mass_top"):
            if not getattr(self, name) > 0:
                raise ParameterError(name, "must be strictly positive")
        if not self.coeff_d > 0:
            raise ParameterError("coeff_d", "must be > 0")
        if not self.coeff_lambda > 0:
            raise ParameterError("coeff_lambda", "must be > 0")
        if self.coeff_e < 0:
            raise ParameterError("coeff_e", "must be >= 0")

    @classmethod
    def standard_model(
        cls,
        higgs_mass=35.0,
        vev=246.0,
        mass_w=80.4,
        mass_z=91.2,
        mass_top=120.0,
        **overrides,
    ) -> "PotentialParams":
        """Coefficients from the gauge boson and top masses.

        Any of ``coeff_d``, ``coeff_e``, ``coeff_t0_sq``, ``coeff_lambda``
        may be passed to replace the derived value (``None`` keeps it).
        """
        v2 = vev * vev
        d = (2 * mass_w**2 + mass_z**2 + 2 * mass_top**2) / (8 * v2)
        e = (2 * mass_w**3 + mass_z**3) / (4 * math.pi * v2 * vev)
        b = 3 / (64 * math.pi**2 * v2 * v2) * (2 * mass_w**4 + mass_z**4 - 4 * mass_top**4)
        coeffs = {
            "coeff_d": d,
            "coeff_e": e,
            "coeff_t0_sq": (higgs_mass**2 - 8 * b * v2) / (4 * d),
            "coeff_lambda": higgs_mass**2 / (2 * v2),
        }
        for key, value in overrides.items():
            if key not in coeffs:
                raise TypeError(f"unknown coefficient override {key!r}")
            if value is not None:
                coeffs[key] = float(value)
        return cls(higgs_mass, vev, mass_w, mass_z, mass_top, **coeffs)

    def calibrated_to(self, t_c: float) -> "PotentialParams":
        """Copy with ``coeff_t0_sq`` chosen so the critical temperature is ``t_c``."""
        ld = self.coeff_lambda * self.coeff_d
        if ld <= self.coeff_e**2:
            raise NoTransition("lambda*D <= E^2: minima never become degenerate")
        return replace(self, coeff_t0_sq=t_c**2 * (ld - self.coeff_e**2) / ld)


def potential(phi, temp, params: PotentialParams):
    phi = np.asarray(phi, dtype=float)
    temp = np.asarray(temp, dtype=float)
    p = params
    quad = p.coeff_d * (temp * temp - p.coeff_t0_sq)
    return phi * phi * (quad - p.coeff_e * temp * phi + 0.25 * p.coeff_lambda * phi * phi)


def potential_slope(phi, temp, params: PotentialParams):
    """dV/dphi."""
    phi = np.asarray(phi, dtype=float)
    temp = np.asarray(temp, dtype=float)
    p = params
    quad = p.coeff_d * (temp * temp - p.coeff_t0_sq)
    return phi * (2 * quad - 3 * p.coeff_e * temp * phi + p.coeff_lambda * phi * phi)


def broken_minimum(temp, params: PotentialParams):
    """Location of the nonzero local minimum of V at ``temp``."""
    temp = np.asarray(temp, dtype=float)
    p = params
    b = p.coeff_e * temp
    a = p.coeff_d * (temp * temp - p.coeff_t0_sq)
    disc = 9 * b * b - 8 * p.coeff_lambda * a
    if np.any(disc < 0):
        raise NoBrokenMinimum(f"no second minimum at T={temp} GeV (above the spinodal)")
    root = (3 * b + np.sqrt(disc)) / (2 * p.coeff_lambda)
    return root if root.ndim else float(root)


@lru_cache(maxsize=64)
def critical_temperature(params: PotentialParams) -> float:
    """Temperature where the symmetric and broken minima are degenerate.

    Solves E^2 T^2 = lambda D (T^2 - T0^2) by bisection on [T0, 5 T0].
    """
    p = params
    if p.coeff_e <= 0 or p.coeff_t0_sq <= 0:
        raise NoTransition("need coeff_e > 0 and coeff_t0_sq > 0 for a first-order transition")
    ld = p.coeff_lambda * p.coeff_d

    def gap(t):
        return p.coeff_e**2 * t * t - ld * (t * t - p.coeff_t0_sq)

    lo = math.sqrt(p.coeff_t0_sq)
    hi = 5 * lo
    if gap(hi) >= 0:
        raise NoTransition("no degenerate-minima temperature in [T0, 5 T0]")
    return float(optimize.bisect(gap, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200))


def delta_v(temp, params: PotentialParams):
    """V(0, T) - V(phi_+, T): free-energy gain per unit volume in the broken phase."""
    dv = -potential(broken_minimum(temp, params), temp, params)
    return dv if dv.ndim else float(dv)


@lru_cache(maxsize=64)
def surface_tension(params: PotentialParams) -> float:
    """Wall tension at T_c: integral of sqrt(2 V) between the degenerate minima."""
    t_c = critical_temperature(params)
    phi_max = broken_minimum(t_c, params)
    probe = potential(np.linspace(0.0, phi_max, 257), t_c, params)
    scale = np.max(np.abs(probe))
    if probe.min() < -1e-9 * scale:
        raise QuadratureFailure(f"V(phi, T_c) < 0 inside the barrier (min {probe.min():.3e})")

    def integrand(phi):
        return math.sqrt(max(2.0 * float(potential(phi, t_c, params)), 0.0))

    sigma, _ = integrate.quad(integrand, 0.0, phi_max, epsabs=0.0, epsrel=1e-10, limit=200)
    if not sigma > 0:
        raise QuadratureFailure("surface tension integral is not positive")
    return sigma


def critical_radius(temp, params: PotentialParams):
    """Thin-wall critical radius 2 sigma / dV(T), in GeV^-1."""
    t_c = critical_temperature(params)
    if np.any(np.asarray(temp) >= t_c):
        raise DivergentRadius(f"critical radius diverges for T >= T_c = {t_c} GeV")
    return 2.0 * surface_tension(params) / delta_v(temp, params)


def wall_velocity(higgs_mass: float, table: Sequence[tuple[float, float]] = DEFAULT_WALL_VELOCITY_TABLE) -> float:
    """Interpolate the bubble-wall speed (fraction of c) for ``higgs_mass``.

    Piecewise linear between knots, clamped to the end values outside.
    """
    if len(table) == 0:
        raise EmptyTable("wall velocity table is empty")
    masses = np.array([m for m, _ in table], dtype=float)
    speeds = np.array([v for _, v in table], dtype=float)
    if np.any(np.diff(masses) <= 0):
        raise ValueError("wall velocity table must be sorted by strictly increasing mass")
    if np.any((speeds <= 0) | (speeds >= 1)):
        raise ValueError("wall velocities must lie in (0, 1)")
    return float(np.interp(higgs_mass, masses, speeds))


@dataclass(frozen=True)
class TransitionWindow:
    """The slice of the cooling history mapped onto simulation seconds."""

    t_c: float
    temp_start_frac: float = 0.99
    temp_end_frac: float = 0.9882
    sim_duration: float = 10.0
    tail: float = 3.0

    def __post_init__(self):
        if not self.t_c > 0:
            raise ParameterError("t_c", "must be > 0")
        if not self.temp_start_frac < 1:
            raise ParameterError("temp_start_frac", "must be < 1")
        if not self.temp_end_frac < self.temp_start_frac:
            raise ParameterError("temp_end_frac", "must be < temp_start_frac")
        if not self.temp_end_frac > 0:
            raise ParameterError("temp_end_frac", "must be > 0")
        if not self.sim_duration > 0:
            raise ParameterError("sim_duration", "must be > 0")
        if not self.tail >= 0:
            raise ParameterError("tail", "must be >= 0")

    @property
    def total_duration(self) -> float:
        return self.sim_duration + self.tail

    @property
    def temp_start(self) -> float:
        return self.t_c * self.temp_start_frac

    @property
    def temp_end(self) -> float:
        return self.t_c * self.temp_end_frac


def temperature_at(t_sim, window: TransitionWindow):
    """Temperature (GeV) at simulation time ``t_sim``; linear cooling across the window."""
    t = np.asarray(t_sim, dtype=float)
    if np.any((t < 0) | (t > window.sim_duration)):
        raise OutOfWindow(f"t={t_sim} outside [0, {window.sim_duration}] s")
    frac = window.temp_start_frac + (window.temp_end_frac - window.temp_start_frac) * t / window.sim_duration
    temp = window.t_c * frac
    return temp if temp.ndim else float(temp)
