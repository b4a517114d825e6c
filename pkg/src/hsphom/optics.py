"""Units, uniform spectral grids and amplitude profiles.

Every bandwidth accepted here is an *intensity* FWHM. Amplitude widths only
appear internally.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import erfc

from .errors import DomainError

C = 299_792_458.0  # m/s, exact
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

AngularFrequency = float


class ClippedProfileWarning(UserWarning):
    """A profile loses a noticeable fraction of its power outside the axis."""


def wavelength_to_omega(wavelength: float) -> AngularFrequency:
    if not wavelength > 0:
        raise DomainError("optics", f"wavelength must be positive, got {wavelength!r}")
    return 2.0 * math.pi * C / wavelength


def omega_to_wavelength(omega: AngularFrequency) -> float:
    if not omega > 0:
        raise DomainError("optics", f"angular frequency must be positive, got {omega!r}")
    return 2.0 * math.pi * C / omega


def hz_to_omega(freq: float) -> float:
    return 2.0 * math.pi * freq


def omega_to_hz(omega: float) -> float:
    return omega / (2.0 * math.pi)


def wavelength_width_to_hz(center_wavelength: float, width: float) -> float:
    """First-order conversion of a wavelength interval to a frequency interval."""
    if not center_wavelength > 0:
        raise DomainError("optics", f"center wavelength must be positive, got {center_wavelength!r}")
    return C * width / center_wavelength**2


def hz_width_to_wavelength(center_wavelength: float, width_hz: float) -> float:
    if not center_wavelength > 0:
        raise DomainError("optics", f"center wavelength must be positive, got {center_wavelength!r}")
    return width_hz * center_wavelength**2 / C


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpectralAxis:
    """Uniform angular-frequency grid.

    ``span`` is the distance between the first and the last grid point, so the
    spacing is ``span / (n_points - 1)`` and the grid is symmetric about
    ``center``.
    """

    center: AngularFrequency
    span: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DomainError("optics", f"an axis needs at least 3 points, got {self.n_points!r}")
        if not self.span > 0:
            raise DomainError("optics", f"axis span must be positive, got {self.span!r}")
        if not self.center - self.span / 2 > 0:
            raise DomainError("optics", "axis extends to non-positive frequencies")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def step(self) -> float:
        return self.span / (self.n_points - 1)

    @cached_property
    def detuning(self) -> np.ndarray:
        """Grid offsets from ``center`` (rad/s)."""
        k = np.arange(self.n_points, dtype=float) - (self.n_points - 1) / 2.0
        return _frozen(k * self.step)

    @cached_property
    def points(self) -> np.ndarray:
        return _frozen(self.center + self.detuning)

    @property
    def lower(self) -> float:
        return self.center - self.span / 2

    @property
    def upper(self) -> float:
        return self.center + self.span / 2

    def covers(self, omega: float) -> bool:
        half = self.step / 2
        return self.lower - half <= omega <= self.upper + half


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Complex amplitude sampled on a :class:`SpectralAxis`."""

    axis: SpectralAxis
    amplitude: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitude, dtype=complex)
        if amp.shape != (self.axis.n_points,):
            raise DomainError(
                "optics",
                f"amplitude has shape {amp.shape}, axis expects ({self.axis.n_points},)",
            )
        if not np.all(np.isfinite(amp)):
            raise DomainError("optics", "profile amplitude contains non-finite values")
        object.__setattr__(self, "amplitude", _frozen(amp))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def power(self) -> float:
        return float(np.sum(self.intensity) * self.axis.step)

    def is_zero(self) -> bool:
        return not np.any(self.amplitude)

    def normalize(self) -> "SpectralProfile":
        p = self.power()
        if p <= 0:
            raise DomainError("optics", "cannot normalize the zero profile")
        return SpectralProfile(self.axis, self.amplitude / math.sqrt(p))

    def fwhm(self) -> float:
        """Intensity FWHM in rad/s, with linear interpolation at both edges."""
        return fwhm(self.axis.points, self.intensity)


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum of a sampled single-peaked curve.

    Uses the outermost samples above half maximum and interpolates linearly
    towards the neighbouring samples below it.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    peak = y.max()
    if peak <= 0:
        raise DomainError("optics", "FWHM of a zero curve is undefined")
    half = peak / 2
    above = np.flatnonzero(y >= half)
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(y) - 1:
        raise DomainError("optics", "curve does not fall below half maximum inside the grid")
    left = x[lo - 1] + (half - y[lo - 1]) * (x[lo] - x[lo - 1]) / (y[lo] - y[lo - 1])
    right = x[hi] + (y[hi] - half) * (x[hi + 1] - x[hi]) / (y[hi] - y[hi + 1])
    return float(right - left)


def gaussian_sigma(fwhm_intensity: float) -> float:
    """Standard deviation of the intensity |a|^2 for a given intensity FWHM."""
    return fwhm_intensity / FWHM_PER_SIGMA


def gaussian_amplitude(detuning, fwhm_intensity: float):
    sigma = gaussian_sigma(fwhm_intensity)
    return np.exp(-np.square(detuning) / (4.0 * sigma * sigma))


def gaussian_profile(axis: SpectralAxis, center: AngularFrequency, fwhm: float) -> SpectralProfile:
    if not fwhm > 0:
        raise DomainError("optics", f"FWHM must be positive, got {fwhm!r}")
    sigma = gaussian_sigma(fwhm)
    lo = axis.lower - axis.step / 2
    hi = axis.upper + axis.step / 2
    outside = 0.5 * erfc((hi - center) / (sigma * math.sqrt(2))) + 0.5 * erfc(
        (center - lo) / (sigma * math.sqrt(2))
    )
    if outside > 1e-6:
        warnings.warn(
            f"gaussian profile loses {outside:.3g} of its power outside the axis",
            ClippedProfileWarning,
            stacklevel=2,
        )
    return SpectralProfile(axis, gaussian_amplitude(axis.points - center, fwhm))


def rect_profile(axis: SpectralAxis, center: AngularFrequency, full_width: float) -> SpectralProfile:
    if not full_width > 0:
        raise DomainError("optics", f"rect width must be positive, got {full_width!r}")
    inside = np.abs(axis.points - center) <= full_width / 2
    return SpectralProfile(axis, inside.astype(complex))
