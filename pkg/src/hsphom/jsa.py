"""Joint spectral amplitude of an SPDC pair source.

The amplitude on a signal x idler grid is the pump envelope evaluated at the
sum frequency times the phase-matching function. Rows index the signal axis,
columns the idler axis.
"""
from __future__ import annotations

import csv
import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DomainError
from .optics import (
    FWHM_PER_SIGMA,
    SpectralAxis,
    SpectralProfile,
    gaussian_amplitude,
    hz_to_omega,
    omega_to_wavelength,
    wavelength_to_omega,
    wavelength_width_to_hz,
)
from .phasematch import GAUSSIAN_PMF_GAMMA, QpmCrystal, phasematching_function

ARMS = ("signal", "idler")
PUMP_SHAPES = ("gaussian", "rect")
BOUNDARY_LEVEL = 1e-4

# sinc(x)^2 = 1/2
SINC_HALF_INTENSITY_X = 1.3915573782515103


class JsaBoundaryWarning(UserWarning):
    """The JSA intensity on the grid edge is not negligible."""


@dataclass(frozen=True)
class PumpSpec:
    center_wavelength: float
    intensity_fwhm: float = 80e9  # Hz
    shape: str = "gaussian"
    # informational only
    pulse_duration: float = 2e-12
    repetition_rate: float = 76e6

    def __post_init__(self):
        if not self.center_wavelength > 0:
            raise DomainError("jsa", f"pump wavelength must be positive, got {self.center_wavelength!r}")
        if not self.intensity_fwhm > 0:
            raise DomainError("jsa", f"pump bandwidth must be positive, got {self.intensity_fwhm!r}")
        if self.shape not in PUMP_SHAPES:
            raise DomainError("jsa", f"unknown pump shape {self.shape!r}; expected one of {PUMP_SHAPES}")

    @property
    def omega(self) -> float:
        return wavelength_to_omega(self.center_wavelength)

    @property
    def omega_fwhm(self) -> float:
        return hz_to_omega(self.intensity_fwhm)

    def envelope(self, omega):
        """Pump amplitude at (sum) frequency ``omega``."""
        d = np.asarray(omega, dtype=float) - self.omega
        if self.shape == "gaussian":
            return gaussian_amplitude(d, self.omega_fwhm)
        return (np.abs(d) <= self.omega_fwhm / 2).astype(float)


@dataclass(frozen=True, eq=False)
class JsaGrid:
    signal_axis: SpectralAxis
    idler_axis: SpectralAxis
    amplitude: np.ndarray
    heralding_efficiency: float = 1.0

    def __post_init__(self):
        amp = np.array(self.amplitude, dtype=complex)
        shape = (self.signal_axis.n_points, self.idler_axis.n_points)
        if amp.shape != shape:
            raise DomainError("jsa", f"amplitude shape {amp.shape} does not match axes {shape}")
        if not np.all(np.isfinite(amp)):
            raise DomainError("jsa", "JSA contains non-finite entries")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)

    @property
    def cell(self) -> float:
        return self.signal_axis.step * self.idler_axis.step

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def norm(self) -> float:
        return float(np.sum(self.intensity) * self.cell)

    def normalize(self) -> "JsaGrid":
        n = self.norm()
        if n <= 0:
            raise DomainError("jsa", "cannot normalize an all-zero JSA")
        return replace(self, amplitude=self.amplitude / math.sqrt(n))

    def axis(self, arm: str) -> SpectralAxis:
        _check_arm(arm)
        return self.signal_axis if arm == "signal" else self.idler_axis


def _check_arm(arm: str) -> None:
    if arm not in ARMS:
        raise DomainError("jsa", f"arm must be one of {ARMS}, got {arm!r}")


def build_jsa(
    pump: PumpSpec,
    crystal: Optional[QpmCrystal],
    signal_axis: SpectralAxis,
    idler_axis: SpectralAxis,
    pmf_mode: str = "sinc",
    gamma: float = GAUSSIAN_PMF_GAMMA,
    workers: int = 1,
) -> JsaGrid:
    """Sample S(ws, wi) = pump(ws + wi) * PMF(ws, wi) and normalize it.

    ``crystal=None`` stands for the short-crystal limit, PMF = 1.
    Rows are evaluated in independent chunks, so the result does not depend
    on ``workers``.
    """
    ws = signal_axis.points
    wi = idler_axis.points

    def rows(sl: slice) -> np.ndarray:
        WS, WI = np.meshgrid(ws[sl], wi, indexing="ij")
        block = pump.envelope(WS + WI).astype(complex)
        if crystal is not None:
            block = block * phasematching_function(crystal, WS, WI, mode=pmf_mode, gamma=gamma)
        return block

    chunk = 64
    slices = [slice(i, min(i + chunk, len(ws))) for i in range(0, len(ws), chunk)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(rows, slices))
    else:
        blocks = [rows(sl) for sl in slices]
    grid = JsaGrid(signal_axis, idler_axis, np.vstack(blocks))

    inten = grid.intensity
    peak = inten.max()
    if peak <= 0:
        raise DomainError("jsa", "JSA vanishes on the whole grid; check axes against the pump")
    edge = max(inten[0].max(), inten[-1].max(), inten[:, 0].max(), inten[:, -1].max())
    if edge > BOUNDARY_LEVEL * peak:
        warnings.warn(
            f"JSA intensity at the grid boundary is {edge / peak:.2e} of its maximum",
            JsaBoundaryWarning,
            stacklevel=2,
        )
    return grid.normalize()


def estimate_marginal_fwhm(
    pump: PumpSpec,
    crystal: QpmCrystal,
    omega_s0: float,
    omega_i0: float,
    pmf_mode: str = "sinc",
    gamma: float = GAUSSIAN_PMF_GAMMA,
) -> tuple[float, float]:
    """Signal and idler intensity FWHM (rad/s) of a linearized Gaussian JSA.

    The pump is replaced by a Gaussian of equal FWHM and the PMF by a
    Gaussian of equal intensity FWHM; only the group delays at the design
    point enter.
    """
    disp = crystal.dispersion
    kp1 = float(disp.group_delay("pump", omega_s0 + omega_i0))
    a = float(disp.group_delay("signal", omega_s0)) - kp1
    b = float(disp.group_delay("idler", omega_i0)) - kp1
    if pmf_mode == "sinc":
        g_int = math.log(2.0) / (2.0 * SINC_HALF_INTENSITY_X**2)
    else:
        g_int = gamma
    sigma_p = pump.omega_fwhm / FWHM_PER_SIGMA
    half_l = crystal.length / 2
    q = np.array([[1.0, 1.0], [1.0, 1.0]]) / sigma_p**2
    q = q + 4.0 * g_int * half_l**2 * np.array([[a * a, a * b], [a * b, b * b]])
    det = float(np.linalg.det(q))
    if not det > 1e-12 * float(np.trace(q)) ** 2:
        raise DomainError(
            "jsa", "JSA is not localized in both directions; pass explicit axes"
        )
    cov = np.linalg.inv(q)
    return FWHM_PER_SIGMA * math.sqrt(cov[0, 0]), FWHM_PER_SIGMA * math.sqrt(cov[1, 1])


def default_axes(
    pump: PumpSpec,
    crystal: QpmCrystal,
    idler_wavelength: float,
    n_points: int = 512,
    span_fwhm: float = 5.0,
    pmf_mode: str = "sinc",
    gamma: float = GAUSSIAN_PMF_GAMMA,
) -> tuple[SpectralAxis, SpectralAxis]:
    """Axes centred on the energy-conserving pair, spanning +-span_fwhm marginal FWHM."""
    wi0 = wavelength_to_omega(idler_wavelength)
    ws0 = pump.omega - wi0
    if not ws0 > 0:
        raise DomainError("jsa", "idler frequency exceeds the pump frequency")
    fs, fi = estimate_marginal_fwhm(pump, crystal, ws0, wi0, pmf_mode, gamma)
    return (
        SpectralAxis(ws0, 2 * span_fwhm * fs, n_points),
        SpectralAxis(wi0, 2 * span_fwhm * fi, n_points),
    )


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass filter acting on one arm's field amplitude.

    ``width`` is an intensity FWHM for gaussian filters and the full width for
    rect filters. ``width_unit`` is ``"hz"`` or ``"m"``; wavelength widths are
    converted at the filter centre. ``center`` is a wavelength in metres, or
    ``None`` for the centre of the arm's axis.
    """

    arm: str
    profile: str
    width: float
    width_unit: str = "hz"
    center: Optional[float] = None

    def __post_init__(self):
        _check_arm(self.arm)
        if self.profile not in ("gaussian", "rect"):
            raise DomainError("jsa", f"unknown filter profile {self.profile!r}; expected gaussian or rect")
        if not self.width > 0:
            raise DomainError("jsa", f"filter width must be positive, got {self.width!r}")
        if self.width_unit not in ("hz", "m"):
            raise DomainError("jsa", f"filter width unit must be 'hz' or 'm', got {self.width_unit!r}")
        if self.center is not None and not self.center > 0:
            raise DomainError("jsa", f"filter centre must be a positive wavelength, got {self.center!r}")

    def center_omega(self, axis: SpectralAxis) -> float:
        return axis.center if self.center is None else wavelength_to_omega(self.center)

    def width_hz(self, axis: SpectralAxis) -> float:
        if self.width_unit == "hz":
            return self.width
        return wavelength_width_to_hz(omega_to_wavelength(self.center_omega(axis)), self.width)

    def with_width(self, width: float) -> "FilterSpec":
        return replace(self, width=width)

    def profile_on(self, axis: SpectralAxis) -> SpectralProfile:
        w0 = self.center_omega(axis)
        width = hz_to_omega(self.width_hz(axis))
        d = axis.points - w0
        if self.profile == "gaussian":
            amp = gaussian_amplitude(d, width)
        else:
            amp = (np.abs(d) <= width / 2).astype(float)
        return SpectralProfile(axis, amp)


def apply_filter(jsa: JsaGrid, filt: FilterSpec) -> JsaGrid:
    """Filter one arm, renormalize, and fold the transmitted power into
    ``heralding_efficiency``."""
    axis = jsa.axis(filt.arm)
    t = filt.profile_on(axis).amplitude
    if filt.arm == "idler":
        amp = jsa.amplitude * t[np.newaxis, :]
    else:
        amp = jsa.amplitude * t[:, np.newaxis]
    before = jsa.norm()
    after = float(np.sum(np.abs(amp) ** 2) * jsa.cell)
    if not after > 0:
        raise DomainError("jsa", "filter removes all amplitude")
    out = JsaGrid(jsa.signal_axis, jsa.idler_axis, amp / math.sqrt(after),
                  heralding_efficiency=jsa.heralding_efficiency * after / before)
    return out


def marginal(jsa: JsaGrid, arm: str) -> SpectralProfile:
    """Intensity marginal of one arm.

    Returned as a real, non-negative amplitude whose square is the marginal,
    so ``.intensity`` is the marginal and ``.fwhm()`` its width.
    """
    _check_arm(arm)
    inten = jsa.intensity
    if arm == "signal":
        m = inten.sum(axis=1) * jsa.idler_axis.step
    else:
        m = inten.sum(axis=0) * jsa.signal_axis.step
    return SpectralProfile(jsa.axis(arm), np.sqrt(m))


def dfg_partner_wavelength(pump_wavelength: float, seed_wavelength: float) -> float:
    """Difference-frequency output wavelength, 1/l_out = 1/l_pump - 1/l_seed."""
    if not (pump_wavelength > 0 and seed_wavelength > 0):
        raise DomainError("jsa", "wavelengths must be positive")
    inv = 1.0 / pump_wavelength - 1.0 / seed_wavelength
    if not inv > 0:
        raise DomainError(
            "jsa", f"seed at {seed_wavelength!r} m is not below the pump frequency ({pump_wavelength!r} m)"
        )
    return 1.0 / inv


def coherent_state_profile(pump: PumpSpec, seed_wavelength: float, axis: SpectralAxis) -> SpectralProfile:
    """DFG output for a monochromatic seed: the pump envelope shifted down by
    the seed frequency."""
    shift = wavelength_to_omega(seed_wavelength)
    return SpectralProfile(axis, pump.envelope(axis.points + shift)).normalize()


# ---------------------------------------------------------------------------
# export

_AXIS_HEADER = struct.Struct("<Qdd")


def write_jsa_csv(jsa: JsaGrid, path) -> None:
    ws = jsa.signal_axis.points
    wi = jsa.idler_axis.points
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega_s", "omega_i", "re", "im"])
        for j, s in enumerate(ws):
            row = jsa.amplitude[j]
            for k, i in enumerate(wi):
                w.writerow([f"{s:.17g}", f"{i:.17g}", f"{row[k].real:.17g}", f"{row[k].imag:.17g}"])


def write_jsa_binary(jsa: JsaGrid, path) -> None:
    """Little-endian: per axis (signal, idler) uint64 n_points, float64 center,
    float64 span; then row-major (re, im) float64 pairs."""
    with open(path, "wb") as fh:
        for ax in (jsa.signal_axis, jsa.idler_axis):
            fh.write(_AXIS_HEADER.pack(ax.n_points, ax.center, ax.span))
        pairs = np.empty(jsa.amplitude.shape + (2,), dtype="<f8")
        pairs[..., 0] = jsa.amplitude.real
        pairs[..., 1] = jsa.amplitude.imag
        fh.write(pairs.tobytes(order="C"))


def read_jsa_binary(path) -> JsaGrid:
    data = Path(path).read_bytes()
    hs = _AXIS_HEADER.size
    axes = []
    for i in range(2):
        n, center, span = _AXIS_HEADER.unpack_from(data, i * hs)
        axes.append(SpectralAxis(center, span, n))
    body = np.frombuffer(data, dtype="<f8", offset=2 * hs)
    expected = axes[0].n_points * axes[1].n_points * 2
    if body.size != expected:
        raise DomainError("jsa", f"binary JSA body has {body.size} values, expected {expected}")
    pairs = body.reshape(axes[0].n_points, axes[1].n_points, 2)
    return JsaGrid(axes[0], axes[1], pairs[..., 0] + 1j * pairs[..., 1])
