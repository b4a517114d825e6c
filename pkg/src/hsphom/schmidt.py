"""Schmidt decomposition of a JSA, purity and the g2(0) relation."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

from .errors import DomainError
from .jsa import FilterSpec, JsaGrid, apply_filter
from .optics import hz_width_to_wavelength, omega_to_wavelength

TRUNCATION_WEIGHT = 1e-9


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Descending Schmidt coefficients with sum(c**2) == 1."""

    coefficients: np.ndarray
    truncation_residual: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size == 0 or np.any(c < 0):
            raise DomainError("schmidt", "coefficients must be a non-empty non-negative vector")
        if np.any(np.diff(c) > 0):
            raise DomainError("schmidt", "coefficients must be sorted in descending order")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def weights(self) -> np.ndarray:
        return self.coefficients**2

    @property
    def schmidt_number(self) -> float:
        return schmidt_number(self)

    @property
    def purity(self) -> float:
        return purity_from_schmidt(self)

    @property
    def g2(self) -> float:
        return g2_from_purity(self.purity)


def _support(jsa: JsaGrid) -> np.ndarray:
    """Amplitude matrix with all-zero rows and columns dropped; the singular
    values are unchanged."""
    a = jsa.amplitude
    rows = np.flatnonzero(np.any(a != 0, axis=1))
    cols = np.flatnonzero(np.any(a != 0, axis=0))
    return a[np.ix_(rows, cols)]


def schmidt_decompose(jsa: JsaGrid) -> SchmidtSpectrum:
    a = _support(jsa)
    if a.size == 0:
        raise DomainError("schmidt", "cannot decompose an all-zero JSA")
    s = np.linalg.svd(a * math.sqrt(jsa.cell), compute_uv=False)
    w = s**2 / np.sum(s**2)
    # keep the smallest prefix carrying 1 - TRUNCATION_WEIGHT of the weight
    keep = int(np.searchsorted(np.cumsum(w), 1.0 - TRUNCATION_WEIGHT)) + 1
    keep = min(keep, w.size)
    residual = float(np.sum(w[keep:]))
    kept = w[:keep] / np.sum(w[:keep])
    return SchmidtSpectrum(np.sqrt(kept), truncation_residual=residual)


def schmidt_number(spec: SchmidtSpectrum) -> float:
    return 1.0 / float(np.sum(spec.weights**2))


def purity_from_schmidt(spec: SchmidtSpectrum) -> float:
    return float(np.sum(spec.weights**2))


def g2_from_purity(purity: float) -> float:
    if not 0 < purity <= 1:
        raise DomainError("schmidt", f"purity must lie in (0, 1], got {purity!r}")
    return 1.0 + purity


def purity_from_g2(g2: float) -> float:
    if not 1 < g2 <= 2:
        raise DomainError("schmidt", f"g2(0) must lie in (1, 2], got {g2!r}")
    return g2 - 1.0


def trace_purity(jsa: JsaGrid) -> float:
    """Tr(rho^2) of the reduced signal state, rho = S S^dagger with the grid
    measure; no SVD involved."""
    m = _support(jsa) * math.sqrt(jsa.cell)
    rho = m @ m.conj().T
    tr = np.trace(rho).real
    return float(np.sum(np.abs(rho) ** 2) / tr**2)


@dataclass(frozen=True)
class SweepRow:
    width_nm: float
    width_ghz: float
    purity: float
    schmidt_K: float
    heralding_efficiency: float


SWEEP_HEADER = ("width_nm", "width_ghz", "purity", "schmidt_K", "heralding_efficiency")


def purity_vs_filter_sweep(
    jsa: JsaGrid, filter_widths: Iterable[float], template: FilterSpec, workers: int = 1
) -> List[SweepRow]:
    """Heralded purity for each filter width, in input order.

    Widths are in the template's unit (Hz or metres).
    """
    widths = [float(w) for w in filter_widths]
    if any(not w > 0 for w in widths):
        raise DomainError("schmidt", "filter widths must be positive")
    if any(b < a for a, b in zip(widths, widths[1:])):
        raise DomainError("schmidt", "filter widths must be ascending")
    axis = jsa.axis(template.arm)
    center_wl = omega_to_wavelength(template.center_omega(axis))

    def point(width: float) -> SweepRow:
        filt = template.with_width(width)
        filtered = apply_filter(jsa, filt)
        spec = schmidt_decompose(filtered)
        w_hz = filt.width_hz(axis)
        if filt.width_unit == "m":
            # undo the nm -> m scaling without float noise
            w_nm = round(width / 1e-9, 9)
        else:
            w_nm = hz_width_to_wavelength(center_wl, w_hz) * 1e9
        return SweepRow(
            width_nm=w_nm,
            width_ghz=w_hz / 1e9,
            purity=spec.purity,
            schmidt_K=spec.schmidt_number,
            heralding_efficiency=filtered.heralding_efficiency / jsa.heralding_efficiency,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, widths))
    return [point(w) for w in widths]


def write_sweep_csv(rows: Iterable[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([f"{getattr(r, k):.17g}" for k in SWEEP_HEADER])
