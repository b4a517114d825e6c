"""Dispersion models and quasi-phase matching.

Wavevector mismatch for a periodically poled crystal::

    dk = k_s(w_s) + k_i(w_i) - k_p(w_s + w_i) - m * 2*pi / period

with poling order ``m = +1`` or ``-1``. Periods are always reported positive;
the order carries the sign of the bare mismatch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from .errors import DomainError
from .optics import C, wavelength_to_omega

BRANCHES = ("pump", "signal", "idler")

# exp(-gamma x^2) has the same half-amplitude width as sinc(x) for this gamma
GAUSSIAN_PMF_GAMMA = 0.193


def _check_window(lo: float, hi: float) -> None:
    if not (lo > 0 and hi > lo):
        raise DomainError("phasematch", f"invalid validity window ({lo!r}, {hi!r})")


@dataclass(frozen=True)
class ConstantIndex:
    """k = n * w / c over a validity window."""

    index: float
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if not self.index > 0:
            raise DomainError("phasematch", f"refractive index must be positive, got {self.index!r}")
        _check_window(self.omega_min, self.omega_max)

    def k(self, omega):
        return self.index * np.asarray(omega, dtype=float) / C

    def group_delay(self, omega):
        return self.index / C + 0.0 * np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class TaylorBranch:
    """k(w) = k0 + k1 (w - w_ref) + k2 (w - w_ref)^2 / 2.

    ``k1`` is the inverse group velocity (s/m) and ``k2`` the group-velocity
    dispersion (s^2/m) at ``omega_ref``.
    """

    k0: float
    k1: float
    k2: float
    omega_ref: float
    omega_min: float
    omega_max: float

    def __post_init__(self):
        _check_window(self.omega_min, self.omega_max)
        probes = [self.omega_min, self.omega_max]
        if self.k2 != 0:
            vertex = self.omega_ref - self.k1 / self.k2
            if self.omega_min < vertex < self.omega_max:
                probes.append(vertex)
        if min(float(self.k(w)) for w in probes) <= 0:
            raise DomainError("phasematch", "taylor branch has non-positive k inside its window")

    def k(self, omega):
        d = np.asarray(omega, dtype=float) - self.omega_ref
        return self.k0 + self.k1 * d + 0.5 * self.k2 * d * d

    def group_delay(self, omega):
        return self.k1 + self.k2 * (np.asarray(omega, dtype=float) - self.omega_ref)


Branch = Union[ConstantIndex, TaylorBranch]


@dataclass(frozen=True)
class DispersionModel:
    name: str
    pump: Branch
    signal: Branch
    idler: Branch

    def branch(self, which: str) -> Branch:
        if which not in BRANCHES:
            raise DomainError("phasematch", f"unknown branch {which!r}")
        return getattr(self, which)

    def _checked(self, which: str, omega) -> np.ndarray:
        br = self.branch(which)
        w = np.asarray(omega, dtype=float)
        if w.size and (np.min(w) < br.omega_min or np.max(w) > br.omega_max):
            raise DomainError(
                "phasematch",
                f"{which} frequency outside the validity window of dispersion model "
                f"{self.name!r} [{br.omega_min:.6e}, {br.omega_max:.6e}] rad/s",
            )
        return w

    def k(self, which: str, omega):
        w = self._checked(which, omega)
        return self.branch(which).k(w)

    def group_delay(self, which: str, omega):
        w = self._checked(which, omega)
        return self.branch(which).group_delay(w)


@dataclass(frozen=True)
class QpmCrystal:
    dispersion: DispersionModel
    poling_period: float
    length: float
    poling_order: int = 1

    def __post_init__(self):
        if not self.poling_period > 0:
            raise DomainError("phasematch", f"poling period must be positive, got {self.poling_period!r}")
        if not self.length > 0:
            raise DomainError("phasematch", f"crystal length must be positive, got {self.length!r}")
        if self.poling_order not in (1, -1):
            raise DomainError("phasematch", f"poling order must be +1 or -1, got {self.poling_order!r}")


def bare_mismatch(dispersion: DispersionModel, omega_s, omega_i):
    """k_s + k_i - k_p without the grating term."""
    ws = np.asarray(omega_s, dtype=float)
    wi = np.asarray(omega_i, dtype=float)
    return dispersion.k("signal", ws) + dispersion.k("idler", wi) - dispersion.k("pump", ws + wi)


def delta_k(crystal: QpmCrystal, omega_s, omega_i):
    dk = bare_mismatch(crystal.dispersion, omega_s, omega_i)
    dk = dk - crystal.poling_order * 2.0 * math.pi / crystal.poling_period
    return float(dk) if np.ndim(dk) == 0 else dk


def _design_mismatch(dispersion: DispersionModel, omega_s0: float, omega_i0: float) -> float:
    mismatch = float(bare_mismatch(dispersion, omega_s0, omega_i0))
    scale = max(
        abs(float(dispersion.k("signal", omega_s0))),
        abs(float(dispersion.k("idler", omega_i0))),
        abs(float(dispersion.k("pump", omega_s0 + omega_i0))),
    )
    if abs(mismatch) <= 1e-13 * scale:
        raise DomainError("phasematch", "already phase-matched, no finite poling period")
    return mismatch


def solve_poling_period(dispersion: DispersionModel, omega_s0: float, omega_i0: float) -> float:
    """Poling period that cancels the mismatch at (omega_s0, omega_i0).

    Always positive; use :func:`poling_order` for the sign of the mismatch.
    """
    return abs(2.0 * math.pi / _design_mismatch(dispersion, omega_s0, omega_i0))


def poling_order(dispersion: DispersionModel, omega_s0: float, omega_i0: float) -> int:
    return 1 if _design_mismatch(dispersion, omega_s0, omega_i0) > 0 else -1


def design_crystal(
    dispersion: DispersionModel, omega_s0: float, omega_i0: float, length: float
) -> QpmCrystal:
    """Crystal quasi-phase-matched at the given signal/idler pair."""
    return QpmCrystal(
        dispersion=dispersion,
        poling_period=solve_poling_period(dispersion, omega_s0, omega_i0),
        length=length,
        poling_order=poling_order(dispersion, omega_s0, omega_i0),
    )


def phasematching_function(
    crystal: QpmCrystal, omega_s, omega_i, mode: str = "sinc", gamma: float = GAUSSIAN_PMF_GAMMA
):
    """sinc(dk L / 2), or its Gaussian stand-in exp(-gamma (dk L / 2)^2)."""
    x = np.asarray(delta_k(crystal, omega_s, omega_i)) * crystal.length / 2.0
    if mode == "sinc":
        out = np.sinc(x / math.pi)
    elif mode == "gaussian":
        out = np.exp(-gamma * x * x)
    else:
        raise DomainError("phasematch", f"unknown phase-matching mode {mode!r} (sinc, gaussian)")
    return float(out) if np.ndim(out) == 0 else out.astype(complex)


# ---------------------------------------------------------------------------
# preset registry


@dataclass(frozen=True)
class CrystalPreset:
    name: str
    description: str
    dispersion: DispersionModel
    length: float
    signal_wavelength: float
    idler_wavelength: float

    def crystal(self, length: float | None = None) -> QpmCrystal:
        return design_crystal(
            self.dispersion,
            wavelength_to_omega(self.signal_wavelength),
            wavelength_to_omega(self.idler_wavelength),
            self.length if length is None else length,
        )


def _window(omega: float, rel: float = 0.05) -> tuple[float, float]:
    return omega * (1 - rel), omega * (1 + rel)


def constant_index_model(name: str, n_pump: float, n_signal: float, n_idler: float,
                         omega_min: float = wavelength_to_omega(2500e-9),
                         omega_max: float = wavelength_to_omega(300e-9)) -> DispersionModel:
    return DispersionModel(
        name=name,
        pump=ConstantIndex(n_pump, omega_min, omega_max),
        signal=ConstantIndex(n_signal, omega_min, omega_max),
        idler=ConstantIndex(n_idler, omega_min, omega_max),
    )


def taylor_model(name: str, branches: Dict[str, dict]) -> DispersionModel:
    """Build a Taylor model from per-branch coefficient dicts.

    Each dict holds ``ref_wavelength`` (m), ``index`` (phase index at the
    reference, gives k0), ``k1`` (s/m), optional ``k2`` (s^2/m) and optional
    ``window`` as a (long, short) wavelength pair in metres.
    """
    built = {}
    for which in BRANCHES:
        spec = dict(branches[which])
        w_ref = wavelength_to_omega(spec["ref_wavelength"])
        if "window" in spec and spec["window"] is not None:
            long_wl, short_wl = spec["window"]
            lo, hi = wavelength_to_omega(long_wl), wavelength_to_omega(short_wl)
        else:
            lo, hi = _window(w_ref)
        built[which] = TaylorBranch(
            k0=spec["index"] * w_ref / C,
            k1=spec["k1"],
            k2=spec.get("k2", 0.0),
            omega_ref=w_ref,
            omega_min=lo,
            omega_max=hi,
        )
    return DispersionModel(name=name, **built)


# Calibrated idler-minus-pump inverse group velocity for the paper-like preset:
# with a 10 mm crystal, an 80 GHz Gaussian pump and the default 512 x 512 grid
# the unfiltered Schmidt number is 5.
PAPER_LIKE_IDLER_GVM = 2.4406e-10  # s/m

_PUMP_WL = 780e-9
_IDLER_WL = 1563.5e-9
_SIGNAL_WL = 1.0 / (1.0 / _PUMP_WL - 1.0 / _IDLER_WL)
_PUMP_K1 = 2.2767 / C


def _paper_like() -> CrystalPreset:
    dispersion = taylor_model(
        "paper-like",
        {
            "pump": {"ref_wavelength": _PUMP_WL, "index": 2.1755, "k1": _PUMP_K1},
            # signal group-velocity matched to the pump
            "signal": {"ref_wavelength": _SIGNAL_WL, "index": 2.1380, "k1": _PUMP_K1},
            "idler": {"ref_wavelength": _IDLER_WL, "index": 2.2112,
                      "k1": _PUMP_K1 + PAPER_LIKE_IDLER_GVM},
        },
    )
    return CrystalPreset(
        name="paper-like",
        description=(
            "type-II PPLN-like Taylor model, signal group-matched to the pump, "
            "idler walk-off calibrated to K = 5 at 80 GHz pump bandwidth"
        ),
        dispersion=dispersion,
        length=10e-3,
        signal_wavelength=_SIGNAL_WL,
        idler_wavelength=_IDLER_WL,
    )


def _toy() -> CrystalPreset:
    return CrystalPreset(
        name="toy-constant-index",
        description="dispersionless toy model, n_p = 2.25, n_s = 2.20, n_i = 2.15",
        dispersion=constant_index_model("toy-constant-index", 2.25, 2.20, 2.15),
        length=10e-3,
        signal_wavelength=_SIGNAL_WL,
        idler_wavelength=_IDLER_WL,
    )


PRESETS: Dict[str, CrystalPreset] = {p.name: p for p in (_paper_like(), _toy())}


def available_presets() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> CrystalPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise DomainError(
            "phasematch", f"unknown crystal preset {name!r}; available: {', '.join(available_presets())}"
        ) from None
