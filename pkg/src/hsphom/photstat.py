"""Photon-number statistics of the two interferometer inputs and the g2(0)
of a seeded difference-frequency source."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np
from scipy.stats import binom, poisson

from .errors import DomainError

LOW_HERALD_EFFICIENCY = "low detection efficiency of the heralding photons"
NEGLIGIBLE_3_4_PHOTONS = "three- and four-photon terms neglected"


@dataclass(frozen=True, eq=False)
class ArmStatistics:
    """Photon-number probabilities (P0, P1, P2, ...) of one input arm."""

    probabilities: np.ndarray
    label: str = "custom"
    assumptions: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size < 3:
            raise DomainError("photstat", "need at least P0, P1 and P2")
        if np.any(p < 0) or np.any(p > 1):
            raise DomainError("photstat", "probabilities must lie in [0, 1]")
        if p.sum() > 1 + 1e-12:
            raise DomainError("photstat", f"probabilities sum to {p.sum()!r} > 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def n_max(self) -> int:
        return self.probabilities.size - 1

    def p(self, n: int) -> float:
        return float(self.probabilities[n]) if 0 <= n <= self.n_max else 0.0

    def truncated(self, n_max: int = 2) -> "ArmStatistics":
        """Drop every term above ``n_max`` (no renormalization)."""
        return ArmStatistics(self.probabilities[: n_max + 1], self.label, self.assumptions)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probabilities.size), self.probabilities))


def coherent_stats(mean_photons: float, n_max: int = 10) -> ArmStatistics:
    """Poisson statistics of a coherent state with |alpha|^2 = mean_photons."""
    if not mean_photons >= 0:
        raise DomainError("photstat", f"mean photon number must be >= 0, got {mean_photons!r}")
    if n_max < 2:
        raise DomainError("photstat", "n_max must be at least 2")
    n = np.arange(n_max + 1)
    return ArmStatistics(poisson.pmf(n, mean_photons), label="coherent")


def hsp_stats(pair_probability: float, transmission: float) -> ArmStatistics:
    """Heralded-photon statistics, cut at two photons::

        P1 = t + 4 (t - 1) t p
        P2 = 2 t^2 p
        P0 = 1 - (P1 + P2)

    with ``p`` the pair-emission probability and ``t`` the transmission.
    Only valid for a weakly efficient heralding detector.
    """
    p, t = pair_probability, transmission
    if not 0 <= p < 1:
        raise DomainError("photstat", f"pair probability must lie in [0, 1), got {p!r}")
    if not 0 < t <= 1:
        raise DomainError("photstat", f"transmission must lie in (0, 1], got {t!r}")
    p1 = t + 4.0 * (t - 1.0) * t * p
    p2 = 2.0 * t * t * p
    p0 = 1.0 - (p1 + p2)
    for name, val in (("P1", p1), ("P2", p2), ("P0", p0)):
        if not 0 <= val <= 1:
            raise DomainError(
                "photstat", f"{name} = {val!r} outside [0, 1] for pair probability {p!r}, transmission {t!r}"
            )
    return ArmStatistics(
        [p0, p1, p2], label="hsp", assumptions=(LOW_HERALD_EFFICIENCY, NEGLIGIBLE_3_4_PHOTONS)
    )


def hsp_stats_thermal(pair_probability: float, transmission: float, n_max: int = 6) -> ArmStatistics:
    """Diagnostic comparison model, not the heralded-photon formula above.

    Single-mode thermal pair statistics with mean ``mu`` chosen so that the
    one-pair probability equals ``pair_probability``; a herald click with
    vanishing efficiency weights n pairs by n; the heralded photons then pass
    a binomial loss ``transmission``.
    """
    p, t = pair_probability, transmission
    if not 0 < p < 0.25:
        raise DomainError("photstat", f"thermal model needs 0 < pair probability < 1/4, got {p!r}")
    if not 0 < t <= 1:
        raise DomainError("photstat", f"transmission must lie in (0, 1], got {t!r}")
    # p = x (1 - x) with x = mu / (1 + mu), smaller root
    x = (1.0 - math.sqrt(1.0 - 4.0 * p)) / 2.0
    # heralded distribution n (1-x)^2 x^(n-1), summed to infinity analytically
    n = np.arange(1, 200)
    heralded = n * (1 - x) ** 2 * x ** (n - 1)
    out = np.zeros(n_max + 1)
    for m in range(n_max + 1):
        out[m] = float(np.sum(heralded * binom.pmf(m, n, t)))
    return ArmStatistics(out, label="hsp-thermal-diagnostic", assumptions=(LOW_HERALD_EFFICIENCY,))


@dataclass(frozen=True)
class DfgSeedModel:
    n_seed: float
    schmidt_K: float
    n_spontaneous: float = 1.0

    def __post_init__(self):
        if not self.n_seed >= 0:
            raise DomainError("photstat", f"seed photon number must be >= 0, got {self.n_seed!r}")
        if not self.schmidt_K >= 1:
            raise DomainError("photstat", f"Schmidt number must be >= 1, got {self.schmidt_K!r}")
        if not self.n_spontaneous > 0:
            raise DomainError("photstat", f"spontaneous photon number must be > 0, got {self.n_spontaneous!r}")


def dfg_g2(model: DfgSeedModel) -> float:
    """g2(0) = 1 + 1 / (N_seed + K)."""
    return 1.0 + 1.0 / (model.n_seed + model.schmidt_K)


def dfg_g2_from_counts(n_spontaneous: float, n_stimulated: float, schmidt_K: float) -> float:
    """g2(0) = 1 + N_sp / (K N_sp + N_st), before substituting N_st = N_seed N_sp."""
    if not n_spontaneous > 0 or not n_stimulated >= 0 or not schmidt_K >= 1:
        raise DomainError("photstat", "need N_sp > 0, N_st >= 0 and K >= 1")
    return 1.0 + n_spontaneous / (schmidt_K * n_spontaneous + n_stimulated)


def dfg_g2_unsimplified(model: DfgSeedModel) -> float:
    return dfg_g2_from_counts(model.n_spontaneous, model.n_seed * model.n_spontaneous, model.schmidt_K)


def dfg_g2_curve(model: DfgSeedModel, n_seed_values: Iterable[float]) -> List[Tuple[float, float]]:
    out = []
    for n in n_seed_values:
        m = DfgSeedModel(float(n), model.schmidt_K, model.n_spontaneous)
        out.append((m.n_seed, dfg_g2(m)))
    return out


def write_g2_curve_csv(curve: Iterable[Tuple[float, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_seed", "g2"])
        for n, g in curve:
            w.writerow([f"{n:.17g}", f"{g:.17g}"])


def write_stats_csv(arms: Iterable[ArmStatistics], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "probability", "arm_label"])
        for arm in arms:
            for n, p in enumerate(arm.probabilities):
                w.writerow([n, f"{p:.17g}", arm.label])
