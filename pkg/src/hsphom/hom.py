"""Hong-Ou-Mandel interference between two photon-number-mixed inputs."""
from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, NamedTuple, Optional, Tuple

import numpy as np

from .errors import DomainError
from .optics import SpectralAxis, SpectralProfile
from .photstat import ArmStatistics


@dataclass(frozen=True)
class HomScenario:
    arm_a: ArmStatistics
    arm_b: ArmStatistics
    indistinguishability: float = 1.0
    spectral_a: Optional[SpectralProfile] = None
    spectral_b: Optional[SpectralProfile] = None

    def __post_init__(self):
        if not 0 <= self.indistinguishability <= 1:
            raise DomainError("hom", f"indistinguishability must lie in [0, 1], got {self.indistinguishability!r}")

    def with_indistinguishability(self, r: float) -> "HomScenario":
        return HomScenario(self.arm_a, self.arm_b, r, self.spectral_a, self.spectral_b)


class TwoPhotonVisibility(NamedTuple):
    v_max: float
    suppressed_fraction: float


def visibility_eq7(scenario: HomScenario) -> TwoPhotonVisibility:
    """Two-photon visibility bound with three- and four-photon terms dropped::

        V = [(1-R) P1a P1b + P0a P2b + P2a P0b] / [P1a P1b + P0a P2b + P2a P0b]

    ``suppressed_fraction`` is 1 - V = R P1a P1b / denominator, the fraction
    of zero-delay coincidences removed by interference.
    """
    a, b, r = scenario.arm_a, scenario.arm_b, scenario.indistinguishability
    pair = a.p(1) * b.p(1)
    multi = a.p(0) * b.p(2) + a.p(2) * b.p(0)
    den = pair + multi
    if not den > 0:
        raise DomainError("hom", "no two-photon events: visibility undefined")
    return TwoPhotonVisibility(((1 - r) * pair + multi) / den, r * pair / den)


def _common_axis(a: SpectralAxis, b: SpectralAxis) -> SpectralAxis:
    step = min(a.step, b.step)
    lo = min(a.lower, b.lower)
    hi = max(a.upper, b.upper)
    n = int(math.ceil((hi - lo) / step)) + 1
    return SpectralAxis((lo + hi) / 2, (n - 1) * step, n)


def _resample(p: SpectralProfile, axis: SpectralAxis) -> np.ndarray:
    x = p.axis.points
    re = np.interp(axis.points, x, p.amplitude.real, left=0.0, right=0.0)
    im = np.interp(axis.points, x, p.amplitude.imag, left=0.0, right=0.0)
    return re + 1j * im


def mode_overlap(profile_a: SpectralProfile, profile_b: SpectralProfile, delay) -> np.ndarray | float:
    """|<a| e^{i w tau} |b>|^2 for one delay or an array of delays (s).

    Profiles on different axes are linearly resampled onto a common grid.
    """
    if profile_a.axis == profile_b.axis:
        axis, amp_a, amp_b = profile_a.axis, profile_a.amplitude, profile_b.amplitude
    else:
        axis = _common_axis(profile_a.axis, profile_b.axis)
        amp_a, amp_b = _resample(profile_a, axis), _resample(profile_b, axis)
    na = np.sum(np.abs(amp_a) ** 2)
    nb = np.sum(np.abs(amp_b) ** 2)
    if na == 0 or nb == 0:
        raise DomainError("hom", "mode overlap of a zero profile")
    tau = np.atleast_1d(np.asarray(delay, dtype=float))
    # phase relative to the axis centre; the modulus does not depend on it
    phase = np.exp(1j * np.outer(tau, axis.detuning))
    ov = np.abs(phase @ (np.conj(amp_a) * amp_b)) ** 2 / (na * nb)
    ov = np.minimum(ov, 1.0)
    return float(ov[0]) if np.ndim(delay) == 0 else ov


@dataclass(frozen=True, eq=False)
class HomResult:
    v_max: float
    suppressed_fraction: float
    delays: np.ndarray
    coincidence: np.ndarray
    baseline: float = 1.0


def dip_profile(scenario: HomScenario, delays) -> HomResult:
    """Normalized coincidence rate versus delay.

    At each delay the effective indistinguishability is R times the spectral
    mode overlap, and the coincidence rate is 1 - suppressed_fraction.
    """
    if scenario.spectral_a is None or scenario.spectral_b is None:
        raise DomainError("hom", "dip profile needs spectral profiles for both arms")
    vis = visibility_eq7(scenario)
    unit = visibility_eq7(scenario.with_indistinguishability(1.0)).suppressed_fraction
    tau = np.asarray(delays, dtype=float)
    overlap = mode_overlap(scenario.spectral_a, scenario.spectral_b, tau)
    # suppressed_fraction is linear in R
    coinc = 1.0 - unit * scenario.indistinguishability * np.asarray(overlap)
    return HomResult(vis.v_max, vis.suppressed_fraction, tau, coinc)


# ---------------------------------------------------------------------------
# Fock-space oracle
#
# Input photons carry an internal label; photons with equal labels are
# identical bosons, different labels never interfere. A 50/50 splitter maps
#   a+_l -> (c+_l + d+_l)/sqrt2,   b+_l -> (c+_l - d+_l)/sqrt2.
# The output state is expanded as a polynomial in the c+, d+ operators.

Monomial = Tuple[Tuple[str, str, int], ...]  # sorted ((port, label, power), ...)


def _multiply(poly: Dict[Monomial, float], port_terms) -> Dict[Monomial, float]:
    out: Dict[Monomial, float] = defaultdict(float)
    for mono, coef in poly.items():
        powers = {(p, l): k for p, l, k in mono}
        for (port, label), c in port_terms:
            new = dict(powers)
            new[(port, label)] = new.get((port, label), 0) + 1
            key = tuple(sorted((p, l, k) for (p, l), k in new.items()))
            out[key] += coef * c
    return out


@lru_cache(maxsize=None)
def splitter_coincidence(n_a: int, n_b: int, same_label: bool) -> float:
    """Probability that both output ports register photons.

    Photons within one input arm share a label; ``same_label`` makes the two
    arms identical too.
    """
    la, lb = "x", ("x" if same_label else "y")
    s = 1 / math.sqrt(2)
    poly: Dict[Monomial, float] = {(): 1.0}
    for _ in range(n_a):
        poly = _multiply(poly, [(("c", la), s), (("d", la), s)])
    for _ in range(n_b):
        poly = _multiply(poly, [(("c", lb), s), (("d", lb), -s)])
    norm_in = math.factorial(n_a) * math.factorial(n_b)
    total = 0.0
    coinc = 0.0
    for mono, coef in poly.items():
        # |coef|^2 * prod(m!) / (n_a! n_b!) is the Fock-state probability
        prob = coef * coef * math.prod(math.factorial(k) for _, _, k in mono) / norm_in
        total += prob
        ports = {p for p, _, k in mono if k > 0}
        if ports == {"c", "d"}:
            coinc += prob
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"splitter output not normalized: {total}")
    return coinc


class OracleResult(NamedTuple):
    coincidence_at_zero: float
    coincidence_at_infinity: float
    visibility: float


def fock_oracle(scenario: HomScenario, max_total_photons: int = 2) -> OracleResult:
    """Coincidence probabilities by enumerating photon-number inputs.

    Input pairs (n_a, n_b) with n_a + n_b <= ``max_total_photons`` are
    summed, weighted by the arm probabilities. At zero delay a fraction R of
    the events has identical photons across the arms; at infinite delay none
    does. The default of 2 drops three- and four-photon events.
    """
    a, b, r = scenario.arm_a, scenario.arm_b, scenario.indistinguishability
    for arm, name in ((a, "a"), (b, "b")):
        if np.any(arm.probabilities[3:] > 0):
            raise DomainError(
                "hom", f"arm {name} has support above n = 2; pass arm.truncated(2) to the oracle"
            )
    if not 2 <= max_total_photons <= 4:
        raise DomainError("hom", "max_total_photons must be 2, 3 or 4")
    c0 = c_inf = 0.0
    for na in range(3):
        for nb in range(3):
            if na + nb > max_total_photons:
                continue
            w = a.p(na) * b.p(nb)
            if w == 0:
                continue
            dist = splitter_coincidence(na, nb, False)
            ident = splitter_coincidence(na, nb, True)
            c0 += w * (r * ident + (1 - r) * dist)
            c_inf += w * dist
    if not c_inf > 0:
        raise DomainError("hom", "no coincidences at infinite delay")
    return OracleResult(c0, c_inf, 1.0 - c0 / c_inf)


# ---------------------------------------------------------------------------
# export


def write_dip_csv(result: HomResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delay_ps", "coincidence_normalized"])
        for t, c in zip(result.delays, result.coincidence):
            w.writerow([f"{t * 1e12:.17g}", f"{c:.17g}"])


def summary(scenario: HomScenario) -> dict:
    vis = visibility_eq7(scenario)
    oracle = fock_oracle(
        HomScenario(scenario.arm_a.truncated(2), scenario.arm_b.truncated(2), scenario.indistinguishability)
    )
    assumptions = sorted(set(scenario.arm_a.assumptions) | set(scenario.arm_b.assumptions))
    return {
        "v_max": vis.v_max,
        "suppressed_fraction": vis.suppressed_fraction,
        "oracle_visibility": oracle.visibility,
        "indistinguishability": scenario.indistinguishability,
        "assumptions": assumptions,
    }


def write_summary_json(data: dict, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
