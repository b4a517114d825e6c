"""Pulsed SPDC heralded single photons, DFG coherent states, and the
Hong-Ou-Mandel interference between them."""

from .errors import DomainError
from .hom import HomScenario, dip_profile, fock_oracle, mode_overlap, visibility_eq7
from .jsa import FilterSpec, JsaGrid, PumpSpec, apply_filter, build_jsa, dfg_partner_wavelength, marginal
from .optics import SpectralAxis, SpectralProfile, gaussian_profile, omega_to_wavelength, rect_profile, wavelength_to_omega
from .phasematch import DispersionModel, QpmCrystal, delta_k, get_preset, phasematching_function, solve_poling_period
from .photstat import ArmStatistics, DfgSeedModel, coherent_stats, dfg_g2, dfg_g2_curve, hsp_stats
from .schmidt import SchmidtSpectrum, purity_vs_filter_sweep, schmidt_decompose, schmidt_number

__version__ = "0.1.0"
