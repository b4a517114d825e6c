"""Scenario execution: builds the physics objects, writes tables, then the
manifest."""
from __future__ import annotations

import copy
import hashlib
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from . import hom, jsa, photstat, schmidt
from .optics import SpectralAxis, gaussian_profile, hz_to_omega, rect_profile, wavelength_to_omega
from .phasematch import QpmCrystal, design_crystal, get_preset, taylor_model
from .scenario import linspace, load_scenario, with_value

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"


@dataclass
class RunReport:
    scenario_name: str
    out_dir: Path
    outputs: List[Path] = field(default_factory=list)


def build_pump(cfg: dict) -> jsa.PumpSpec:
    p = cfg["pump"]
    return jsa.PumpSpec(
        center_wavelength=p["center_wavelength_nm"] * 1e-9,
        intensity_fwhm=p["intensity_fwhm_ghz"] * 1e9,
        shape=p["shape"],
        pulse_duration=p["pulse_duration_ps"] * 1e-12,
        repetition_rate=p["repetition_rate_mhz"] * 1e6,
    )


def build_crystal(cfg: dict, pump: jsa.PumpSpec) -> tuple[QpmCrystal, float]:
    """Crystal and design idler wavelength (m)."""
    c = cfg["crystal"]
    if "taylor" in c:
        branches = {
            name: {
                "ref_wavelength": b["ref_wavelength_nm"] * 1e-9,
                "index": b["index"],
                "k1": b["k1_s_per_m"],
                "k2": b["k2_s2_per_m"],
            }
            for name, b in c["taylor"].items()
        }
        dispersion = taylor_model("inline", branches)
        length = c["length_mm"] * 1e-3
        idler_wl = c["idler_wavelength_nm"] * 1e-9
    else:
        preset = get_preset(c["preset"])
        dispersion = preset.dispersion
        length = c["length_mm"] * 1e-3 if "length_mm" in c else preset.length
        idler_wl = c["idler_wavelength_nm"] * 1e-9 if "idler_wavelength_nm" in c else preset.idler_wavelength
    wi0 = wavelength_to_omega(idler_wl)
    ws0 = pump.omega - wi0
    if c["poling_period_um"] == "solve":
        crystal = design_crystal(dispersion, ws0, wi0, length)
    else:
        crystal = QpmCrystal(dispersion, c["poling_period_um"] * 1e-6, length)
    return crystal, idler_wl


def build_filter(f: dict) -> jsa.FilterSpec:
    center = None if f["center_nm"] == "auto" else f["center_nm"] * 1e-9
    if "width_nm" in f:
        return jsa.FilterSpec(f["arm"], f["profile"], f["width_nm"] * 1e-9, "m", center)
    return jsa.FilterSpec(f["arm"], f["profile"], f["width_ghz"] * 1e9, "hz", center)


def build_unfiltered_jsa(cfg: dict, workers: int = 1) -> jsa.JsaGrid:
    pump = build_pump(cfg)
    crystal, idler_wl = build_crystal(cfg, pump)
    c, g = cfg["crystal"], cfg["grid"]
    axes = jsa.default_axes(
        pump, crystal, idler_wl, n_points=g["points"], span_fwhm=g["span_fwhm"],
        pmf_mode=c["pmf"], gamma=c["pmf_gamma"],
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", jsa.JsaBoundaryWarning)
        grid = jsa.build_jsa(pump, crystal, *axes, pmf_mode=c["pmf"], gamma=c["pmf_gamma"], workers=workers)
    for w in caught:
        log.warning("%s", w.message)
    return grid


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _label(var: str, value: float) -> str:
    return f"{var.rsplit('.', 1)[-1]}_{value!r}"


def _purity_sweep(cfg: dict, out: Path, workers: int) -> List[Path]:
    var = cfg["sweep"]["variable"]
    index = int(var.split(".")[1])
    grid = build_unfiltered_jsa(cfg, workers)
    for i, f in enumerate(cfg["filters"]):
        if i != index:
            grid = jsa.apply_filter(grid, build_filter(f))
    template = build_filter(cfg["filters"][index])
    unit = 1e-9 if var.endswith("_nm") else 1e9
    rows = schmidt.purity_vs_filter_sweep(
        grid, [v * unit for v in cfg["sweep"]["values"]], template, workers=workers
    )
    csv_path = out / "purity_sweep.csv"
    schmidt.write_sweep_csv(rows, csv_path)
    spec = schmidt.schmidt_decompose(grid)
    heralded = jsa.marginal(grid, "signal" if template.arm == "idler" else "idler")
    summary = {
        "unfiltered_schmidt_K": spec.schmidt_number,
        "unfiltered_purity": spec.purity,
        "unfiltered_g2": spec.g2,
        "unfiltered_heralded_fwhm_ghz": heralded.fwhm() / hz_to_omega(1e9),
        "truncation_residual": spec.truncation_residual,
    }
    json_path = out / "purity_sweep_summary.json"
    hom.write_summary_json(summary, json_path)
    return [csv_path, json_path]


def _dfg_curve(cfg: dict, out: Path) -> List[Path]:
    st = cfg["statistics"]
    model = photstat.DfgSeedModel(0.0, st["schmidt_K"], st["n_spontaneous"])
    curve = photstat.dfg_g2_curve(model, cfg["sweep"]["values"])
    path = out / "dfg_g2_curve.csv"
    photstat.write_g2_curve_csv(curve, path)
    return [path]


def _spectral(h: dict) -> tuple:
    width = hz_to_omega(h["bandwidth_ghz"] * 1e9)
    center = wavelength_to_omega(h["center_wavelength_nm"] * 1e-9)
    axis = SpectralAxis(center, 2 * h["span_fwhm"] * width, h["grid_points"])
    if h["shape"] == "gaussian":
        prof = gaussian_profile(axis, center, width)
    else:
        prof = rect_profile(axis, center, width)
    prof = prof.normalize()
    return prof, prof


def _hom_dip(cfg: dict, out: Path, suffix: str) -> List[Path]:
    st, h = cfg["statistics"], cfg["hom"]
    arm_a = photstat.coherent_stats(st["alpha_sq"])
    arm_b = photstat.hsp_stats(st["pair_probability"], st["transmission"])
    spec_a, spec_b = _spectral(h)
    scen = hom.HomScenario(arm_a, arm_b, st["indistinguishability"], spec_a, spec_b)
    d = h["delays_ps"]
    delays = [t * 1e-12 for t in linspace(d["start"], d["stop"], d["count"])]
    result = hom.dip_profile(scen, delays)
    dip_path = out / f"hom_dip{suffix}.csv"
    hom.write_dip_csv(result, dip_path)
    sum_path = out / f"hom_summary{suffix}.json"
    hom.write_summary_json(hom.summary(scen), sum_path)
    stats_path = out / f"arm_stats{suffix}.csv"
    photstat.write_stats_csv([arm_a, arm_b], stats_path)
    return [dip_path, sum_path, stats_path]


def _jsa_dump(cfg: dict, out: Path, workers: int) -> List[Path]:
    grid = build_unfiltered_jsa(cfg, workers)
    for f in cfg.get("filters", []):
        grid = jsa.apply_filter(grid, build_filter(f))
    csv_path, bin_path = out / "jsa.csv", out / "jsa.bin"
    jsa.write_jsa_csv(grid, csv_path)
    jsa.write_jsa_binary(grid, bin_path)
    return [csv_path, bin_path]


def execute(cfg: dict, out: Path, workers: int = 1) -> List[Path]:
    """Write every requested output of a validated config into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    sweep = cfg.get("sweep")
    for kind in cfg["outputs"]:
        if kind == "purity_sweep":
            written += _purity_sweep(cfg, out, workers)
        elif kind == "dfg_g2_curve":
            written += _dfg_curve(cfg, out)
        elif kind == "hom_dip":
            if sweep and sweep["variable"].startswith("statistics."):
                for value in sweep["values"]:
                    sub = with_value(cfg, sweep["variable"], value)
                    written += _hom_dip(sub, out, "_" + _label(sweep["variable"], value))
            else:
                written += _hom_dip(cfg, out, "")
        elif kind == "jsa_dump":
            written += _jsa_dump(cfg, out, workers)
    return written


def run_scenario(
    ref,
    out_dir: Optional[Path] = None,
    grid_points: Optional[int] = None,
    seed_metadata: Optional[str] = None,
    workers: int = 1,
) -> RunReport:
    cfg, path = load_scenario(ref)
    cfg = copy.deepcopy(cfg)
    if grid_points is not None:
        cfg["grid"]["points"] = int(grid_points)
    if out_dir is None:
        out_dir = Path(cfg.get("output_dir", cfg["name"] + "_out"))
    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST
    if manifest_path.exists():
        manifest_path.unlink()
    written = execute(cfg, out_dir, workers)
    echo = dict(cfg)
    if seed_metadata is not None:
        echo["seed_metadata"] = seed_metadata
    manifest = {
        "scenario_name": cfg["name"],
        "outputs": [
            {"path": p.relative_to(out_dir).as_posix(), "sha256": _sha256(p)} for p in written
        ],
        "parameters_echo": echo,
    }
    hom.write_summary_json(manifest, manifest_path)
    log.info("wrote %d outputs to %s", len(written), out_dir)
    return RunReport(cfg["name"], out_dir, written + [manifest_path])
