"""Scenario files: strict YAML parsing and validation.

A scenario is a YAML mapping. Every key is checked against the field tables
below; unknown keys, wrong types and out-of-range values are reported as
:class:`Diagnostic` entries carrying the dotted key path and the source line.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml

from .phasematch import available_presets

OUTPUT_KINDS = ("purity_sweep", "dfg_g2_curve", "hom_dip", "jsa_dump")
SCENARIO_SUFFIX = ".scenario"


@dataclass(frozen=True)
class Diagnostic:
    key: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.key or '<root>'}: {self.message}"


class ScenarioError(Exception):
    def __init__(self, diagnostics: List[Diagnostic]):
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# loading with line numbers


def _walk_lines(node, path: str, lines: Dict[str, int], diags: List[Diagnostic]) -> None:
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for key_node, value_node in node.value:
            key = str(key_node.value)
            sub = f"{path}.{key}" if path else key
            if key in seen:
                diags.append(Diagnostic(sub, "duplicate key", key_node.start_mark.line + 1))
            seen.add(key)
            _walk_lines(value_node, sub, lines, diags)
            lines[sub] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _walk_lines(item, f"{path}.{i}" if path else str(i), lines, diags)


def load_text(text: str) -> Tuple[Any, Dict[str, int], List[Diagnostic]]:
    diags: List[Diagnostic] = []
    lines: Dict[str, int] = {}
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        return None, lines, [Diagnostic("", f"YAML parse error: {problem}", line)]
    if node is not None:
        _walk_lines(node, "", lines, diags)
    return data, lines, diags


def resolve_path(ref: str | Path) -> Path:
    """A file path, or the name of a shipped scenario."""
    p = Path(ref)
    if p.exists():
        return p
    name = str(ref)
    if not name.endswith(SCENARIO_SUFFIX):
        name += SCENARIO_SUFFIX
    shipped = resources.files("hsphom") / "scenarios" / name
    if shipped.is_file():
        return Path(str(shipped))
    return p


def shipped_scenarios() -> List[str]:
    root = resources.files("hsphom") / "scenarios"
    return sorted(p.name[: -len(SCENARIO_SUFFIX)] for p in root.iterdir() if p.name.endswith(SCENARIO_SUFFIX))


# ---------------------------------------------------------------------------
# grammar
#
# Each field is (checker, default). A checker returns an error message or None.
# ``REQUIRED`` marks fields without default.

REQUIRED = object()


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def positive(v):
    return None if _num(v) and v > 0 else "must be a number > 0"


def non_negative(v):
    return None if _num(v) and v >= 0 else "must be a number >= 0"


def unit_interval(v):
    return None if _num(v) and 0 <= v <= 1 else "must be a number in [0, 1]"


def open_unit(v):
    return None if _num(v) and 0 <= v < 1 else "must be a number in [0, 1)"


def transmission(v):
    return None if _num(v) and 0 < v <= 1 else "must be a number in (0, 1]"


def at_least_one(v):
    return None if _num(v) and v >= 1 else "must be a number >= 1"


def number(v):
    return None if _num(v) else "must be a number"


def string(v):
    return None if isinstance(v, str) and v else "must be a non-empty string"


def grid_points(v):
    return None if isinstance(v, int) and not isinstance(v, bool) and v >= 3 else "must be an integer >= 3"


def one_of(*choices):
    def check(v):
        return None if v in choices else f"must be one of {', '.join(map(str, choices))}"
    return check


def positive_or(word):
    def check(v):
        return None if v == word or (_num(v) and v > 0) else f"must be a number > 0 or '{word}'"
    return check


def preset_name(v):
    if v in available_presets():
        return None
    return f"unknown crystal preset {v!r}; available presets: {', '.join(available_presets())}"


PUMP = {
    "center_wavelength_nm": (positive, REQUIRED),
    "intensity_fwhm_ghz": (positive, 80.0),
    "shape": (one_of("gaussian", "rect"), "gaussian"),
    "pulse_duration_ps": (positive, 2.0),
    "repetition_rate_mhz": (positive, 76.0),
}
TAYLOR_BRANCH = {
    "ref_wavelength_nm": (positive, REQUIRED),
    "index": (positive, REQUIRED),
    "k1_s_per_m": (positive, REQUIRED),
    "k2_s2_per_m": (number, 0.0),
}
CRYSTAL = {
    "preset": (preset_name, None),
    "taylor": (None, None),  # nested, see _validate_crystal
    "length_mm": (positive, None),
    "poling_period_um": (positive_or("solve"), "solve"),
    "idler_wavelength_nm": (positive, None),
    "pmf": (one_of("sinc", "gaussian"), "sinc"),
    "pmf_gamma": (positive, 0.193),
}
GRID = {
    "points": (grid_points, 512),
    "span_fwhm": (positive, 5.0),
}
FILTER = {
    "arm": (one_of("signal", "idler"), REQUIRED),
    "profile": (one_of("gaussian", "rect"), REQUIRED),
    "width_nm": (positive, None),
    "width_ghz": (positive, None),
    "center_nm": (positive_or("auto"), "auto"),
}
STATISTICS = {
    "alpha_sq": (non_negative, None),
    "pair_probability": (open_unit, None),
    "transmission": (transmission, None),
    "indistinguishability": (unit_interval, 1.0),
    "n_seed": (non_negative, None),
    "schmidt_K": (at_least_one, None),
    "n_spontaneous": (positive, 1.0),
}
DELAYS = {
    "start": (number, REQUIRED),
    "stop": (number, REQUIRED),
    "count": (grid_points, REQUIRED),
}
HOM = {
    "bandwidth_ghz": (positive, 80.0),
    "shape": (one_of("gaussian", "rect"), "gaussian"),
    "center_wavelength_nm": (positive, 1556.5),
    "grid_points": (grid_points, 2049),
    "span_fwhm": (positive, 20.0),
    "delays_ps": (None, None),  # nested
}
TOP = {
    "name": (string, REQUIRED),
    "output_dir": (string, None),
    "outputs": (None, REQUIRED),
    "pump": (None, None),
    "crystal": (None, None),
    "grid": (None, None),
    "filters": (None, None),
    "statistics": (None, None),
    "hom": (None, None),
    "sweep": (None, None),
}

SWEEPABLE_STATISTICS = ("alpha_sq", "pair_probability", "transmission", "indistinguishability", "n_seed", "schmidt_K")


class _Validator:
    def __init__(self, lines: Dict[str, int]):
        self.lines = lines
        self.diags: List[Diagnostic] = []

    def err(self, key: str, message: str) -> None:
        line = self.lines.get(key)
        probe = key
        while line is None and "." in probe:
            probe = probe.rsplit(".", 1)[0]
            line = self.lines.get(probe)
        self.diags.append(Diagnostic(key, message, line))

    def mapping(self, data, path: str, fields: Dict[str, Tuple[Optional[Callable], Any]]) -> Optional[dict]:
        if not isinstance(data, dict):
            self.err(path, "must be a mapping")
            return None
        out = {}
        for key in data:
            if key not in fields:
                self.err(f"{path}.{key}" if path else str(key),
                         f"unknown key; allowed: {', '.join(sorted(fields))}")
        for key, (check, default) in fields.items():
            sub = f"{path}.{key}" if path else key
            if key in data:
                value = data[key]
                if check is not None:
                    msg = check(value)
                    if msg:
                        self.err(sub, msg)
                        continue
                out[key] = value
            elif default is REQUIRED:
                self.err(sub, "required key is missing")
            elif default is not None:
                out[key] = default
        return out


def _validate_crystal(v: _Validator, raw) -> Optional[dict]:
    c = v.mapping(raw, "crystal", CRYSTAL)
    if c is None:
        return None
    if "taylor" in c:
        if "preset" in c:
            v.err("crystal.preset", "give either 'preset' or 'taylor', not both")
        t = c["taylor"]
        if not isinstance(t, dict):
            v.err("crystal.taylor", "must be a mapping with pump, signal and idler branches")
        else:
            branches = v.mapping(t, "crystal.taylor", {b: (None, REQUIRED) for b in ("pump", "signal", "idler")})
            if branches is not None:
                for b in ("pump", "signal", "idler"):
                    if b in branches:
                        branches[b] = v.mapping(branches[b], f"crystal.taylor.{b}", TAYLOR_BRANCH)
                c["taylor"] = branches
        for key in ("length_mm", "idler_wavelength_nm"):
            if key not in c:
                v.err(f"crystal.{key}", "required with an inline taylor model")
    else:
        c.setdefault("preset", "paper-like")
    return c


def _expand_values(v: _Validator, raw) -> Optional[List[float]]:
    if isinstance(raw, list):
        if not raw or any(not _num(x) for x in raw):
            v.err("sweep.values", "must be a non-empty list of numbers")
            return None
        return [float(x) for x in raw]
    if isinstance(raw, dict):
        r = v.mapping(raw, "sweep.values", DELAYS)
        if r is None or any(k not in r for k in DELAYS):
            return None
        return linspace(r["start"], r["stop"], r["count"])
    v.err("sweep.values", "must be a list of numbers or a {start, stop, count} range")
    return None


def linspace(start: float, stop: float, count: int) -> List[float]:
    if count == 1:
        return [float(start)]
    step = (stop - start) / (count - 1)
    return [float(start + i * step) for i in range(count)]


def _lookup(cfg: dict, path: str):
    node: Any = cfg
    for part in path.split("."):
        if isinstance(node, list):
            if not part.isdigit() or int(part) >= len(node):
                raise KeyError(path)
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node[part]
        else:
            raise KeyError(path)
    return node


def set_path(cfg: dict, path: str, value) -> None:
    parts = path.split(".")
    node: Any = cfg
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def validate_data(data, lines: Dict[str, int]) -> Tuple[Optional[dict], List[Diagnostic]]:
    """Validate a parsed scenario; returns the normalized config (defaults
    filled in) and the diagnostics."""
    v = _Validator(lines)
    top = v.mapping(data, "", TOP)
    if top is None:
        return None, v.diags
    cfg: Dict[str, Any] = {"name": top.get("name")}
    if "output_dir" in top:
        cfg["output_dir"] = top["output_dir"]

    outputs = top.get("outputs")
    if outputs is not None:
        if not isinstance(outputs, list) or not outputs:
            v.err("outputs", f"must be a non-empty list drawn from {', '.join(OUTPUT_KINDS)}")
        else:
            for i, o in enumerate(outputs):
                if o not in OUTPUT_KINDS:
                    v.err(f"outputs.{i}", f"unknown output {o!r}; expected one of {', '.join(OUTPUT_KINDS)}")
            if len(set(outputs)) != len(outputs):
                v.err("outputs", "duplicate output kinds")
            cfg["outputs"] = list(outputs)
    outputs = cfg.get("outputs", [])

    if "pump" in top:
        cfg["pump"] = v.mapping(top["pump"], "pump", PUMP)
    if "crystal" in top:
        cfg["crystal"] = _validate_crystal(v, top["crystal"])
    cfg["grid"] = v.mapping(top.get("grid", {}), "grid", GRID)
    if "filters" in top:
        if not isinstance(top["filters"], list):
            v.err("filters", "must be a list of filter mappings")
        else:
            cfg["filters"] = []
            for i, f in enumerate(top["filters"]):
                fm = v.mapping(f, f"filters.{i}", FILTER)
                if fm is not None:
                    widths = [k for k in ("width_nm", "width_ghz") if k in fm]
                    if len(widths) != 1 and not any(d.key.startswith(f"filters.{i}.width") for d in v.diags):
                        v.err(f"filters.{i}", "exactly one of width_nm or width_ghz is required")
                cfg["filters"].append(fm)
    if "statistics" in top:
        cfg["statistics"] = v.mapping(top["statistics"], "statistics", STATISTICS)
    if "hom" in top:
        h = v.mapping(top["hom"], "hom", HOM)
        if h is not None:
            d = h.get("delays_ps", {"start": -30.0, "stop": 30.0, "count": 241})
            h["delays_ps"] = v.mapping(d, "hom.delays_ps", DELAYS)
        cfg["hom"] = h

    sweep = None
    if "sweep" in top:
        s = v.mapping(top["sweep"], "sweep", {"variable": (string, REQUIRED), "values": (None, REQUIRED)})
        if s is not None and "values" in s:
            values = _expand_values(v, s["values"])
            if values is not None and "variable" in s:
                sweep = {"variable": s["variable"], "values": values}
                cfg["sweep"] = sweep
    if v.diags:
        return cfg, v.diags

    # cross-field rules
    if sweep is not None:
        var = sweep["variable"]
        try:
            _lookup(cfg, var)
            declared = var in lines
        except (KeyError, TypeError):
            declared = False
        if not declared:
            v.err("sweep.variable", f"{var!r} does not name a parameter declared in this scenario")
        else:
            ok = var.startswith("statistics.") and var.split(".", 1)[1] in SWEEPABLE_STATISTICS
            ok = ok or (var.startswith("filters.") and var.rsplit(".", 1)[-1] in ("width_nm", "width_ghz"))
            if not ok:
                v.err("sweep.variable", f"{var!r} cannot be swept")
            # each value must pass the field check
            field_check = _field_check(var)
            for i, value in enumerate(sweep["values"]):
                msg = field_check(value) if field_check else None
                if msg:
                    v.err(f"sweep.values.{i}", f"value for {var} {msg}")

    needs = {
        "purity_sweep": ("pump", "crystal", "filters", "sweep"),
        "dfg_g2_curve": ("statistics", "sweep"),
        "hom_dip": ("statistics", "hom"),
        "jsa_dump": ("pump", "crystal"),
    }
    for out in outputs:
        for section in needs[out]:
            if cfg.get(section) in (None, []):
                v.err(section, f"required by output {out!r}")
    if v.diags:
        return cfg, v.diags

    if "purity_sweep" in outputs:
        var = sweep["variable"]
        if not (var.startswith("filters.") and var.rsplit(".", 1)[-1] in ("width_nm", "width_ghz")):
            v.err("sweep.variable", "purity_sweep needs the sweep variable to be a filter width")
        elif any(b < a for a, b in zip(sweep["values"], sweep["values"][1:])):
            v.err("sweep.values", "filter widths must be ascending")
    if "dfg_g2_curve" in outputs:
        if sweep["variable"] != "statistics.n_seed":
            v.err("sweep.variable", "dfg_g2_curve needs the sweep variable statistics.n_seed")
        if "schmidt_K" not in cfg["statistics"]:
            v.err("statistics.schmidt_K", "required by output 'dfg_g2_curve'")
    if "hom_dip" in outputs:
        for key in ("alpha_sq", "pair_probability", "transmission"):
            if key not in cfg["statistics"]:
                v.err(f"statistics.{key}", "required by output 'hom_dip'")
    return cfg, v.diags


def _field_check(path: str) -> Optional[Callable]:
    parts = path.split(".")
    if parts[0] == "statistics":
        return STATISTICS[parts[1]][0]
    if parts[0] == "filters":
        return FILTER[parts[-1]][0]
    return None


def load_scenario(ref) -> Tuple[dict, Path]:
    """Parse and validate; raises :class:`ScenarioError` on any diagnostic."""
    path = resolve_path(ref)
    text = path.read_text(encoding="utf-8")
    data, lines, diags = load_text(text)
    if diags:
        raise ScenarioError(diags)
    cfg, diags = validate_data(data, lines)
    if diags:
        raise ScenarioError(diags)
    return cfg, path


def validate_scenario(ref) -> List[Diagnostic]:
    """All diagnostics for a scenario file; empty means runnable."""
    path = resolve_path(ref)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        return [Diagnostic("", f"cannot read {path}: {exc.strerror or exc}")]
    data, lines, diags = load_text(text)
    if diags:
        return diags
    _, diags = validate_data(data, lines)
    return diags


def with_value(cfg: dict, path: str, value) -> dict:
    out = copy.deepcopy(cfg)
    set_path(out, path, value)
    return out
