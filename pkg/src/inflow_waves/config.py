"""Scenario configuration files.

Configs are INI-style text read with :mod:`configparser`.  A schema lists
every accepted section and key with its type and default; anything else is
rejected with the offending line number.  Validation runs before any work so
that a bad config never produces partial output.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .thermo import GasModel, State

SCENARIOS = ("bl-classify", "bl-solve", "contact", "rarefaction", "superpose", "simulate", "verify-all")


class ConfigError(Exception):
    """Base class; ``exit_code`` distinguishes the failure kind."""

    exit_code = 2

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


class ConfigParseError(ConfigError):
    exit_code = 2


class ConfigValidationError(ConfigError):
    exit_code = 3


class ConfigMissingError(ConfigError):
    exit_code = 4


REQUIRED = object()


def _float(s: str) -> float:
    x = float(s)
    if not math.isfinite(x):
        raise ValueError(f"not a finite number: {s!r}")
    return x


def _int(s: str) -> int:
    return int(s)


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> tuple:
    items = [p for p in re.split(r"[,\s]+", s.strip()) if p]
    if not items:
        raise ValueError("empty list")
    return tuple(_float(p) for p in items)


def _str(s: str) -> str:
    return s.strip()


# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "scenario": {"name": (_str, REQUIRED)},
    "gas": {
        "R": (_float, 1.0),
        "gamma": (_float, 1.4),
        "mu": (_float, 1.0),
        "kappa": (_float, 1.0),
        "A": (_float, None),
    },
    "plus": {"v": (_float, 1.0), "u": (_float, 0.5), "theta": (_float, 1.0)},
    "minus": {"v": (_float, None), "u": (_float, None), "theta": (_float, None)},
    "design": {
        "u_star": (_float, 0.475),
        "cd_ratio": (_float, 0.0103),
        "delta_B": (_float, 1e-2),
        "branch": (_int, 1),
    },
    "sweep": {
        "mach": (_floats, (0.3, 0.7, 1.0, 1.5, 3.0)),
        "v": (_float, 1.0),
        "theta": (_float, 1.0),
        "negative_velocity": (_bool, True),
    },
    "bl": {
        "delta_B": (_float, 1e-2),
        "branch": (_int, 1),
        "h": (_float, 0.01),
        "xi_max": (_float, None),
    },
    "contact": {
        "theta_minus": (_float, 1.2),
        "theta_plus": (_float, 1.0),
        "p": (_float, 1.2),
        "u": (_float, 0.5),
        "sigma": (_float, -0.3),
        "L_eta": (_float, 10.0),
        "n": (_int, 4001),
        "times": (_floats, (10.0, 15.0, 20.0, 30.0, 50.0, 70.0, 100.0, 150.0, 200.0, 300.0, 500.0, 1000.0)),
    },
    "rarefaction": {
        "v_star": (_float, None),
        "eps": (_float, 0.25),
        "q": (_int, 16),
        "sigma": (_float, None),
        "times": (_floats, (1.0, 10.0, 100.0, 1000.0)),
        "n": (_int, 2001),
    },
    "grid": {"xi_max": (_float, 300.0), "n": (_int, 3000)},
    "solver": {
        "end_time": (_float, 100.0),
        "cfl": (_float, 0.4),
        "far_field": (_str, "extrapolation"),
        "sample_times": (_floats, (0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100)),
    },
    "perturbation": {
        "amplitude": (_float, 1e-2),
        "center": (_float, 20.0),
        "width": (_float, 3.0),
        "corner_width": (_float, 5.0),
    },
    "output": {"profile_times": (_floats, (0.0, 100.0))},
    "verify": {"stability": (_bool, True)},
}

# sections each scenario may use; [scenario] and [gas] are always allowed
SCENARIO_SECTIONS = {
    "bl-classify": ("sweep",),
    "bl-solve": ("plus", "bl"),
    "contact": ("contact",),
    "rarefaction": ("plus", "rarefaction"),
    "superpose": ("plus", "minus", "design", "rarefaction", "output", "grid"),
    "simulate": ("plus", "minus", "design", "rarefaction", "grid", "solver", "perturbation"),
    "verify-all": ("verify",),
}


@dataclass
class Scenario:
    """A validated configuration."""

    name: str
    gas: GasModel
    values: dict
    filled: set = field(default_factory=set)
    lines: dict = field(default_factory=dict)
    source: str = ""

    def section(self, name: str) -> dict:
        return self.values[name]

    def state(self, name: str) -> State | None:
        s = self.values.get(name)
        if s is None or s.get("v") is None:
            return None
        return State(s["v"], s["u"], s["theta"])

    def echo(self) -> list[str]:
        """Config lines with filled defaults marked."""
        out = []
        for sec in self.values:
            out.append(f"[{sec}]")
            for key, val in self.values[sec].items():
                mark = "  # default" if (sec, key) in self.filled else ""
                out.append(f"{key} = {format_config_value(val)}{mark}")
        return out


def format_config_value(val) -> str:
    if isinstance(val, tuple):
        return ", ".join(format_config_value(v) for v in val)
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    if val is None:
        return "none"
    return str(val)


def _line_map(text: str) -> dict:
    """(section, key) -> line number, plus (section, None) for headers."""
    lines = {}
    sec = None
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            sec = m.group(1).strip()
            lines.setdefault((sec, None), i)
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and sec is not None:
            lines.setdefault((sec, m.group(1).strip()), i)
    return lines


def _read(path) -> tuple[configparser.ConfigParser, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigMissingError("config file not found", path)
    text = p.read_text(encoding="utf-8")
    cp = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as e:
        raise ConfigParseError("key outside any [section]", path, e.lineno) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        raise ConfigParseError(e.message.split(": ", 1)[-1], path, e.lineno) from None
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ConfigParseError("malformed line (expected 'key = value')", path, lineno) from None
    return cp, text


def parse_config(path) -> Scenario:
    """Read, type-check and validate a scenario file."""
    cp, text = _read(path)
    lines = _line_map(text)
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigParseError(f"unknown section [{sec}]", path, lines.get((sec, None)))
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                raise ConfigParseError(f"unknown key '{key}' in [{sec}]", path, lines.get((sec, key)))
    if not cp.has_option("scenario", "name"):
        raise ConfigParseError("missing [scenario] name", path, lines.get(("scenario", None)))
    name = cp["scenario"]["name"].strip()
    if name not in SCENARIOS:
        raise ConfigValidationError(
            f"unknown scenario '{name}' (choose from {', '.join(SCENARIOS)})", path, lines.get(("scenario", "name"))
        )
    allowed = ("scenario", "gas") + SCENARIO_SECTIONS[name]
    for sec in cp.sections():
        if sec not in allowed:
            raise ConfigParseError(f"section [{sec}] is not used by scenario '{name}'", path, lines.get((sec, None)))

    values: dict = {}
    filled: set = set()
    for sec in allowed:
        values[sec] = {}
        for key, (conv, default) in SCHEMA[sec].items():
            if cp.has_option(sec, key):
                raw = cp[sec][key]
                try:
                    values[sec][key] = conv(raw)
                except ValueError as e:
                    raise ConfigParseError(f"bad value for '{key}': {e}", path, lines.get((sec, key))) from None
            else:
                if default is REQUIRED:
                    raise ConfigParseError(f"missing required key '{key}'", path, lines.get((sec, None)))
                values[sec][key] = default
                filled.add((sec, key))

    def fail(msg, sec, key=None):
        raise ConfigValidationError(msg, path, lines.get((sec, key), lines.get((sec, None))))

    gv = values["gas"]
    try:
        gas = GasModel(gv["R"], gv["gamma"], gv["mu"], gv["kappa"], gv["A"])
    except ValueError as e:
        bad = next((k for k in ("gamma", "R", "mu", "kappa", "A") if k == str(e).split()[0]), None)
        fail(str(e), "gas", bad)

    sc = Scenario(name, gas, values, filled, lines, str(path))
    _validate(sc, fail)
    return sc


def _positive(sc, fail, sec, *keys):
    for k in keys:
        val = sc.values[sec][k]
        if val is not None and not val > 0:
            fail(f"'{k}' must be positive, got {val}", sec, k)


def _validate(sc: Scenario, fail) -> None:
    v = sc.values
    if "plus" in v:
        _positive(sc, fail, "plus", "v", "theta")
        if not v["plus"]["u"] > 0:
            fail("far-field velocity must be positive", "plus", "u")
    if "minus" in v:
        m = v["minus"]
        given = [m[k] is not None for k in ("v", "u", "theta")]
        if any(given) and not all(given):
            fail("[minus] needs all of v, u, theta", "minus")
        if all(given):
            _positive(sc, fail, "minus", "v", "theta")
            if not m["u"] > 0:
                fail("boundary velocity must be positive for inflow", "minus", "u")
    if "design" in v:
        d = v["design"]
        if not 0 < d["u_star"] <= v["plus"]["u"]:
            fail("u_star must lie in (0, u_+]", "design", "u_star")
        if not d["cd_ratio"] > -1:
            fail("cd_ratio must exceed -1", "design", "cd_ratio")
        _positive(sc, fail, "design", "delta_B")
        if d["branch"] not in (-1, 1):
            fail("branch must be 1 or -1", "design", "branch")
    if "sweep" in v:
        _positive(sc, fail, "sweep", "v", "theta")
        if any(m < 0 for m in v["sweep"]["mach"]):
            fail("Mach numbers must be nonnegative", "sweep", "mach")
    if "bl" in v:
        _positive(sc, fail, "bl", "delta_B", "h", "xi_max")
        if v["bl"]["branch"] not in (-1, 1):
            fail("branch must be 1 or -1", "bl", "branch")
    if "contact" in v:
        _positive(sc, fail, "contact", "theta_minus", "theta_plus", "p", "L_eta")
        if v["contact"]["n"] < 101:
            fail("n must be at least 101", "contact", "n")
        if any(t < 0 for t in v["contact"]["times"]):
            fail("times must be nonnegative", "contact", "times")
    if "rarefaction" in v:
        r = v["rarefaction"]
        _positive(sc, fail, "rarefaction", "eps", "q", "n")
        if r["v_star"] is not None and r["v_star"] < v["plus"]["v"]:
            fail("v_star must not be below v_+ (3-rarefaction)", "rarefaction", "v_star")
        if sc.name == "rarefaction" and r["v_star"] is None:
            fail("rarefaction scenario needs v_star", "rarefaction")
        if any(t < 0 for t in r["times"]):
            fail("times must be nonnegative", "rarefaction", "times")
    if "grid" in v:
        _positive(sc, fail, "grid", "xi_max")
        if v["grid"]["n"] < 16:
            fail("grid needs at least 16 nodes", "grid", "n")
    if "solver" in v:
        s = v["solver"]
        if not 0 < s["cfl"] <= 1:
            fail("cfl must lie in (0, 1]", "solver", "cfl")
        if s["end_time"] < 0:
            fail("end_time must be nonnegative", "solver", "end_time")
        if s["far_field"] not in ("extrapolation", "dirichlet_plus_state"):
            fail("far_field must be 'extrapolation' or 'dirichlet_plus_state'", "solver", "far_field")
    if "perturbation" in v:
        p = v["perturbation"]
        _positive(sc, fail, "perturbation", "width", "corner_width")
        if p["center"] - p["width"] < 0:
            fail("bump must vanish at xi = 0 (center >= width)", "perturbation", "center")
        if "grid" in v and p["center"] + p["width"] > v["grid"]["xi_max"]:
            fail("bump must fit inside the domain", "perturbation", "center")
