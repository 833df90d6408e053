"""Config files: INI-style sections, or a JSON run manifest.

Example::

    [medium]
    n = 30
    T = 300          ; kelvin
    rho = 6.022e23
    E0z = 1e6

    [simulation]
    N_p = 8192
    seed = 1

Keys are case-sensitive.  ``n`` and ``T`` are required in ``[medium]``;
everything else falls back to the built-in defaults.
"""

from __future__ import annotations

import configparser
import json
import re
from dataclasses import asdict, fields
from pathlib import Path

from .dynamics import SimConfig
from .errors import ConfigError, SolvfelError
from .params import MediumParams
from .sweep import AXES, SweepSpec

REQUIRED_MEDIUM = ("n", "T")

# config key -> MediumParams field
MEDIUM_KEYS = {
    "n": "n",
    "T": "T",
    "rho": "rho",
    "E0z": "E0z",
    "Pz": "Pz_override",
    "N_ions": "N_ions",
    "V": "V",
    "wavenumber": "wavenumber",
    "d_e": "d_e",
    "d_g": "d_g",
}
SIM_KEYS = {f.name: f.name for f in fields(SimConfig)}
SWEEP_KEYS = ("axis", "values", "observable", "mode", "workers")

_INT_FIELDS = {"n", "N_p", "seed", "record_stride"}
_STR_FIELDS = {"phase_init_mode"}


def _key_lines(text):
    """Map (section, key) to 1-based line numbers."""
    lines = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = re.match(r"^([^=:;#\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines[(section, m.group(1).strip())] = no
    return lines


def _convert(name, raw):
    if name in _STR_FIELDS:
        return raw.strip()
    if name in _INT_FIELDS:
        value = float(raw)
        if value != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    return float(raw)


class LoadedConfig:
    """Parsed config: medium, simulation and (optionally) sweep settings."""

    def __init__(self, medium, sim, sweep=None, source=None, workers=1):
        self.medium = medium
        self.sim = sim
        self.sweep = sweep
        self.source = source
        self.workers = workers

    def echo(self):
        out = {"medium": asdict(self.medium), "simulation": asdict(self.sim)}
        if self.sweep is not None:
            out["sweep"] = {
                "axis": self.sweep.axis,
                "values": list(self.sweep.values),
                "observable": self.sweep.observable,
                "mode": self.sweep.mode,
            }
        return out


def default_config():
    return LoadedConfig(MediumParams(), SimConfig())


def _build(path, section_values, lines, require_medium=True):
    medium_raw = section_values.get("medium", {})
    sim_raw = section_values.get("simulation", {})
    missing = [k for k in REQUIRED_MEDIUM if k not in medium_raw] if require_medium else []
    if "medium" not in section_values and require_medium:
        raise ConfigError("missing [medium] section (required keys: n, T)", path=path)
    if missing:
        raise ConfigError(
            f"[medium] is missing required key {missing[0]!r}",
            line=lines.get(("medium", None)),
            path=path,
        )

    def convert_section(section, raw, table):
        out = {}
        for key, value in raw.items():
            if key not in table:
                raise ConfigError(f"unknown key {key!r} in [{section}]", line=lines.get((section, key)), path=path)
            name = table[key]
            if value is None:
                out[name] = None
                continue
            try:
                out[name] = value if not isinstance(value, str) else _convert(name, value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", line=lines.get((section, key)), path=path) from None
        return out

    medium_kw = convert_section("medium", medium_raw, MEDIUM_KEYS)
    if "Pz_override" in medium_kw and "E0z" not in medium_kw:
        medium_kw["E0z"] = None
    if "N_ions" in medium_kw and "rho" not in medium_kw:
        medium_kw["rho"] = None
    sim_kw = convert_section("simulation", sim_raw, SIM_KEYS)
    try:
        medium = MediumParams(**medium_kw)
    except SolvfelError as exc:
        raise ConfigError(f"invalid [medium]: {exc}", line=lines.get(("medium", None)), path=path) from None
    try:
        sim = SimConfig(**sim_kw)
    except SolvfelError as exc:
        raise ConfigError(f"invalid [simulation]: {exc}", line=lines.get(("simulation", None)), path=path) from None

    sweep = None
    workers = 1
    if "sweep" in section_values:
        raw = section_values["sweep"]
        for key in raw:
            if key not in SWEEP_KEYS:
                raise ConfigError(f"unknown key {key!r} in [sweep]", line=lines.get(("sweep", key)), path=path)
        if "axis" not in raw or "values" not in raw:
            raise ConfigError("[sweep] needs 'axis' and 'values'", line=lines.get(("sweep", None)), path=path)
        values = raw["values"]
        try:
            if isinstance(values, str):
                values = [float(v) for v in re.split(r"[,\s]+", values.strip()) if v]
            workers = int(raw.get("workers", 1))
        except ValueError as exc:
            raise ConfigError(f"bad [sweep] value: {exc}", line=lines.get(("sweep", "values")), path=path) from None
        kwargs = {"axis": str(raw["axis"]).strip(), "values": values, "base": medium, "sim": sim}
        for key in ("observable", "mode"):
            if key in raw:
                kwargs[key] = str(raw[key]).strip()
        if kwargs["axis"] not in AXES:
            raise ConfigError(f"axis must be one of {AXES}", line=lines.get(("sweep", "axis")), path=path)
        try:
            sweep = SweepSpec(**kwargs)
        except SolvfelError as exc:
            raise ConfigError(f"invalid [sweep]: {exc}", line=lines.get(("sweep", None)), path=path) from None
    return LoadedConfig(medium, sim, sweep, source=str(path), workers=workers)


def load_config(path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=path) from None
    if path.suffix == ".json":
        return _load_manifest(path, text)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", line=line, path=path) from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(exc.message.splitlines()[0], line=line, path=path) from None
    lines = _key_lines(text)
    for section in parser.sections():
        if section not in ("medium", "simulation", "sweep"):
            raise ConfigError(f"unknown section [{section}]", line=lines.get((section, None)), path=path)
    values = {s: dict(parser.items(s)) for s in parser.sections()}
    return _build(path, values, lines)


def _load_manifest(path, text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno, path=path) from None
    config = data.get("config", data)
    inverse_medium = {v: k for k, v in MEDIUM_KEYS.items()}
    medium = {inverse_medium.get(k, k): v for k, v in config.get("medium", {}).items()}
    sections = {"medium": medium, "simulation": config.get("simulation", {})}
    if "sweep" in config:
        sections["sweep"] = config["sweep"]
    return _build(path, sections, {})
