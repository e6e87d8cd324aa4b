"""Run configuration: strict INI parsing, defaults and canonical manifests.

Every section and key is declared in :data:`SCHEMA`; unknown names and
out-of-range values are rejected with the offending key and line number.
Units are fixed: time in ns, frequency in GHz (converted to rad/ns
internally via ω = 2πf), temperature in K.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError
from .io import config_hash

__all__ = ["SCHEMA", "EXPERIMENTS", "RunConfig", "parse_config", "load_config", "default_config",
           "apply_overrides"]

EXPERIMENTS = ("generate", "psd", "sde", "coherence", "bath-kernels", "gate-opt", "extract-hurst", "validate")


@dataclass(frozen=True)
class Key:
    kind: str  # float | int | str | bool | floats | strs | choice
    default: Any
    check: Callable[[Any], bool] | None = None
    choices: tuple = ()
    doc: str = ""


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _all(pred):
    return lambda xs: len(xs) > 0 and all(pred(x) for x in xs)


SCHEMA: dict[str, dict[str, Key]] = {
    "run": {
        "experiment": Key("choice", "validate", choices=EXPERIMENTS),
        "seed": Key("int", 0, _nonneg),
        "output_dir": Key("str", "out"),
        "threads": Key("int", 1, _pos),
        "strict": Key("bool", False),
    },
    "units": {
        "time": Key("choice", "ns", choices=("ns",)),
        "frequency": Key("choice", "GHz", choices=("GHz",)),
        "temperature": Key("choice", "K", choices=("K",)),
    },
    "profile": {
        "kind": Key("choice", "sinusoid", choices=("constant", "sinusoid", "cosinusoid", "tabulated")),
        "H0": Key("float", 0.65, lambda x: 0 < x < 1),
        "amplitude": Key("float", 0.1),
        "period": Key("float", 20.0, _pos, doc="ns"),
        "table": Key("str", "", doc="t:H pairs separated by commas"),
    },
    "generate": {
        "variant": Key("choice", "locally_stationary",
                       choices=("locally_stationary", "exact_rl", "constant_fbm", "circulant")),
        "t_end": Key("float", 20.0, _pos, doc="ns"),
        "n_points": Key("int", 512, lambda n: n >= 2),
        "n_paths": Key("int", 200, _pos),
        "sigma": Key("float", 1.0, _pos),
        "long_format": Key("bool", True),
    },
    "psd": {
        "segment_length": Key("int", 128, lambda n: n >= 8),
        "overlap": Key("float", 0.5, lambda x: 0 <= x < 1),
        "f_low": Key("float", 0.0, _nonneg, doc="1/ns, 0 = lowest bin"),
        "f_high": Key("float", 0.0, _nonneg, doc="1/ns, 0 = Nyquist"),
        "source": Key("choice", "increments", choices=("increments", "path")),
    },
    "sde": {
        "lam": Key("float", 0.0, _nonneg, doc="1/ns"),
        "sigma0": Key("float", 1.0, _nonneg),
        "kernel": Key("choice", "adaptive", choices=("adaptive", "fixed")),
        "gamma": Key("float", 0.2, lambda g: -0.5 < g <= 1.0),
        "t_end": Key("float", 10.0, _pos, doc="ns"),
        "n_points": Key("int", 512, lambda n: n >= 2),
        "n_paths": Key("int", 100, _pos),
        "epsilon0": Key("float", 1.0),
        "estimate": Key("choice", "none", choices=("none", "t1", "t2")),
        "carrier_steps": Key("int", 20, lambda n: n >= 4),
    },
    "coherence": {
        "mode": Key("choice", "bath", choices=("bath", "phenomenological")),
        "omega0_ghz": Key("float", 5.0, _pos, doc="qubit frequency, recorded only"),
        "omega_c_ghz": Key("float", 10.0, _pos),
        "coupling_mhz": Key("float", 50.0, _nonneg, doc="A / 2π"),
        "amplitude": Key("float", 1.0, _nonneg, doc="phenomenological S prefactor"),
        "hurst_values": Key("floats", (0.55, 0.65, 0.75), _all(lambda h: 0.5 < h <= 1.0)),
        "temperatures_k": Key("floats", (0.01, 0.05, 0.1, 0.5), _all(_pos)),
        "filters": Key("strs", ("ramsey", "echo")),
        "t_min": Key("float", 0.01, _pos, doc="ns"),
        "t_max": Key("float", 10.0, _pos, doc="ns"),
        "n_times": Key("int", 40, lambda n: n >= 2),
        "omega_min": Key("float", 0.0, _nonneg, doc="rad/ns, 0 = 2π/(100 t_max)"),
    },
    "bath-kernels": {
        "omega_c_ghz": Key("float", 10.0, _pos),
        "coupling_mhz": Key("float", 50.0, _nonneg),
        "temperature_k": Key("float", 0.05, _pos),
        "t_m": Key("float", 0.0, _nonneg, doc="ns"),
        "tau_max": Key("float", 1.0, _pos, doc="ns"),
        "n_tau": Key("int", 101, lambda n: n >= 2),
    },
    "gate-opt": {
        "t1": Key("float", 30.0, _pos, doc="ns"),
        "alpha": Key("float", 0.5, _nonneg),
        "hurst": Key("float", 0.7, lambda h: 0.5 < h < 1.0),
        "omega_min_t": Key("float", 100.0, lambda x: x > 1.0, doc="IR cutoff times t, used for H > 3/4"),
        "t_min": Key("float", 1e-4, _pos, doc="ns"),
        "t_max": Key("float", 1e3, _pos, doc="ns"),
        "n_points": Key("int", 200, lambda n: n >= 2),
    },
    "extract-hurst": {
        "method": Key("choice", "coherence", choices=("coherence", "variance")),
        "input": Key("str", "", doc="CSV with t, coherence and optional filter columns; empty = synthesize"),
        "window_length": Key("int", 8, lambda n: n >= 6),
        "t_min": Key("float", 0.1, _pos),
        "t_max": Key("float", 5.0, _pos),
        "n_times": Key("int", 64, lambda n: n >= 6),
        "threshold": Key("float", 0.05, _pos),
    },
    "validate": {},
}

_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _convert(sec, key, spec: Key, raw: str, line):
    raw = raw.strip()
    try:
        if spec.kind == "float":
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError
        elif spec.kind == "int":
            val = int(raw)
        elif spec.kind == "bool":
            val = _BOOL[raw.lower()]
        elif spec.kind == "floats":
            val = tuple(float(x) for x in raw.split(",") if x.strip())
        elif spec.kind == "strs":
            val = tuple(x.strip() for x in raw.split(",") if x.strip())
        elif spec.kind == "choice":
            if raw not in spec.choices:
                raise ConfigError(f"[{sec}] {key} must be one of {', '.join(spec.choices)}", key, line)
            val = raw
        else:
            val = raw
    except (ValueError, KeyError):
        raise ConfigError(f"[{sec}] {key}: cannot parse {raw!r} as {spec.kind}", key, line) from None
    if spec.check is not None and not spec.check(val):
        raise ConfigError(f"[{sec}] {key} = {raw} is out of range", key, line)
    return val


def _render(spec: Key, val) -> str:
    if spec.kind == "bool":
        return "true" if val else "false"
    if spec.kind == "floats":
        return ", ".join(repr(float(x)) for x in val)
    if spec.kind == "strs":
        return ", ".join(val)
    if spec.kind == "float":
        return repr(float(val))
    return str(val)


def _line_map(text: str):
    where = {}
    sec = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            sec = m.group(1).strip()
            where.setdefault((sec, None), i)
            continue
        k = re.split(r"[=:]", s, maxsplit=1)[0].strip()
        where[(sec, k)] = i
    return where


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)  # section -> key -> value

    def __getitem__(self, section):
        return self.values[section]

    @property
    def experiment(self) -> str:
        return self.values["run"]["experiment"]

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]

    @property
    def output_dir(self) -> Path:
        return Path(self.values["run"]["output_dir"])

    def replace(self, section: str, **kw) -> "RunConfig":
        vals = {s: dict(v) for s, v in self.values.items()}
        for k, v in kw.items():
            if k not in SCHEMA[section]:
                raise ConfigError(f"unknown key [{section}] {k}", k)
            vals[section][k] = v
        return RunConfig(vals)

    def to_text(self) -> str:
        """Canonical INI text; parsing it gives back an equal config."""
        out = []
        for sec, keys in SCHEMA.items():
            out.append(f"[{sec}]")
            for k, spec in keys.items():
                out.append(f"{k} = {_render(spec, self.values[sec][k])}")
            out.append("")
        return "\n".join(out)

    def hash(self) -> str:
        """Hash of everything that affects results (not output_dir or threads)."""
        skip = {"output_dir = ", "threads = "}
        text = "\n".join(ln for ln in self.to_text().splitlines()
                         if not any(ln.startswith(k) for k in skip))
        return config_hash(text)


def default_config() -> RunConfig:
    return RunConfig({s: {k: spec.default for k, spec in keys.items()} for s, keys in SCHEMA.items()})


def parse_config(text: str) -> RunConfig:
    """Parse INI text against :data:`SCHEMA`, filling defaults."""
    where = _line_map(text)
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#",), strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key in [{exc.section}]", exc.option, exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", exc.section, exc.lineno) from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc.message.splitlines()[0]}",
                          None, getattr(exc, "lineno", None)) from None
    cfg = default_config()
    vals = {s: dict(v) for s, v in cfg.values.items()}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", sec, where.get((sec, None)))
        for key, raw in cp.items(sec):
            line = where.get((sec, key))
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key in [{sec}]", key, line)
            vals[sec][key] = _convert(sec, key, SCHEMA[sec][key], raw, line)
    c, g = vals["coherence"], vals["gate-opt"]
    if c["t_min"] >= c["t_max"]:
        raise ConfigError("[coherence] t_min must be < t_max", "t_min", where.get(("coherence", "t_min")))
    if g["t_min"] >= g["t_max"]:
        raise ConfigError("[gate-opt] t_min must be < t_max", "t_min", where.get(("gate-opt", "t_min")))
    e = vals["extract-hurst"]
    if e["t_min"] >= e["t_max"]:
        raise ConfigError("[extract-hurst] t_min must be < t_max", "t_min", where.get(("extract-hurst", "t_min")))
    return RunConfig(vals)


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(p)) from None
    return parse_config(text)


def apply_overrides(cfg: RunConfig, pairs) -> RunConfig:
    """Apply ``section.key=value`` strings with the same checks as the parser."""
    vals = {s: dict(v) for s, v in cfg.values.items()}
    for item in pairs:
        name, sep, raw = item.partition("=")
        sec, dot, key = name.strip().rpartition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not of the form section.key=value", item)
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", sec)
        if key not in SCHEMA[sec]:
            raise ConfigError(f"unknown key in [{sec}]", key)
        vals[sec][key] = _convert(sec, key, SCHEMA[sec][key], raw, None)
    # re-parse so that cross-key checks run on the result
    return parse_config(RunConfig(vals).to_text())
