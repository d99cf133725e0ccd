"""Run configuration: an INI file with fixed sections and keys.

Unknown sections or keys are rejected, and every value is range-checked
before anything is computed.
"""
import configparser
import io
import json
from dataclasses import dataclass

from .errors import ConfigError
from .models import K_FORMS, MODELS


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(s) for s in text)
    return tuple(float(s) for s in str(text).replace(",", " ").split())


SCHEMA = {
    "model": {
        "name": (str, "two_level", lambda v: v in MODELS),
        "omega": (float, 1.0, _positive),
        "delta": (float, 1.0, lambda v: True),
        "theta0": (float, 1.0471975511965976, lambda v: 0 < v < 3.141592653589793),
    },
    "noise": {
        "D": (float, 0.25, _nonneg),
        "k_form": (str, "cos_half", lambda v: v in K_FORMS),
        "seed": (int, 20240601, _nonneg),
    },
    "schedule": {
        "T": (float, 400.0, _positive),
        "steps": (int, 4000, _positive),
        "loops": (int, 1, _nonneg),
    },
    "numerics": {
        "dt": (float, 0.05, _positive),
        "gap_min": (float, 1e-6, _positive),
        "degeneracy_tol": (float, 1e-9, _positive),
        "include_ATy": (bool, True, lambda v: True),
    },
    "manifold": {
        "epsilon": (float, 0.1, lambda v: 0 < v < 0.7853981633974483),
    },
    "ensemble": {
        "N": (int, 10000, lambda v: v >= 100),
        "chunk": (int, 500, _positive),
    },
    "verify": {
        "durations": (_floats, (50.0, 100.0, 200.0, 400.0), lambda v: len(v) > 0 and min(v) > 0),
    },
    "curvature": {
        "n_theta": (int, 41, lambda v: v >= 3),
        "n_phi": (int, 41, lambda v: v >= 3),
        "loop_samples": (int, 10000, lambda v: v >= 4),
    },
    "output": {
        "dir": (str, "out", lambda v: len(v) > 0),
    },
}

_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}


def _convert(kind, raw, where):
    try:
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            return _BOOL[str(raw).strip().lower()]
        return kind(raw)
    except (KeyError, ValueError, TypeError):
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


@dataclass
class RunConfig:
    values: dict

    def __getitem__(self, section):
        return self.values[section]

    def get(self, section, key):
        return self.values[section][key]

    def to_dict(self):
        return {s: {k: (list(v) if isinstance(v, tuple) else v) for k, v in kv.items()}
                for s, kv in self.values.items()}

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for s, kv in self.values.items():
            cp[s] = {k: (" ".join(repr(x) for x in v) if isinstance(v, tuple) else
                         repr(v) if isinstance(v, float) else str(v)) for k, v in kv.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def from_mapping(data):
    """Build a validated RunConfig from ``{section: {key: value}}``."""
    values = {}
    for section in data:
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
    for section, keys in SCHEMA.items():
        given = dict(data.get(section, {}))
        for key in given:
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
        out = {}
        for key, (kind, default, ok) in keys.items():
            v = _convert(kind, given[key], f"[{section}] {key}") if key in given else default
            if not ok(v):
                raise ConfigError(f"[{section}] {key} = {v!r} out of range")
            out[key] = v
        values[section] = out
    return RunConfig(values)


def load(path=None):
    """Read an INI config, or the ``config`` echo of a JSON report."""
    if path is None:
        return from_mapping({})
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        try:
            return from_mapping(json.loads(text)["config"])
        except (KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: not a report with a config echo ({exc})") from None
    return loads(text)


def loads(text):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return from_mapping({s: dict(cp[s]) for s in cp.sections()})
