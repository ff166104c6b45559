"""
Run configuration: numeric tolerances, the run record the CLI executes, and
the JSON config-file parser.
"""
import json
import logging
import os
import re
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "predprey", "sweep", "cycle")
SOURCES = ("system", "polynomial", "predprey")
THREADS_ENV = "HOPF_LAB_THREADS"


@dataclass(frozen=True)
class Tolerances:
    tau_trans: float = 1e-3
    tau_deg: float = 1e-6
    tau_coeff: float = 1e-8
    simplicity: float = 1e-8
    residual: float = 1e-10
    scan_points: int = 200
    crossing: float = 1e-10
    tangency: float = 1e-9
    rtol: float = 1e-9
    atol: float = 1e-12
    closure: float = 1e-10
    max_crossings: int = 200

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"tolerance {f.name} must be positive, got {getattr(self, f.name)}")
        if self.tau_deg > self.tau_trans:
            raise ConfigError("tau_deg must not exceed tau_trans")


@dataclass(frozen=True)
class RunConfig:
    command: str
    system: Optional[str] = None
    polynomial: Optional[dict] = None
    predprey: Optional[dict] = None
    window: Optional[tuple] = None
    grid: Optional[tuple] = None        # (start, stop, count)
    lam: Optional[float] = None
    n: int = 1
    modes: Optional[int] = None
    output: Optional[str] = None
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def source(self):
        return next(s for s in SOURCES if getattr(self, s) is not None)


PREDPREY_KEYS = {"d1", "d2", "k", "theta", "ell"}
POLYNOMIAL_KEYS = {"dim", "terms", "window"}
TOP_KEYS = {f.name for f in fields(RunConfig)}


def _line_of(text, key):
    if text is None:
        return None
    pattern = re.compile(r'"%s"\s*:' % re.escape(key))
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return number
    return None


def _positive(value, name, text, allow_zero=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}", _line_of(text, name))
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}",
                          _line_of(text, name))
    return value


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _polynomial_block(block, text):
    """Checked copy of an inline polynomial system."""
    if not isinstance(block, dict) or "dim" not in block or "terms" not in block:
        raise ConfigError("polynomial needs 'dim' and 'terms'", _line_of(text, "polynomial"))
    bad = sorted(set(block) - POLYNOMIAL_KEYS)
    if bad:
        raise ConfigError(f"unknown polynomial key {bad[0]!r}", _line_of(text, bad[0]))
    dim = block["dim"]
    if not _is_int(dim) or dim < 2:
        raise ConfigError(f"polynomial dim must be an integer >= 2, got {dim!r}", _line_of(text, "dim"))

    line = _line_of(text, "terms")
    terms = block["terms"]
    if not isinstance(terms, list) or not terms:
        raise ConfigError("polynomial terms must be a non-empty list", line)
    clean = []
    for number, term in enumerate(terms):
        where = f"polynomial term {number}"
        if not isinstance(term, dict) or set(term) != {"component", "exponents", "coefficients"}:
            raise ConfigError(f"{where} needs exactly 'component', 'exponents' and 'coefficients'", line)
        component, exponents, coefficients = term["component"], term["exponents"], term["coefficients"]
        if not _is_int(component) or not 0 <= component < dim:
            raise ConfigError(f"{where}: component must be an integer in 0..{dim - 1}", line)
        if (not isinstance(exponents, list) or len(exponents) != dim
                or not all(_is_int(e) and e >= 0 for e in exponents)):
            raise ConfigError(f"{where}: exponents must be {dim} non-negative integers", line)
        if (not isinstance(coefficients, list) or not coefficients
                or not all(_is_number(c) for c in coefficients)):
            raise ConfigError(f"{where}: coefficients must be a non-empty list of numbers", line)
        clean.append({"component": component, "exponents": list(exponents),
                      "coefficients": [float(c) for c in coefficients]})

    out = {"dim": dim, "terms": clean}
    if block.get("window") is not None:
        window = block["window"]
        if (not isinstance(window, list) or len(window) != 2 or not all(_is_number(w) for w in window)
                or not window[1] > window[0]):
            raise ConfigError("polynomial window must be an increasing pair of numbers", _line_of(text, "window"))
        out["window"] = (float(window[0]), float(window[1]))
    return out


def config_from_mapping(mapping, text=None):
    """Validate a decoded mapping into a RunConfig; `text` anchors errors to lines."""
    if not isinstance(mapping, dict):
        raise ConfigError("config must be a JSON object", 1 if text else None)
    unknown = sorted(set(mapping) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", _line_of(text, unknown[0]))

    command = mapping.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}",
                          _line_of(text, "command"))

    given = [s for s in SOURCES if mapping.get(s) is not None]
    if len(given) != 1:
        raise ConfigError(f"exactly one system source is required ({', '.join(SOURCES)}), got {given or 'none'}",
                          _line_of(text, given[1]) if len(given) > 1 else None)

    values = dict(mapping)
    if values.get("predprey") is not None:
        block = values["predprey"]
        if not isinstance(block, dict):
            raise ConfigError("predprey must be an object", _line_of(text, "predprey"))
        bad = sorted(set(block) - PREDPREY_KEYS)
        if bad:
            raise ConfigError(f"unknown predprey key {bad[0]!r}", _line_of(text, bad[0]))
        missing = sorted({"d1", "d2", "k", "theta"} - set(block))
        if missing:
            raise ConfigError(f"predprey needs {', '.join(missing)}", _line_of(text, "predprey"))
        clean = {key: _positive(block[key], key, text, allow_zero=key in ("d1", "d2"))
                 for key in ("d1", "d2", "theta")}
        clean["k"] = _positive(block["k"], "k", text)
        if clean["k"] <= 1:
            raise ConfigError(f"k must exceed 1, got {clean['k']}", _line_of(text, "k"))
        if block.get("ell") is not None:
            clean["ell"] = _positive(block["ell"], "ell", text)
        values["predprey"] = clean

    if values.get("polynomial") is not None:
        values["polynomial"] = _polynomial_block(values["polynomial"], text)

    for key, size in (("window", 2), ("grid", 3)):
        if values.get(key) is not None:
            seq = values[key]
            if not isinstance(seq, (list, tuple)) or len(seq) != size:
                raise ConfigError(f"{key} must be a list of {size} numbers", _line_of(text, key))
            values[key] = tuple(float(v) for v in seq)
    if values.get("window") is not None and not values["window"][1] > values["window"][0]:
        raise ConfigError("window must be an increasing pair", _line_of(text, "window"))
    if values.get("grid") is not None:
        start, stop, count = values["grid"]
        if count < 1 or count != int(count):
            raise ConfigError("grid count must be a positive integer", _line_of(text, "grid"))
        values["grid"] = (start, stop, int(count))

    for key in ("n", "modes", "seed"):
        if values.get(key) is not None:
            if not isinstance(values[key], int) or isinstance(values[key], bool) or values[key] < 0:
                raise ConfigError(f"{key} must be a non-negative integer", _line_of(text, key))
    if values.get("n", 1) < 1:
        raise ConfigError("mode index n must be >= 1", _line_of(text, "n"))
    if values.get("lam") is not None:
        values["lam"] = float(values["lam"])

    tolerances = values.get("tolerances") or {}
    if isinstance(tolerances, Tolerances):
        values["tolerances"] = tolerances
    else:
        known = {f.name for f in fields(Tolerances)}
        bad = sorted(set(tolerances) - known)
        if bad:
            raise ConfigError(f"unknown tolerance {bad[0]!r}", _line_of(text, bad[0]))
        try:
            values["tolerances"] = Tolerances(**tolerances)
        except ConfigError as exc:
            name = next((k for k in tolerances if k in str(exc)), "tolerances")
            raise ConfigError(str(exc), _line_of(text, name)) from exc

    values = {k: v for k, v in values.items() if v is not None}
    return RunConfig(**values)


def parse_config(text):
    try:
        mapping = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from exc
    config = config_from_mapping(mapping, text)
    logger.debug("parsed config: command=%s source=%s", config.command, config.source)
    return config


def merged(config_text, overrides):
    """File values first, then non-None CLI overrides on top."""
    try:
        mapping = json.loads(config_text) if config_text else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from exc
    if not isinstance(mapping, dict):
        raise ConfigError("config must be a JSON object", 1)
    tol = dict(mapping.get("tolerances") or {})
    tol.update(overrides.pop("tolerances", {}) or {})
    if any(overrides.get(s) is not None for s in SOURCES):
        for s in SOURCES:
            mapping.pop(s, None)
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    if tol:
        mapping["tolerances"] = tol
    return config_from_mapping(mapping, config_text)


def worker_count(tasks):
    """Worker processes for `tasks` jobs, capped by HOPF_LAB_THREADS."""
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return max(1, min(limit, tasks))
