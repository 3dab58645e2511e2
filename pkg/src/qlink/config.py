"""
Sweep configuration files.

A configuration is a flat list of ``key = value`` lines. ``#`` starts a
comment. A value is a single quantity, a comma-separated list or a
generator ``linspace(a, b, n) UNIT`` / ``logspace(a, b, n) UNIT``. Every
key holding more than one value becomes a swept axis; axes are swept in
the order they appear.

User-facing frequencies are ordinary frequencies: ``1 MHz`` and
``2pi*1MHz`` are the same value, stored internally as ``2 pi 10^6`` rad/s.
Lengths take ``m``, ``cm`` or ``mm``; times take ``s``, ``ms``, ``us``
(or ``µs``) and ``ns``. Dimensionless values may be written as a multiple
of ``pi`` (``20pi``).

Defaults
--------
broad_wall 2.286 cm, center_frequency 8.4 GHz, tolerance 1e-10,
resonant true (nodes on a link mode), lamb_compensation true, workers 1,
format csv. Every other default is listed in ``PARAMETERS``.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import TWO_PI
from .errors import ConfigurationError

EXPERIMENTS = ("modes", "lamb", "transfer", "stirap-compare", "phase-probe",
               "scatter", "cphase", "gate-transfer", "dressed")
FORMATS = ("csv", "jsonl")

FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
LENGTH_UNITS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9}


@dataclass(frozen=True)
class Parameter:
    """A recognized configuration key.

    ``kind`` is one of ``frequency``, ``length``, ``time``, ``float``,
    ``int``, ``bool`` and ``choice``. ``column`` is the output column name,
    which carries the unit values are reported in (MHz, m or s).
    """

    kind: str
    default: object = None
    required: Tuple[str, ...] = ()
    choices: Tuple[str, ...] = ()
    help: str = ""

    def column(self, name: str) -> str:
        suffix = {"frequency": "_mhz", "length": "_m", "time": "_s"}.get(self.kind, "")
        return name + suffix


_ALL_BUT_MODES = tuple(e for e in EXPERIMENTS if e != "modes")

PARAMETERS: Dict[str, Parameter] = {
    "length": Parameter("length", required=EXPERIMENTS, help="link length L"),
    "broad_wall": Parameter("length", 0.02286, help="waveguide broad wall l1"),
    "center_frequency": Parameter("frequency", TWO_PI * 8.4e9,
                                  help="frequency the central mode is chosen at"),
    "kappa": Parameter("frequency", required=_ALL_BUT_MODES,
                       help="cavity linewidth of node 1 (and default for node 2)"),
    "kappa2": Parameter("frequency", help="cavity linewidth of node 2 (default kappa)"),
    "eta": Parameter("float", 1.0, help="narrowing, photon bandwidth kappa/eta"),
    "span": Parameter("float", 20.0 * math.pi,
                      help="duration rule 2T = t_p + span / photon bandwidth"),
    "duration": Parameter("time", help="protocol length 2T (stirap-compare)"),
    "g0": Parameter("frequency", help="STIRAP peak coupling (default kappa/2)"),
    "t1": Parameter("time", help="qubit lifetime used for decoherence folding"),
    "g2_over_delta": Parameter("float", help="qubit-cavity coupling ratio of node 2"),
    "gp_over_delta": Parameter("float", help="Purcell filter coupling ratio"),
    "chi": Parameter("frequency", help="dispersive shift (default: optimized)"),
    "mode_offset": Parameter("int", 0, help="probed mode relative to the central mode"),
    "detuning_ratio": Parameter("float", 0.0,
                                help="photon center minus cavity 2, in units of kappa2"),
    "f23": Parameter("float", 1.0, help="fidelity of the local gate in gate-transfer"),
    "method": Parameter("choice", "perturbative", choices=("perturbative", "eigen"),
                        help="Lamb-shift evaluation (lamb)"),
    "tolerance": Parameter("float", 1e-10, help="integrator relative tolerance"),
    "resonant": Parameter("bool", True, help="nodes on a link mode (false: half an FSR off)"),
    "lamb_compensation": Parameter("bool", True, help="detune qubits by the Lamb shift"),
}

SETTINGS = {"experiment", "workers", "format", "out"}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(
    rf"^(?P<twopi>2\s*\*?\s*pi\s*\*\s*)?(?P<num>{_NUMBER})\s*(?P<pi>\*?\s*pi)?\s*(?P<unit>[a-zA-Zµ]*)$")
_GENERATOR = re.compile(
    r"^(?P<fn>linspace|logspace)\s*\((?P<args>[^)]*)\)\s*(?P<unit>[a-zA-Zµ]*)$")


@dataclass(frozen=True)
class SweepConfig:
    """A validated sweep: experiment, fixed values, axes and run settings.

    All values are internal units (rad/s, m, s). ``axes`` keeps file order.
    """

    experiment: str
    fixed: Dict[str, object]
    axes: Tuple[Tuple[str, Tuple[object, ...]], ...] = ()
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1

    @property
    def tolerance(self) -> float:
        return float(self.fixed["tolerance"])

    def points(self) -> List[Dict[str, object]]:
        """Cartesian product of the axes, first axis slowest."""
        grids = [[]]
        for name, values in self.axes:
            grids = [g + [(name, v)] for g in grids for v in values]
        points = []
        for g in grids:
            p = {**self.fixed, **dict(g)}
            # derived defaults: node 2 mirrors node 1, STIRAP peak at kappa/2
            if p.get("kappa") is not None:
                if p.get("kappa2") is None:
                    p["kappa2"] = p["kappa"]
                if p.get("g0") is None and self.experiment == "stirap-compare":
                    p["g0"] = 0.5 * p["kappa"]
            points.append(p)
        return points

    def resolved(self) -> Dict[str, object]:
        """Physics settings in reporting units (MHz, m, s); used for hashing."""
        fixed = {k: to_report(k, v) for k, v in sorted(self.fixed.items())}
        axes = [[k, [to_report(k, v) for v in vals]] for k, vals in self.axes]
        return {"experiment": self.experiment, "fixed": fixed, "axes": axes}

    def digest(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# --------------------------------------------------------------- values

def parse_quantity(key: str, text: str, line: Optional[int] = None) -> object:
    """Parse one scalar value of ``key`` to internal units."""
    spec = _parameter(key, line)
    raw = text.strip()
    if spec.kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise _error(key, f"expected a boolean, got {raw!r}", line)
    if spec.kind == "choice":
        if raw not in spec.choices:
            raise _error(key, f"expected one of {', '.join(spec.choices)}, got {raw!r}", line)
        return raw
    m = _QUANTITY.match(raw)
    if not m:
        raise _error(key, f"cannot parse {raw!r}", line)
    value = float(m.group("num"))
    if m.group("pi"):
        value *= math.pi
    return _scale(key, spec, value, m.group("unit"), bool(m.group("twopi")), raw, line)


def parse_values(key: str, text: str, line: Optional[int] = None) -> List[object]:
    """Parse a scalar, a comma list or a linspace/logspace generator."""
    raw = text.strip()
    if not raw:
        raise _error(key, "empty value", line)
    gen = _GENERATOR.match(raw)
    if gen:
        spec = _parameter(key, line)
        try:
            a, b, n = (s.strip() for s in gen.group("args").split(","))
            a, b, n = float(a), float(b), int(n)
        except ValueError:
            raise _error(key, f"bad generator arguments in {raw!r}", line) from None
        if n < 1:
            raise _error(key, "generator needs at least one point", line)
        if gen.group("fn") == "logspace":
            if not (a > 0 and b > 0):
                raise _error(key, "logspace bounds must be positive", line)
            grid = np.geomspace(a, b, n)
        else:
            grid = np.linspace(a, b, n)
        values = [_scale(key, spec, float(x), gen.group("unit"), False, raw, line)
                  for x in grid]
    else:
        items = [s for s in raw.split(",")]
        if any(not s.strip() for s in items):
            raise _error(key, f"empty list item in {raw!r}", line)
        # a unit written once after the last item applies to the whole list
        last = _QUANTITY.match(items[-1].strip())
        if last and last.group("unit"):
            items = [s + " " + last.group("unit")
                     if (m := _QUANTITY.match(s.strip())) and not m.group("unit") else s
                     for s in items]
        values = [parse_quantity(key, s, line) for s in items]
    for v in values:
        if isinstance(v, float) and not math.isfinite(v):
            raise _error(key, "values must be finite", line)
    return values


def to_report(key: str, value):
    """Internal value to reporting units (MHz ordinary, m, s)."""
    spec = PARAMETERS.get(key)
    if spec is None or value is None:
        return value
    if spec.kind == "frequency":
        return value / (TWO_PI * 1e6)
    return value


def _scale(key, spec, value, unit, twopi, raw, line):
    unit_l = unit.lower()
    if spec.kind == "frequency":
        if unit_l not in FREQ_UNITS:
            raise _error(key, f"frequency needs a unit (Hz, kHz, MHz, GHz) in {raw!r}", line)
        return TWO_PI * value * FREQ_UNITS[unit_l]
    if twopi:
        raise _error(key, f"2pi prefix only applies to frequencies ({raw!r})", line)
    if spec.kind == "length":
        if unit_l not in LENGTH_UNITS:
            raise _error(key, f"length needs a unit (m, cm, mm) in {raw!r}", line)
        return value * LENGTH_UNITS[unit_l]
    if spec.kind == "time":
        if unit not in TIME_UNITS and unit_l not in TIME_UNITS:
            raise _error(key, f"time needs a unit (s, ms, us, ns) in {raw!r}", line)
        return value * TIME_UNITS.get(unit, TIME_UNITS.get(unit_l))
    if unit:
        raise _error(key, f"unexpected unit {unit!r}", line)
    if spec.kind == "int":
        if value != int(value):
            raise _error(key, f"expected an integer, got {raw!r}", line)
        return int(value)
    return value


# --------------------------------------------------------------- documents

def parse_assignments(lines: Sequence[str], source: str = "<config>",
                      allow_settings: bool = True) -> Dict[str, Tuple[str, int]]:
    """Split ``key = value`` lines into ``{key: (value, line_number)}``."""
    entries: Dict[str, Tuple[str, int]] = {}
    for number, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigurationError(f"{source}:{number}: expected 'key = value', got {text!r}")
        key, value = (s.strip() for s in text.split("=", 1))
        if key in entries:
            raise ConfigurationError(
                f"{source}:{number}: duplicate key {key!r} (first set on line {entries[key][1]})")
        if key not in PARAMETERS and not (allow_settings and key in SETTINGS):
            raise ConfigurationError(f"{source}:{number}: unknown key {key!r}")
        entries[key] = (value, number)
    return entries


def build_config(entries: Dict[str, Tuple[str, int]], experiment: Optional[str] = None,
                 source: str = "<config>") -> SweepConfig:
    """Validate parsed assignments and fill defaults."""
    entries = dict(entries)
    if experiment is None:
        if "experiment" not in entries:
            raise ConfigurationError(f"{source}: missing required key 'experiment'")
        experiment, line = entries.pop("experiment")
        if experiment not in EXPERIMENTS:
            raise ConfigurationError(
                f"{source}:{line}: key 'experiment': unknown kind {experiment!r}")
    settings = {k: entries.pop(k) for k in list(entries) if k in SETTINGS - {"experiment"}}
    entries.pop("experiment", None)

    fixed: Dict[str, object] = {}
    axes: List[Tuple[str, Tuple[object, ...]]] = []
    for key, (text, line) in sorted(entries.items(), key=lambda kv: kv[1][1]):
        values = parse_values(key, text, _loc(source, line))
        if len(values) == 1:
            fixed[key] = values[0]
        else:
            axes.append((key, tuple(values)))
    present = set(fixed) | {k for k, _ in axes}
    for key, spec in PARAMETERS.items():
        if experiment in spec.required and key not in present:
            raise ConfigurationError(
                f"{source}: missing required key {key!r} for experiment {experiment!r}")
        if key not in present:
            fixed[key] = spec.default

    fmt, workers, out = "csv", 1, None
    if "format" in settings:
        fmt, line = settings["format"]
        if fmt not in FORMATS:
            raise ConfigurationError(f"{source}:{line}: key 'format': expected csv or jsonl")
    if "workers" in settings:
        text, line = settings["workers"]
        try:
            workers = int(text)
        except ValueError:
            raise ConfigurationError(f"{source}:{line}: key 'workers': expected an integer") from None
        if workers < 1:
            raise ConfigurationError(f"{source}:{line}: key 'workers': must be >= 1")
    if "out" in settings:
        out = settings["out"][0]
    return SweepConfig(experiment, fixed, tuple(axes), out, fmt, workers)


def load_config(path: str) -> SweepConfig:
    """Read and validate a configuration file.

    Raises
    ------
    ConfigurationError
        On unknown, duplicate or missing keys and on unparsable values; the
        message names the key and the line.
    OSError
        When the file cannot be read.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    return build_config(parse_assignments(lines, source=str(path)), source=str(path))


def _parameter(key, line) -> Parameter:
    try:
        return PARAMETERS[key]
    except KeyError:
        raise _error(key, "unknown key", line) from None


def _loc(source, line):
    return f"{source}:{line}"


def _error(key, message, line) -> ConfigurationError:
    where = f"{line}: " if line is not None else ""
    return ConfigurationError(f"{where}key {key!r}: {message}")
