"""Line-oriented config documents describing a network plus its sweep.

Example::

    [mode]
    label = a
    kerr = 5
    gamma = 1

    [coupling]
    from = a
    to = b
    g = 0.5
    phase = 0.5pi      # fractions of pi are allowed

    [drive]
    target = a
    epsilon = 0.01

    [sweep]
    variable = detuning
    start = -10
    stop = 10
    points = 401
    drive_ports = a, b

``[mode]`` and ``[coupling]`` may repeat; the other sections appear at most
once. ``[truncation]`` is optional and defaults to 3 photons.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Optional

from . import fockspace as fs
from .errors import ConfigurationError
from .model import TWO_PI, CouplingSpec, DriveSpec, ModeSpec, NetworkModel, wrap_phase
from .sweep import SweepSpec, check_sweep_against

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PI_RE = re.compile(rf"^({_NUMBER})?\s*\*?\s*pi$")
_NEG_PI_RE = re.compile(r"^-\s*pi$")

# key -> (kind, required)
SECTIONS = {
    "mode": {"label": ("ident", True), "omega": ("real", False), "kerr": ("real", True),
             "gamma": ("real", True)},
    "coupling": {"from": ("ident", True), "to": ("ident", True), "g": ("real", True),
                 "phase": ("real", False)},
    "drive": {"target": ("ident", True), "epsilon": ("real", True), "detuning": ("real", False)},
    "sweep": {"variable": ("ident", True), "start": ("real", True), "stop": ("real", True),
              "points": ("int", True), "drive_ports": ("list", True)},
    "truncation": {"total_cap": ("int", False), "per_mode_cap": ("intlist", False)},
}
REPEATABLE = {"mode", "coupling"}
DEFAULT_CAP = 3


class ConfigNote(UserWarning):
    """Non-fatal normalisation applied while parsing."""


@dataclass
class _Section:
    name: str
    line: int
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    failed: set = field(default_factory=set)


def parse_real(text: str) -> float:
    """Decimal real or a multiple of pi such as ``0.5pi``, ``-pi`` or ``2*pi``."""
    s = text.strip()
    if _NEG_PI_RE.match(s):
        return -math.pi
    m = _PI_RE.match(s)
    if m:
        coef = m.group(1)
        return (float(coef) if coef else 1.0) * math.pi
    if not re.fullmatch(_NUMBER, s):
        raise ValueError(f"not a real number: {text!r}")
    return float(s)


def _convert(kind: str, raw: str):
    if kind == "real":
        return parse_real(raw)
    if kind == "int":
        if not re.fullmatch(r"[+-]?\d+", raw):
            raise ValueError(f"not an integer: {raw!r}")
        return int(raw)
    if kind == "ident":
        if not raw.isidentifier():
            raise ValueError(f"not an identifier: {raw!r}")
        return raw
    items = [item.strip() for item in raw.split(",")]
    if raw.strip() == "":
        items = []
    if kind == "intlist":
        return [_convert("int", item) for item in items]
    return [_convert("ident", item) for item in items]


def _tokenize(text: str):
    sections, errors = [], []
    current: Optional[_Section] = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", line)
        if header:
            name = header.group(1).lower()
            if name not in SECTIONS:
                errors.append(f"line {lineno}: unknown section [{name}]")
                current = None
                continue
            if name in seen and name not in REPEATABLE:
                errors.append(f"line {lineno}: section [{name}] appears more than once")
            seen.add(name)
            current = _Section(name, lineno)
            sections.append(current)
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value' or a [section] header")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            errors.append(f"line {lineno}: '{key}' appears outside any section")
            continue
        spec = SECTIONS[current.name]
        if key not in spec:
            errors.append(f"line {lineno}: unknown key '{key}' in [{current.name}]")
            continue
        if key in current.values:
            errors.append(f"line {lineno}: duplicate key '{key}' in [{current.name}]")
            continue
        try:
            current.values[key] = _convert(spec[key][0], value)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")
            current.failed.add(key)
            continue
        current.lines[key] = lineno
    for sec in sections:
        for key, (_, required) in SECTIONS[sec.name].items():
            if required and key not in sec.values and key not in sec.failed:
                errors.append(f"line {sec.line}: [{sec.name}] is missing required key '{key}'")
    return sections, errors


def _where(sec: _Section, key: str) -> int:
    return sec.lines.get(key, sec.line)


def parse_config(text: str) -> tuple[NetworkModel, SweepSpec]:
    """Parse and fully validate a config document.

    Every problem is collected and raised together as one
    :class:`ConfigurationError` whose messages carry line numbers.
    """
    sections, errors = _tokenize(text)
    by_name = {}
    for sec in sections:
        by_name.setdefault(sec.name, []).append(sec)

    modes, mode_lines = [], {}
    for sec in by_name.get("mode", []):
        v = sec.values
        if "label" not in v:
            continue
        label = v["label"]
        if label in mode_lines:
            errors.append(f"line {_where(sec, 'label')}: mode '{label}' declared twice "
                          f"(first on line {mode_lines[label]})")
            continue
        mode_lines[label] = _where(sec, "label")
        mode = ModeSpec(label, v.get("omega", 0.0), v.get("kerr", 0.0), v.get("gamma", 1.0))
        errors.extend(f"line {sec.line}: {p}" for p in mode.problems())
        modes.append(mode)
    if not by_name.get("mode"):
        errors.append("line 1: document declares no [mode] sections")

    couplings, pairs = [], {}
    for sec in by_name.get("coupling", []):
        v = sec.values
        ok = True
        for key in ("from", "to"):
            if key in v and v[key] not in mode_lines:
                errors.append(f"line {_where(sec, key)}: coupling references undeclared "
                              f"mode '{v[key]}'")
                ok = False
        if not ok or not {"from", "to", "g"} <= set(v):
            continue
        if v["from"] == v["to"]:
            errors.append(f"line {sec.line}: coupling links mode '{v['from']}' to itself")
            continue
        if v["g"] < 0:
            errors.append(f"line {_where(sec, 'g')}: coupling strength must be >= 0")
            continue
        key = frozenset((v["from"], v["to"]))
        if key in pairs:
            errors.append(f"line {sec.line}: modes {sorted(key)} are already coupled on "
                          f"line {pairs[key]}")
            continue
        pairs[key] = sec.line
        phase = v.get("phase", 0.0)
        wrapped = wrap_phase(phase)
        if not 0.0 <= phase < TWO_PI:
            warnings.warn(
                f"line {_where(sec, 'phase')}: phase {phase:.17g} normalized to "
                f"{wrapped:.17g} (flux is 2pi periodic)",
                ConfigNote,
                stacklevel=2,
            )
        couplings.append(CouplingSpec(v["from"], v["to"], v["g"], wrapped))

    drive = None
    drives = by_name.get("drive", [])
    if not drives:
        errors.append("line 1: document has no [drive] section")
    else:
        sec = drives[0]
        v = sec.values
        if "target" in v and v["target"] not in mode_lines:
            errors.append(f"line {_where(sec, 'target')}: drive targets undeclared mode "
                          f"'{v['target']}'")
        elif {"target", "epsilon"} <= set(v):
            if not v["epsilon"] > 0:
                errors.append(f"line {_where(sec, 'epsilon')}: epsilon must be > 0")
            else:
                drive = DriveSpec(v["target"], v["epsilon"], v.get("detuning", 0.0))

    sweep = None
    sweeps = by_name.get("sweep", [])
    if not sweeps:
        errors.append("line 1: document has no [sweep] section")
    elif set(SECTIONS["sweep"]) <= set(sweeps[0].values):
        sec = sweeps[0]
        v = sec.values
        try:
            sweep = SweepSpec(v["variable"], v["start"], v["stop"], v["points"],
                              tuple(v["drive_ports"]))
        except ConfigurationError as exc:
            errors.extend(f"line {sec.line}: {m}" for m in exc.messages)

    truncation = None
    m = len(modes)
    tsec = by_name.get("truncation", [None])[0]
    if m:
        tv = tsec.values if tsec else {}
        caps = tv.get("per_mode_cap", [DEFAULT_CAP])
        if len(caps) == 1:
            caps = caps * m
        total = tv.get("total_cap", DEFAULT_CAP if tsec is None else None)
        if len(caps) != m:
            errors.append(f"line {_where(tsec, 'per_mode_cap')}: per_mode_cap lists "
                          f"{len(caps)} caps for {m} modes")
        else:
            try:
                truncation = fs.TruncationPolicy(tuple(caps), total)
            except (ConfigurationError, ValueError) as exc:
                line = tsec.line if tsec else 1
                errors.append(f"line {line}: {exc}")

    model = None
    if not errors and drive is not None and truncation is not None:
        try:
            model = NetworkModel(tuple(modes), tuple(couplings), drive, truncation)
        except ConfigurationError as exc:
            errors.extend(f"line 1: {msg}" for msg in exc.messages)
    if model is not None and sweep is not None:
        errors.extend(f"line {sweeps[0].line}: {p}" for p in check_sweep_against(model, sweep))
    if errors:
        raise ConfigurationError(errors)
    return model, sweep


def format_real(x: float) -> str:
    return repr(float(x))


def format_phase(phi: float) -> str:
    """``Xpi`` when that spelling parses back to exactly ``phi``."""
    if phi == 0:
        return "0"
    coef = phi / math.pi
    for digits in range(1, 8):
        text = f"{coef:.{digits}g}"
        if float(text) * math.pi == phi:
            return f"{text}pi"
    return format_real(phi)


def emit_config(model: NetworkModel, sweep: SweepSpec) -> str:
    """Config document that :func:`parse_config` maps back to equal objects."""
    out = []
    for m in model.modes:
        out += ["[mode]", f"label = {m.label}", f"omega = {format_real(m.omega)}",
                f"kerr = {format_real(m.kerr_u)}", f"gamma = {format_real(m.gamma)}", ""]
    for c in model.couplings:
        out += ["[coupling]", f"from = {c.from_mode}", f"to = {c.to_mode}",
                f"g = {format_real(c.strength)}", f"phase = {format_phase(c.phase)}", ""]
    d = model.drive
    out += ["[drive]", f"target = {d.target}", f"epsilon = {format_real(d.epsilon)}",
            f"detuning = {format_real(d.detuning)}", ""]
    fmt = format_phase if sweep.variable == "phase" else format_real
    out += ["[sweep]", f"variable = {sweep.variable}", f"start = {fmt(sweep.start)}",
            f"stop = {fmt(sweep.stop)}", f"points = {sweep.points}",
            f"drive_ports = {', '.join(sweep.drive_ports)}", ""]
    t = model.truncation
    out += ["[truncation]", f"per_mode_cap = {', '.join(str(c) for c in t.per_mode_caps)}"]
    if t.total_cap is not None:
        out.append(f"total_cap = {t.total_cap}")
    return "\n".join(out) + "\n"
