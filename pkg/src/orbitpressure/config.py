"""Plain-text experiment specs.

Grammar, one setting per line::

    # comment
    key = value

Blank lines and ``#`` comments are ignored; keys are case-insensitive;
repeating a key is an error. Lists are comma separated. Recognised keys
(defaults in brackets):

==============  ===========================================================
command         dist | entropy | pressure | brin-katok | table | verify
system          fullshift | fullshift<k> | sft | golden | doubling | rotation
k               alphabet size for fullshift [2]
transitions     SFT rows as 0/1 strings, e.g. ``11,10``
alpha           rotation angle [golden ratio conjugate]
length          symbolic word horizon [256]
potential       zero | const:c | first_symbol:a,b,.. | circle:name[+c] [zero]
measure         bernoulli:p,.. | markov:r1;r2 | parry | lebesgue | none
variant         measure | topological | spanning (entropy/pressure/table)
n               list of horizons
eps             list of radii (delta for brin-katok)
q               list of step sizes [1]
qmax            run every q = 1..qmax instead of the q list
metric          list of bowen | mean | maxmean | fk
M               sample size
seed            integer seed
method          greedy | exact [greedy]
format          csv | json [csv]
output          output path [stdout]
x, y            points (words like ``0110`` or coordinates)
centers         Brin-Katok center count [25]
suite           verify suite list [all]
n_max           largest n used by verify [8]
pairs           random instances per verify suite [suite default]
==============  ===========================================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .measures import LEBESGUE, MeasureSpec, bernoulli, markov, parry
from .orbit_metrics import FAMILIES, MetricKind
from .systems import GOLDEN, DEFAULT_LENGTH, DynSystem, Potential

COMMANDS = ("dist", "entropy", "pressure", "brin-katok", "table", "verify")
KEYS = (
    "command", "system", "k", "transitions", "alpha", "length", "potential", "measure",
    "variant", "n", "eps", "q", "qmax", "metric", "M", "seed", "method", "format", "output",
    "x", "y", "centers", "suite", "n_max", "pairs",
)
_KEYMAP = {k.lower(): k for k in KEYS}


@dataclass(frozen=True)
class Setting:
    value: str
    line: Optional[int] = None
    column: Optional[int] = None


def parse_text(text: str) -> dict:
    """Raw ``key -> Setting`` map with source positions."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in raw:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col)
        left, _, right = raw.partition("=")
        key_col = len(left) - len(left.lstrip()) + 1
        key = _KEYMAP.get(left.strip().lower())
        if key is None:
            raise ConfigError(f"unknown key {left.strip()!r}", lineno, key_col)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno, key_col)
        val_col = len(left) + 2 + (len(right) - len(right.lstrip()))
        out[key] = Setting(right.strip(), lineno, val_col)
    return out


def read_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# value parsers

def _fail(setting: Setting, message: str):
    raise ConfigError(message, setting.line, setting.column)


def _int(s: Setting, lo: int = None) -> int:
    try:
        v = int(s.value)
    except ValueError:
        _fail(s, f"expected an integer, got {s.value!r}")
    if lo is not None and v < lo:
        _fail(s, f"value must be >= {lo}")
    return v


def _float(s: Setting) -> float:
    try:
        v = float(s.value)
    except ValueError:
        _fail(s, f"expected a number, got {s.value!r}")
    if not math.isfinite(v):
        _fail(s, "value must be finite")
    return v


def _list(s: Setting, conv) -> tuple:
    parts = [p.strip() for p in s.value.split(",")]
    if s.value.strip() == "" or any(p == "" for p in parts):
        _fail(s, "list must be non-empty, without empty items")
    out = []
    for p in parts:
        out.append(conv(Setting(p, s.line, s.column)))
    return tuple(out)


def _pos_float(s: Setting) -> float:
    v = _float(s)
    if v <= 0:
        _fail(s, "value must be positive")
    return v


def _choice(s: Setting, options) -> str:
    v = s.value.strip().lower()
    if v not in options:
        _fail(s, f"expected one of {', '.join(options)}; got {s.value!r}")
    return v


def _metric(s: Setting) -> str:
    return _choice(s, FAMILIES)


def parse_system(raw: dict) -> DynSystem:
    s = raw.get("system", Setting("fullshift"))
    name = s.value.strip().lower()
    length = _int(raw["length"], 1) if "length" in raw else DEFAULT_LENGTH
    try:
        if name.startswith("fullshift"):
            k = int(name[len("fullshift"):]) if name != "fullshift" else (
                _int(raw["k"], 1) if "k" in raw else 2)
            return DynSystem("fullshift", k=k, length=length)
        if name == "golden":
            return DynSystem("sft", transitions=((1, 1), (1, 0)), length=length)
        if name == "sft":
            if "transitions" not in raw:
                _fail(s, "system=sft needs a transitions setting")
            t = raw["transitions"]
            rows = [r.strip() for r in t.value.split(",")]
            if any(not r or set(r) - {"0", "1"} for r in rows):
                _fail(t, "transitions must be rows of 0/1 digits, e.g. 11,10")
            try:
                return DynSystem("sft", transitions=tuple(tuple(int(c) for c in r) for r in rows), length=length)
            except ValueError as exc:
                _fail(t, str(exc))
        if name == "doubling":
            return DynSystem("doubling")
        if name == "rotation":
            alpha = _float(raw["alpha"]) if "alpha" in raw else GOLDEN
            try:
                return DynSystem("rotation", alpha=alpha)
            except ValueError as exc:
                _fail(raw.get("alpha", s), str(exc))
    except ValueError as exc:
        _fail(s, str(exc))
    _fail(s, f"unknown system {s.value!r}")


def parse_potential(s: Setting) -> Potential:
    text = s.value.strip()
    head, _, body = text.partition(":")
    head = head.lower()
    try:
        if head == "zero" and not body:
            return Potential()
        if head in ("const", "constant"):
            return Potential("constant", value=float(body))
        if head == "first_symbol":
            return Potential("first_symbol", table=tuple(float(v) for v in body.split(",")))
        if head == "circle":
            name, _, off = body.partition("+")
            return Potential("circle", callback=name.strip(), offset=float(off) if off else 0.0)
    except ValueError as exc:
        _fail(s, f"bad potential {text!r}: {exc}")
    _fail(s, f"unknown potential {text!r}")


def parse_measure(s: Setting, system: DynSystem) -> Optional[MeasureSpec]:
    text = s.value.strip()
    head, _, body = text.partition(":")
    head = head.lower()
    try:
        if head == "none":
            return None
        if head == "lebesgue":
            return LEBESGUE
        if head == "parry":
            return parry(system.transition_matrix())
        if head == "bernoulli":
            return bernoulli(*(float(v) for v in body.split(",")))
        if head == "markov":
            rows = [[float(v) for v in r.split(",")] for r in body.split(";")]
            return markov(rows)
    except Exception as exc:  # malformed numbers or invalid probability data
        _fail(s, f"bad measure {text!r}: {exc}")
    _fail(s, f"unknown measure {text!r}")


# ---------------------------------------------------------------------------
# resolved spec

@dataclass
class ExperimentSpec:
    command: str
    system: DynSystem
    potential: Potential
    measure: Optional[MeasureSpec]
    variant: str
    n_list: tuple
    eps_list: tuple
    q_list: tuple
    qmax: Optional[int]
    metrics: tuple
    M: Optional[int]
    seed: Optional[int]
    method: str
    format: str
    output: Optional[str]
    x: Optional[str] = None
    y: Optional[str] = None
    centers: int = 25
    suite: tuple = ("all",)
    n_max: int = 8
    pairs: Optional[int] = None
    echo: list = field(default_factory=list)

    @property
    def measure_name(self) -> str:
        return self.measure.name if self.measure is not None else ""

    @property
    def kinds(self) -> tuple:
        return tuple(MetricKind(f, q) for f in self.metrics for q in self.q_list)


def _default_measure(system: DynSystem) -> str:
    if not system.symbolic:
        return "lebesgue"
    if system.kind == "fullshift":
        return "bernoulli:" + ",".join([repr(1.0 / system.k)] * system.k)
    return "parry"


def resolve(raw: dict) -> ExperimentSpec:
    """Fill defaults, validate, and record the resolved configuration."""
    cmd_s = raw.get("command")
    if cmd_s is None:
        raise ConfigError("missing command")
    command = _choice(cmd_s, COMMANDS)
    system = parse_system(raw)
    potential = parse_potential(raw.get("potential", Setting("zero")))
    if command == "entropy" and potential.kind != "zero":
        _fail(raw["potential"], "entropy runs use the zero potential")

    needs_measure = command == "brin-katok"
    variant = None
    if command in ("entropy", "pressure", "table"):
        default_variant = "measure" if "measure" in raw and raw["measure"].value.strip().lower() != "none" else "topological"
        variant = _choice(raw.get("variant", Setting(default_variant)), ("measure", "topological", "spanning"))
        needs_measure = variant == "measure"
    measure = None
    if needs_measure:
        measure = parse_measure(raw.get("measure", Setting(_default_measure(system))), system)
        if measure is None:
            _fail(raw["measure"], f"{command} needs a measure")

    def need(key):
        if key not in raw:
            raise ConfigError(f"{command} needs a {key} setting")
        return raw[key]

    n_list = _list(need("n"), lambda s: _int(s, 1)) if command != "verify" else ()
    eps_list = ()
    if command in ("entropy", "pressure", "table", "brin-katok"):
        eps_list = _list(need("eps"), _pos_float)
        if variant == "measure":
            for e, sv in zip(eps_list, [raw["eps"]] * len(eps_list)):
                if not e < 1:
                    _fail(sv, "measure covers need eps in (0, 1)")
    qmax = _int(raw["qmax"], 1) if "qmax" in raw else None
    q_list = tuple(range(1, qmax + 1)) if qmax else (
        _list(raw["q"], lambda s: _int(s, 1)) if "q" in raw else (1,))
    default_metric = "bowen" if command != "dist" else ",".join(FAMILIES)
    metrics = _list(raw.get("metric", Setting(default_metric)), _metric)
    if variant == "spanning":
        metrics, q_list = ("bowen",), (1,)
    M = _int(need("M"), 1) if (measure is not None) else None
    seed = None
    if "seed" in raw:
        seed = _int(raw["seed"])
    elif measure is not None or command == "verify" or (command == "dist" and "x" not in raw):
        seed = 0
    method = _choice(raw.get("method", Setting("greedy")), ("greedy", "exact"))
    fmt = _choice(raw.get("format", Setting("csv")), ("csv", "json"))
    output = raw["output"].value if "output" in raw else None
    x = raw["x"].value if "x" in raw else None
    y = raw["y"].value if "y" in raw else None
    centers = _int(raw["centers"], 1) if "centers" in raw else 25
    suite = _list(raw["suite"], lambda s: s.value.lower()) if "suite" in raw else ("all",)
    n_max = _int(raw["n_max"], 1) if "n_max" in raw else 8
    pairs = _int(raw["pairs"], 1) if "pairs" in raw else None

    spec = ExperimentSpec(command, system, potential, measure, variant or "", n_list, eps_list,
                          q_list, qmax, metrics, M, seed, method, fmt, output, x, y, centers,
                          suite, n_max, pairs)
    spec.echo = _echo(spec)
    return spec


def _fmt_list(vals) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in vals)


def _echo(spec: ExperimentSpec) -> list:
    lines = [
        ("command", spec.command),
        ("system", spec.system.name),
    ]
    if spec.system.symbolic:
        lines.append(("length", str(spec.system.length)))
    if spec.command != "verify":
        lines += [("potential", spec.potential.name), ("metric", _fmt_list(spec.metrics)),
                  ("q", _fmt_list(spec.q_list)), ("n", _fmt_list(spec.n_list))]
    if spec.qmax:
        lines.append(("qmax", str(spec.qmax)))
    if spec.variant:
        lines.append(("variant", spec.variant))
    if spec.eps_list:
        lines.append(("eps", _fmt_list(spec.eps_list)))
    if spec.measure is not None:
        lines += [("measure", spec.measure.name), ("M", str(spec.M))]
    if spec.seed is not None:
        lines.append(("seed", str(spec.seed)))
    if spec.command in ("entropy", "pressure", "table"):
        lines.append(("method", spec.method))
    if spec.command == "dist":
        if spec.x is not None:
            lines.append(("x", spec.x))
        if spec.y is not None:
            lines.append(("y", spec.y))
    if spec.command == "brin-katok":
        lines.append(("centers", str(spec.centers)))
    if spec.command == "verify":
        lines += [("suite", _fmt_list(spec.suite)), ("n_max", str(spec.n_max))]
        if spec.pairs is not None:
            lines.append(("pairs", str(spec.pairs)))
    lines.append(("format", spec.format))
    return [f"{k}={v}" for k, v in lines]
