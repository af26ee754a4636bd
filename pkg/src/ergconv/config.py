"""Job configuration: JSON parsing and validation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, StructuralError
from .groups import GroupHandle, from_spec
from .measure import Measure

ANALYSES = ("classify", "iterate", "spectrum", "vague")


def parse_p(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity", "∞"):
            return math.inf
        try:
            v = float(v)
        except ValueError:
            raise ConfigError(f"bad exponent {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"bad exponent {v!r}")
    p = float(v)
    if not (p >= 1):
        raise ConfigError(f"p must lie in [1, inf], got {v}")
    return p


@dataclass
class ClassifyParams:
    p: list = field(default_factory=lambda: [2.0])
    cross_check: bool = True
    horizon: int | None = None


@dataclass
class IterateParams:
    p: float = 2.0
    horizon: int = 1024
    tol: float = 1e-8
    tests: list = field(default_factory=list)  # raw elements; empty means delta_e


@dataclass
class SpectrumParams:
    grid: int | None = None
    refine: int = 3
    gap_tol: float = 1e-9
    samples: bool = False
    norms: list = field(default_factory=list)  # extra p values for operator_norm
    window: int = 4


@dataclass
class VagueParams:
    horizon: int = 1024
    tol: float = 1e-3
    monitor: list = field(default_factory=list)
    monitor_radius: int = 3


@dataclass
class OutputSpec:
    json: str = "report.json"
    csv: str | None = None
    svg: str | None = None


@dataclass
class Guards:
    memory_mb: float = 1000.0
    time_s: float = 600.0


@dataclass
class JobConfig:
    group_block: dict
    measure_block: list
    group: GroupHandle
    measure: Measure
    analyses: list  # list of (kind, params)
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0
    guards: Guards = field(default_factory=Guards)
    label: str = ""


def _positive(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not (x > 0) or math.isinf(x):
        raise ConfigError(f"{what} must be a positive number, got {x!r}")
    return x


def _posint(x, what):
    if isinstance(x, bool) or not isinstance(x, int) or x <= 0:
        raise ConfigError(f"{what} must be a positive integer, got {x!r}")
    return x


def _known(d: dict, allowed, where):
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _analysis(item) -> tuple:
    if not isinstance(item, dict):
        raise ConfigError(f"analysis entry must be an object, got {item!r}")
    if "type" in item:
        kind = item["type"]
        params = {k: v for k, v in item.items() if k != "type"}
    elif len(item) == 1:
        kind, params = next(iter(item.items()))
        params = params or {}
    else:
        raise ConfigError(f"analysis entry needs a 'type' or a single key: {item!r}")
    if kind not in ANALYSES:
        raise ConfigError(f"unknown analysis {kind!r}; expected one of {ANALYSES}")
    if not isinstance(params, dict):
        raise ConfigError(f"parameters of {kind} must be an object")

    if kind == "classify":
        _known(params, ("p", "cross_check", "horizon"), kind)
        ps = params.get("p", [2])
        ps = ps if isinstance(ps, list) else [ps]
        if not ps:
            raise ConfigError("classify needs at least one p")
        hz = params.get("horizon")
        return kind, ClassifyParams([parse_p(v) for v in ps], bool(params.get("cross_check", True)),
                                    None if hz is None else _posint(hz, "classify.horizon"))
    if kind == "iterate":
        _known(params, ("p", "horizon", "tol", "tests"), kind)
        p = parse_p(params.get("p", 2))
        if math.isinf(p):
            raise ConfigError("iterate supports p < inf only")
        return kind, IterateParams(p, _posint(params.get("horizon", 1024), "iterate.horizon"),
                                   _positive(params.get("tol", 1e-8), "iterate.tol"), list(params.get("tests", [])))
    if kind == "spectrum":
        _known(params, ("grid", "refine", "gap_tol", "samples", "norms", "window"), kind)
        grid = params.get("grid")
        return kind, SpectrumParams(
            None if grid is None else _posint(grid, "spectrum.grid"),
            _posint(params.get("refine", 3), "spectrum.refine"),
            _positive(params.get("gap_tol", 1e-9), "spectrum.gap_tol"),
            bool(params.get("samples", False)),
            [parse_p(v) for v in params.get("norms", [])],
            _posint(params.get("window", 4), "spectrum.window"),
        )
    _known(params, ("horizon", "tol", "monitor", "monitor_radius"), kind)
    hz = _posint(params.get("horizon", 1024), "vague.horizon")
    if hz < 2:
        raise ConfigError("vague.horizon must be >= 2")
    return kind, VagueParams(hz, _positive(params.get("tol", 1e-3), "vague.tol"), list(params.get("monitor", [])),
                             int(params.get("monitor_radius", 3)))


def parse_config(obj: dict) -> JobConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    _known(obj, ("group", "measure", "analyses", "output", "seed", "guards", "label"), "config")
    for key in ("group", "measure"):
        if key not in obj:
            raise ConfigError(f"config is missing '{key}'")
    try:
        g = from_spec(obj["group"])
        mu = Measure.from_json(g, obj["measure"])
    except (StructuralError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    raw = obj.get("analyses", [{"classify": {"p": [2]}}])
    if not isinstance(raw, list):
        raise ConfigError("'analyses' must be a list")
    analyses = [_analysis(a) for a in raw]
    out = obj.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("'output' must be an object")
    _known(out, ("json", "csv", "svg"), "output")
    output = OutputSpec(out.get("json", "report.json"), out.get("csv"), out.get("svg"))
    gd = obj.get("guards", {})
    if not isinstance(gd, dict):
        raise ConfigError("'guards' must be an object")
    _known(gd, ("memory_mb", "time_s"), "guards")
    guards = Guards(_positive(gd.get("memory_mb", 1000.0), "guards.memory_mb"), _positive(gd.get("time_s", 600.0), "guards.time_s"))
    seed = obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
    return JobConfig(obj["group"], obj["measure"], g, mu, analyses, output, seed, guards, str(obj.get("label", "")))


def load_config(path) -> JobConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(obj)
