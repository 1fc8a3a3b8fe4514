"""Scenario configs: strict JSON parsing, defaults, canonical form, hashing.

A scenario file is a single JSON object. Unknown keys anywhere in it are
rejected rather than ignored, so typos fail fast. Wall records may omit
``attenuation_db``; the default then depends on the record's kind and on the
scenario's frequency band (walls lose 5 dB per crossing at 2.4 GHz and 9 dB
in the 5 GHz band; doors 2 dB and windows 3 dB in both).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .agent import Hyperparams
from .errors import ParseError, ValidationError
from .geometry import DEFAULT_CLEARANCE_M, FloorPlan, Position, Wall
from .propagation import AntennaPattern, PropagationParams, rss_threshold_for_distance

BAND_SPLIT_HZ = 3.5e9

WALL_ATTENUATION_DB = {
    "low": {"wall": 5.0, "door": 2.0, "window": 3.0},
    "high": {"wall": 9.0, "door": 2.0, "window": 3.0},
}

DEFAULT_MAX_STEPS = 10_000
DEFAULT_SPEED_V = 1.0
DEFAULT_TERMINAL_DISTANCE_M = 2.0

_TOP_KEYS = {
    "floor_plan", "victim", "start", "propagation", "hyperparams",
    "iterations", "max_steps", "master_seed", "speed_v", "terminal_distance_m",
}
_PLAN_KEYS = {"width", "height", "clearance_m", "walls"}
_WALL_KEYS = {"x1", "y1", "x2", "y2", "kind", "attenuation_db"}
_PROP_KEYS = {
    "tx_power_dbm", "frequency_hz", "path_loss_exponent_n",
    "shadowing_sigma_db", "shadowing_seed", "tx_pattern", "rx_pattern",
    "rx_heading_aligned",
}
_PATTERN_KEYS = {"kind", "exponent_k", "front_to_back_floor_db", "boresight_deg"}
_HYPER_KEYS = {"alpha", "gamma", "epsilon", "epsilon_decay", "epsilon_min"}


def default_wall_attenuation_db(kind: str, frequency_hz: float) -> float:
    band = "high" if frequency_hz > BAND_SPLIT_HZ else "low"
    return WALL_ATTENUATION_DB[band][kind]


def _require_keys(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ParseError("unknown key %r in %s" % (sorted(unknown)[0], where))


def _number(mapping: dict, key: str, where: str, default=None):
    if key not in mapping:
        if default is None:
            raise ParseError("missing key %r in %s" % (key, where))
        return default
    v = mapping[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError("%s.%s must be a number" % (where, key))
    return v


def _integer(mapping: dict, key: str, where: str, default=None):
    v = _number(mapping, key, where, default)
    if v != int(v):
        raise ParseError("%s.%s must be an integer" % (where, key))
    return int(v)


def _point(value, where: str) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in value)
    ):
        raise ParseError("%s must be a [x, y] pair of numbers" % where)
    return (float(value[0]), float(value[1]))


def _parse_pattern(value, where: str) -> AntennaPattern:
    if not isinstance(value, dict):
        raise ParseError("%s must be an object" % where)
    _require_keys(value, _PATTERN_KEYS, where)
    kind = value.get("kind", "omnidirectional")
    if kind not in ("omnidirectional", "directional"):
        raise ParseError("%s.kind must be omnidirectional or directional" % where)
    try:
        return AntennaPattern(
            kind=kind,
            exponent_k=float(_number(value, "exponent_k", where, 4.0)),
            front_to_back_floor_db=float(
                _number(value, "front_to_back_floor_db", where, -20.0)
            ),
            boresight_deg=float(_number(value, "boresight_deg", where, 0.0)),
        )
    except ValueError as exc:
        raise ValidationError("%s: %s" % (where, exc)) from None


@dataclass(frozen=True)
class ScenarioConfig:
    plan: FloorPlan
    victim: tuple[float, float]
    start: Position | None          # None means a random start each episode
    propagation: PropagationParams
    rx_heading_aligned: bool
    hyperparams: Hyperparams
    iterations: int
    max_steps: int = DEFAULT_MAX_STEPS
    master_seed: int = 0
    speed_v: float = DEFAULT_SPEED_V
    terminal_distance_m: float = DEFAULT_TERMINAL_DISTANCE_M

    def threshold_dbm(self) -> float:
        return rss_threshold_for_distance(self.terminal_distance_m, self.propagation)

    def map_params_and_steering(self) -> tuple[PropagationParams, AntennaPattern | None]:
        """Parameters for the stored map plus the steered receive pattern.

        With a heading-aligned directional receiver the stored map must not
        bake in any receive gain; the pattern is applied per reading instead.
        """
        p = self.propagation
        if self.rx_heading_aligned and p.rx_pattern.kind == "directional":
            return replace(p, rx_pattern=AntennaPattern.omni()), p.rx_pattern
        return p, None

    # -- canonical form ---------------------------------------------------

    def canonical_dict(self) -> dict:
        def pattern_dict(pat: AntennaPattern) -> dict:
            return {
                "kind": pat.kind,
                "exponent_k": pat.exponent_k,
                "front_to_back_floor_db": pat.front_to_back_floor_db,
                "boresight_deg": pat.boresight_deg,
            }

        p = self.propagation
        return {
            "floor_plan": {
                "width": self.plan.width,
                "height": self.plan.height,
                "clearance_m": self.plan.clearance_m,
                "walls": [
                    {
                        "x1": w.p1[0], "y1": w.p1[1],
                        "x2": w.p2[0], "y2": w.p2[1],
                        "kind": w.kind,
                        "attenuation_db": w.attenuation_db,
                    }
                    for w in self.plan.walls
                ],
            },
            "victim": [self.victim[0], self.victim[1]],
            "start": "random" if self.start is None else [self.start.x, self.start.y],
            "propagation": {
                "tx_power_dbm": p.tx_power_dbm,
                "frequency_hz": p.frequency_hz,
                "path_loss_exponent_n": p.path_loss_exponent_n,
                "shadowing_sigma_db": p.shadowing_sigma_db,
                "shadowing_seed": p.shadowing_seed,
                "tx_pattern": pattern_dict(p.tx_pattern),
                "rx_pattern": pattern_dict(p.rx_pattern),
                "rx_heading_aligned": self.rx_heading_aligned,
            },
            "hyperparams": {
                "alpha": self.hyperparams.alpha,
                "gamma": self.hyperparams.gamma,
                "epsilon": self.hyperparams.epsilon,
                "epsilon_decay": self.hyperparams.epsilon_decay,
                "epsilon_min": self.hyperparams.epsilon_min,
            },
            "iterations": self.iterations,
            "max_steps": self.max_steps,
            "master_seed": self.master_seed,
            "speed_v": self.speed_v,
            "terminal_distance_m": self.terminal_distance_m,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("ascii")).hexdigest()


def parse_scenario_dict(data: dict, overrides: dict | None = None) -> ScenarioConfig:
    """Build a validated config from a JSON-shaped mapping.

    ``overrides`` may replace ``frequency_hz``, ``iterations``,
    ``master_seed``, ``rx_kind`` (receive antenna kind) and ``tx_kind``
    before defaults are resolved, which is how the comparison sweeps vary
    one axis at a time.
    """
    if not isinstance(data, dict):
        raise ParseError("scenario root must be a JSON object")
    overrides = dict(overrides or {})
    _require_keys(data, _TOP_KEYS, "scenario")

    if "floor_plan" not in data or not isinstance(data["floor_plan"], dict):
        raise ParseError("scenario.floor_plan must be an object")
    plan_doc = data["floor_plan"]
    _require_keys(plan_doc, _PLAN_KEYS, "floor_plan")
    width = _integer(plan_doc, "width", "floor_plan")
    height = _integer(plan_doc, "height", "floor_plan")
    clearance = float(_number(plan_doc, "clearance_m", "floor_plan", DEFAULT_CLEARANCE_M))

    prop_doc = data.get("propagation", {})
    if not isinstance(prop_doc, dict):
        raise ParseError("scenario.propagation must be an object")
    _require_keys(prop_doc, _PROP_KEYS, "propagation")
    frequency = float(
        overrides.get("frequency_hz", _number(prop_doc, "frequency_hz", "propagation", 2.4e9))
    )

    walls_doc = plan_doc.get("walls", [])
    if not isinstance(walls_doc, list):
        raise ParseError("floor_plan.walls must be an array")
    walls = []
    for i, w in enumerate(walls_doc):
        where = "floor_plan.walls[%d]" % i
        if not isinstance(w, dict):
            raise ParseError("%s must be an object" % where)
        _require_keys(w, _WALL_KEYS, where)
        kind = w.get("kind", "wall")
        if kind not in ("wall", "door", "window"):
            raise ParseError("%s.kind must be wall, door or window" % where)
        att = _number(w, "attenuation_db", where, default_wall_attenuation_db(kind, frequency))
        try:
            walls.append(
                Wall(
                    p1=(float(_number(w, "x1", where)), float(_number(w, "y1", where))),
                    p2=(float(_number(w, "x2", where)), float(_number(w, "y2", where))),
                    kind=kind,
                    attenuation_db=float(att),
                )
            )
        except ValueError as exc:
            raise ValidationError("%s: %s" % (where, exc)) from None

    try:
        plan = FloorPlan(width, height, tuple(walls), clearance)
    except ValueError as exc:
        raise ValidationError("floor_plan: %s" % exc) from None

    if "victim" not in data:
        raise ParseError("missing key 'victim' in scenario")
    victim = _point(data["victim"], "scenario.victim")

    if "start" not in data:
        raise ParseError("missing key 'start' in scenario")
    start_doc = data["start"]
    if start_doc == "random":
        start: Position | None = None
    else:
        sx, sy = _point(start_doc, "scenario.start")
        if sx != int(sx) or sy != int(sy):
            raise ParseError("scenario.start cell coordinates must be integers")
        start = Position(int(sx), int(sy))

    tx_pat = _parse_pattern(prop_doc.get("tx_pattern", {}), "propagation.tx_pattern")
    rx_pat = _parse_pattern(prop_doc.get("rx_pattern", {}), "propagation.rx_pattern")
    if "tx_kind" in overrides:
        tx_pat = replace(tx_pat, kind=overrides["tx_kind"])
    if "rx_kind" in overrides:
        rx_pat = replace(rx_pat, kind=overrides["rx_kind"])
    heading_aligned = prop_doc.get("rx_heading_aligned", True)
    if not isinstance(heading_aligned, bool):
        raise ParseError("propagation.rx_heading_aligned must be a boolean")
    try:
        params = PropagationParams(
            tx_power_dbm=float(_number(prop_doc, "tx_power_dbm", "propagation", 25.0)),
            frequency_hz=frequency,
            path_loss_exponent_n=float(
                _number(prop_doc, "path_loss_exponent_n", "propagation", 2.0)
            ),
            shadowing_sigma_db=float(
                _number(prop_doc, "shadowing_sigma_db", "propagation", 0.0)
            ),
            shadowing_seed=_integer(prop_doc, "shadowing_seed", "propagation", 0),
            tx_pattern=tx_pat,
            rx_pattern=rx_pat,
        )
    except ValueError as exc:
        raise ValidationError("propagation: %s" % exc) from None

    hyper_doc = data.get("hyperparams", {})
    if not isinstance(hyper_doc, dict):
        raise ParseError("scenario.hyperparams must be an object")
    _require_keys(hyper_doc, _HYPER_KEYS, "hyperparams")
    try:
        hyper = Hyperparams(
            alpha=float(_number(hyper_doc, "alpha", "hyperparams", 0.1)),
            gamma=float(_number(hyper_doc, "gamma", "hyperparams", 0.9)),
            epsilon=float(_number(hyper_doc, "epsilon", "hyperparams", 1.0)),
            epsilon_decay=float(_number(hyper_doc, "epsilon_decay", "hyperparams", 0.999)),
            epsilon_min=float(_number(hyper_doc, "epsilon_min", "hyperparams", 0.05)),
        )
    except ValueError as exc:
        raise ValidationError("hyperparams: %s" % exc) from None

    iterations = int(overrides.get("iterations", _integer(data, "iterations", "scenario")))
    master_seed = int(overrides.get("master_seed", _integer(data, "master_seed", "scenario", 0)))
    max_steps = _integer(data, "max_steps", "scenario", DEFAULT_MAX_STEPS)
    speed_v = float(_number(data, "speed_v", "scenario", DEFAULT_SPEED_V))
    terminal_distance = float(
        _number(data, "terminal_distance_m", "scenario", DEFAULT_TERMINAL_DISTANCE_M)
    )

    # semantic checks
    if iterations < 0:
        raise ValidationError("iterations must be >= 0")
    if max_steps <= 0:
        raise ValidationError("max_steps must be > 0")
    if speed_v <= 0:
        raise ValidationError("speed_v must be > 0")
    if terminal_distance <= 0:
        raise ValidationError("terminal_distance_m must be > 0")
    if master_seed < 0:
        raise ValidationError("master_seed must be >= 0")
    if not (0.0 <= victim[0] <= plan.width and 0.0 <= victim[1] <= plan.height):
        raise ValidationError("victim %r lies outside the grid" % (list(victim),))
    victim_cell = Position(
        min(int(math.floor(victim[0])), plan.width - 1),
        min(int(math.floor(victim[1])), plan.height - 1),
    )
    if not plan.is_free(victim_cell):
        raise ValidationError(
            "victim %r sits in blocked cell %r" % (list(victim), tuple(victim_cell))
        )
    if start is not None and not plan.is_free(start):
        raise ValidationError("start %r is not a free cell" % (tuple(start),))

    return ScenarioConfig(
        plan=plan,
        victim=victim,
        start=start,
        propagation=params,
        rx_heading_aligned=heading_aligned,
        hyperparams=hyper,
        iterations=iterations,
        max_steps=max_steps,
        master_seed=master_seed,
        speed_v=speed_v,
        terminal_distance_m=terminal_distance,
    )


def parse_scenario(path, overrides: dict | None = None) -> ScenarioConfig:
    """Parse and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError("cannot read scenario file %s: %s" % (p, exc)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("invalid JSON in %s: %s" % (p, exc)) from None
    return parse_scenario_dict(data, overrides)


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario JSON shipped inside the package."""
    base = resources.files("sarsim") / "scenarios" / name
    with resources.as_file(base) as p:
        if not p.exists():
            raise ParseError("no bundled scenario named %r" % name)
        return Path(p)


def bundled_scenario_names() -> list[str]:
    base = resources.files("sarsim") / "scenarios"
    return sorted(p.name for p in base.iterdir() if p.name.endswith(".json"))
