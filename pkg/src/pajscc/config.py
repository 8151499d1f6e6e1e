"""Scenario files: JSON documents mapped onto :class:`ScenarioConfig`.

Example::

    {
      "name": "two-path",
      "duration_s": 8.0,
      "distortion": "medium",
      "paths": [
        {"id": "wimax", "bandwidth_kbps": 2000, "prop_delay_ms": 40, "loss_rate": 0.01},
        {"id": "wlan", "bandwidth_kbps": 600, "prop_delay_ms": 80,
         "loss_rate": 0.15, "burst_len": 4, "availability": [[0, 4], [6, 8]]}
      ]
    }

Everything except ``paths`` and ``duration_s`` has a default (see
``DEFAULTS``). Unknown keys are rejected.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

from .allocator import SearchGrid
from .channel import LossMode, PathSpec, gilbert_from_stats
from .distortion import PRESETS, DistortionParams
from .errors import ConfigError, PajsccError
from .gop import GopSpec
from .sim import ScenarioConfig

DEFAULTS = {
    "name": "",
    "seed": 0,
    "packet_bytes": 1000,
    "feedback_delay_s": None,  # one GoP
    "feedback_ewma_alpha": 0.2,
    "warm_start": True,
    "distortion": "medium",
    "gop": {"frames_per_gop": 8, "frame_rate_fps": 30, "playout_offset_s": 0.4},
    "grid": {"v_min": 100, "v_step": 50, "v_max": None, "n_max": 255, "headroom": 0.95,
             "max_expansion": 4.0},
}
PATH_DEFAULTS = {"prop_delay_ms": 0.0, "loss_rate": 0.0, "burst_len": 1.0, "mode": "gilbert",
                 "availability": []}

_TOP_KEYS = set(DEFAULTS) | {"paths", "duration_s"}
_GOP_KEYS = set(DEFAULTS["gop"])
_GRID_KEYS = set(DEFAULTS["grid"]) | {"v_candidates"}
_PATH_KEYS = set(PATH_DEFAULTS) | {"id", "bandwidth_kbps"}
_DIST_KEYS = {"preset", "d0", "alpha", "v0", "beta"}


def _unknown(section: str, data: dict, allowed: set, problems: list):
    for key in sorted(set(data) - allowed):
        problems.append(f"{section}: unknown key {key!r}")


def _number(section, data, key, problems, *, integer=False, allow_none=False):
    value = data.get(key)
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{section}.{key}: expected a number, got {value!r}")
        return None
    if integer and int(value) != value:
        problems.append(f"{section}.{key}: expected an integer, got {value!r}")
        return None
    return int(value) if integer else float(value)


def _build_dist(raw, problems):
    if isinstance(raw, str):
        raw = {"preset": raw}
    if not isinstance(raw, dict):
        problems.append(f"distortion: expected a preset name or an object, got {raw!r}")
        return None
    _unknown("distortion", raw, _DIST_KEYS, problems)
    base = {}
    if "preset" in raw:
        preset = PRESETS.get(raw["preset"])
        if preset is None:
            problems.append(f"distortion.preset: unknown preset {raw['preset']!r} "
                            f"(choose from {', '.join(sorted(PRESETS))})")
            return None
        base = {"d0": preset.d0, "alpha": preset.alpha, "v0": preset.v0, "beta": preset.beta}
    values = {**base, **{k: raw[k] for k in ("d0", "alpha", "v0", "beta") if k in raw}}
    missing = {"d0", "alpha", "v0", "beta"} - set(values)
    if missing:
        problems.append(f"distortion: missing {', '.join(sorted(missing))}")
        return None
    nums = {k: _number("distortion", values, k, problems) for k in values}
    if None in nums.values():
        return None
    try:
        return DistortionParams(**nums)
    except PajsccError as exc:
        problems.append(f"distortion: {exc}")
        return None


def _build_path(i, raw, problems):
    section = f"paths[{i}]"
    if not isinstance(raw, dict):
        problems.append(f"{section}: expected an object")
        return None
    _unknown(section, raw, _PATH_KEYS, problems)
    for key in ("id", "bandwidth_kbps"):
        if key not in raw:
            problems.append(f"{section}: missing required key {key!r}")
    if "id" not in raw or "bandwidth_kbps" not in raw:
        return None
    data = {**PATH_DEFAULTS, **raw}
    if not isinstance(data["id"], str) or not data["id"]:
        problems.append(f"{section}.id: expected a non-empty string")
        return None
    section = f"paths[{data['id']}]"
    nums = {k: _number(section, data, k, problems)
            for k in ("bandwidth_kbps", "prop_delay_ms", "loss_rate", "burst_len")}
    if None in nums.values():
        return None
    if data["mode"] not in {m.value for m in LossMode}:
        problems.append(f"{section}.mode: expected 'gilbert' or 'iid', got {data['mode']!r}")
        return None
    windows = data["availability"]
    if not isinstance(windows, list) or not all(
            isinstance(w, list) and len(w) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in w)
            for w in windows):
        problems.append(f"{section}.availability: expected a list of [start_s, end_s] pairs")
        return None
    try:
        loss = gilbert_from_stats(nums["loss_rate"], nums["burst_len"])
        return PathSpec(id=data["id"], bandwidth_kbps=nums["bandwidth_kbps"],
                        prop_delay_ms=nums["prop_delay_ms"], loss=loss, mode=data["mode"],
                        availability=tuple(tuple(w) for w in windows))
    except PajsccError as exc:
        problems.append(f"{section}: {exc}")
        return None


def _build_grid(raw, total_bw, problems):
    if not isinstance(raw, dict):
        problems.append("grid: expected an object")
        return None
    _unknown("grid", raw, _GRID_KEYS, problems)
    explicit = raw.get("v_candidates")
    if explicit is not None and any(k in raw for k in ("v_min", "v_step", "v_max")):
        problems.append("grid: give either v_candidates or v_min/v_step/v_max, not both")
        return None
    data = {**DEFAULTS["grid"], **raw}
    opts = {"n_max": _number("grid", data, "n_max", problems, integer=True),
            "headroom": _number("grid", data, "headroom", problems),
            "max_expansion": _number("grid", data, "max_expansion", problems)}
    if None in opts.values():
        return None
    try:
        if explicit is not None:
            if not isinstance(explicit, list) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in explicit):
                problems.append("grid.v_candidates: expected a list of numbers")
                return None
            return SearchGrid(v_candidates=tuple(explicit), **opts)
        v_min = _number("grid", data, "v_min", problems)
        v_step = _number("grid", data, "v_step", problems)
        v_max = _number("grid", data, "v_max", problems, allow_none=True)
        if v_min is None or v_step is None or (data["v_max"] is not None and v_max is None):
            return None
        if not v_step > 0:
            problems.append("grid.v_step: must be > 0")
            return None
        return SearchGrid.default(total_bw if v_max is None else v_max, v_min, v_step, **opts)
    except PajsccError as exc:
        problems.append(f"grid: {exc}")
        return None


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Validate a parsed scenario document; every problem is reported at once."""
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError("invalid scenario", ["top level: expected an object"])
    _unknown("scenario", raw, _TOP_KEYS, problems)
    for key in ("paths", "duration_s"):
        if key not in raw:
            problems.append(f"scenario: missing required key {key!r}")
    data = {**DEFAULTS, **raw}

    paths = []
    if isinstance(data.get("paths"), list):
        paths = [_build_path(i, p, problems) for i, p in enumerate(data["paths"])]
    elif "paths" in raw:
        problems.append("paths: expected a list")

    gop = None
    if isinstance(data["gop"], dict):
        _unknown("gop", data["gop"], _GOP_KEYS, problems)
        g = {**DEFAULTS["gop"], **data["gop"]}
        fields = (_number("gop", g, "frames_per_gop", problems, integer=True),
                  _number("gop", g, "frame_rate_fps", problems),
                  _number("gop", g, "playout_offset_s", problems))
        if None not in fields:
            try:
                gop = GopSpec(*fields)
            except PajsccError as exc:
                problems.append(f"gop: {exc}")
    else:
        problems.append("gop: expected an object")

    dist = _build_dist(data["distortion"], problems)
    total_bw = sum(p.bandwidth_kbps for p in paths if p is not None)
    grid = _build_grid(data["grid"], total_bw, problems)

    scalars = {
        "duration_s": _number("scenario", data, "duration_s", problems) if "duration_s" in raw else None,
        "packet_bytes": _number("scenario", data, "packet_bytes", problems, integer=True),
        "feedback_delay_s": _number("scenario", data, "feedback_delay_s", problems, allow_none=True),
        "feedback_ewma_alpha": _number("scenario", data, "feedback_ewma_alpha", problems),
        "seed": _number("scenario", data, "seed", problems, integer=True),
    }
    if not isinstance(data["warm_start"], bool):
        problems.append("scenario.warm_start: expected true or false")
    if not isinstance(data["name"], str):
        problems.append("scenario.name: expected a string")

    if problems or None in paths or gop is None or dist is None or grid is None:
        raise ConfigError("invalid scenario", problems)
    return ScenarioConfig(paths=tuple(paths), gop=gop, dist=dist, grid=grid,
                          warm_start=data["warm_start"], name=data["name"], **scalars)


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read scenario ({exc.strerror})") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: parse error: {exc.msg}") from exc
    try:
        return config_from_dict(raw)
    except ConfigError as exc:
        raise ConfigError(f"{path}: invalid scenario", exc.problems) from None


def config_to_dict(config: ScenarioConfig) -> dict:
    """Fully explicit document that :func:`config_from_dict` maps back to ``config``."""
    d = config.dist
    return {
        "name": config.name,
        "seed": config.seed,
        "duration_s": config.duration_s,
        "packet_bytes": config.packet_bytes,
        "feedback_delay_s": config.feedback_delay_s,
        "feedback_ewma_alpha": config.feedback_ewma_alpha,
        "warm_start": config.warm_start,
        "gop": {"frames_per_gop": config.gop.frames_per_gop,
                "frame_rate_fps": config.gop.frame_rate_fps,
                "playout_offset_s": config.gop.playout_offset_s},
        "distortion": {"d0": d.d0, "alpha": d.alpha, "v0": d.v0, "beta": d.beta},
        "grid": {"v_candidates": list(config.grid.v_candidates), "n_max": config.grid.n_max,
                 "headroom": config.grid.headroom, "max_expansion": config.grid.max_expansion},
        "paths": [{"id": p.id, "bandwidth_kbps": p.bandwidth_kbps,
                   "prop_delay_ms": p.prop_delay_ms, "loss_rate": p.loss.pi_b,
                   "burst_len": p.loss.mean_burst_len, "mode": p.mode.value,
                   "availability": [list(w) for w in p.availability]}
                  for p in config.paths],
    }


def dump_scenario(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n", encoding="utf-8")


def set_dotted(raw: dict, dotted: str, value) -> dict:
    """Copy of ``raw`` with ``a.b.0.c`` set; list elements are addressed by index."""
    out = copy.deepcopy(raw)
    keys = dotted.split(".")
    node = out
    for i, key in enumerate(keys):
        last = i == len(keys) - 1
        if isinstance(node, list):
            try:
                idx = int(key)
                node[idx]
            except (ValueError, IndexError):
                raise ConfigError(f"--param {dotted}: no list element {key!r}") from None
            if last:
                node[idx] = value
            else:
                node = node[idx]
            continue
        if not isinstance(node, dict):
            raise ConfigError(f"--param {dotted}: {'.'.join(keys[:i])} is not an object")
        if last:
            node[key] = value
        else:
            if key not in node and key in DEFAULTS and isinstance(DEFAULTS[key], dict):
                node[key] = {}
            if key not in node:
                raise ConfigError(f"--param {dotted}: unknown key {key!r}")
            if isinstance(node[key], str) and key == "distortion":
                node[key] = {"preset": node[key]}
            node = node[key]
    return out
