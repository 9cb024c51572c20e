"""Run configuration: one JSON file, deep defaulting, path-qualified errors.

Every run artifact embeds the fully resolved configuration (defaults filled
in), so any output can be regenerated from the config block it carries.
"""
from __future__ import annotations

import copy
import json

import numpy as np

from . import model
from .errors import ConfigError

DEFAULTS = {
    "instance": {
        "source": "generator",  # generator | file | inline
        "file": None,
        "inline": None,
        "generator": {
            "kind": "gaussian",  # gaussian | staggered
            "n_sites": 8,
            "topology": "fully-connected",
            "sigma": 1.0,
            "j_seed": 1,
            "h_seed": 1,
            "gamma": 0.1,
            "gamma_d": 1.0,
            "h": 1.1,  # staggered field magnitude, ignored for gaussian
        },
    },
    "schedule": {"family": "trig", "total_time": 1.0, "delta": 1e-3},
    "drive": "mfcd",  # mfcd | none | exact
    "bloch_steps": 8000,
    "quantum_steps": 2000,
    "output_points": 201,
    "snapshot_count": 11,
    "sweep": {"j_seeds": [], "h_seeds": [], "total_times": []},
    "shots": 1000,
    "measurement_seed": 7,
    "export": {"n_breakpoints": 100, "ramp_end": 0.05},
    "hardware": {"energy_scale": 3.0, "steps_per_time": 2000},
    "figures": True,
}


def _merge(base, override, path):
    """Deep-merge override into a copy of base; unknown keys are errors."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"{here}: unknown key")
        if isinstance(base[key], dict) and base[key]:
            if not isinstance(value, dict):
                raise ConfigError(f"{here}: expected an object")
            out[key] = _merge(base[key], value, here)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _require(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def resolve_config(data: dict) -> dict:
    """Fill defaults into a raw config dict and validate the result."""
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    cfg = _merge(DEFAULTS, data, "")

    inst = cfg["instance"]
    _require(inst["source"] in ("generator", "file", "inline"),
             "instance.source", "must be generator, file, or inline")
    if inst["source"] == "file":
        _require(isinstance(inst["file"], str) and inst["file"],
                 "instance.file", "required when source is file")
    gen = inst["generator"]
    _require(gen["kind"] in ("gaussian", "staggered"),
             "instance.generator.kind", "must be gaussian or staggered")
    _require(isinstance(gen["n_sites"], int) and gen["n_sites"] >= 1,
             "instance.generator.n_sites", "must be a positive integer")
    _require(gen["topology"] in model.TOPOLOGIES,
             "instance.generator.topology", f"must be one of {sorted(model.TOPOLOGIES)}")
    _require(gen["sigma"] > 0, "instance.generator.sigma", "must be positive")
    _require(gen["gamma"] >= 0, "instance.generator.gamma", "must be nonnegative")
    _require(gen["gamma_d"] >= 0, "instance.generator.gamma_d", "must be nonnegative")

    sch = cfg["schedule"]
    _require(sch["family"] in model.SCHEDULE_FAMILIES,
             "schedule.family", f"must be one of {sorted(model.SCHEDULE_FAMILIES)}")
    _require(sch["total_time"] > 0, "schedule.total_time", "must be positive")
    _require(sch["delta"] >= 0, "schedule.delta", "must be nonnegative")

    _require(cfg["drive"] in ("mfcd", "none", "exact"),
             "drive", "must be mfcd, none, or exact")
    _require(isinstance(cfg["bloch_steps"], int) and cfg["bloch_steps"] >= 100,
             "bloch_steps", "must be an integer >= 100")
    _require(isinstance(cfg["quantum_steps"], int) and cfg["quantum_steps"] >= 1,
             "quantum_steps", "must be a positive integer")
    _require(isinstance(cfg["output_points"], int) and cfg["output_points"] >= 2,
             "output_points", "must be an integer >= 2")
    _require(isinstance(cfg["snapshot_count"], int) and cfg["snapshot_count"] >= 2,
             "snapshot_count", "must be an integer >= 2")

    sweep = cfg["sweep"]
    for axis in ("j_seeds", "h_seeds"):
        _require(isinstance(sweep[axis], list)
                 and all(isinstance(s, int) for s in sweep[axis]),
                 f"sweep.{axis}", "must be a list of integers")
    _require(isinstance(sweep["total_times"], list)
             and all(isinstance(t, (int, float)) and t > 0 for t in sweep["total_times"]),
             "sweep.total_times", "must be a list of positive numbers")

    _require(isinstance(cfg["shots"], int) and cfg["shots"] >= 1,
             "shots", "must be a positive integer")
    _require(isinstance(cfg["measurement_seed"], int),
             "measurement_seed", "must be an integer")

    exp = cfg["export"]
    _require(isinstance(exp["n_breakpoints"], int) and exp["n_breakpoints"] >= 4,
             "export.n_breakpoints", "must be an integer >= 4")
    if exp["ramp_end"] != "auto":
        _require(isinstance(exp["ramp_end"], (int, float)) and 0.0 < exp["ramp_end"] < 1.0,
                 "export.ramp_end", 'must lie in (0, 1), or be "auto"')

    hw = cfg["hardware"]
    _require(hw["energy_scale"] > 0, "hardware.energy_scale", "must be positive")
    _require(isinstance(hw["steps_per_time"], int) and hw["steps_per_time"] >= 1,
             "hardware.steps_per_time", "must be a positive integer")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return resolve_config(data)


def build_instance(cfg: dict, j_seed=None, h_seed=None) -> model.ProblemInstance:
    """Construct the problem instance a resolved config describes.

    j_seed / h_seed override the generator seeds, letting sweep commands
    reuse one config across samples.
    """
    inst = cfg["instance"]
    if inst["source"] == "file":
        return model.load_instance(inst["file"])
    if inst["source"] == "inline":
        data = inst["inline"]
        if not isinstance(data, dict):
            raise ConfigError("instance.inline: required when source is inline")
        try:
            return model.instance_from_dict(data)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"instance.inline: {exc}") from None
    gen = inst["generator"]
    if gen["kind"] == "staggered":
        if gen["n_sites"] % 2:
            raise ConfigError("instance.generator.n_sites: staggered needs an even count")
        return model.staggered_instance(gen["n_sites"], h=gen["h"])
    js = int(j_seed if j_seed is not None else gen["j_seed"])
    hs = int(h_seed if h_seed is not None else gen["h_seed"])
    couplings = model.sample_gaussian_couplings(
        gen["n_sites"], gen["sigma"], gen["topology"],
        model.RngSpec(seed=js, stream=model.STREAM_COUPLINGS),
    )
    fields = model.sample_uniform_fields(
        gen["n_sites"], model.RngSpec(seed=hs, stream=model.STREAM_FIELDS),
    )
    return model.ProblemInstance(
        n_sites=gen["n_sites"], couplings=couplings, fields=fields,
        gamma=gen["gamma"], gamma_d=gen["gamma_d"], topology=gen["topology"],
        provenance={"kind": "gaussian", "sigma": gen["sigma"],
                    "j_seed": js, "h_seed": hs},
    )


def build_schedule(cfg: dict, total_time=None) -> model.Schedule:
    sch = cfg["schedule"]
    t_total = float(total_time if total_time is not None else sch["total_time"])
    if sch["family"] == "trig":
        return model.make_trig_schedule(total_time=t_total, delta=sch["delta"])
    if sch["family"] == "linear":
        return model.make_linear_schedule(total_time=t_total, delta=sch["delta"])
    raise ConfigError("schedule.family: tabulated schedules must come from a file")


def snapshot_times(cfg: dict, total_time=None) -> np.ndarray:
    t_total = float(total_time if total_time is not None else cfg["schedule"]["total_time"])
    return np.linspace(0.0, t_total, cfg["snapshot_count"])


def echo_config(cfg: dict, runtime: dict) -> dict:
    """Embeddable provenance block: resolved config plus runtime metadata."""
    return {"config": copy.deepcopy(cfg), "runtime": dict(runtime)}
