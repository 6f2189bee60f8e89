"""YAML run configuration with dotted-key overrides.

Every experiment kind has a default section in the packaged ``defaults.yaml``;
user files are merged on top, then ``key.sub=value`` overrides (values parsed
as YAML scalars). Lengths may be written as multiples of pi, e.g. ``2pi``.
"""
import copy
import re
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

_PI = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*$")


def _load_yaml(text):
    return yaml.safe_load(text) or {}


def packaged_defaults():
    text = resources.files("nsmhall").joinpath("configs/defaults.yaml").read_text()
    return _load_yaml(text)


def default_section(kind):
    data = packaged_defaults()
    if kind not in data:
        raise KeyError(f"no default configuration for {kind!r}")
    return copy.deepcopy(data[kind])


def deep_merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_override(text):
    """``'a.b=3'`` -> ``(['a', 'b'], 3)``."""
    if "=" not in text:
        raise ValueError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    return key.strip().split("."), yaml.safe_load(raw)


def apply_overrides(cfg, overrides):
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        keys, value = parse_override(item)
        node = cfg
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value
    return cfg


def load_config(kind, path=None, overrides=()):
    """Defaults for ``kind`` merged with the file at ``path`` and the overrides."""
    cfg = default_section(kind)
    if path is not None:
        user = _load_yaml(Path(path).read_text())
        if kind in user and isinstance(user[kind], dict):
            user = user[kind]
        cfg = deep_merge(cfg, user)
    return apply_overrides(cfg, overrides)


def as_length(value):
    """Numbers pass through; strings like ``'2pi'`` or ``'8*pi'`` become floats."""
    if isinstance(value, str):
        m = _PI.match(value)
        if not m:
            raise ValueError(f"cannot parse length {value!r}")
        coef = m.group(1)
        return (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * np.pi
    return float(value)


def build_box(section):
    from .spectral import BoxSpec

    return BoxSpec(int(section["d"]), int(section["n_per_axis"]),
                   as_length(section.get("box_length", "2pi")))


def build_params(section):
    from .params import PhysicalParams

    return PhysicalParams(**section)


def build_stepper(section):
    from .dynamics import StepperConfig
    from .ohm import OhmSolveOptions

    sec = dict(section)
    ohm = OhmSolveOptions(tol=float(sec.pop("ohm_tol", 1e-12)),
                          max_iters=int(sec.pop("ohm_max_iters", 200)),
                          mode=sec.get("ohm_mode", "implicit"))
    return StepperConfig(dt=float(sec.pop("dt")), ohm=ohm, **sec)
