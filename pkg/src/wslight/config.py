"""Run configuration: a flat INI file with a fixed schema.

List values are comma separated; ``start:stop:num`` expands to an
evenly spaced range including both ends.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .jsa import BANDLIMITS

PRESETS = ("fig1", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10")


@dataclass(frozen=True)
class RunConfig:
    kind: str = "pulsed"
    T_p: float = 10.0
    T_c: float = 1.0
    beta_circ: float = 0.1
    t_J: float = 0.0
    d_J: int = 0
    bandlimit: str = "standard"
    oversample: int = 1
    alpha: float = 1.0
    low_alpha: float = 0.01
    s_max: int = 40
    tail_tol: float = 1e-10
    theta: tuple = (0.0, math.pi / 2)
    omega: tuple = ()
    beta_sweep: tuple = ()
    alpha_sweep: tuple = ()
    ratios: tuple = ()
    include_cw: bool = False
    q_min: int = -20
    q_max: int = 20
    seed: int = 20240601
    count: int = 20
    cutoff: int = 8
    oracle_beta_max: float = 0.3
    corrupt: bool = False
    format: str = "csv"

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()


def _float(v):
    return float(v)


def _int(v):
    f = float(v)
    if f != int(f):
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


def _bool(v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


def _floats(v):
    v = v.strip()
    if not v:
        return ()
    if ":" in v and "," not in v:
        a, b, n = v.split(":")
        return tuple(float(x) for x in np.linspace(float(a), float(b), _int(n)))
    return tuple(float(x) for x in v.split(","))


def _str(v):
    return v.strip()


# (section, key) -> (field name, parser)
SCHEMA = {
    ("model", "kind"): ("kind", _str),
    ("model", "T_p"): ("T_p", _float),
    ("model", "T_c"): ("T_c", _float),
    ("squeezing", "beta_circ"): ("beta_circ", _float),
    ("window", "t_J"): ("t_J", _float),
    ("window", "d_J"): ("d_J", _int),
    ("grid", "bandlimit"): ("bandlimit", _str),
    ("grid", "oversample"): ("oversample", _int),
    ("detector", "alpha"): ("alpha", _float),
    ("detector", "low_alpha"): ("low_alpha", _float),
    ("detector", "s_max"): ("s_max", _int),
    ("detector", "tail_tol"): ("tail_tol", _float),
    ("sweep", "theta"): ("theta", _floats),
    ("sweep", "omega_over_Omega"): ("omega", _floats),
    ("sweep", "beta_circ"): ("beta_sweep", _floats),
    ("sweep", "alpha"): ("alpha_sweep", _floats),
    ("sweep", "ratios"): ("ratios", _floats),
    ("sweep", "include_cw"): ("include_cw", _bool),
    ("sweep", "q_min"): ("q_min", _int),
    ("sweep", "q_max"): ("q_max", _int),
    ("oracle", "seed"): ("seed", _int),
    ("oracle", "count"): ("count", _int),
    ("oracle", "cutoff"): ("cutoff", _int),
    ("oracle", "beta_circ_max"): ("oracle_beta_max", _float),
    ("oracle", "corrupt"): ("corrupt", _bool),
    ("output", "format"): ("format", _str),
}


def _parser():
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    return cp


def parse_config(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            spec = SCHEMA.get((section, key))
            if spec is None:
                raise ConfigError(f"unknown key [{section}] {key}")
            name, conv = spec
            try:
                values[name] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {exc}") from exc
    cfg = replace(base or RunConfig(), **values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg.kind in ("pulsed", "cw"), "model.kind must be pulsed or cw")
    need(cfg.T_c > 0, "model.T_c must be positive")
    need(cfg.kind == "cw" or cfg.T_p >= cfg.T_c, "model.T_p must be >= T_c")
    need(cfg.beta_circ >= 0, "squeezing.beta_circ must be nonnegative")
    need(cfg.d_J >= 0, "window.d_J must be >= 0 (0 selects the whole pulse)")
    need(cfg.kind == "pulsed" or cfg.d_J > 0, "CW runs need window.d_J > 0")
    need(cfg.bandlimit in BANDLIMITS, f"grid.bandlimit must be one of {BANDLIMITS}")
    need(cfg.oversample >= 1, "grid.oversample must be >= 1")
    for a in (cfg.alpha, cfg.low_alpha, *cfg.alpha_sweep):
        need(0 <= a <= 1, "efficiencies must lie in [0, 1]")
    need(cfg.s_max >= 1, "detector.s_max must be >= 1")
    need(0 < cfg.tail_tol < 1, "detector.tail_tol must lie in (0, 1)")
    need(all(b >= 0 for b in cfg.beta_sweep), "sweep.beta_circ entries must be nonnegative")
    need(all(r >= 1 for r in cfg.ratios), "sweep.ratios entries must be >= 1")
    need(all(abs(w) < cfg.oversample / 2 for w in cfg.omega),
         "sweep.omega_over_Omega must stay inside the working band (|w| < k/2)")
    need(cfg.q_min <= cfg.q_max, "sweep.q_min must not exceed q_max")
    need(1 <= cfg.count <= 1000, "oracle.count out of range")
    need(4 <= cfg.cutoff <= 20, "oracle.cutoff must lie in [4, 20]")
    need(0 <= cfg.oracle_beta_max <= 0.5, "oracle.beta_circ_max must lie in [0, 0.5]")
    need(cfg.format in ("csv", "json"), "output.format must be csv or json")


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("wslight.presets").joinpath(f"{name}.ini").read_text()
    return parse_config(text)

