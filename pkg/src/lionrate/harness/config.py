"""Experiment configuration: an INI-style ``key = value`` file mapped onto a dataclass."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from lionrate.errors import ConfigError
from lionrate.problems import NOISE_KINDS, PROBLEMS


@dataclass(frozen=True)
class ExperimentConfig:
    # [problem]
    problem: str = "quadratic"
    d: int = 10
    condition: float = 1.0
    a: float = 1.0
    reg: float = 0.01
    n_samples: int = 200
    domain_radius: Optional[float] = None
    data_seed: int = 0
    # [run]
    K: int = 1000
    mode: str = "constrained"
    lam: Optional[float] = 1.0  # None means "auto" (unconstrained only)
    init_scale: float = 1.0
    init_seed: int = 0
    momentum_init: str = "gradient"
    log_every: int = 1
    seeds: tuple[int, ...] = (0,)
    # [schedule]
    schedule_mode: str = "theory"
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    eta: Optional[float] = None
    # [noise]
    sigma: float = 1.0
    sigma_per_coord: Optional[float] = None
    noise_kind: str = "gaussian"
    # [output]
    out_dir: str = "out"
    # [sweep]
    sweep_axis: Optional[str] = None
    sweep_values: tuple[int, ...] = ()
    # [compare]
    sgd_eta: Optional[float] = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.mode not in ("constrained", "unconstrained"):
            raise ConfigError("mode must be 'constrained' or 'unconstrained'")
        if self.mode == "constrained":
            if self.lam is None or not self.lam > 0:
                raise ConfigError("constrained mode requires lambda > 0")
        elif self.lam is not None and self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.problem == "rosenbrock":
            if self.mode == "unconstrained":
                raise ConfigError("rosenbrock is only locally smooth; unconstrained mode is refused")
            R = self.domain_radius if self.domain_radius is not None else 2.0
            if self.lam < 1.0 / R - 1e-12:
                raise ConfigError(f"rosenbrock needs lambda >= 1/domain_radius = {1.0 / R:g}")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.momentum_init not in ("gradient", "zero"):
            raise ConfigError("momentum_init must be 'gradient' or 'zero'")
        if self.schedule_mode not in ("theory", "manual"):
            raise ConfigError("schedule mode must be 'theory' or 'manual'")
        if self.schedule_mode == "manual":
            if None in (self.beta1, self.beta2, self.eta):
                raise ConfigError("manual schedule requires beta1, beta2 and eta")
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigError(f"noise kind must be one of {NOISE_KINDS}")
        if self.effective_sigma < 0 or not math.isfinite(self.effective_sigma):
            raise ConfigError("sigma must be finite and >= 0")
        if self.schedule_mode == "theory" and not self.effective_sigma > 0:
            raise ConfigError("theory schedule requires sigma > 0")
        if self.init_scale < 0:
            raise ConfigError("init_scale must be >= 0")
        if self.sweep_axis is not None and self.sweep_axis not in ("K", "d"):
            raise ConfigError("sweep axis must be 'K' or 'd'")

    @property
    def effective_sigma(self) -> float:
        if self.sigma_per_coord is not None:
            return self.sigma_per_coord * math.sqrt(self.d)
        return self.sigma

    def problem_params(self) -> dict:
        if self.problem == "quadratic":
            return {"condition": self.condition, "seed": self.data_seed}
        if self.problem == "rastrigin":
            return {"a": self.a}
        if self.problem == "rosenbrock":
            return {"domain_radius": 2.0 if self.domain_radius is None else self.domain_radius}
        return {"n_samples": self.n_samples, "reg": self.reg, "seed": self.data_seed}

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["seeds"] = list(self.seeds)
        out["sweep_values"] = list(self.sweep_values)
        return out

    def config_hash(self) -> str:
        """Content hash of everything that influences numbers (output dir excluded)."""
        payload = self.as_dict()
        payload.pop("out_dir")
        blob = json.dumps(payload, sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


# section -> {file key: (field name, parser)}
def _int_list(s: str) -> tuple[int, ...]:
    return tuple(int(float(x)) for x in s.replace(",", " ").split())


def _opt_float(s: str) -> Optional[float]:
    return None if s.strip().lower() in ("", "none", "auto") else float(s)


def _int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"not an integer: {s}")
    return int(v)


_SCHEMA = {
    "problem": {
        "name": ("problem", str), "d": ("d", _int), "condition": ("condition", float),
        "a": ("a", float), "reg": ("reg", float), "n_samples": ("n_samples", _int),
        "domain_radius": ("domain_radius", _opt_float), "data_seed": ("data_seed", _int),
    },
    "run": {
        "K": ("K", _int), "mode": ("mode", str), "lambda": ("lam", _opt_float),
        "init_scale": ("init_scale", float), "init_seed": ("init_seed", _int),
        "momentum_init": ("momentum_init", str), "log_every": ("log_every", _int),
        "seeds": ("seeds", _int_list), "base_seed": (None, _int), "n_seeds": (None, _int),
    },
    "schedule": {
        "mode": ("schedule_mode", str), "beta1": ("beta1", float),
        "beta2": ("beta2", float), "eta": ("eta", float),
    },
    "noise": {
        "sigma": ("sigma", float), "sigma_per_coord": ("sigma_per_coord", _opt_float),
        "kind": ("noise_kind", str),
    },
    "output": {"dir": ("out_dir", str)},
    "sweep": {"axis": ("sweep_axis", str), "values": ("sweep_values", _int_list)},
    "compare": {"sgd_eta": ("sgd_eta", _opt_float)},
}


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive ("K" vs "k")
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    kwargs: dict = {}
    base_seed = n_seeds = None
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            fname, parse = _SCHEMA[section][key]
            try:
                value = parse(raw.strip())
            except ValueError as e:
                raise ConfigError(f"[{section}] {key}: {e}") from None
            if key == "base_seed":
                base_seed = value
            elif key == "n_seeds":
                n_seeds = value
            else:
                kwargs[fname] = value
    if n_seeds is not None or base_seed is not None:
        if "seeds" in kwargs:
            raise ConfigError("give either 'seeds' or 'base_seed'/'n_seeds', not both")
        if n_seeds is None or n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        b = base_seed or 0
        kwargs["seeds"] = tuple(range(b, b + n_seeds))
    if kwargs.get("mode") == "unconstrained" and "lam" not in kwargs:
        kwargs["lam"] = None
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize ``cfg`` back to the file format (round-trips through parse_config)."""
    lines = []
    for section, keys in _SCHEMA.items():
        body = []
        for key, (fname, _) in keys.items():
            if fname is None:
                continue
            v = getattr(cfg, fname)
            if fname == "lam" and v is None:
                body.append(f"{key} = auto")
                continue
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            body.append(f"{key} = {v}")
        if body:
            lines.append(f"[{section}]")
            lines.extend(body)
            lines.append("")
    return "\n".join(lines)
