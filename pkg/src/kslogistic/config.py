"""Experiment configuration: a single JSON document captures everything.

One config fully determines a run (grid, parameters, initial data,
stepping, C_GN source, window length, slacks, seed), so every output can
embed it and a rerun reproduces the experiment bit-for-bit.  Parsing is
strict: unknown keys are errors, as silent typos in experiment files are
worse than noisy ones.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .bounds import ModelParams
from .field import Domain2D
from .solver import SolverConfig


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class CGNSpec:
    """Where the Gagliardo-Nirenberg constant comes from.

    mode "fixed" uses value directly; mode "estimate" runs the sampling
    estimator on the experiment grid and multiplies by safety.
    """

    mode: str = "estimate"
    value: float | None = None
    safety: float = 2.0
    samples: int = 200

    def __post_init__(self):
        if self.mode not in ("fixed", "estimate"):
            raise ConfigError(f"c_gn mode must be 'fixed' or 'estimate', got {self.mode!r}")
        if self.mode == "fixed" and (self.value is None or not self.value > 0):
            raise ConfigError("c_gn mode 'fixed' needs a positive value")
        if self.mode == "estimate" and not self.samples >= 1:
            raise ConfigError("c_gn estimate needs samples >= 1")
        if not self.safety > 0:
            raise ConfigError("c_gn safety factor must be positive")


@dataclass(frozen=True)
class SlackSpec:
    """Multiplicative slack absorbing discretization error per check class."""

    l1: float = 1.05
    constant_free: float = 1.05
    gn: float = 1.10

    def __post_init__(self):
        for name in ("l1", "constant_free", "gn"):
            if not getattr(self, name) >= 1.0:
                raise ConfigError(f"slack.{name} must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    domain: Domain2D
    params: ModelParams
    solver: SolverConfig
    initial_u: dict
    initial_v: dict
    c_gn: CGNSpec = CGNSpec()
    tau: float = 1.0
    slack: SlackSpec = SlackSpec()
    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if abs(self.params.omega_measure - self.domain.measure) > 1e-12 * self.domain.measure:
            raise ConfigError(
                f"params.omega_measure={self.params.omega_measure} does not match "
                f"the domain measure {self.domain.measure}"
            )


@dataclass(frozen=True)
class SweepSpec:
    chi_list: tuple[float, ...]
    mu_list: tuple[float, ...]
    base: ExperimentConfig

    def __post_init__(self):
        if not self.chi_list or not self.mu_list:
            raise ConfigError("sweep needs non-empty chi and mu lists")
        if any(m <= 0 for m in self.mu_list):
            raise ConfigError("sweep mu values must all be positive")


@dataclass(frozen=True)
class BlowupSpec:
    """Two-mass study in the undamped regime (mu = 0 enforced)."""

    masses: tuple[float, float]
    base: ExperimentConfig

    def __post_init__(self):
        if self.base.params.mu != 0.0:
            raise ConfigError(f"blow-up study requires mu = 0, got mu={self.base.params.mu}")
        if not self.base.params.chi > 0:
            raise ConfigError("blow-up study needs chi > 0 for the 4*pi/chi threshold")
        if len(self.masses) != 2 or any(m <= 0 for m in self.masses):
            raise ConfigError("blow-up study needs exactly two positive masses")
        if self.base.initial_u.get("kind") != "gaussian":
            raise ConfigError("blow-up study varies the mass of a gaussian initial_u")


def _take(d: dict, ctx: str, keys: set) -> dict:
    extra = set(d) - keys
    if extra:
        raise ConfigError(f"unknown keys in {ctx}: {sorted(extra)}")
    return d


def _build(cls, d: dict, ctx: str):
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {ctx} section: {exc}") from exc


def experiment_from_dict(doc: dict) -> ExperimentConfig:
    doc = dict(_take(doc, "experiment", {
        "domain", "params", "solver", "initial_u", "initial_v",
        "c_gn", "tau", "slack", "out_dir", "seed",
    }))
    for req in ("domain", "params", "solver", "initial_u", "initial_v"):
        if req not in doc:
            raise ConfigError(f"experiment config is missing the {req!r} section")
    dom = _build(Domain2D, doc["domain"], "domain")
    pdict = dict(doc["params"])
    pdict.setdefault("omega_measure", dom.measure)
    return ExperimentConfig(
        domain=dom,
        params=_build(ModelParams, pdict, "params"),
        solver=_build(SolverConfig, doc["solver"], "solver"),
        initial_u=dict(doc["initial_u"]),
        initial_v=dict(doc["initial_v"]),
        c_gn=_build(CGNSpec, doc.get("c_gn", {}), "c_gn"),
        tau=float(doc.get("tau", 1.0)),
        slack=_build(SlackSpec, doc.get("slack", {}), "slack"),
        out_dir=str(doc.get("out_dir", "out")),
        seed=int(doc.get("seed", 0)),
    )


def experiment_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "domain": asdict(cfg.domain),
        "params": asdict(cfg.params),
        "solver": asdict(cfg.solver),
        "initial_u": dict(cfg.initial_u),
        "initial_v": dict(cfg.initial_v),
        "c_gn": asdict(cfg.c_gn),
        "tau": cfg.tau,
        "slack": asdict(cfg.slack),
        "out_dir": cfg.out_dir,
        "seed": cfg.seed,
    }


def sweep_from_dict(doc: dict) -> SweepSpec:
    doc = _take(doc, "sweep", {"chi_list", "mu_list", "base"})
    for req in ("chi_list", "mu_list", "base"):
        if req not in doc:
            raise ConfigError(f"sweep config is missing {req!r}")
    return SweepSpec(
        chi_list=tuple(float(x) for x in doc["chi_list"]),
        mu_list=tuple(float(x) for x in doc["mu_list"]),
        base=experiment_from_dict(doc["base"]),
    )


def sweep_to_dict(spec: SweepSpec) -> dict:
    return {
        "chi_list": list(spec.chi_list),
        "mu_list": list(spec.mu_list),
        "base": experiment_to_dict(spec.base),
    }


def blowup_from_dict(doc: dict) -> BlowupSpec:
    doc = _take(doc, "blowup", {"masses", "base"})
    for req in ("masses", "base"):
        if req not in doc:
            raise ConfigError(f"blow-up config is missing {req!r}")
    masses = tuple(float(x) for x in doc["masses"])
    return BlowupSpec(masses=masses, base=experiment_from_dict(doc["base"]))


def blowup_to_dict(spec: BlowupSpec) -> dict:
    return {"masses": list(spec.masses), "base": experiment_to_dict(spec.base)}


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def save_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
