"""Run configuration: TOML document, defaults, flag overrides, validation."""

from __future__ import annotations

import copy
import hashlib
import json
import sys
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .boundary import BoundaryParams, StepSchedule, epoch_endpoint, epoch_index, max_step_constant
from .streams import DiagonalPerturbation, FiniteSupport, RankOneSphere

__all__ = ["ConfigError", "DEFAULTS", "load_config", "resolve", "config_hash", "Resolved"]


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, dict[str, Any]] = {
    "distribution": {
        "kind": None, "atoms": None, "probs": None, "sigma": None, "spectrum": None, "epsilon": None,
    },
    "schedule": {"kind": "constant", "c": None, "N": None, "gamma": 1.0},
    "boundary": {
        "delta": 0.1, "d": None, "L_override": None, "eta_epoch": 2.0, "alpha": 2.0,
        "variant": "epoch", "scale": 1.0,
    },
    "experiment": {"n_max": 100, "trajectories": 1000, "master_seed": 0},
    "tail": {"u_grid": [0.25, 0.5, 1.0, 2.0, float(np.e)]},
    "oja": {"init": "canonical"},
    "verify": {"threshold": None, "cap": 2**24},
    "output": {"directory": None, "formats": ["csv"]},
}

# keys that never change results; excluded from the config hash
_NON_SEMANTIC = {("output", "directory"), ("output", "formats")}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def merge(doc: dict, overrides: dict | None = None) -> dict:
    """Defaults <- file <- flags, rejecting unknown sections and keys."""
    cfg = copy.deepcopy(DEFAULTS)
    for section, body in doc.items():
        if section not in cfg:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in body.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg[section][key] = value
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = dotted.split(".")
        cfg[section][key] = value
    return cfg


def config_hash(cfg: dict) -> str:
    semantic = {
        s: {k: v for k, v in body.items() if (s, k) not in _NON_SEMANTIC}
        for s, body in cfg.items()
    }
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


class Resolved:
    """Typed objects built from a merged config."""

    def __init__(self, cfg: dict):
        self.raw = cfg
        self.dist = _build_distribution(cfg["distribution"])
        b = cfg["boundary"]
        e = cfg["experiment"]
        self.n_max = _posint(e["n_max"], "experiment.n_max")
        self.trajectories = _posint(e["trajectories"], "experiment.trajectories")
        self.master_seed = _seed(e["master_seed"], "experiment.master_seed")
        d = self.dist.d
        if b["d"] is not None and int(b["d"]) != d:
            raise ConfigError(f"boundary.d = {b['d']} disagrees with the distribution dimension {d}")
        L = b["L_override"] if b["L_override"] is not None else self.dist.deviation_bound()
        self.variant = b["variant"]
        if self.variant not in ("epoch", "smooth_paper", "smooth_dominating"):
            raise ConfigError(f"boundary.variant: unknown variant {self.variant!r}")
        self.scale = _num(b["scale"], "boundary.scale")
        try:
            self.params = BoundaryParams(
                delta=_num(b["delta"], "boundary.delta"),
                d=d,
                L=_num(L, "boundary.L_override"),
                eta_epoch=_num(b["eta_epoch"], "boundary.eta_epoch"),
                alpha=_num(b["alpha"], "boundary.alpha"),
                lambda_max=max(self.dist.spectrum.lambda_max, 0.0),
            )
        except ValueError as exc:
            raise ConfigError(f"boundary: {exc}") from None
        self.schedule = self._build_schedule(cfg["schedule"])
        self.u_grid = [float(u) for u in cfg["tail"]["u_grid"]]
        self.oja_init = cfg["oja"]["init"]
        self.verify_threshold = cfg["verify"]["threshold"]
        self.cap = _posint(cfg["verify"]["cap"], "verify.cap")

    def _build_schedule(self, s: dict) -> StepSchedule:
        kind = s["kind"]
        N = s["N"]
        if kind == "fixed_horizon" and N is None:
            N = self.n_max
        if kind not in ("constant", "fixed_horizon", "polynomial"):
            raise ConfigError(f"schedule.kind: unknown kind {kind!r}")

        def make(c: float) -> StepSchedule:
            return StepSchedule(kind, float(c), None if N is None else int(N), float(s["gamma"]))

        c = s["c"]
        if c is None:
            raise ConfigError("schedule.c is required")
        if c == "auto":
            # largest step constant meeting the condition at the last epoch endpoint
            end = epoch_endpoint(epoch_index(self.n_max, self.params.eta_epoch), self.params.eta_epoch)
            c = max_step_constant(make, self.params, int(end))
        try:
            return make(_num(c, "schedule.c"))
        except ValueError as exc:
            raise ConfigError(f"schedule: {exc}") from None


def resolve(cfg: dict) -> Resolved:
    try:
        return Resolved(cfg)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def _num(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _posint(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise ConfigError(f"{where}: expected a positive integer, got {x!r}")
    return x


def _seed(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < 2**64:
        raise ConfigError(f"{where}: expected an unsigned 64-bit integer, got {x!r}")
    return x


def _sigma(body: dict) -> np.ndarray:
    if body["sigma"] is not None and body["spectrum"] is not None:
        raise ConfigError("distribution: give either sigma or spectrum, not both")
    if body["sigma"] is not None:
        return np.asarray(body["sigma"], dtype=np.float64)
    if body["spectrum"] is not None:
        return np.diag(np.asarray(body["spectrum"], dtype=np.float64))
    raise ConfigError("distribution: sigma or spectrum is required")


def _build_distribution(body: dict):
    kind = body["kind"]
    try:
        if kind == "finite_support":
            if body["atoms"] is None or body["probs"] is None:
                raise ConfigError("distribution: finite_support needs atoms and probs")
            return FiniteSupport(body["atoms"], body["probs"])
        if kind == "rank_one_sphere":
            return RankOneSphere(_sigma(body))
        if kind == "diagonal_perturbation":
            if body["epsilon"] is None:
                raise ConfigError("distribution.epsilon is required for diagonal_perturbation")
            return DiagonalPerturbation(_sigma(body), float(body["epsilon"]))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"distribution: {exc}") from None
    raise ConfigError(f"distribution.kind: unknown kind {kind!r}")
