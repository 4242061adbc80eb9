"""Flat experiment configuration with named sub-seeds.

Keys (JSON object, all optional unless a command needs them):

==================  =========================================================
model               ``"syk"`` or ``"heisenberg"``
L                   site count for ed / train / compress
L_list              site counts for sweep / entropy (defaults to ``[L]``)
seed                master seed; unset sub-seeds are derived from it
coupling_seed       SYK draw for ed / train / compress
coupling_seeds      SYK draws for entropy (default: 4 derived seeds)
lanczos_seed        start vector of the Lanczos solver
init_seed           network initialisation for train
init_seeds          network initialisations per sweep point (default: 4)
alpha, mu           hidden unit density and layer count
activation          ``"selu"`` or ``"tanh"``
skip_blocks         ``[n_blocks, layers_per_block]`` or null
loss                ``"overlap"`` or ``"voe"``
lr, beta1, beta2,   Adam hyperparameters; ``lr_schedule`` is a list of
eps, lr_schedule    ``[first_step, lr]`` pairs
t_max, delta_t,     step budget, truncation control interval, smoothing
window, threshold   window and the delta-E threshold
max_steps           hard cap on steps including truncation extensions
truncation          apply the truncation criterion after ``t_max``
early_stop          stop as soon as delta-E drops below threshold
eval_stride         steps between recorded delta-E values
axis, grid          sweep axis (``"alpha"`` / ``"mu"``) and its values
rel_thresholds      SVD thresholds for compress
n_jobs              worker processes for sweeps
output_dir          where records go (env ``SYKNQS_OUTPUT_DIR`` overrides
                    the default)
==================  =========================================================
"""
from __future__ import annotations

import json
import os
import zlib
from pathlib import Path

import numpy as np

from .harness import TrainSettings
from .nqs import Architecture
from .optimize import AdamConfig

__all__ = ["DEFAULTS", "ConfigError", "ExperimentConfig", "derive_seed"]

DEFAULTS = {
    "seed": 0,
    "alpha": 1,
    "mu": 2,
    "activation": "selu",
    "skip_blocks": None,
    "loss": "overlap",
    "lr": 1e-3,
    "beta1": 0.9,
    "beta2": 0.999,
    "eps": 1e-8,
    "lr_schedule": [],
    "t_max": 200_000,
    "delta_t": 100_000,
    "window": 2001,
    "threshold": 1e-3,
    "max_steps": None,
    "truncation": True,
    "early_stop": True,
    "eval_stride": 1,
    "axis": "alpha",
    "grid": [1, 2, 3, 4, 5, 6, 7, 8],
    "n_init_seeds": 4,
    "n_coupling_seeds": 4,
    "rel_thresholds": [0.0, 0.01, 0.02, 0.05, 0.1, 0.2],
    "n_jobs": 1,
    "output_dir": "runs",
}

KNOWN = set(DEFAULTS) | {
    "model", "L", "L_list", "coupling_seed", "coupling_seeds", "lanczos_seed",
    "init_seed", "init_seeds",
}


class ConfigError(ValueError):
    pass


def derive_seed(master: int, name: str, index: int = 0) -> int:
    """Independent 63-bit seed for stream ``name`` (and replica ``index``)."""
    ss = np.random.SeedSequence([int(master), zlib.crc32(name.encode()), int(index)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


class ExperimentConfig:
    """Resolved key-value configuration; file values < CLI overrides."""

    def __init__(self, values: dict | None = None):
        values = dict(values or {})
        unknown = set(values) - KNOWN
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        self.values = {**DEFAULTS, **values}
        if "output_dir" not in values and os.environ.get("SYKNQS_OUTPUT_DIR"):
            self.values["output_dir"] = os.environ["SYKNQS_OUTPUT_DIR"]

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        with open(path) as fh:
            values = json.load(fh)
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        values.pop("code_version", None)
        values.update(overrides or {})
        return cls(values)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, *keys):
        missing = [k for k in keys if self.values.get(k) is None]
        if missing:
            raise ConfigError(f"missing config field(s): {', '.join(missing)}")
        return [self.values[k] for k in keys]

    # -------- resolved quantities; each resolution is written back so that
    # saved configs carry explicit seeds

    def _resolve(self, key, fn):
        if self.values.get(key) is None:
            self.values[key] = fn()
        return self.values[key]

    @property
    def model(self) -> str:
        model = self.require("model")[0]
        if model not in ("syk", "heisenberg"):
            raise ConfigError(f"model must be 'syk' or 'heisenberg', got {model!r}")
        return model

    @property
    def L(self) -> int:
        return int(self.require("L")[0])

    @property
    def L_list(self) -> list[int]:
        if self.values.get("L_list") is None:
            if self.values.get("L") is None:
                raise ConfigError("missing config field(s): L_list")
            self.values["L_list"] = [self.values["L"]]
        return [int(x) for x in self.values["L_list"]]

    def coupling_seed(self) -> int | None:
        if self.model != "syk":
            return None
        return self._resolve("coupling_seed", lambda: derive_seed(self["seed"], "coupling"))

    def coupling_seeds(self) -> list[int]:
        n = self["n_coupling_seeds"]
        return self._resolve("coupling_seeds",
                             lambda: [derive_seed(self["seed"], "coupling", i) for i in range(n)])

    def lanczos_seed(self) -> int:
        return self._resolve("lanczos_seed", lambda: derive_seed(self["seed"], "lanczos-start"))

    def init_seed(self) -> int:
        return self._resolve("init_seed", lambda: derive_seed(self["seed"], "init"))

    def init_seeds(self) -> list[int]:
        n = self["n_init_seeds"]
        return self._resolve("init_seeds", lambda: [derive_seed(self["seed"], "init", i) for i in range(n)])

    def architecture(self, L: int | None = None) -> Architecture:
        skip = self["skip_blocks"]
        return Architecture(L or self.L, int(self["alpha"]), int(self["mu"]), self["activation"],
                            tuple(skip) if skip else None)

    def train_settings(self) -> TrainSettings:
        adam = AdamConfig(self["lr"], self["beta1"], self["beta2"], self["eps"],
                          tuple((int(a), float(b)) for a, b in self["lr_schedule"]))
        return TrainSettings(
            loss=self["loss"], adam=adam, t_max=int(self["t_max"]), threshold=float(self["threshold"]),
            truncation=bool(self["truncation"]), delta_t=int(self["delta_t"]), window=int(self["window"]),
            max_steps=None if self["max_steps"] is None else int(self["max_steps"]),
            eval_stride=int(self["eval_stride"]), early_stop=bool(self["early_stop"]),
        )

    @property
    def output_dir(self) -> Path:
        return Path(self["output_dir"])

    def to_dict(self) -> dict:
        return dict(self.values)

    def dumps(self) -> str:
        return json.dumps(self.values, indent=2, sort_keys=True)
