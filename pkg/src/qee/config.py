"""
JSON model configurations.

Schema::

    {
      "env_dim": 3,
      "eps0": 0.0, "eps1": 1.0,
      "h_env": [[[re, im], ...], ...],          # row-major, env_dim x env_dim
      "v0":    [[[re, im], ...], ...],
      "v1":    [[[re, im], ...], ...],
      "qubit": {"a": [re, im], "b": [re, im]},
      "initial_env": {"type": "mixed"}
                   | {"type": "matrix", "data": [[[re, im], ...], ...]}
                   | {"type": "thermal", "hamiltonian": "h_env" | "h0" | "h1", "beta": 1.0}
    }

Instead of ``h_env``/``v0``/``v1`` a ``"builder"`` entry may name a model
generator: ``{"type": "ising", "n_spins": 2, "couplings": [..], "field": 0.5}``
or ``{"type": "random", "class": "generic", "seed": 42}``.  Qubit amplitudes
are normalized on load.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import QEEError
from .model import (
    MODEL_CLASSES,
    PureDephasingModel,
    QubitState,
    build_ising_bath,
    build_random_model,
    build_thermal,
    completely_mixed,
)


class ConfigError(QEEError, ValueError):
    """Malformed or invalid configuration; the message is anchored to a line."""


@dataclass(frozen=True)
class RunConfig:
    model: PureDephasingModel
    qubit: QubitState
    rho_env: np.ndarray
    initial_env: dict
    source: str = "<config>"

    def with_beta(self, beta: float) -> np.ndarray:
        """Re-thermalize the initial environment at a different inverse temperature."""
        init = self.initial_env
        if init.get("type") != "thermal":
            raise ConfigError(f"{self.source}: initial_env must be of type 'thermal' for a beta sweep")
        return build_thermal(_thermal_hamiltonian(self.model, init["hamiltonian"]), beta)


def _thermal_hamiltonian(model: PureDephasingModel, name: str) -> np.ndarray:
    return {"h_env": model.h_env, "h0": model.h0, "h1": model.h1}[name]


class _Located:
    """Maps config keys to the line where they first appear."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def line_of(self, key: str) -> int:
        m = re.search(rf'"{re.escape(key)}"\s*:', self.text)
        if m is None:
            return 1
        return self.text.count("\n", 0, m.start()) + 1

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(f"{self.source}:{self.line_of(key)}: {message}")


def _complex_matrix(value, key: str, n: int, loc: _Located) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise loc.error(key, f"'{key}' must be a nested array of [re, im] pairs") from None
    if arr.shape != (n, n, 2):
        raise loc.error(key, f"'{key}' must have shape {n}x{n} of [re, im] pairs, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise loc.error(key, f"'{key}' has non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def _complex_scalar(value, key: str, loc: _Located) -> complex:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value)):
        raise loc.error(key, f"'{key}' must be a [re, im] pair")
    return complex(value[0], value[1])


def _require(data: dict, key: str, loc: _Located, parent: str | None = None):
    if key not in data:
        where = parent or key
        raise loc.error(where, f"missing required field '{key}'")
    return data[key]


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    loc = _Located(text, source)
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: top level must be an object")

    eps0 = float(data.get("eps0", 0.0))
    eps1 = float(data.get("eps1", 0.0))

    if "builder" in data:
        builder = data["builder"]
        kind = builder.get("type") if isinstance(builder, dict) else None
        try:
            if kind == "ising":
                model = build_ising_bath(int(builder["n_spins"]), builder["couplings"],
                                         float(builder.get("field", 0.0)), eps0, eps1)
            elif kind == "random":
                cls = builder.get("class", "generic")
                if cls not in MODEL_CLASSES:
                    raise loc.error("class", f"unknown model class {cls!r}")
                model, _ = build_random_model(int(_require(data, "env_dim", loc)), cls, int(builder["seed"]))
            else:
                raise loc.error("builder", f"unknown builder type {kind!r}")
        except KeyError as exc:
            raise loc.error("builder", f"builder is missing field {exc}") from None
        if "env_dim" in data and int(data["env_dim"]) != model.env_dim:
            raise loc.error("env_dim", f"env_dim {data['env_dim']} does not match builder dimension {model.env_dim}")
        n = model.env_dim
    else:
        n = _require(data, "env_dim", loc)
        if not isinstance(n, int) or n < 1:
            raise loc.error("env_dim", "env_dim must be a positive integer")
        mats = {k: _complex_matrix(_require(data, k, loc), k, n, loc) for k in ("h_env", "v0", "v1")}
        try:
            model = PureDephasingModel(eps0, eps1, mats["h_env"], mats["v0"], mats["v1"])
        except ValueError as exc:
            raise loc.error("h_env", str(exc)) from None

    q = _require(data, "qubit", loc)
    a = _complex_scalar(_require(q, "a", loc, "qubit"), "a", loc)
    b = _complex_scalar(_require(q, "b", loc, "qubit"), "b", loc)
    norm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if norm == 0:
        raise loc.error("qubit", "qubit amplitudes are both zero")
    qubit = QubitState(a / norm, b / norm)

    init = _require(data, "initial_env", loc)
    kind = init.get("type") if isinstance(init, dict) else None
    if kind == "mixed":
        rho = completely_mixed(n)
    elif kind == "matrix":
        rho = _complex_matrix(_require(init, "data", loc, "initial_env"), "data", n, loc)
    elif kind == "thermal":
        ham = init.get("hamiltonian", "h_env")
        if ham not in ("h_env", "h0", "h1"):
            raise loc.error("hamiltonian", f"hamiltonian must be h_env, h0 or h1, got {ham!r}")
        beta = init.get("beta")
        if not isinstance(beta, (int, float)) or beta < 0:
            raise loc.error("beta", "beta must be a non-negative number")
        init = {"type": "thermal", "hamiltonian": ham, "beta": float(beta)}
        rho = build_thermal(_thermal_hamiltonian(model, ham), float(beta))
    else:
        raise loc.error("initial_env", f"initial_env type must be mixed, matrix or thermal, got {kind!r}")

    return RunConfig(model=model, qubit=qubit, rho_env=rho, initial_env=dict(init), source=source)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, str(path))


def matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]
