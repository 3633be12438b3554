"""Run configuration: strict JSON parsing with a bundled default workload.

A config is a JSON object with top-level keys {suite, T, N, n, seed} and
per-suite blocks {rotation, transform, algebra}.  Unknown keys are
rejected at every level this module owns; atom/functional specs inside the
blocks are validated by the cylinder parsers when cases are built.  Keys
omitted from a block fall back to the bundled defaults, so a partial
config stays runnable; empty case lists are allowed and produce an empty
report.

GFFT_SEED in the environment overrides the configured seed.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass

SUITES = ("rotation", "transform", "algebra", "all")

_TOP_KEYS = {"suite", "T", "N", "n", "seed", "rotation", "transform", "algebra"}
_ROTATION_KEYS = {"functionals", "pairs", "sequences"}
_PAIR_KEYS = {"name", "h1", "h2"}
_SEQ_KEYS = {"name", "H", "extra"}
_TRANSFORM_KEYS = {"inverse_cases", "compose_cases", "plancherel_cases", "indicator", "mc", "quadrature"}
_MC_KEYS = {"functionals", "weight", "lambdas", "n"}
_QUAD_KEYS = {"rho_values", "eps_sequence", "tol"}
_ALGEBRA_KEYS = {"q_sample", "witness_substitutions", "reduce_words", "eval_words", "monoid_tables"}


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit status 2."""


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(d).__name__}")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown {where} keys: {sorted(extra)}")


# Bundled default workload; mirrors the desk-scale acceptance checks.
_GAUSS2 = {"coeffs": [1.0], "a": 1.0}


def default_config() -> dict:
    fam12 = [{"cosine": 1, "normalized": True}, {"cosine": 2, "normalized": True}]
    functionals = [
        # Gaussian class
        {"family": fam12, "f": {"pgp": {"factors": [dict(_GAUSS2), dict(_GAUSS2)]}}},
        {"family": fam12, "f": {"pgp": {"factors": [{"coeffs": [0.0, 1.0], "a": 1.0}, dict(_GAUSS2)]}}},
        {
            "family": fam12,
            "f": {"pgp": {"factors": [{"coeffs": [1.0, 0.0, 0.5], "a": 1.2, "b": [0.0, 0.3]}, {"coeffs": [1.0, 0.4], "a": 0.8}]}},
        },
        # bounded trigonometric
        {"family": fam12, "f": {"bbox": {"form": "cos_sum", "arity": 2, "box": 8.0, "points": 64, "c": [1.0, 0.5]}}},
        {"family": fam12, "f": {"bbox": {"form": "sin_sum", "arity": 2, "box": 8.0, "points": 64, "c": [0.7, -1.1]}}},
        {"family": fam12, "f": {"bbox": {"form": "exp_i_sum", "arity": 2, "box": 8.0, "points": 64, "c": [1.0, 1.0]}}},
    ]
    return {
        "suite": "all",
        "T": 1.0,
        "N": 1024,
        "n": 100000,
        "seed": 20260816,
        "rotation": {
            "functionals": functionals,
            "pairs": [
                {"name": "constants", "h1": {"constant": 0.8}, "h2": {"constant": 0.6}},
                {"name": "cosines", "h1": {"cosine": 5}, "h2": {"cosine": 6}},
                {"name": "mixed_const_cos", "h1": {"constant": 0.5}, "h2": {"cosine": 5}},
                {"name": "mixed_cos_const", "h1": {"cosine": 6, "scale": 1.3}, "h2": {"constant": 0.7}},
            ],
            "sequences": [
                {"name": "seq2", "H": [{"constant": 0.8}, {"cosine": 5}], "extra": {"constant": 0.6}},
                {
                    "name": "seq3",
                    "H": [{"constant": 0.5}, {"cosine": 5}, {"cosine": 6, "scale": 0.8}],
                    "extra": {"cosine": 7},
                },
            ],
        },
        "transform": {
            "inverse_cases": 50,
            "compose_cases": 25,
            "plancherel_cases": 20,
            "indicator": True,
            "mc": {
                "functionals": [
                    {"family": [{"cosine": 1}], "f": {"pgp": {"factors": [dict(_GAUSS2)]}}},
                    {"family": [{"cosine": 1}], "f": {"pgp": {"factors": [{"coeffs": [0.0, 1.0], "a": 1.0}]}}},
                    {"family": [{"cosine": 1}], "f": {"pgp": {"factors": [{"coeffs": [1.0, 0.0, 0.3], "a": 1.4, "b": [0.2, 0.0]}]}}},
                ],
                "weight": {"cosine": 5, "scale": 2.0},
                "lambdas": [0.5, 1.0, 2.0],
                "n": 100000,
            },
            "quadrature": {"rho_values": [1.0, 0.5, 2.0], "eps_sequence": [1e-3, 1e-5, 1e-7], "tol": 1e-5},
        },
        "algebra": {
            "q_sample": 1000,
            "witness_substitutions": 200,
            "reduce_words": 10000,
            "eval_words": 20,
            "monoid_tables": True,
        },
    }


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings plus raw per-suite case definitions."""

    suite: str
    T: float
    N: int
    n: int
    seed: int
    rotation: dict
    transform: dict
    algebra: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        _reject_unknown(raw, _TOP_KEYS, "config")
        merged = copy.deepcopy(default_config())
        for key in ("suite", "T", "N", "n", "seed"):
            if key in raw:
                merged[key] = raw[key]
        for block, allowed in (("rotation", _ROTATION_KEYS), ("transform", _TRANSFORM_KEYS), ("algebra", _ALGEBRA_KEYS)):
            if block in raw:
                _reject_unknown(raw[block], allowed, block)
                merged[block].update(copy.deepcopy(raw[block]))

        suite = merged["suite"]
        if suite not in SUITES:
            raise ConfigError(f"suite must be one of {SUITES}, got {suite!r}")
        T = merged["T"]
        if not (isinstance(T, (int, float)) and math.isfinite(T) and T > 0):
            raise ConfigError(f"T must be a positive finite number, got {T!r}")
        N = merged["N"]
        if not (isinstance(N, int) and N >= 2):
            raise ConfigError(f"N must be an integer >= 2, got {N!r}")
        n = merged["n"]
        if not (isinstance(n, int) and n >= 2):
            raise ConfigError(f"n must be an integer >= 2, got {n!r}")
        seed = merged["seed"]
        if not (isinstance(seed, int) and 0 <= seed < 2**64):
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}")

        rot = merged["rotation"]
        for p in rot["pairs"]:
            _reject_unknown(p, _PAIR_KEYS, "rotation pair")
            if not {"name", "h1", "h2"} <= set(p):
                raise ConfigError(f"rotation pair needs name/h1/h2, got {sorted(p)}")
        for s in rot["sequences"]:
            _reject_unknown(s, _SEQ_KEYS, "rotation sequence")
            if not {"name", "H", "extra"} <= set(s):
                raise ConfigError(f"rotation sequence needs name/H/extra, got {sorted(s)}")
            if not s["H"]:
                raise ConfigError(f"rotation sequence {s['name']!r} has an empty H")

        tr = merged["transform"]
        for key in ("inverse_cases", "compose_cases", "plancherel_cases"):
            if not (isinstance(tr[key], int) and tr[key] >= 0):
                raise ConfigError(f"transform.{key} must be a nonnegative integer, got {tr[key]!r}")
        if not isinstance(tr["indicator"], bool):
            raise ConfigError(f"transform.indicator must be a boolean, got {tr['indicator']!r}")
        _reject_unknown(tr["mc"], _MC_KEYS, "transform.mc")
        _reject_unknown(tr["quadrature"], _QUAD_KEYS, "transform.quadrature")

        al = merged["algebra"]
        for key in sorted(_ALGEBRA_KEYS - {"monoid_tables"}):
            if not (isinstance(al[key], int) and not isinstance(al[key], bool) and al[key] >= 0):
                raise ConfigError(f"algebra.{key} must be a nonnegative integer, got {al[key]!r}")
        if not isinstance(al["monoid_tables"], bool):
            raise ConfigError(f"algebra.monoid_tables must be a boolean, got {al['monoid_tables']!r}")
        if 0 < al["q_sample"] < 3:
            raise ConfigError("algebra.q_sample must be 0 or >= 3")

        return cls(suite, float(T), N, n, seed, rot, tr, al)


def load_config(path: str | None) -> RunConfig:
    """Read a JSON config (or the bundled default) and apply GFFT_SEED."""
    if path is None:
        raw = {}
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    cfg = RunConfig.from_dict(raw)
    env_seed = os.environ.get("GFFT_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as e:
            raise ConfigError(f"GFFT_SEED must be an integer, got {env_seed!r}") from e
        if not 0 <= seed < 2**64:
            raise ConfigError(f"GFFT_SEED out of range: {seed}")
        cfg = RunConfig(cfg.suite, cfg.T, cfg.N, cfg.n, seed, cfg.rotation, cfg.transform, cfg.algebra)
    return cfg
