"""JSON (de)serialisation of weights, families, models and problems.

Every parser raises :class:`ConfigError` on malformed input so the command
line can map it to exit code 2.  Infinities are written as the strings
``"inf"``/``"-inf"``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .bl_verifier import ExtensionProblem
from .convex_core import GridFunction, uniform_grid
from .errors import ConfigError
from .geodesic import Endpoint, LinearMix, Scaling, Translation, WeightFamily
from .quadrature import QuadratureSpec
from .reinhardt_l2 import LogDomain, ReinhardtModel, ToricWeightSpec
from .weights import (
    Affine,
    ClosedFormWeight,
    ExpScaled,
    IndicatorHalfLine,
    LogOnePlusExp,
    MaxAffine,
    Sampled,
)

__all__ = [
    "load_json",
    "weight_from_json",
    "family_from_json",
    "grid_from_json",
    "domain_from_json",
    "model_from_json",
    "weights_from_json",
    "datum_from_json",
    "datum_to_json",
    "problem_from_json",
    "problem_to_json",
    "quadrature_from_json",
]

_WEIGHTS: dict[str, type[ClosedFormWeight]] = {
    cls.variant: cls
    for cls in (ExpScaled, LogOnePlusExp, IndicatorHalfLine, MaxAffine, Affine)
}


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed JSON in {path}: {err}") from err


def _num(v) -> float:
    try:
        return float(v)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"expected a number, got {v!r}") from err


def _need(obj: Any, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{where}: missing key {key!r}")
    return obj[key]


def weight_from_json(obj: Any) -> ClosedFormWeight | None:
    """``{"variant": ..., "params": {...}}``; ``None`` stays ``None``."""
    if obj is None:
        return None
    variant = _need(obj, "variant", "weight")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("weight params must be an object")
    try:
        if variant == "sampled":
            return Sampled(GridFunction.from_json(_need(params, "grid", "sampled weight")))
        cls = _WEIGHTS[variant]
        return cls(**{k: _num(v) for k, v in params.items()})
    except KeyError as err:
        raise ConfigError(f"unknown weight variant {variant!r}") from err
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"bad {variant} weight: {err}") from err


def grid_from_json(obj: Any, where: str = "grid") -> np.ndarray:
    """A node list, ``{"lo", "hi", "n"}``, or the string ``"lo:hi:n"``."""
    try:
        if isinstance(obj, str):
            lo, hi, n = obj.split(":")
            return uniform_grid(float(lo), float(hi), int(n))
        if isinstance(obj, dict):
            return uniform_grid(_num(obj["lo"]), _num(obj["hi"]), int(obj["n"]))
        if isinstance(obj, list):
            return np.array([_num(v) for v in obj])
    except (KeyError, ValueError) as err:
        raise ConfigError(f"{where}: malformed grid {obj!r}") from err
    raise ConfigError(f"{where}: malformed grid {obj!r}")


def family_from_json(obj: Any) -> WeightFamily | None:
    if obj is None:
        return None
    variant = _need(obj, "variant", "family")
    try:
        if variant == "scaling":
            return Scaling(weight_from_json(_need(obj, "sigma", "scaling")), _num(obj.get("c", 0.0)))
        if variant == "translation":
            sig = _need(obj, "sigma", "translation")
            k = int(obj.get("k", 1))
            sigma = tuple(weight_from_json(s) for s in sig) if isinstance(sig, list) else weight_from_json(sig)
            return Translation(sigma, k)
        if variant == "linear_mix":
            return LinearMix(weight_from_json(_need(obj, "sigma0", "linear_mix")),
                             weight_from_json(_need(obj, "sigma1", "linear_mix")))
        if variant == "endpoint":
            from .geodesic import endpoint_family

            return endpoint_family(
                weight_from_json(_need(obj, "sigma0", "endpoint")),
                weight_from_json(_need(obj, "sigma1", "endpoint")),
                grid_from_json(_need(obj, "primal_grid", "endpoint"), "primal_grid"),
                grid_from_json(_need(obj, "dual_grid", "endpoint"), "dual_grid"),
            )
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {variant} family: {err}") from err
    raise ConfigError(f"unknown family variant {variant!r}")


def domain_from_json(obj: Any) -> LogDomain:
    try:
        return LogDomain.from_json(obj)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad log-domain: {err}") from err


def model_from_json(obj: Any) -> ReinhardtModel:
    base = domain_from_json(_need(obj, "base", "model"))
    try:
        if "fiber" in obj:
            return ReinhardtModel.product(base, domain_from_json(obj["fiber"]))
        if "hartogs_u" in obj:
            return ReinhardtModel.hartogs(base, weight_from_json(obj["hartogs_u"]),
                                          int(obj.get("fiber_dim", 1)))
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad model: {err}") from err
    raise ConfigError("model needs either 'fiber' or 'hartogs_u'")


def weights_from_json(obj: Any, base_dim: int) -> ToricWeightSpec:
    obj = obj or {}
    base = obj.get("base")
    if base is None:
        base_w: tuple = (None,) * base_dim
    elif isinstance(base, list):
        base_w = tuple(weight_from_json(b) for b in base)
    else:
        base_w = (weight_from_json(base),) * base_dim
    fib = obj.get("fiber")
    fiber = tuple(weight_from_json(f) for f in fib) if isinstance(fib, list) else weight_from_json(fib)
    try:
        return ToricWeightSpec(base_w, fiber)
    except ValueError as err:
        raise ConfigError(f"bad weights: {err}") from err


def datum_from_json(obj: Any) -> dict[tuple[int, ...], complex]:
    """``[{"index": [..], "coeff": x | [re, im]}, ...]``."""
    if not isinstance(obj, list) or not obj:
        raise ConfigError("datum must be a nonempty list of {index, coeff}")
    out: dict[tuple[int, ...], complex] = {}
    for item in obj:
        idx = tuple(int(v) for v in _need(item, "index", "datum"))
        c = item.get("coeff", 1.0)
        out[idx] = complex(_num(c[0]), _num(c[1])) if isinstance(c, list) else complex(_num(c))
    return out


def datum_to_json(d: dict) -> list:
    out = []
    for k, v in sorted(d.items()):
        v = complex(v)
        out.append({"index": list(k), "coeff": v.real if v.imag == 0 else [v.real, v.imag]})
    return out


def problem_from_json(obj: Any) -> ExtensionProblem:
    model = model_from_json(_need(obj, "model", "problem"))
    weights = weights_from_json(obj.get("weights"), model.base_dim)
    family = family_from_json(obj.get("family"))
    datum = datum_from_json(_need(obj, "datum", "problem"))
    basis = obj.get("basis")
    try:
        return ExtensionProblem(
            model,
            weights,
            datum,
            family,
            None if basis is None else tuple(tuple(int(v) for v in m) for m in basis),
            int(obj.get("fiber_cap", 8)),
            None if obj.get("reference_t") is None else _num(obj["reference_t"]),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad problem: {err}") from err


def problem_to_json(p: ExtensionProblem) -> dict:
    w = p.weights
    fiber = w.fiber
    if isinstance(fiber, tuple):
        fj: Any = [None if f is None else f.to_json() for f in fiber]
    elif isinstance(fiber, ClosedFormWeight):
        fj = fiber.to_json()
    else:
        fj = None
    out = {
        "model": p.model.to_json(),
        "weights": {"base": [None if b is None else b.to_json() for b in w.base], "fiber": fj},
        "datum": datum_to_json(p.datum),
        "basis": [list(m) for m in p.basis],
    }
    if p.family is not None:
        out["family"] = p.family.to_json()
    if p.reference_t is not None:
        out["reference_t"] = p.reference_t
    return out


def quadrature_from_json(obj: Any) -> QuadratureSpec:
    try:
        return QuadratureSpec.from_json(obj)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad quadrature spec: {err}") from err


def finite_or_none(v: float):
    return v if math.isfinite(v) else None
