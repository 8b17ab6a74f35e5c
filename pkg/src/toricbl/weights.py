"""Catalog of one-variable convex nondecreasing weights.

Each weight is a function of the log-radius ``x = ln|w|``.  All variants are
vectorised over numpy arrays and take values in ``(-inf, +inf]``; ``+inf`` is
represented by IEEE ``inf`` and marks points outside the effective domain.

Besides pointwise values every weight reports the data the numerical layers
need: asymptotic slopes at ``-inf``/``+inf`` (used as tail slopes when the
weight is sampled on a finite grid), kink locations (used as quadrature
breakpoints and to refuse finite-difference stencils), and its effective
domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .convex_core import GridFunction

__all__ = [
    "ClosedFormWeight",
    "ExpScaled",
    "LogOnePlusExp",
    "IndicatorHalfLine",
    "MaxAffine",
    "Affine",
    "Sampled",
    "evaluate",
    "sample",
]


class ClosedFormWeight:
    """Common interface of the weight catalog."""

    variant: ClassVar[str] = ""
    left_slope: float = 0.0
    right_slope: float = math.inf
    smooth: bool = True

    def __call__(self, x):
        raise NotImplementedError

    @property
    def params(self) -> dict[str, Any]:
        raise NotImplementedError

    def kinks(self) -> tuple[float, ...]:
        return ()

    def domain(self) -> tuple[float, float]:
        """Closed hull ``(lo, hi)`` of the set where the weight is finite."""
        return (-math.inf, math.inf)

    def infimum(self) -> float:
        """Limit at ``-inf`` (the infimum, since the weight is nondecreasing)."""
        return float(self(np.array([-1e6]))[0])

    def to_json(self) -> dict[str, Any]:
        return {"variant": self.variant, "params": self.params}


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ExpScaled(ClosedFormWeight):
    """``alpha * exp(2x)``; the weight ``alpha |w|^2``."""

    alpha: float
    variant: ClassVar[str] = "exp_scaled"

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("ExpScaled requires alpha > 0")

    def __call__(self, x):
        with np.errstate(over="ignore"):
            return self.alpha * np.exp(2.0 * _as_array(x))

    @property
    def params(self):
        return {"alpha": self.alpha}

    @property
    def left_slope(self) -> float:  # type: ignore[override]
        return 0.0

    @property
    def right_slope(self) -> float:  # type: ignore[override]
        return math.inf

    def infimum(self) -> float:
        return 0.0

    def conjugate(self, xi):
        """Closed-form conjugate: ``(xi/2) ln(xi/(2 alpha)) - xi/2`` for xi >= 0."""
        xi = _as_array(xi)
        out = np.full(xi.shape, np.inf)
        pos = xi > 0
        out[pos] = 0.5 * xi[pos] * np.log(xi[pos] / (2.0 * self.alpha)) - 0.5 * xi[pos]
        out[xi == 0] = 0.0
        return out


@dataclass(frozen=True)
class LogOnePlusExp(ClosedFormWeight):
    """``(1 + alpha) ln(1 + exp(2x))``; the weight ``(1+|w|^2)^(1+alpha)``."""

    alpha: float
    variant: ClassVar[str] = "log_one_plus_exp"

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("LogOnePlusExp requires alpha > 0")

    def __call__(self, x):
        return (1.0 + self.alpha) * np.logaddexp(0.0, 2.0 * _as_array(x))

    @property
    def params(self):
        return {"alpha": self.alpha}

    @property
    def left_slope(self) -> float:  # type: ignore[override]
        return 0.0

    @property
    def right_slope(self) -> float:  # type: ignore[override]
        return 2.0 * (1.0 + self.alpha)

    def infimum(self) -> float:
        return 0.0


@dataclass(frozen=True)
class IndicatorHalfLine(ClosedFormWeight):
    """0 on ``(-inf, c]`` and ``+inf`` beyond."""

    c: float
    variant: ClassVar[str] = "indicator_half_line"

    def __call__(self, x):
        x = _as_array(x)
        return np.where(x <= self.c, 0.0, np.inf)

    @property
    def params(self):
        return {"c": self.c}

    @property
    def left_slope(self) -> float:  # type: ignore[override]
        return 0.0

    @property
    def right_slope(self) -> float:  # type: ignore[override]
        return math.inf

    @property
    def smooth(self) -> bool:  # type: ignore[override]
        return False

    def kinks(self):
        return (self.c,)

    def domain(self):
        return (-math.inf, self.c)

    def infimum(self) -> float:
        return 0.0


@dataclass(frozen=True)
class MaxAffine(ClosedFormWeight):
    """``j * max(2x - t0, 0)``, the classical cut-off weight family member."""

    j: float
    t0: float = 0.0
    variant: ClassVar[str] = "max_affine"

    def __post_init__(self) -> None:
        if self.j < 0:
            raise ValueError("MaxAffine requires j >= 0")

    def __call__(self, x):
        return self.j * np.maximum(2.0 * _as_array(x) - self.t0, 0.0)

    @property
    def params(self):
        return {"j": self.j, "t0": self.t0}

    @property
    def left_slope(self) -> float:  # type: ignore[override]
        return 0.0

    @property
    def right_slope(self) -> float:  # type: ignore[override]
        return 2.0 * self.j

    @property
    def smooth(self) -> bool:  # type: ignore[override]
        return self.j == 0

    def kinks(self):
        return () if self.j == 0 else (0.5 * self.t0,)

    def infimum(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Affine(ClosedFormWeight):
    """``a x + b`` with ``a >= 0``."""

    a: float
    b: float = 0.0
    variant: ClassVar[str] = "affine"

    def __post_init__(self) -> None:
        if self.a < 0:
            raise ValueError("Affine weight must be nondecreasing (a >= 0)")

    def __call__(self, x):
        return self.a * _as_array(x) + self.b

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    @property
    def left_slope(self) -> float:  # type: ignore[override]
        return self.a

    @property
    def right_slope(self) -> float:  # type: ignore[override]
        return self.a

    def infimum(self) -> float:
        return self.b if self.a == 0 else -math.inf


@dataclass(frozen=True, eq=False)
class Sampled(ClosedFormWeight):
    """A weight given by a :class:`GridFunction` (linear interpolation)."""

    grid: "GridFunction"
    variant: ClassVar[str] = "sampled"

    def __call__(self, x):
        return self.grid(x)

    @property
    def params(self):
        return {"grid": self.grid.to_json()}

    @property
    def left_slope(self) -> float:  # type: ignore[override]
        return self.grid.effective_left_slope

    @property
    def right_slope(self) -> float:  # type: ignore[override]
        return self.grid.effective_right_slope

    @property
    def smooth(self) -> bool:  # type: ignore[override]
        return False

    def kinks(self):
        i0, i1 = self.grid.finite_window
        return tuple(float(v) for v in self.grid.nodes[i0 : i1 + 1])

    def domain(self):
        i0, i1 = self.grid.finite_window
        lo = -math.inf if np.isfinite(self.left_slope) else float(self.grid.nodes[i0])
        hi = math.inf if np.isfinite(self.right_slope) else float(self.grid.nodes[i1])
        return (lo, hi)

    def infimum(self) -> float:
        i0, _ = self.grid.finite_window
        if np.isfinite(self.left_slope):
            return -math.inf if self.left_slope > 0 else float(self.grid.values[i0])
        return float(self.grid.values[i0])


def evaluate(w: ClosedFormWeight, x: float) -> float:
    """Exact value of ``w`` at a finite point ``x``."""
    if not math.isfinite(x):
        raise ValueError("evaluate expects a finite abscissa")
    return float(w(np.array([x], dtype=float))[0])


def sample(w: ClosedFormWeight, nodes) -> "GridFunction":
    """Sample ``w`` on ``nodes``; the weight's asymptotic slopes become the tails."""
    from .convex_core import GridFunction

    nodes = np.asarray(nodes, dtype=float)
    return GridFunction(
        nodes,
        w(nodes),
        left_slope=w.left_slope if np.isfinite(w.left_slope) else -math.inf,
        right_slope=w.right_slope,
        tag=w.variant,
    )
