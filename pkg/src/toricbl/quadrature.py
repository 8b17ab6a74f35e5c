"""Composite Gauss-Legendre quadrature for log-concave integrands.

Every integral in the toolkit has the form ``int exp(g(x)) dx`` with ``g``
concave (a linear term minus convex weights).  Concavity makes the integrand
unimodal, which the integrator exploits:

1. locate the mode of ``g`` (probe ladder, then bounded Brent refinement);
2. truncate where ``g`` has dropped by ``spec.drop`` below the peak
   (``exp(-36) < 1e-15``), or at a finite domain end;
3. integrate on uniform panels (split at declared kinks) with
   ``spec.nodes_per_panel`` Gauss-Legendre nodes, doubling the panel count
   until two successive levels agree to ``spec.rtol``.

Sums are formed panel by panel in a fixed order, so results do not depend on
call order.  A right (left) end where ``g`` fails to decrease within
``spec.truncation_radius`` raises :class:`DivergenceError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DivergenceError

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "integrate_log",
    "CumulativeLogIntegral",
    "find_mode",
]

LogIntegrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls shared by every integral of a computation."""

    nodes_per_panel: int = 16
    panel_width: float = 0.5
    truncation_radius: float = 4096.0
    rtol: float = 1e-13
    max_refine: int = 8
    drop: float = 36.0
    angular_nodes: int = 64

    def __post_init__(self) -> None:
        if self.nodes_per_panel < 16:
            raise ValueError("node counts must be >= 16")
        if not self.rtol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_refine < 1:
            raise ValueError("max_refine must be >= 1 (the error estimate compares two levels)")
        if self.drop < 14 * math.log(10):
            raise ValueError("truncation drop must reach 1e-14 of the peak")
        if self.panel_width <= 0 or self.truncation_radius <= 0:
            raise ValueError("panel width and truncation radius must be positive")

    def to_json(self) -> dict:
        return {
            "nodes_per_panel": self.nodes_per_panel,
            "panel_width": self.panel_width,
            "truncation_radius": self.truncation_radius,
            "rtol": self.rtol,
            "max_refine": self.max_refine,
            "drop": self.drop,
            "angular_nodes": self.angular_nodes,
        }

    @classmethod
    def from_json(cls, obj: dict | None) -> "QuadratureSpec":
        return cls(**(obj or {}))


@dataclass(frozen=True)
class QuadResult:
    """Value of an integral with its error estimate and truncation window."""

    log_value: float
    abs_error: float
    panels: int
    truncation: tuple[float, float]
    converged: bool = True

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value > -math.inf else 0.0

    @property
    def rel_error(self) -> float:
        return self.abs_error / self.value if self.value > 0 else math.inf

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "abs_error_estimate": self.abs_error,
            "panels": self.panels,
            "truncation": list(self.truncation),
            "converged": self.converged,
        }


@lru_cache(maxsize=None)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def logsumexp(v: np.ndarray, axis=None) -> np.ndarray:
    """``log(sum(exp(v)))`` with ``-inf`` entries allowed (lean version for hot loops)."""
    m = np.max(v, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(v - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())


def _g(logf: LogIntegrand, x) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.asarray(logf(np.asarray(x, dtype=float)), dtype=float)
    return np.where(np.isnan(v), -np.inf, v)


def _g1(logf: LogIntegrand, x: float) -> float:
    return float(_g(logf, np.array([x]))[0])


def find_mode(logf: LogIntegrand, lo: float, hi: float, spec: QuadratureSpec) -> tuple[float, float]:
    """Maximiser and maximum of a concave ``logf`` on ``[lo, hi]``."""
    R = spec.truncation_radius
    a = max(lo, -R)
    b = min(hi, R)
    if a > b:
        raise ValueError("empty integration interval")
    center = min(max(0.0, a), b)
    ladder = 2.0 ** np.arange(-3, int(math.log2(R)) + 1)
    probes = np.concatenate([[a, b, center], center - ladder, center + ladder])
    probes = np.unique(probes[(probes >= a) & (probes <= b)])
    vals = _g(logf, probes)
    if not np.any(np.isfinite(vals)):
        dense = np.linspace(a, b, 4097)
        dvals = _g(logf, dense)
        if not np.any(np.isfinite(dvals)):
            raise ValueError("integrand vanishes identically on the interval")
        probes, vals = dense, dvals
    i = int(np.argmax(vals))
    if (i == probes.size - 1 and hi > R) or (i == 0 and lo < -R):
        raise DivergenceError("integrand does not decay within the truncation radius")
    left = probes[max(i - 1, 0)]
    right = probes[min(i + 1, probes.size - 1)]
    if right > left:
        def neg(x):
            v = _g1(logf, x)
            return -v if math.isfinite(v) else 1e300

        res = minimize_scalar(neg, bounds=(left, right), method="bounded",
                              options={"xatol": 1e-6 * max(1.0, abs(left), abs(right))})
        xm, gm = float(res.x), -float(res.fun)
        if gm < vals[i]:
            xm, gm = float(probes[i]), float(vals[i])
    else:
        xm, gm = float(probes[i]), float(vals[i])
    return xm, gm


def _crossing(logf: LogIntegrand, start: float, level: float, direction: int,
              bound: float, spec: QuadratureSpec) -> float:
    """First point beyond ``start`` (in ``direction``) where ``logf <= level``, or ``bound``."""
    step = 0.5
    prev = start
    while True:
        x = start + direction * step
        if (direction > 0 and x >= bound) or (direction < 0 and x <= bound):
            if math.isfinite(bound):
                if _g1(logf, bound) > level:
                    return bound
                x = bound
                break
        if abs(x) > spec.truncation_radius:
            raise DivergenceError(
                "integrand has not decayed below the truncation level within "
                f"|x| <= {spec.truncation_radius}"
            )
        if _g1(logf, x) <= level:
            break
        prev = x
        step *= 2.0
    lo, hi = (prev, x) if direction > 0 else (x, prev)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        inside = _g1(logf, mid) > level
        if direction > 0:
            lo, hi = (mid, hi) if inside else (lo, mid)
        else:
            lo, hi = (lo, mid) if inside else (mid, hi)
        if hi - lo < 1e-3:
            break
    return hi if direction > 0 else lo


def _check_decay(logf: LogIntegrand, end: float, direction: int) -> None:
    g_end = _g1(logf, end)
    g_in = _g1(logf, end - direction * 1.0)
    if math.isfinite(g_end) and g_end >= g_in:
        raise DivergenceError("integrand does not decay: integral is infinite")


def _edges(a: float, b: float, breakpoints: Sequence[float], width: float) -> np.ndarray:
    cuts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    out = [np.array([a])]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(math.ceil((hi - lo) / width)))
        out.append(np.linspace(lo, hi, n + 1)[1:])
    return np.concatenate(out)


def _panel_logs(logf: LogIntegrand, edges: np.ndarray, n: int) -> np.ndarray:
    """``log int`` of ``exp(logf)`` over every panel."""
    xg, wg = _gauss(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * xg[None, :]
    vals = _g(logf, pts.ravel()).reshape(pts.shape)
    with np.errstate(divide="ignore"):
        logw = np.log(half)[:, None] + np.log(wg)[None, :]
    return logsumexp(vals + logw, axis=1)


def _window(logf, lo, hi, spec, breakpoints):
    if lo >= hi:
        raise ValueError("empty integration interval")
    xm, gm = find_mode(logf, lo, hi, spec)
    if not math.isfinite(gm):
        raise ValueError("integrand vanishes identically on the interval")
    if gm == math.inf:
        raise DivergenceError("log-integrand is unbounded")
    level = gm - spec.drop
    a = _crossing(logf, xm, level, -1, lo, spec)
    b = _crossing(logf, xm, level, +1, hi, spec)
    if not math.isfinite(hi) or b < hi:
        _check_decay(logf, b, +1)
    if not math.isfinite(lo) or a > lo:
        _check_decay(logf, a, -1)
    return xm, gm, a, b


def _tail(logf, end, direction, gm) -> float:
    ge = _g1(logf, end)
    gi = _g1(logf, end - direction * 1e-3)
    slope = abs(ge - gi) / 1e-3
    if not math.isfinite(ge) or slope == 0:
        return 0.0
    return math.exp(ge - gm) / slope


def integrate_log(
    logf: LogIntegrand,
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """``int_lo^hi exp(logf(x)) dx`` for concave ``logf`` (vectorised)."""
    spec = spec or QuadratureSpec()
    _, gm, a, b = _window(logf, lo, hi, spec, breakpoints)
    tail = (_tail(logf, a, -1, gm) if a > lo else 0.0) + (_tail(logf, b, +1, gm) if b < hi else 0.0)
    width = spec.panel_width
    prev = None
    for level in range(spec.max_refine + 1):
        edges = _edges(a, b, breakpoints, width)
        cur = float(logsumexp(_panel_logs(logf, edges, spec.nodes_per_panel)))
        if prev is not None:
            diff = abs(math.exp(cur - gm) - math.exp(prev - gm))
            scale = math.exp(cur - gm)
            if diff <= spec.rtol * scale or level == spec.max_refine:
                return QuadResult(
                    cur,
                    math.exp(gm) * (diff + tail),
                    edges.size - 1,
                    (a, b),
                    converged=diff <= spec.rtol * scale,
                )
        prev = cur
        width *= 0.5
    raise AssertionError("unreachable")  # pragma: no cover


class CumulativeLogIntegral:
    """``log int_lower^b exp(logf)`` for many upper limits ``b`` in ``[b_lo, b_hi]``.

    Panel integrals are accumulated once in log space; each query adds one
    partial-panel Gauss-Legendre sum.  Two resolutions are kept and a query
    refines both until they agree to ``spec.rtol`` on the queried limits.
    """

    def __init__(
        self,
        logf: LogIntegrand,
        b_lo: float,
        b_hi: float,
        spec: QuadratureSpec | None = None,
        breakpoints: Sequence[float] = (),
        lower: float = -math.inf,
    ) -> None:
        self.logf = logf
        self.spec = spec or QuadratureSpec()
        self.breakpoints = tuple(breakpoints)
        xm, gm = find_mode(logf, lower, b_hi, self.spec)
        anchor = min(xm, b_lo)
        g_anchor = _g1(logf, anchor) if anchor > lower else gm
        if not math.isfinite(g_anchor):
            g_anchor = gm
        self.a = _crossing(logf, anchor, g_anchor - self.spec.drop, -1, lower, self.spec)
        if self.a > lower or not math.isfinite(lower):
            _check_decay(logf, self.a, -1)
        self.b = _crossing(logf, xm, gm - self.spec.drop, +1, b_hi, self.spec)
        if not math.isfinite(b_hi):
            _check_decay(logf, self.b, +1)
        self.width = self.spec.panel_width
        self.max_error = 0.0
        self.converged = True
        self._levels: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _level(self, width: float):
        if width not in self._levels:
            edges = _edges(self.a, self.b, self.breakpoints, width)
            logs = _panel_logs(self.logf, edges, self.spec.nodes_per_panel)
            self._levels[width] = (edges, np.logaddexp.accumulate(logs))
        return self._levels[width]

    def _eval(self, width: float, b: np.ndarray) -> np.ndarray:
        edges, cum = self._level(width)
        bc = np.clip(b, self.a, self.b)
        p = np.clip(np.searchsorted(edges, bc, side="right") - 1, 0, edges.size - 2)
        start = edges[p]
        xg, wg = _gauss(self.spec.nodes_per_panel)
        half = 0.5 * (bc - start)
        pts = (start + half)[:, None] + half[:, None] * xg[None, :]
        vals = _g(self.logf, pts.ravel()).reshape(pts.shape)
        with np.errstate(divide="ignore"):
            logw = np.log(half)[:, None] + np.log(wg)[None, :]
            partial = logsumexp(vals + logw, axis=1)
            before = np.where(p > 0, cum[np.maximum(p - 1, 0)], -np.inf)
        out = np.logaddexp(before, partial)
        return np.where(b < self.a, -np.inf, out)

    def __call__(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        flat = b.ravel()
        width = self.width
        coarse = self._eval(width, flat)
        for _ in range(self.spec.max_refine):
            fine = self._eval(width * 0.5, flat)
            with np.errstate(invalid="ignore"):
                rel = np.abs(np.expm1(fine - coarse))
            rel = np.where(np.isfinite(fine) | np.isfinite(coarse), rel, 0.0)
            err = float(np.max(rel)) if rel.size else 0.0
            if err <= self.spec.rtol:
                self.width = width
                self.max_error = max(self.max_error, err)
                return fine.reshape(b.shape)
            width *= 0.5
            coarse = fine
        self.converged = False
        self.max_error = max(self.max_error, err)
        return coarse.reshape(b.shape)
