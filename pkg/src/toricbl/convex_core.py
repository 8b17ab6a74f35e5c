"""Extended-real convex functions on grids and their Legendre-Fenchel conjugates.

A :class:`GridFunction` stores node values in ``(-inf, +inf]``.  Beyond the
first and last node the function is continued linearly with the stored tail
slopes; a tail slope of ``-inf`` on the left (``+inf`` on the right) is a wall,
i.e. the function is ``+inf`` outside the sampled range.  Tail slopes are only
consulted when the finite window touches that end of the grid.

Conjugation rules
-----------------
``f*(xi) = sup_x x*xi - f(x)``.  Terms with ``f(x) = +inf`` contribute
``-inf`` and are dropped from the sup.  With a finite left tail slope ``sL``
the sup is ``+inf`` for ``xi < sL`` (the tail ray escapes); likewise for
``xi > sR``.  For ``sL <= xi <= sR`` the sup over the linear continuation is
attained at a node, so the returned value is the exact maximum over the
finite nodes.

Discretisation
--------------
For ``f`` convex on ``[a, b]`` with node spacing at most ``h`` and continuum
maximiser inside the window, the node maximum under-estimates the continuum
conjugate by at most ``h * (|xi| + Lip(f))`` and, for ``f`` with curvature
bounded by ``K`` near the maximiser, by at most ``K h^2 / 8``.
:func:`conjugation_tolerance` turns this into the tolerance used by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoFiniteSupportError

__all__ = [
    "GridFunction",
    "ConjugateResult",
    "lf_transform",
    "lf_transform_bruteforce",
    "biconjugate",
    "convexity_defect",
    "monotonicity_defect",
    "separable_conjugate",
    "product_conjugate_value",
    "product_conjugate_grid",
    "default_dual_grid",
    "conjugation_tolerance",
    "uniform_grid",
]


def uniform_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, int(n))


def _float_or_inf(v) -> float:
    if isinstance(v, str):
        return float(v.replace("Infinity", "inf"))
    return float(v)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Sampled extended-real function on a strictly increasing grid."""

    nodes: np.ndarray
    values: np.ndarray
    left_slope: float = -math.inf
    right_slope: float = math.inf
    tag: str | None = None
    _window: tuple[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        values = np.array(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("GridFunction needs at least two nodes")
        if values.shape != nodes.shape:
            raise ValueError("nodes and values must have the same length")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("nodes must be finite")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(np.isnan(values)) or np.any(values == -np.inf):
            raise ValueError("values must lie in (-inf, +inf]")
        finite = np.flatnonzero(np.isfinite(values))
        if finite.size == 0:
            raise NoFiniteSupportError()
        i0, i1 = int(finite[0]), int(finite[-1])
        if finite.size != i1 - i0 + 1:
            raise ValueError("finite values must occupy a contiguous window")
        if self.left_slope == math.inf or self.right_slope == -math.inf:
            raise ValueError("tail slopes must point outward (-inf left wall, +inf right wall)")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "left_slope", float(self.left_slope))
        object.__setattr__(self, "right_slope", float(self.right_slope))
        object.__setattr__(self, "_window", (i0, i1))

    @property
    def finite_window(self) -> tuple[int, int]:
        """Inclusive index range of the finite values."""
        return self._window

    @property
    def effective_left_slope(self) -> float:
        return self.left_slope if self._window[0] == 0 else -math.inf

    @property
    def effective_right_slope(self) -> float:
        return self.right_slope if self._window[1] == self.nodes.size - 1 else math.inf

    @property
    def window_nodes(self) -> np.ndarray:
        i0, i1 = self._window
        return self.nodes[i0 : i1 + 1]

    @property
    def window_values(self) -> np.ndarray:
        i0, i1 = self._window
        return self.values[i0 : i1 + 1]

    @property
    def max_step(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def __call__(self, x):
        """Linear interpolation on the finite window, tails outside it."""
        x = np.asarray(x, dtype=float)
        xs, fs = self.window_nodes, self.window_values
        out = np.full(x.shape, np.inf)
        inside = (x >= xs[0]) & (x <= xs[-1])
        if xs.size == 1:
            out[x == xs[0]] = fs[0]
        else:
            out[inside] = np.interp(x[inside], xs, fs)
        sL, sR = self.effective_left_slope, self.effective_right_slope
        if math.isfinite(sL):
            left = x < xs[0]
            out[left] = fs[0] + sL * (x[left] - xs[0])
        if math.isfinite(sR):
            right = x > xs[-1]
            out[right] = fs[-1] + sR * (x[right] - xs[-1])
        return out

    def to_json(self) -> dict:
        def enc(v: float):
            return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")

        out = {
            "nodes": [float(v) for v in self.nodes],
            "values": [enc(float(v)) for v in self.values],
        }
        if self.left_slope != -math.inf:
            out["left_slope"] = enc(self.left_slope)
        if self.right_slope != math.inf:
            out["right_slope"] = enc(self.right_slope)
        if self.tag is not None:
            out["tag"] = self.tag
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        return cls(
            np.array([float(v) for v in obj["nodes"]]),
            np.array([_float_or_inf(v) for v in obj["values"]]),
            left_slope=_float_or_inf(obj.get("left_slope", "-inf")),
            right_slope=_float_or_inf(obj.get("right_slope", "inf")),
            tag=obj.get("tag"),
        )


@dataclass(frozen=True, eq=False)
class ConjugateResult:
    """Conjugate values on a dual grid plus the attaining primal node per dual node."""

    dual: GridFunction
    argmax: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.dual.nodes

    @property
    def values(self) -> np.ndarray:
        return self.dual.values


def _dual_tails(f: GridFunction) -> tuple[float, float]:
    xs = f.window_nodes
    sL, sR = f.effective_left_slope, f.effective_right_slope
    left = float(xs[0]) if sL == -math.inf else -math.inf
    right = float(xs[-1]) if sR == math.inf else math.inf
    return left, right


def _check_dual(dual_nodes) -> np.ndarray:
    xi = np.array(dual_nodes, dtype=float)
    if xi.ndim != 1 or xi.size < 2 or not np.all(np.diff(xi) > 0):
        raise ValueError("dual nodes must be a strictly increasing grid of length >= 2")
    return xi


def _monotone_argmax(xs: np.ndarray, fs: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Smallest maximiser of ``xs*xi_j - fs`` for every j, by divide and conquer.

    The smallest maximiser is nondecreasing in ``xi`` (the objective has
    increasing differences), so the search range of each half can be cut at
    the maximiser of the midpoint.  Values are compared with exactly the same
    floating-point expression as the brute-force loop.
    """
    m = xi.size
    out = np.empty(m, dtype=np.int64)
    stack = [(0, m - 1, 0, xs.size - 1)]
    while stack:
        jlo, jhi, ilo, ihi = stack.pop()
        if jlo > jhi:
            continue
        jm = (jlo + jhi) // 2
        seg = xs[ilo : ihi + 1] * xi[jm] - fs[ilo : ihi + 1]
        k = ilo + int(np.argmax(seg))
        out[jm] = k
        stack.append((jlo, jm - 1, ilo, k))
        stack.append((jm + 1, jhi, k, ihi))
    return out


def _bruteforce_argmax(xs: np.ndarray, fs: np.ndarray, xi: np.ndarray) -> np.ndarray:
    out = np.empty(xi.size, dtype=np.int64)
    chunk = max(1, 4_000_000 // max(xs.size, 1))
    for s in range(0, xi.size, chunk):
        block = xs[None, :] * xi[s : s + chunk, None] - fs[None, :]
        out[s : s + chunk] = np.argmax(block, axis=1)
    return out


def _conjugate(f: GridFunction, dual_nodes, brute: bool) -> ConjugateResult:
    xi = _check_dual(dual_nodes)
    i0, _ = f.finite_window
    xs, fs = f.window_nodes, f.window_values
    sL, sR = f.effective_left_slope, f.effective_right_slope
    active = (xi >= sL) & (xi <= sR)
    values = np.full(xi.size, np.inf)
    argmax = np.full(xi.size, -1, dtype=np.int64)
    if np.any(active):
        idx = np.flatnonzero(active)
        sub = xi[idx]
        k = _bruteforce_argmax(xs, fs, sub) if brute else _monotone_argmax(xs, fs, sub)
        values[idx] = xs[k] * sub - fs[k] + 0.0  # normalise -0.0
        argmax[idx] = k + i0
    if not np.any(np.isfinite(values)):
        raise NoFiniteSupportError("no finite support: conjugate is +inf on every dual node")
    left, right = _dual_tails(f)
    dual = GridFunction(xi, values, left_slope=left, right_slope=right, tag="conjugate")
    return ConjugateResult(dual, argmax)


def lf_transform(f: GridFunction, dual_nodes) -> ConjugateResult:
    """Discrete Legendre-Fenchel transform of ``f`` on ``dual_nodes``.

    Uses the monotone-maximiser divide and conquer, ``O((N + M) log M)``; the
    result agrees bit for bit with :func:`lf_transform_bruteforce`.  Ties are
    broken towards the smallest primal index.
    """
    return _conjugate(f, dual_nodes, brute=False)


def lf_transform_bruteforce(f: GridFunction, dual_nodes) -> ConjugateResult:
    """Reference ``O(N M)`` double loop (vectorised in blocks)."""
    return _conjugate(f, dual_nodes, brute=True)


def biconjugate(f: GridFunction, dual_nodes) -> GridFunction:
    """``(f*)*`` back on the primal nodes, i.e. the closed convex envelope of ``f``."""
    g = lf_transform(f, dual_nodes).dual
    h = lf_transform(g, f.nodes).dual
    return GridFunction(f.nodes, h.values, h.left_slope, h.right_slope, tag="biconjugate")


def _slopes(xs: np.ndarray, fs: np.ndarray) -> np.ndarray:
    return np.diff(fs) / np.diff(xs)


def convexity_defect(f: GridFunction) -> float:
    """Largest negative second difference over the finite window.

    On a uniform grid this is ``max(0, -(f[i+1] - 2 f[i] + f[i-1]))``; on a
    non-uniform grid slope jumps are scaled by the mean neighbouring step so
    the two agree when the grid is uniform.
    """
    xs, fs = f.window_nodes, f.window_values
    if xs.size < 3:
        return 0.0
    s = _slopes(xs, fs)
    h = np.diff(xs)
    jumps = (s[1:] - s[:-1]) * 0.5 * (h[1:] + h[:-1])
    return float(max(0.0, -jumps.min()))


def monotonicity_defect(f: GridFunction) -> float:
    """Largest decrease between consecutive nodes; ``inf`` if ``+inf`` precedes finite values.

    Only node values are inspected, tails are ignored.
    """
    if f.finite_window[0] > 0:
        return math.inf
    fs = f.window_values
    if fs.size < 2:
        return 0.0
    return float(max(0.0, -np.diff(fs).min()))


def separable_conjugate(
    fs: Sequence[GridFunction], dual_grids: Sequence
) -> list[ConjugateResult]:
    """Componentwise conjugates of ``sum_i f_i(x_i)`` (at most three components)."""
    if len(fs) != len(dual_grids):
        raise ValueError("one dual grid per component is required")
    if not 1 <= len(fs) <= 3:
        raise ValueError("separable conjugation supports 1 to 3 components")
    return [lf_transform(f, g) for f, g in zip(fs, dual_grids)]


def product_conjugate_value(results: Sequence[ConjugateResult], xi: Sequence[float]) -> float:
    """Value of the separable conjugate at a point of the product dual grid."""
    total = 0.0
    for res, v in zip(results, xi, strict=True):
        hits = np.flatnonzero(res.nodes == float(v))
        if hits.size == 0:
            raise ValueError(f"{v} is not a node of the dual grid")
        total += float(res.values[hits[0]])
    return total


def product_conjugate_grid(results: Sequence[ConjugateResult]) -> np.ndarray:
    """Conjugate values on the full product dual grid (``inf`` propagates)."""
    out = np.asarray(results[0].values)
    for res in results[1:]:
        out = np.add.outer(out, res.values)
    return out


def default_dual_grid(f: GridFunction, n: int = 2001, margin: float = 0.05) -> np.ndarray:
    """Dual grid over the chord-slope range of ``f`` with a small negative margin.

    All weights in scope are nondecreasing, so their conjugates are ``+inf``
    for ``xi < 0``; the margin keeps a few such nodes visible.
    """
    xs, fs = f.window_nodes, f.window_values
    smax = float(np.max(_slopes(xs, fs))) if xs.size > 1 else 1.0
    smax = max(smax, 1.0)
    return np.linspace(-margin * smax, smax, n)


def conjugation_tolerance(step: float, lipschitz: float) -> float:
    """Tolerance for conjugate-then-conjugate-back round trips on a grid of ``step``.

    Each conjugation loses at most ``h (|xi| + Lip)`` where both terms are
    bounded by the Lipschitz scale; the factor 10 covers two passes plus the
    interpolation back onto the evaluation points.
    """
    return 10.0 * step * max(1.0, abs(lipschitz))
