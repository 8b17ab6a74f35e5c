"""Weak-geodesic weight families ``psi(t, x)`` and their diagnostics.

Four families are provided:

* :class:`Scaling` -- ``t * sigma((x - c)/t + c)`` for ``t in (0, 1]``;
* :class:`Translation` -- ``sigma(x - t)`` (componentwise shift in dimension k);
* :class:`Endpoint` -- ``psi^t = (t sigma1* + (1 - t) sigma0*)*`` built from
  stored grid conjugates;
* :class:`LinearMix` -- ``t sigma1 + (1 - t) sigma0``, a deliberate negative
  control that is generically *not* a geodesic.

A family is a weak geodesic iff its partial conjugates ``(psi^t)*(xi)`` are
affine in ``t``; for smooth families this is the same as the vanishing of the
Monge-Ampere determinant ``det D^2_{(t,x)} psi``.  Both criteria are exposed:
:func:`conjugate_affinity_defect` (robust to kinks) and :func:`ma_residual`
(smooth region only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Sequence

import numpy as np

from .convex_core import (
    ConjugateResult,
    GridFunction,
    convexity_defect,
    lf_transform,
    monotonicity_defect,
)
from .errors import DomainError, NoFiniteSupportError, StencilError
from .weights import ClosedFormWeight, sample

__all__ = [
    "AxisWeight",
    "WeightFamily",
    "Scaling",
    "Translation",
    "Endpoint",
    "LinearMix",
    "Explicit",
    "family_eval",
    "endpoint_family",
    "conjugate_table",
    "conjugate_affinity_defect",
    "ma_residual",
    "ma_convergence",
    "joint_convexity_defect",
]


@dataclass(frozen=True)
class AxisWeight:
    """A one-variable slice ``x -> psi^t`` along one axis, as seen by quadrature."""

    fn: Callable[[np.ndarray], np.ndarray]
    kinks: tuple[float, ...] = ()
    domain: tuple[float, float] = (-math.inf, math.inf)
    smooth: bool = True

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def weight_slice(w: ClosedFormWeight) -> AxisWeight:
    return AxisWeight(w, tuple(w.kinks()), w.domain(), w.smooth)


class WeightFamily:
    """Base class; subclasses implement ``_value`` and the per-axis hooks."""

    variant: ClassVar[str] = ""
    k: int = 1
    t_domain: tuple[float, float, bool, bool] = (-math.inf, math.inf, False, False)
    reference_t: float = 0.0

    def check_t(self, t: float) -> None:
        lo, hi, lo_closed, hi_closed = self.t_domain
        ok_lo = t >= lo if lo_closed else t > lo
        ok_hi = t <= hi if hi_closed else t < hi
        if not (ok_lo and ok_hi and math.isfinite(t)):
            lb = "[" if lo_closed else "("
            rb = "]" if hi_closed else ")"
            raise DomainError(f"t={t} outside the {self.variant} domain {lb}{lo}, {hi}{rb}")

    def _value(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Unchecked vectorised value; ``x`` has a trailing axis of length k."""
        raise NotImplementedError

    def axis_weight(self, t: float, axis: int = 0) -> AxisWeight:
        raise NotImplementedError(f"{self.variant} family is not separable")

    def sigma_argument(self, t, x, axis: int = 0):
        """Argument handed to the underlying weight on ``axis`` (kink bookkeeping)."""
        return None

    def base_weight(self, axis: int = 0) -> ClosedFormWeight | None:
        return None

    def conjugate(self, t: float, dual_nodes, base_nodes, axis: int = 0) -> ConjugateResult:
        """Grid conjugate of ``psi^t`` along ``axis`` sampled on ``base_nodes``."""
        w = self.axis_weight(t, axis)
        base_nodes = np.asarray(base_nodes, dtype=float)
        return lf_transform(GridFunction(base_nodes, w(base_nodes)), dual_nodes)

    def to_json(self) -> dict:
        raise NotImplementedError


def _weights_tuple(sigma, k: int) -> tuple[ClosedFormWeight, ...]:
    if isinstance(sigma, ClosedFormWeight):
        return (sigma,) * k
    sig = tuple(sigma)
    if len(sig) != k:
        raise ValueError(f"expected {k} fiber weights, got {len(sig)}")
    return sig


def _kink_straddled(args: np.ndarray, kinks: Sequence[float]) -> float | None:
    lo, hi = float(np.min(args)), float(np.max(args))
    for kappa in kinks:
        if lo <= kappa <= hi:
            return kappa
    return None


@dataclass(frozen=True, eq=False)
class Scaling(WeightFamily):
    """``psi(t, x) = t * sigma((x - c)/t + c)`` on ``t in (0, 1]``."""

    sigma: ClosedFormWeight
    c: float = 0.0
    variant: ClassVar[str] = "scaling"
    k: ClassVar[int] = 1
    t_domain: ClassVar[tuple] = (0.0, 1.0, False, True)
    reference_t: ClassVar[float] = 1.0

    def _value(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)[..., 0]
        # t == 1 returns sigma(x) exactly, without the round trip through (x-c)/t + c.
        arg = np.where(t == 1.0, x, (x - self.c) / t + self.c)
        with np.errstate(invalid="ignore"):
            return np.where(t == 1.0, 1.0, t) * self.sigma(arg)

    def sigma_argument(self, t, x, axis=0):
        t = np.asarray(t, dtype=float)
        return np.where(t == 1.0, x, (np.asarray(x) - self.c) / t + self.c)

    def base_weight(self, axis=0):
        return self.sigma

    def axis_weight(self, t, axis=0):
        self.check_t(t)
        if t == 1.0:
            return weight_slice(self.sigma)
        c, s = self.c, self.sigma

        def fn(x):
            return t * s((x - c) / t + c)

        lo, hi = s.domain()
        return AxisWeight(
            fn,
            tuple(t * (kp - c) + c for kp in s.kinks()),
            (t * (lo - c) + c, t * (hi - c) + c),
            s.smooth,
        )

    def transport(self, t: float, y: np.ndarray) -> np.ndarray:
        """Abscissae ``t y + (1 - t) c`` at which ``psi^t = t sigma(y)``."""
        return y if t == 1.0 else t * y + (1.0 - t) * self.c

    def conjugate(self, t, dual_nodes, base_nodes, axis=0):
        self.check_t(t)
        y = np.asarray(base_nodes, dtype=float)
        g = sample(self.sigma, y)
        vals = g.values if t == 1.0 else t * g.values
        f = GridFunction(self.transport(t, y), vals, g.left_slope, g.right_slope)
        return lf_transform(f, dual_nodes)

    def limit_at_zero(self, x):
        """Right limit ``t -> 0+``: 0 for ``x <= c`` and ``(x - c) * slope(+inf)`` beyond."""
        x = np.asarray(x, dtype=float)
        s = self.sigma.right_slope
        with np.errstate(invalid="ignore"):
            return np.where(x <= self.c, 0.0, (x - self.c) * s)

    def to_json(self):
        return {"variant": self.variant, "sigma": self.sigma.to_json(), "c": self.c}


@dataclass(frozen=True, eq=False)
class Translation(WeightFamily):
    """``psi(t, x) = sigma(x - t 1)``, separable over k components."""

    sigma: ClosedFormWeight | tuple[ClosedFormWeight, ...]
    k: int = 1
    variant: ClassVar[str] = "translation"
    t_domain: ClassVar[tuple] = (-math.inf, math.inf, False, False)
    reference_t: ClassVar[float] = 0.0
    sigmas: tuple[ClosedFormWeight, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("translation dimension must be >= 1")
        object.__setattr__(self, "sigmas", _weights_tuple(self.sigma, self.k))

    def _value(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        total = np.zeros(np.broadcast_shapes(t.shape, x.shape[:-1]))
        for j, s in enumerate(self.sigmas):
            total = total + s(x[..., j] - t)
        return total

    def sigma_argument(self, t, x, axis=0):
        return np.asarray(x) - t

    def base_weight(self, axis=0):
        return self.sigmas[axis]

    def axis_weight(self, t, axis=0):
        self.check_t(t)
        s = self.sigmas[axis]
        lo, hi = s.domain()
        return AxisWeight(
            lambda x: s(x - t),
            tuple(kp + t for kp in s.kinks()),
            (lo + t, hi + t),
            s.smooth,
        )

    def transport(self, t: float, y: np.ndarray) -> np.ndarray:
        return y + t

    def conjugate(self, t, dual_nodes, base_nodes, axis=0):
        self.check_t(t)
        y = np.asarray(base_nodes, dtype=float)
        g = sample(self.sigmas[axis], y)
        f = GridFunction(self.transport(t, y), g.values, g.left_slope, g.right_slope)
        return lf_transform(f, dual_nodes)

    def to_json(self):
        sig = [s.to_json() for s in self.sigmas]
        return {"variant": self.variant, "sigma": sig[0] if len(set(map(str, sig))) == 1 else sig,
                "k": self.k}


def _mix_values(t: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``t b + (1 - t) a`` with ``+inf`` absorbing, and exact endpoints."""
    if t == 0.0:
        return a.copy()
    if t == 1.0:
        return b.copy()
    out = t * b + (1.0 - t) * a
    out[~(np.isfinite(a) & np.isfinite(b))] = np.inf
    return out


def _mix_slope(t: float, s0: float, s1: float, wall: float) -> float:
    if t == 0.0:
        return s0
    if t == 1.0:
        return s1
    if not (math.isfinite(s0) and math.isfinite(s1)):
        return wall
    return t * s1 + (1.0 - t) * s0


@dataclass(frozen=True, eq=False)
class Endpoint(WeightFamily):
    """Conjugate interpolation between two endpoint weights on fixed grids."""

    sigma0: ClosedFormWeight
    sigma1: ClosedFormWeight
    primal_nodes: np.ndarray
    dual_nodes: np.ndarray
    variant: ClassVar[str] = "endpoint"
    k: ClassVar[int] = 1
    t_domain: ClassVar[tuple] = (0.0, 1.0, True, True)
    reference_t: ClassVar[float] = 1.0
    conj0: ConjugateResult = field(init=False, repr=False)
    conj1: ConjugateResult = field(init=False, repr=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.primal_nodes, dtype=float)
        d = np.asarray(self.dual_nodes, dtype=float)
        object.__setattr__(self, "primal_nodes", p)
        object.__setattr__(self, "dual_nodes", d)
        object.__setattr__(self, "conj0", lf_transform(sample(self.sigma0, p), d))
        object.__setattr__(self, "conj1", lf_transform(sample(self.sigma1, p), d))

    def mixed_conjugate(self, t: float) -> GridFunction:
        """``t sigma1* + (1 - t) sigma0*`` on the stored dual grid."""
        self.check_t(t)
        a, b = self.conj0.dual, self.conj1.dual
        vals = _mix_values(t, a.values, b.values)
        if not np.any(np.isfinite(vals)):
            raise NoFiniteSupportError("no finite support: conjugate mix is +inf everywhere")
        return GridFunction(
            self.dual_nodes,
            vals,
            _mix_slope(t, a.left_slope, b.left_slope, -math.inf),
            _mix_slope(t, a.right_slope, b.right_slope, math.inf),
            tag="mixed_conjugate",
        )

    def _eval_1d(self, t: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        if flat.size == 0:
            return x.copy()
        uniq, inv = np.unique(flat, return_inverse=True)
        mix = self.mixed_conjugate(t)
        probe = np.array([uniq[0], uniq[0] + 1.0]) if uniq.size == 1 else uniq
        try:
            vals = lf_transform(mix, probe).values[: uniq.size]
        except NoFiniteSupportError:
            # every requested point lies outside the effective domain
            vals = np.full(uniq.size, np.inf)
        return vals[inv].reshape(x.shape)

    def _value(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)[..., 0]
        t, x = np.broadcast_arrays(t, x)
        out = np.empty(x.shape)
        for tv in np.unique(t):
            sel = t == tv
            out[sel] = self._eval_1d(float(tv), x[sel])
        return out

    def axis_weight(self, t, axis=0):
        self.check_t(t)
        return AxisWeight(lambda x: self._eval_1d(t, x), (), (-math.inf, math.inf), False)

    def conjugate(self, t, dual_nodes, base_nodes=None, axis=0):
        mix = self.mixed_conjugate(t)
        d = np.asarray(dual_nodes, dtype=float)
        if d.shape == self.dual_nodes.shape and np.array_equal(d, self.dual_nodes):
            return ConjugateResult(mix, np.full(d.size, -1, dtype=np.int64))
        return ConjugateResult(
            GridFunction(d, mix(d), mix.left_slope, mix.right_slope),
            np.full(d.size, -1, dtype=np.int64),
        )

    def to_json(self):
        p, d = self.primal_nodes, self.dual_nodes
        return {
            "variant": self.variant,
            "sigma0": self.sigma0.to_json(),
            "sigma1": self.sigma1.to_json(),
            "primal_grid": {"lo": float(p[0]), "hi": float(p[-1]), "n": int(p.size)},
            "dual_grid": {"lo": float(d[0]), "hi": float(d[-1]), "n": int(d.size)},
        }


@dataclass(frozen=True, eq=False)
class LinearMix(WeightFamily):
    """``t sigma1 + (1 - t) sigma0`` -- naive value interpolation (negative control)."""

    sigma0: ClosedFormWeight
    sigma1: ClosedFormWeight
    variant: ClassVar[str] = "linear_mix"
    k: ClassVar[int] = 1
    t_domain: ClassVar[tuple] = (0.0, 1.0, True, True)
    reference_t: ClassVar[float] = 1.0

    def _value(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)[..., 0]
        a, b = self.sigma0(x), self.sigma1(x)
        with np.errstate(invalid="ignore"):
            out = t * b + (1.0 - t) * a
        out = np.where(np.isfinite(a) & np.isfinite(b), out, np.inf)
        return np.where(t == 0.0, a, np.where(t == 1.0, b, out))

    def sigma_argument(self, t, x, axis=0):
        return np.asarray(x)

    def axis_weight(self, t, axis=0):
        self.check_t(t)
        lo0, hi0 = self.sigma0.domain()
        lo1, hi1 = self.sigma1.domain()
        return AxisWeight(
            lambda x: self._value(t, np.asarray(x)[..., None]),
            tuple(sorted(set(self.sigma0.kinks()) | set(self.sigma1.kinks()))),
            (max(lo0, lo1), min(hi0, hi1)),
            self.sigma0.smooth and self.sigma1.smooth,
        )

    def conjugate(self, t, dual_nodes, base_nodes, axis=0):
        self.check_t(t)
        y = np.asarray(base_nodes, dtype=float)
        g0, g1 = sample(self.sigma0, y), sample(self.sigma1, y)
        f = GridFunction(
            y,
            self._value(t, y[:, None]),
            _mix_slope(t, g0.left_slope, g1.left_slope, -math.inf),
            _mix_slope(t, g0.right_slope, g1.right_slope, math.inf),
        )
        return lf_transform(f, dual_nodes)

    def to_json(self):
        return {"variant": self.variant, "sigma0": self.sigma0.to_json(),
                "sigma1": self.sigma1.to_json()}


@dataclass(frozen=True, eq=False)
class Explicit(WeightFamily):
    """Arbitrary vectorised ``fn(t, x)``; used for injected test controls."""

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    k: int = 1
    domain_t: tuple[float, float, bool, bool] = (-math.inf, math.inf, False, False)
    name: str = "explicit"
    variant: ClassVar[str] = "explicit"

    @property
    def t_domain(self):  # type: ignore[override]
        return self.domain_t

    def _value(self, t, x):
        return np.asarray(self.fn(np.asarray(t, dtype=float), np.asarray(x, dtype=float)), float)

    def conjugate(self, t, dual_nodes, base_nodes, axis=0):
        y = np.asarray(base_nodes, dtype=float)
        return lf_transform(GridFunction(y, self._value(t, y[:, None])), dual_nodes)


def _as_point(fam: WeightFamily, x) -> np.ndarray:
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.shape != (fam.k,):
        raise ValueError(f"expected a point of dimension {fam.k}, got shape {xv.shape}")
    return xv


def family_eval(fam: WeightFamily, t: float, x) -> float:
    """``psi(t, x)`` in ``(-inf, +inf]``; raises :class:`DomainError` outside the t-domain."""
    fam.check_t(float(t))
    xv = _as_point(fam, x)
    return float(fam._value(np.asarray(float(t)), xv))


def endpoint_family(
    sigma0: ClosedFormWeight,
    sigma1: ClosedFormWeight,
    primal_nodes,
    dual_nodes,
    tol: float = 1e-9,
) -> Endpoint:
    """Build the conjugate-interpolated family between two convex nondecreasing weights."""
    p = np.asarray(primal_nodes, dtype=float)
    for name, w in (("sigma0", sigma0), ("sigma1", sigma1)):
        g = sample(w, p)
        scale = max(1.0, float(np.max(np.abs(g.window_values))))
        if convexity_defect(g) > tol * scale:
            raise ValueError(f"{name} is not convex on the primal grid")
        if monotonicity_defect(g) > tol * scale:
            raise ValueError(f"{name} is not nondecreasing on the primal grid")
    return Endpoint(sigma0, sigma1, p, np.asarray(dual_nodes, dtype=float))


def _check_uniform(grid: np.ndarray, what: str) -> None:
    if grid.size < 3:
        raise ValueError(f"{what} needs at least 3 nodes")
    d = np.diff(grid)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise ValueError(f"{what} must be uniform")


def conjugate_table(fam: WeightFamily, t_grid, dual_grid, base_nodes=None, axis: int = 0):
    """Matrix of ``(psi^t)*(xi)`` with one row per t-node."""
    rows = [fam.conjugate(float(t), dual_grid, base_nodes, axis).values for t in t_grid]
    return np.vstack(rows)


def conjugate_affinity_defect(
    fam: WeightFamily, t_grid, dual_grid, base_nodes=None, axis: int = 0
) -> float:
    """Max over dual nodes of ``|second t-difference of (psi^t)*(xi)|``.

    Zero (to rounding) certifies a weak geodesic.  A dual node that is finite
    at some t-nodes and ``+inf`` at others of a stencil counts as ``inf``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    _check_uniform(t_grid, "t-grid")
    for t in t_grid:
        fam.check_t(float(t))
    tab = conjugate_table(fam, t_grid, dual_grid, base_nodes, axis)
    a, b, c = tab[:-2], tab[1:-1], tab[2:]
    fin = np.isfinite(a) & np.isfinite(b) & np.isfinite(c)
    none = ~np.isfinite(a) & ~np.isfinite(b) & ~np.isfinite(c)
    if np.any(~fin & ~none):
        return math.inf
    if not np.any(fin):
        return 0.0
    d2 = (c[fin] - b[fin]) - (b[fin] - a[fin])
    return float(np.max(np.abs(d2)))


def _stencil_values(fam: WeightFamily, pts: np.ndarray) -> np.ndarray:
    vals = fam._value(pts[:, 0], pts[:, 1:])
    if not np.all(np.isfinite(vals)):
        raise StencilError("stencil leaves effective domain")
    return vals


def _check_kinks(fam: WeightFamily, pts: np.ndarray) -> None:
    if isinstance(fam, Endpoint):
        raise StencilError("endpoint families are piecewise affine on the grid; "
                           "use conjugate_affinity_defect")
    for axis in range(fam.k):
        args = fam.sigma_argument(pts[:, 0], pts[:, 1 + axis], axis)
        if args is None:
            continue
        ws = [fam.base_weight(axis)] if fam.base_weight(axis) is not None else []
        if isinstance(fam, LinearMix):
            ws = [fam.sigma0, fam.sigma1]
        for w in ws:
            kappa = _kink_straddled(np.asarray(args), w.kinks())
            if kappa is not None:
                raise StencilError(f"stencil crosses a kink of the weight at {kappa}")


def _fd_hessian(fam: WeightFamily, p: np.ndarray, h: float, check_kinks: bool) -> np.ndarray:
    d = p.size
    eye = np.eye(d) * h
    offsets = [np.zeros(d)]
    for i in range(d):
        offsets += [eye[i], -eye[i]]
    for i in range(d):
        for j in range(i + 1, d):
            offsets += [eye[i] + eye[j], eye[i] - eye[j], -eye[i] + eye[j], -eye[i] - eye[j]]
    pts = p[None, :] + np.array(offsets)
    if check_kinks:
        _check_kinks(fam, pts)
    v = _stencil_values(fam, pts)
    H = np.empty((d, d))
    f0 = v[0]
    for i in range(d):
        H[i, i] = (v[1 + 2 * i] - 2.0 * f0 + v[2 + 2 * i]) / (h * h)
    pos = 1 + 2 * d
    for i in range(d):
        for j in range(i + 1, d):
            pp, pm, mp, mm = v[pos : pos + 4]
            H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4.0 * h * h)
            pos += 4
    return H


def ma_residual(fam: WeightFamily, t: float, x, h: float = 1e-4) -> float:
    """Determinant of the central finite-difference Hessian of ``psi`` in ``(t, x)``.

    Second-order stencil: 3-point second differences on the diagonal and the
    4-point cross for mixed entries.  Weak geodesics with smooth weights give
    ``O(h^2)`` residuals; stencils that straddle a kink or reach ``+inf`` are
    refused with :class:`StencilError`.
    """
    fam.check_t(float(t))
    p = np.concatenate([[float(t)], _as_point(fam, x)])
    return float(np.linalg.det(_fd_hessian(fam, p, h, check_kinks=True)))


def ma_convergence(fam: WeightFamily, t: float, x, hs=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3)):
    """Log-log slope of ``|ma_residual|`` against ``h``; returns ``(slope, residuals)``."""
    res = np.array([ma_residual(fam, t, x, h) for h in hs])
    slope = np.polyfit(np.log(np.asarray(hs)), np.log(np.abs(res)), 1)[0]
    return float(slope), res


def _directions(d: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0]])
    if d == 2:
        ang = np.arange(24) * np.pi / 24
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    grid = np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij")).reshape(d, -1).T
    keep = []
    for v in grid:
        nz = np.flatnonzero(v)
        if nz.size and v[nz[0]] > 0:
            keep.append(v / np.linalg.norm(v))
    return np.array(keep)


def joint_convexity_defect(
    fam: WeightFamily, t_values, x_values, h: float = 1e-2
) -> float:
    """Most negative directional second difference ``D^2_v psi / h^2`` over a sample grid.

    For a convex ``psi`` every exact second difference is nonnegative, so the
    certificate carries no truncation error: a positive defect is either a
    genuine loss of convexity or rounding (``~ eps |psi| / h^2``).  Minimising
    over unit directions is the Rayleigh-quotient form of the smallest Hessian
    eigenvalue.  ``x_values`` is one array per fiber axis (product grid).
    """
    t_values = np.asarray(t_values, dtype=float)
    axes = [np.asarray(x_values, dtype=float)] if fam.k == 1 and np.ndim(x_values) == 1 \
        else [np.asarray(a, dtype=float) for a in x_values]
    mesh = np.meshgrid(t_values, *axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    dirs = _directions(pts.shape[1])
    f0 = _stencil_values(fam, pts)
    worst = math.inf
    for v in dirs:
        fp = _stencil_values(fam, pts + h * v)
        fm = _stencil_values(fam, pts - h * v)
        worst = min(worst, float(np.min((fp - 2.0 * f0 + fm) / (h * h))))
    return max(0.0, -worst)
