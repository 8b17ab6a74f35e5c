"""Weighted L2 norms of monomials on Reinhardt model domains.

A point of a Reinhardt domain is written ``z = (z', z'')`` with base
coordinates ``z'`` (dimension ``n - k``) and fiber coordinates ``z''``
(dimension ``k``).  Rotation invariance reduces every integral of a toric
integrand to log-radii ``y = ln|z'|``, ``x = ln|z''|``:

    int |z^m|^2 e^{-phi - sigma} dA = (2 pi)^n int exp(<2m + 2, (y, x)> - phi(y) - sigma(x)) dy dx

over the log-image of the domain.  Two model shapes are supported:

* product models, base log-box times a fiber log-domain (every integral is a
  product of one-variable integrals);
* Hartogs models ``{x_j < -u(y)}`` over a one-dimensional base, ``u`` convex
  nondecreasing; the fiber integral is a cumulative integral evaluated at
  ``-u(y)`` inside the base integral.

Weights act separably: one :class:`~toricbl.weights.ClosedFormWeight` per base
axis, and per fiber axis either a weight or a slice ``psi^t`` of a
:class:`~toricbl.geodesic.WeightFamily`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, linprog

from .convex_core import convexity_defect, monotonicity_defect
from .errors import ConfigError, DivergenceError, DomainError
from .geodesic import AxisWeight, WeightFamily, weight_slice
from .quadrature import CumulativeLogIntegral, QuadResult, QuadratureSpec, integrate_log
from .weights import ClosedFormWeight, sample

__all__ = [
    "LogDomain",
    "ReinhardtModel",
    "ToricWeightSpec",
    "Quantity",
    "NormCurve",
    "sigma_mass",
    "monomial_norm",
    "base_norm",
    "norm_curve",
    "RadialIntegrator",
    "check_convex_increasing",
]

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# log-domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogDomain:
    """Convex region of log-radii: the full space, a box, or an intersection of half-spaces."""

    dim: int
    kind: str = "full"
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()
    halfspaces: tuple[tuple[tuple[float, ...], float], ...] = ()

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("log-domain dimension must be >= 1")
        if self.kind not in ("full", "box", "halfspaces"):
            raise ValueError(f"unknown log-domain kind {self.kind!r}")
        if self.kind == "box":
            if len(self.lower) != self.dim or len(self.upper) != self.dim:
                raise ValueError("box bounds must match the dimension")
            if any(math.isnan(v) for v in self.lower + self.upper):
                raise ValueError("box bounds must not be NaN")
            if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
                raise ValueError("empty box")
        if self.kind == "halfspaces":
            if not self.halfspaces:
                raise ValueError("half-space domain needs at least one constraint")
            for a, b in self.halfspaces:
                if len(a) != self.dim or not all(map(math.isfinite, a)) or math.isnan(b):
                    raise ValueError("malformed half-space constraint")
            if not self.feasible():
                raise ValueError("half-space domain is empty")

    @classmethod
    def full(cls, dim: int = 1) -> "LogDomain":
        return cls(dim, "full")

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "LogDomain":
        return cls(len(lower), "box", tuple(map(float, lower)), tuple(map(float, upper)))

    @classmethod
    def below(cls, upper: Sequence[float]) -> "LogDomain":
        """``{x <= upper}`` componentwise; ``[0]`` is the unit disc."""
        upper = tuple(map(float, upper))
        return cls.box((-math.inf,) * len(upper), upper)

    @classmethod
    def from_halfspaces(cls, constraints) -> "LogDomain":
        cons = tuple((tuple(map(float, a)), float(b)) for a, b in constraints)
        return cls(len(cons[0][0]), "halfspaces", halfspaces=cons)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        if self.kind == "full":
            return np.ones(x.shape[0], dtype=bool)
        if self.kind == "box":
            return np.all((x >= np.array(self.lower)) & (x <= np.array(self.upper)), axis=1)
        ok = np.ones(x.shape[0], dtype=bool)
        for a, b in self.halfspaces:
            ok &= x @ np.array(a) <= b
        return ok

    def axis_intervals(self) -> list[tuple[float, float]] | None:
        """Per-axis intervals when the domain is a box (possibly written as half-spaces)."""
        if self.kind == "full":
            return [(-math.inf, math.inf)] * self.dim
        if self.kind == "box":
            return list(zip(self.lower, self.upper))
        lo = [-math.inf] * self.dim
        hi = [math.inf] * self.dim
        for a, b in self.halfspaces:
            nz = [i for i, v in enumerate(a) if v != 0.0]
            if len(nz) > 1:
                return None
            if not nz:
                continue
            i = nz[0]
            if a[i] > 0:
                hi[i] = min(hi[i], b / a[i])
            else:
                lo[i] = max(lo[i], b / a[i])
        return list(zip(lo, hi))

    def bounding_box(self) -> list[tuple[float, float]]:
        iv = self.axis_intervals()
        if iv is not None:
            return iv
        A = np.array([a for a, _ in self.halfspaces])
        b = np.array([bb for _, bb in self.halfspaces])
        out = []
        for i in range(self.dim):
            bounds = []
            for sgn in (1.0, -1.0):
                c = np.zeros(self.dim)
                c[i] = sgn
                res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * self.dim)
                bounds.append(sgn * res.fun if res.status == 0 else -sgn * math.inf)
            out.append((bounds[0], bounds[1]))
        return out

    def feasible(self, radius: float = 64.0, n: int = 33) -> bool:
        """Coarse-grid probe for an interior point, with a Chebyshev-centre LP as fallback."""
        if self.kind != "halfspaces":
            return True
        axes = [np.linspace(-radius, radius, n)] * self.dim
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        if np.any(self.contains(pts)):
            return True
        A = np.array([a for a, _ in self.halfspaces])
        b = np.array([bb for _, bb in self.halfspaces])
        norms = np.linalg.norm(A, axis=1, keepdims=True)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=np.hstack([A, norms]), b_ub=b,
                      bounds=[(None, None)] * self.dim + [(None, 1.0)])
        return res.status == 0 and -res.fun > 0

    def to_json(self) -> dict:
        if self.kind == "full":
            return {"kind": "full", "dim": self.dim}
        if self.kind == "box":
            return {"kind": "box", "lower": [_enc(v) for v in self.lower],
                    "upper": [_enc(v) for v in self.upper]}
        return {"kind": "halfspaces",
                "constraints": [{"a": list(a), "b": _enc(b)} for a, b in self.halfspaces]}

    @classmethod
    def from_json(cls, obj: dict) -> "LogDomain":
        kind = obj.get("kind")
        if kind == "full":
            return cls.full(int(obj.get("dim", 1)))
        if kind == "box":
            return cls.box([_dec(v) for v in obj["lower"]], [_dec(v) for v in obj["upper"]])
        if kind == "halfspaces":
            return cls.from_halfspaces([(c["a"], _dec(c["b"])) for c in obj["constraints"]])
        raise ConfigError(f"unknown log-domain kind {kind!r}")


def _enc(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _dec(v) -> float:
    return float(v)


# ---------------------------------------------------------------------------
# models and weights
# ---------------------------------------------------------------------------


def check_convex_increasing(w: ClosedFormWeight, name: str, lo: float = -20.0,
                            hi: float = 20.0, n: int = 4001, tol: float = 1e-9) -> None:
    """Sampled certificate that ``w`` is convex and nondecreasing (raises ValueError)."""
    g = sample(w, np.linspace(lo, hi, n))
    scale = max(1.0, float(np.max(np.abs(g.window_values))))
    if convexity_defect(g) > tol * scale:
        raise ValueError(f"{name} is not convex")
    if monotonicity_defect(g) > tol * scale:
        raise ValueError(f"{name} is not nondecreasing")


@dataclass(frozen=True, eq=False)
class ReinhardtModel:
    """Base log-box times fiber: either a product fiber log-domain or a Hartogs bound ``x < -u(y)``."""

    base: LogDomain
    fiber_dim: int = 1
    fiber: LogDomain | None = None
    u: ClosedFormWeight | None = None

    def __post_init__(self) -> None:
        if self.base.kind not in ("box", "full") or self.base.dim > 2:
            raise ValueError("base log-domain must be a box of dimension <= 2")
        if self.base.kind == "full" or any(math.isinf(h) and h > 0 for h in self.base.upper):
            raise ValueError("base log-domain must be bounded above")
        if not 1 <= self.fiber_dim <= 2:
            raise ValueError("fiber dimension must be 1 or 2")
        if (self.fiber is None) == (self.u is None):
            raise ValueError("give exactly one of a product fiber domain or a Hartogs bound u")
        if self.fiber is not None and self.fiber.dim != self.fiber_dim:
            raise ValueError("fiber log-domain dimension mismatch")
        if self.u is not None:
            if self.base.dim != 1:
                raise ValueError("Hartogs models need a one-dimensional base")
            check_convex_increasing(self.u, "Hartogs bound u")
            lo, hi = self.base_interval(0)
            if lo >= hi:
                raise ValueError("base slice is empty")

    @classmethod
    def product(cls, base: LogDomain, fiber: LogDomain) -> "ReinhardtModel":
        return cls(base, fiber.dim, fiber=fiber)

    @classmethod
    def hartogs(cls, base: LogDomain, u: ClosedFormWeight, fiber_dim: int = 1) -> "ReinhardtModel":
        return cls(base, fiber_dim, u=u)

    @property
    def base_dim(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return self.base_dim + self.fiber_dim

    @property
    def is_product(self) -> bool:
        return self.fiber is not None

    def base_interval(self, axis: int) -> tuple[float, float]:
        """Log-radius range of base axis ``axis`` on the slice ``z'' = 0``."""
        lo, hi = self.base.lower[axis], self.base.upper[axis]
        if self.u is not None:
            ulo, uhi = self.u.domain()
            lo, hi = max(lo, ulo), min(hi, uhi)
        return lo, hi

    def fiber_hull(self) -> LogDomain:
        """Convex hull of the fiber log-radii over the whole domain."""
        if self.fiber is not None:
            return self.fiber
        lo, _ = self.base_interval(0)
        top = self.u.infimum() if math.isinf(lo) else float(self.u(np.array([lo]))[0])
        if top == -math.inf:
            return LogDomain.full(self.fiber_dim)
        return LogDomain.below([-top] * self.fiber_dim)

    def to_json(self) -> dict:
        out = {"base": self.base.to_json(), "fiber_dim": self.fiber_dim}
        if self.fiber is not None:
            out["fiber"] = self.fiber.to_json()
        else:
            out["hartogs_u"] = self.u.to_json()
        return out


FiberSpec = "ClosedFormWeight | Sequence[ClosedFormWeight | None] | WeightFamily | None"


@dataclass(frozen=True, eq=False)
class ToricWeightSpec:
    """Separable toric weight: one base weight per base axis plus a fiber weight or family.

    ``fiber`` is a single weight (applied on every fiber axis), a tuple with one
    weight per axis, a :class:`WeightFamily`, or ``None`` (no weight).  For a
    family, ``t`` selects the slice; ``None`` means the family's reference t.
    """

    base: tuple[ClosedFormWeight | None, ...] = ()
    fiber: object = None
    t: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", tuple(self.base))
        for i, w in enumerate(self.base):
            if w is not None:
                check_convex_increasing(w, f"base weight {i}")
        if isinstance(self.fiber, ClosedFormWeight):
            check_convex_increasing(self.fiber, "fiber weight")
        elif isinstance(self.fiber, (tuple, list)):
            object.__setattr__(self, "fiber", tuple(self.fiber))
            for j, w in enumerate(self.fiber):
                if w is not None:
                    check_convex_increasing(w, f"fiber weight {j}")

    @property
    def family(self) -> WeightFamily | None:
        return self.fiber if isinstance(self.fiber, WeightFamily) else None

    def base_axis(self, i: int) -> AxisWeight | None:
        if i >= len(self.base) or self.base[i] is None:
            return None
        return weight_slice(self.base[i])

    def fiber_axis(self, j: int, t: float | None = None, fiber_dim: int = 1) -> AxisWeight | None:
        f = self.fiber
        if f is None:
            return None
        if isinstance(f, WeightFamily):
            tt = t if t is not None else (self.t if self.t is not None else f.reference_t)
            if f.k not in (1, fiber_dim):
                raise ConfigError(f"family of dimension {f.k} on a {fiber_dim}-dimensional fiber")
            return f.axis_weight(float(tt), j if f.k > 1 else 0)
        if isinstance(f, tuple):
            return None if f[j] is None else weight_slice(f[j])
        return weight_slice(f)

    def with_fiber(self, fiber, t: float | None = None) -> "ToricWeightSpec":
        return ToricWeightSpec(self.base, fiber, t)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quantity:
    """A positive integral value with its error report."""

    log_value: float
    abs_error: float
    panels: int
    truncation: tuple
    converged: bool = True

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def rel_error(self) -> float:
        return _relative(self.abs_error, self.log_value)

    @property
    def low_confidence(self) -> bool:
        return not self.converged

    def __float__(self) -> float:
        return self.value

    def scaled(self, log_factor: float) -> "Quantity":
        return Quantity(self.log_value + log_factor, self.abs_error * math.exp(log_factor),
                        self.panels, self.truncation, self.converged)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "abs_error_estimate": self.abs_error,
            "panels": self.panels,
            "truncation": [[_enc(a), _enc(b)] for a, b in self.truncation],
            "converged": self.converged,
        }


def _relative(abs_error: float, log_value: float) -> float:
    # in log space so that tiny values do not underflow to a zero denominator
    if abs_error <= 0.0:
        return 0.0
    return math.exp(math.log(abs_error) - log_value)


def _combine(parts: Sequence[QuadResult | Quantity], log_factor: float = 0.0,
             extra_rel: float = 0.0) -> Quantity:
    log_v = sum(p.log_value for p in parts) + log_factor
    rel = sum(_relative(p.abs_error, p.log_value) for p in parts) + extra_rel
    trunc: list = []
    for p in parts:
        if isinstance(p, Quantity):
            trunc.extend(p.truncation)
        else:
            trunc.append(p.truncation)
    return Quantity(
        log_v,
        rel * math.exp(log_v),
        sum(p.panels for p in parts),
        tuple(trunc),
        all(p.converged for p in parts),
    )


# ---------------------------------------------------------------------------
# integration engine
# ---------------------------------------------------------------------------


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _restrict(lo: float, hi: float, w: AxisWeight | None) -> tuple[float, float, tuple]:
    if w is None:
        return lo, hi, ()
    dlo, dhi = w.domain
    return max(lo, dlo), min(hi, dhi), tuple(w.kinks)


def _axis_integral(a: float, w: AxisWeight | None, lo: float, hi: float,
                   q: QuadratureSpec) -> QuadResult:
    """``int_lo^hi exp(a v - w(v)) dv``."""
    lo, hi, kinks = _restrict(lo, hi, w)
    if not lo < hi:
        raise DomainError("log-domain is empty after restricting to the weight's domain")
    fn = w if w is not None else _zero

    def logf(v):
        return a * v - fn(v)

    return integrate_log(logf, lo, hi, q, kinks)


class RadialIntegrator:
    """Cached radial integrals ``int exp(<e, (y, x)> - phi(y) - sigma_t(x))`` over one model.

    ``e`` is the exponent vector ``m_i + m_j + 2`` of a pair of monomials;
    caches are keyed per axis (product models) or per fiber exponent (Hartogs
    models, where the fiber cumulative integral is shared across base exponents).
    """

    def __init__(self, model: ReinhardtModel, weights: ToricWeightSpec,
                 t: float | None = None, q: QuadratureSpec | None = None) -> None:
        self.model = model
        self.weights = weights
        self.t = t
        self.q = q or QuadratureSpec()
        self.base_w = [weights.base_axis(i) for i in range(model.base_dim)]
        self.fiber_w = [weights.fiber_axis(j, t, model.fiber_dim) for j in range(model.fiber_dim)]
        self._axis_cache: dict[tuple, QuadResult] = {}
        self._cum_cache: dict[tuple, CumulativeLogIntegral] = {}
        self._nested_cache: dict[tuple, Quantity] = {}
        if model.fiber is not None:
            iv = model.fiber.axis_intervals()
            if iv is None:
                raise NotImplementedError(
                    "quadrature over non-axis-aligned half-spaces in dimension 2 is not supported"
                )
            self.fiber_iv = iv

    # product pieces ---------------------------------------------------
    def _axis(self, kind: str, i: int, a: float) -> QuadResult:
        key = (kind, i, a)
        if key not in self._axis_cache:
            if kind == "base":
                lo, hi = self.model.base_interval(i)
                w = self.base_w[i]
            else:
                lo, hi = self.fiber_iv[i]
                w = self.fiber_w[i]
            self._axis_cache[key] = _axis_integral(a, w, lo, hi, self.q)
        return self._axis_cache[key]

    def base_integral(self, e_base: Sequence[float]) -> Quantity:
        return _combine([self._axis("base", i, a) for i, a in enumerate(e_base)])

    def fiber_integral(self, e_fiber: Sequence[float]) -> Quantity:
        if self.model.fiber is None:
            raise ValueError("fiber integral is only defined for product models")
        return _combine([self._axis("fiber", j, a) for j, a in enumerate(e_fiber)])

    # Hartogs pieces ---------------------------------------------------
    def _cumulative(self, j: int, a: float) -> CumulativeLogIntegral:
        key = (j, a)
        if key not in self._cum_cache:
            w = self.fiber_w[j]
            flo, fhi, kinks = _restrict(-math.inf, math.inf, w)
            ylo, yhi = self.model.base_interval(0)
            u = self.model.u
            b_lo = -float(u(np.array([yhi]))[0])
            b_hi = -(u.infimum() if math.isinf(ylo) else float(u(np.array([ylo]))[0]))
            fn = w if w is not None else _zero

            def logf(v, a=a, fn=fn):
                return a * v - fn(v)

            self._cum_cache[key] = CumulativeLogIntegral(
                logf, max(b_lo, flo), min(b_hi, fhi), self.q, kinks, lower=flo
            )
        return self._cum_cache[key]

    def _outer_breakpoints(self, lo: float, hi: float) -> list[float]:
        pts = list(self.model.u.kinks())
        if self.base_w[0] is not None:
            pts += list(self.base_w[0].kinks)
        # -u(y) crossing a fiber kink is a kink of the outer integrand
        R = self.q.truncation_radius
        a, b = max(lo, -R), min(hi, R)
        u = self.model.u
        for w in self.fiber_w:
            if w is None:
                continue
            for kappa in list(w.kinks) + [v for v in w.domain if math.isfinite(v)]:
                def h(y, kappa=kappa):
                    return float(u(np.array([y]))[0]) + kappa
                try:
                    if h(a) * h(b) < 0:
                        pts.append(brentq(h, a, b, xtol=1e-14))
                except (ValueError, OverflowError):
                    continue
        return pts

    def hartogs_integral(self, e_base: float, e_fiber: Sequence[float]) -> Quantity:
        key = (e_base, tuple(e_fiber))
        if key in self._nested_cache:
            return self._nested_cache[key]
        ylo, yhi = self.model.base_interval(0)
        wb = self.base_w[0]
        ylo, yhi, _ = _restrict(ylo, yhi, wb)
        cums = [self._cumulative(j, a) for j, a in enumerate(e_fiber)]
        u = self.model.u
        fb = wb if wb is not None else _zero

        def logf(y):
            bb = -u(y)
            out = e_base * y - fb(y)
            for c in cums:
                out = out + c(bb)
            return out

        res = integrate_log(logf, ylo, yhi, self.q, self._outer_breakpoints(ylo, yhi))
        inner = sum(c.max_error for c in cums)
        conv = res.converged and all(c.converged for c in cums)
        qres = Quantity(res.log_value, res.abs_error + inner * res.value, res.panels,
                        (res.truncation,), conv)
        self._nested_cache[key] = qres
        return qres

    # public -----------------------------------------------------------
    def integral(self, e_base: Sequence[float], e_fiber: Sequence[float]) -> Quantity:
        """Radial integral over the whole model (no angular factor)."""
        if self.model.fiber is not None:
            return _combine([self.base_integral(e_base), self.fiber_integral(e_fiber)])
        return self.hartogs_integral(float(e_base[0]), tuple(map(float, e_fiber)))

    def slice_integral(self, e_base: Sequence[float]) -> Quantity:
        """Radial integral over the base slice ``z'' = 0`` (base weight only)."""
        return self.base_integral(e_base)


def _split(model: ReinhardtModel, m: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    m = tuple(int(v) for v in m)
    if len(m) != model.n:
        raise ValueError(f"multi-index {m} has length {len(m)}, model dimension is {model.n}")
    if any(v < 0 for v in m):
        raise ValueError("multi-index entries must be >= 0")
    return m[: model.base_dim], m[model.base_dim :]


def _diverged(what: str, err: Exception) -> DivergenceError:
    return DivergenceError(f"{what} = ∞ ({err})")


def sigma_mass(sigma, dom: LogDomain | None = None, q: QuadratureSpec | None = None) -> Quantity:
    """``L = int_{C^k} e^{-sigma(ln|w|)}`` over the log-domain ``dom``.

    ``sigma`` is one weight (used on every axis of ``dom``), a tuple of
    per-axis weights, or a tuple of :class:`AxisWeight` slices.  The result is
    ``(2 pi)^k`` times the product of per-axis log-radius integrals.
    """
    q = q or QuadratureSpec()
    dom = dom or LogDomain.full(1)
    k = dom.dim
    ws = tuple(sigma) if isinstance(sigma, (tuple, list)) else (sigma,) * k
    if len(ws) != k:
        raise ValueError("one weight per axis of the log-domain is required")
    iv = dom.axis_intervals()
    if iv is None:
        raise NotImplementedError("sigma_mass over non-axis-aligned half-spaces is not supported")
    parts = []
    try:
        for (lo, hi), w in zip(iv, ws):
            aw = w if isinstance(w, AxisWeight) or w is None else weight_slice(w)
            parts.append(_axis_integral(2.0, aw, lo, hi, q))
    except DivergenceError as err:
        raise _diverged("L", err) from err
    return _combine(parts, k * math.log(TWO_PI))


def monomial_norm(m: Sequence[int], model: ReinhardtModel, w: ToricWeightSpec | None = None,
                  q: QuadratureSpec | None = None, t: float | None = None,
                  integrator: RadialIntegrator | None = None) -> Quantity:
    """``||z^m||^2`` under ``e^{-phi - sigma}`` (or ``e^{-phi - psi^t}`` for a family)."""
    mb, mf = _split(model, m)
    integ = integrator or RadialIntegrator(model, w or ToricWeightSpec(), t, q)
    try:
        r = integ.integral([2 * v + 2.0 for v in mb], [2 * v + 2.0 for v in mf])
    except DivergenceError as err:
        raise _diverged("norm", err) from err
    return r.scaled(model.n * math.log(TWO_PI))


def base_norm(mb: Sequence[int], model: ReinhardtModel, w: ToricWeightSpec | None = None,
              q: QuadratureSpec | None = None,
              integrator: RadialIntegrator | None = None) -> Quantity:
    """``int_{Omega'} |z'^m|^2 e^{-phi}`` on the base slice."""
    mb = tuple(int(v) for v in mb)
    if len(mb) != model.base_dim:
        raise ValueError("base multi-index length must equal the base dimension")
    integ = integrator or RadialIntegrator(model, w or ToricWeightSpec(), None, q)
    try:
        r = integ.slice_integral([2 * v + 2.0 for v in mb])
    except DivergenceError as err:
        raise _diverged("norm", err) from err
    return r.scaled(model.base_dim * math.log(TWO_PI))


@dataclass
class NormCurve:
    """``t -> ||z^m||^2_t`` with the ``e^{-2kt}`` rescaling; failures are recorded per node."""

    t: np.ndarray
    values: np.ndarray
    rescaled: np.ndarray
    abs_errors: np.ndarray
    errors: dict[int, str] = field(default_factory=dict)


def norm_curve(m: Sequence[int], model: ReinhardtModel, fam: WeightFamily, t_grid,
               q: QuadratureSpec | None = None,
               base: Sequence[ClosedFormWeight | None] = ()) -> NormCurve:
    t_grid = np.asarray(t_grid, dtype=float)
    vals = np.full(t_grid.shape, np.nan)
    errs = np.full(t_grid.shape, np.nan)
    failures: dict[int, str] = {}
    spec = ToricWeightSpec(tuple(base), fam)
    for i, t in enumerate(t_grid):
        try:
            r = monomial_norm(m, model, spec, q, t=float(t))
            vals[i], errs[i] = r.value, r.abs_error
        except (DivergenceError, DomainError) as err:
            failures[i] = str(err)
    k = model.fiber_dim
    return NormCurve(t_grid, vals, np.exp(-2.0 * k * t_grid) * vals, errs, failures)


def multi_indices(dim: int, cap: int) -> list[tuple[int, ...]]:
    return [tuple(v) for v in itertools.product(range(cap + 1), repeat=dim)]
