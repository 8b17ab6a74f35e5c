"""Minimal extensions, dual norms and the convexity/monotonicity scans.

Functions on the model domain are represented by coefficient vectors on a
finite monomial basis.  For a deformation parameter ``t`` the Hermitian Gram
matrix ``A_ij = <e_j, e_i>_t`` factors into an angular part (trapezoid rule on
the torus, exact for degree differences below ``angular_nodes``) and a radial
log-coordinate integral.  On top of it:

* the minimal extension of a datum ``f`` solves the KKT system
  ``[[A, E], [E^H, 0]] [F; lam] = [0; f]``, ``E`` selecting fiber degree 0;
* the functional ``xi_g(F) = int_{Omega'} F conj(g) e^{-phi}`` is ``w^H F``
  with ``w = B g`` (``B`` the base Gram), and its squared dual norm is
  ``w^H A^{-1} w``.

Scans evaluate ``ln ||xi_g||^2_t`` on uniform t-grids and certify convexity
(second differences) or monotonicity (first differences) at a relative
tolerance, default ``1e-8``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DivergenceError, DomainError, ToricError
from .geodesic import Scaling, Translation, WeightFamily
from .quadrature import QuadratureSpec
from .reinhardt_l2 import (
    TWO_PI,
    LogDomain,
    RadialIntegrator,
    ReinhardtModel,
    ToricWeightSpec,
    multi_indices,
    sigma_mass,
)
from .weights import MaxAffine

__all__ = [
    "ExtensionProblem",
    "GramMatrix",
    "Extension",
    "ScanReport",
    "default_basis",
    "gram_matrix",
    "base_gram",
    "min_norm_extension",
    "functional_vector",
    "pairing",
    "dual_norm_sq",
    "extremal_datum",
    "logconvexity_scan",
    "rho_scan",
    "lemma32_probe",
    "monotonicity_scan",
    "extension_estimate_check",
    "j_family_trend",
    "parse_t_grid",
]

Index = tuple[int, ...]
DEFAULT_TOL = 1e-8


def default_basis(datum_indices: Sequence[Index], fiber_dim: int, cap: int = 8) -> tuple[Index, ...]:
    """Datum base indices times all fiber degrees ``<= cap`` per axis."""
    out = []
    for b in sorted(set(tuple(map(int, d)) for d in datum_indices)):
        for f in multi_indices(fiber_dim, cap):
            out.append(b + f)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ExtensionProblem:
    """Model domain, toric weight, deformation family, datum and finite basis.

    ``weights.fiber`` is the undeformed fiber weight ``sigma``; ``family`` (if
    any) is the deformation ``t -> psi^t`` whose slice at ``reference_t``
    reproduces ``sigma``.  ``datum`` maps base multi-indices to coefficients.
    """

    model: ReinhardtModel
    weights: ToricWeightSpec
    datum: Mapping[Index, complex]
    family: WeightFamily | None = None
    basis: tuple[Index, ...] | None = None
    fiber_cap: int = 8
    reference_t: float | None = None

    def __post_init__(self) -> None:
        nb = self.model.base_dim
        datum = {tuple(int(v) for v in k): complex(c) for k, c in dict(self.datum).items()}
        if not datum:
            raise ValueError("datum must have at least one coefficient")
        for k, c in datum.items():
            if len(k) != nb:
                raise ValueError(f"datum index {k} does not match base dimension {nb}")
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("datum coefficients must be finite")
        object.__setattr__(self, "datum", datum)
        basis = self.basis
        if basis is None:
            basis = default_basis(list(datum), self.model.fiber_dim, self.fiber_cap)
        basis = tuple(tuple(int(v) for v in m) for m in basis)
        if len(set(basis)) != len(basis):
            raise ValueError("basis has repeated indices")
        for m in basis:
            if len(m) != self.model.n or min(m) < 0:
                raise ValueError(f"basis index {m} is malformed")
        zero = (0,) * self.model.fiber_dim
        for k in datum:
            if k + zero not in basis:
                raise ValueError(f"datum index {k} missing from basis at fiber degree 0")
        object.__setattr__(self, "basis", basis)
        if self.family is not None and self.family.k not in (1, self.model.fiber_dim):
            raise ValueError("family dimension does not match the fiber dimension")

    @property
    def k(self) -> int:
        return self.model.fiber_dim

    @property
    def t_ref(self) -> float | None:
        if self.reference_t is not None:
            return self.reference_t
        return None if self.family is None else self.family.reference_t

    def weights_at(self, t: float | None) -> ToricWeightSpec:
        if t is None or self.family is None:
            return self.weights
        return self.weights.with_fiber(self.family, t)

    def constrained(self) -> np.ndarray:
        nb = self.model.base_dim
        return np.array([all(v == 0 for v in m[nb:]) for m in self.basis])

    def datum_vector(self, datum: Mapping[Index, complex] | None = None) -> np.ndarray:
        """Coefficients of a base datum on the constrained (fiber degree 0) basis elements."""
        datum = self.datum if datum is None else {tuple(k): complex(v) for k, v in datum.items()}
        nb = self.model.base_dim
        cons = [m[:nb] for m, c in zip(self.basis, self.constrained()) if c]
        extra = set(datum) - set(cons)
        if extra:
            raise ValueError(f"datum indices {sorted(extra)} are not in the basis")
        return np.array([datum.get(b, 0.0) for b in cons], dtype=complex)

    def validate(self, q: QuadratureSpec | None = None) -> None:
        """All basis norms finite at the reference weight (raises :class:`DivergenceError`)."""
        gram_matrix(self, self.t_ref, q)


@dataclass(frozen=True)
class GramMatrix:
    """Gram matrix ``A = D^{1/2} C D^{1/2}`` kept as a unit-diagonal ``C`` and ``ln diag(A)``.

    Monomials far from the weight's bulk have norms below the double range;
    the equilibrated form keeps every solve well scaled.
    """

    basis: tuple[Index, ...]
    corr: np.ndarray
    log_diag: np.ndarray
    t: float | None
    rel_errors: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """The raw Gram matrix (entries may underflow)."""
        r = np.exp(0.5 * self.log_diag)
        return r[:, None] * self.corr * r[None, :]

    @property
    def abs_errors(self) -> np.ndarray:
        r = np.exp(0.5 * self.log_diag)
        return r[:, None] * self.rel_errors * r[None, :]

    @property
    def offdiag_ratio(self) -> float:
        off = np.abs(self.corr)
        np.fill_diagonal(off, 0.0)
        return float(off.max()) if off.size > 1 else 0.0


def _angular(n: int) -> np.ndarray:
    """Trapezoid weights times ``e^{i d theta}`` summed, for ``d`` in ``[-(n-1), n-1]``."""
    theta = TWO_PI * np.arange(n) / n
    d = np.arange(-(n - 1), n)
    return (TWO_PI / n) * np.exp(1j * np.outer(d, theta)).sum(axis=1)


def _gram(indices: Sequence[Index], nb: int, integral, q: QuadratureSpec, what: str):
    """Unit-diagonal Gram ``C``, ``ln`` of the diagonal, and entrywise errors relative to ``D^{1/2}``."""
    n = len(indices)
    ang = _angular(q.angular_nodes)
    off = q.angular_nodes - 1
    logs = np.zeros((n, n))
    angles = np.ones((n, n), dtype=complex)
    rel = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            mi, mj = indices[i], indices[j]
            diff = [a - b for a, b in zip(mi, mj)]
            if max(abs(v) for v in diff) > off:
                raise ValueError("degree difference exceeds the angular rule")
            e = [a + b + 2.0 for a, b in zip(mi, mj)]
            try:
                r = integral(e[:nb], e[nb:])
            except DivergenceError as err:
                raise DivergenceError(f"{what} entry ({mi}, {mj}) diverges: {err}") from err
            angle = np.prod([ang[off + d] for d in diff]) if diff else 1.0
            # A_ij = <e_j, e_i> = int e_j conj(e_i): angular factor uses m_j - m_i
            angles[i, j] = np.conj(angle)
            angles[j, i] = angle
            logs[i, j] = logs[j, i] = r.log_value
            rel[i, j] = rel[j, i] = r.rel_error * abs(angle)
    logd = np.diag(logs) + np.log(np.diag(angles).real)
    lift = logs - 0.5 * (logd[:, None] + logd[None, :])
    scale = np.exp(lift)
    C = angles * scale
    np.fill_diagonal(C, 1.0)
    if not np.all(np.isfinite(C)):
        raise ToricError(f"{what} matrix has non-finite entries")
    return C, logd, rel * scale


def gram_matrix(p: ExtensionProblem, t: float | None, q: QuadratureSpec | None = None,
                integrator: RadialIntegrator | None = None) -> GramMatrix:
    """Gram matrix of the basis under ``phi + psi^t`` (``t=None``: the undeformed weight)."""
    q = q or QuadratureSpec()
    if t is not None and p.family is not None:
        p.family.check_t(float(t))
    integ = integrator or RadialIntegrator(p.model, p.weights_at(t), t, q)
    C, logd, rel = _gram(p.basis, p.model.base_dim, integ.integral, q, "Gram")
    return GramMatrix(p.basis, C, logd, t, rel)


def base_gram(p: ExtensionProblem, q: QuadratureSpec | None = None) -> np.ndarray:
    """Gram matrix of the constrained base monomials on ``Omega'`` under ``e^{-phi}``."""
    q = q or QuadratureSpec()
    nb = p.model.base_dim
    cons = [m[:nb] for m, c in zip(p.basis, p.constrained()) if c]
    integ = RadialIntegrator(p.model, p.weights, None, q)
    C, logd, _ = _gram(cons, nb, lambda eb, ef: integ.slice_integral(eb), q, "base Gram")
    r = np.exp(0.5 * logd)
    return r[:, None] * C * r[None, :]


@dataclass(frozen=True)
class Extension:
    coefficients: dict[Index, complex]
    vector: np.ndarray
    norm_sq: float
    fiber_residual: float


def _schur(A: np.ndarray, c: np.ndarray) -> np.ndarray:
    Acc = A[np.ix_(c, c)]
    if c.all():
        return Acc
    Aff = A[np.ix_(~c, ~c)]
    Acf = A[np.ix_(c, ~c)]
    return Acc - Acf @ np.linalg.solve(Aff, Acf.conj().T)


def min_norm_extension(p: ExtensionProblem, t: float | None = None,
                       q: QuadratureSpec | None = None, gram: GramMatrix | None = None,
                       datum: Mapping[Index, complex] | None = None,
                       check: bool = True) -> Extension:
    """Minimal-norm extension of the datum: KKT solve with the fiber-degree-0 constraints."""
    G = gram or gram_matrix(p, t, q)
    C = G.corr
    c = p.constrained()
    n, m = C.shape[0], int(c.sum())
    # unknowns are y_i = F_i * sqrt(A_ii)
    half = 0.5 * G.log_diag
    E = np.zeros((n, m))
    E[np.flatnonzero(c), np.arange(m)] = 1.0
    K = np.block([[C, E], [E.T, np.zeros((m, m))]])
    rhs = np.concatenate([np.zeros(n), p.datum_vector(datum) * np.exp(half[c])])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as err:  # pragma: no cover - PD Gram makes K nonsingular
        raise ToricError(f"singular constrained system: {err}") from err
    y = sol[:n]
    norm_sq = float(np.real(y.conj() @ C @ y))
    F = y * np.exp(-half)
    # fiber coefficients measured in norm units, relative to the extension's norm
    resid = float(np.max(np.abs(y[~c]))) / math.sqrt(norm_sq) if (~c).any() else 0.0
    if check and G.offdiag_ratio <= DEFAULT_TOL and resid > 1e-10:
        raise ToricError(f"diagonal Gram but fiber coefficients {resid:.3g} != 0")
    coeffs = {m_: complex(v) for m_, v in zip(p.basis, F)}
    return Extension(coeffs, F, norm_sq, resid)


def functional_vector(p: ExtensionProblem, g: Mapping[Index, complex],
                      q: QuadratureSpec | None = None, B: np.ndarray | None = None) -> np.ndarray:
    """``w`` with ``xi_g(F) = w^H F`` on the full basis (zero off fiber degree 0)."""
    B = base_gram(p, q) if B is None else B
    gv = p.datum_vector(g)
    c = p.constrained()
    w = np.zeros(len(p.basis), dtype=complex)
    # B_ab = int z'^b conj(z'^a); xi_g(z'^b) = sum_a conj(g_a) B_ab, so w = B^H g = B g
    w[c] = B @ gv
    return w


def pairing(p: ExtensionProblem, g: Mapping[Index, complex], f: Mapping[Index, complex] | None = None,
            q: QuadratureSpec | None = None, B: np.ndarray | None = None) -> complex:
    """``xi_g(F)`` for any extension ``F`` of ``f``: ``int_{Omega'} f conj(g) e^{-phi}``."""
    w = functional_vector(p, g, q, B)
    c = p.constrained()
    return complex(w[c].conj() @ p.datum_vector(f))


def dual_norm_sq(p: ExtensionProblem, g: Mapping[Index, complex], t: float | None = None,
                 q: QuadratureSpec | None = None, gram: GramMatrix | None = None,
                 B: np.ndarray | None = None) -> float:
    """``||xi_g||_t^2 = w^H A_t^{-1} w``."""
    G = gram or gram_matrix(p, t, q)
    w = functional_vector(p, g, q, B)
    sw = np.exp(-0.5 * G.log_diag) * w
    fac = cho_factor(G.corr)
    return float(np.real(sw.conj() @ cho_solve(fac, sw)))


def extremal_datum(p: ExtensionProblem, t: float | None = None, q: QuadratureSpec | None = None,
                   gram: GramMatrix | None = None, B: np.ndarray | None = None) -> dict[Index, complex]:
    """The ``g`` attaining ``|xi_g(f)|^2 = ||xi_g||^2 * min-norm^2`` (``w`` proportional to ``S f``)."""
    G = gram or gram_matrix(p, t, q)
    B = base_gram(p, q) if B is None else B
    c = p.constrained()
    r = np.exp(0.5 * G.log_diag[c])
    S = r[:, None] * _schur(G.corr, c) * r[None, :]
    gv = np.linalg.solve(B, S @ p.datum_vector())
    nb = p.model.base_dim
    cons = [m[:nb] for m, c in zip(p.basis, p.constrained()) if c]
    return {b: complex(v) for b, v in zip(cons, gv)}


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


def parse_t_grid(spec: str) -> np.ndarray:
    """``"lo:hi:n"`` to a uniform grid."""
    try:
        lo, hi, n = spec.split(":")
        grid = np.linspace(float(lo), float(hi), int(n))
    except ValueError as err:
        raise ValueError(f"t-grid must look like lo:hi:n, got {spec!r}") from err
    if grid.size < 3:
        raise ValueError("t-grid needs at least 3 nodes")
    return grid


def _uniform(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise ValueError("scan grids need at least 3 nodes")
    d = np.diff(t)
    if np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-9 * max(1.0, float(np.max(np.abs(t)))):
        raise ValueError("scan grids must be uniform and increasing")
    return t


@dataclass
class ScanReport:
    """Per-node values, defect statistics and verdict of one scan."""

    kind: str
    t: np.ndarray
    values: np.ndarray
    rescaled: np.ndarray
    defects: np.ndarray
    defect: float
    scale: float
    tol: float
    passed: bool
    failures: dict[int, str] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_json(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "defect": num(self.defect),
            "tolerance": self.tol,
            "scale": self.scale,
            "t": [float(v) for v in self.t],
            "value": [num(v) for v in self.values],
            "rescaled_value": [num(v) for v in self.rescaled],
            "node_defect": [num(v) for v in self.defects],
            "failures": {str(k): v for k, v in self.failures.items()},
            "extras": self.extras,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t", "value", "rescaled_value", "defect"])
        for row in zip(self.t, self.values, self.rescaled, self.defects):
            wr.writerow(["%.17g" % v for v in row])
        return buf.getvalue()

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _node_eval(p: ExtensionProblem, fam: WeightFamily, g, t: float, q, B):
    pt = ExtensionProblem(p.model, p.weights, p.datum, fam, p.basis)
    G = gram_matrix(pt, t, q)
    dual = dual_norm_sq(pt, g, t, q, G, B)
    ext = min_norm_extension(pt, t, q, G)
    return dual, ext.norm_sq


def _evaluate(p, fam, g, t_grid, q):
    t_grid = _uniform(t_grid)
    B = base_gram(p, q)
    duals = np.full(t_grid.shape, np.nan)
    norms = np.full(t_grid.shape, np.nan)
    failures: dict[int, str] = {}
    for i, t in enumerate(t_grid):
        try:
            duals[i], norms[i] = _node_eval(p, fam, g, float(t), q, B)
        except (DivergenceError, DomainError, ToricError, np.linalg.LinAlgError) as err:
            failures[i] = f"{type(err).__name__}: {err}"
    return t_grid, duals, norms, failures


def _second(values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape, np.nan)
    out[1:-1] = values[2:] - 2.0 * values[1:-1] + values[:-2]
    return out


def _first(values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape, np.nan)
    out[1:] = np.diff(values)
    return out


def _verdict(kind, t, vals, rescaled, nodes, failures, tol, extras=None) -> ScanReport:
    fin = vals[np.isfinite(vals)]
    scale = max(1.0, float(np.max(np.abs(fin)))) if fin.size else 1.0
    d = nodes[np.isfinite(nodes)]
    defect = max(0.0, -float(d.min())) if d.size else math.inf
    if failures:
        defect = math.inf
    passed = defect <= tol * scale
    return ScanReport(kind, t, vals, rescaled, nodes, defect, scale, tol, passed,
                      failures, extras or {})


def logconvexity_scan(p: ExtensionProblem, g: Mapping[Index, complex], fam: WeightFamily | None,
                      t_grid, q: QuadratureSpec | None = None, tol: float = DEFAULT_TOL) -> ScanReport:
    """``t -> ln ||xi_g||_t^2`` and its second differences."""
    fam = fam or p.family
    if fam is None:
        raise ValueError("logconvexity_scan needs a weight family")
    t, duals, norms, fails = _evaluate(p, fam, g, t_grid, q or QuadratureSpec())
    vals = np.log(duals)
    rescaled = np.exp(-2.0 * p.k * t) * norms
    return _verdict("logconvexity", t, vals, rescaled, _second(vals), fails, tol)


def rho_scan(p: ExtensionProblem, g: Mapping[Index, complex], sigma, c: float, t_grid,
             q: QuadratureSpec | None = None, tol: float = DEFAULT_TOL) -> ScanReport:
    """``rho_c(t) = ln ||xi_g||_t^2 - 2c(t - 1)`` for the scaling family, with the chord test.

    The chord test checks, at every node in ``[1/2, 1)``,
    ``(rho(1) - rho(t))/(1 - t) >= 2 (rho(1) - rho(1/2))``.
    """
    q = q or QuadratureSpec()
    fam = Scaling(sigma, c)
    t, duals, norms, fails = _evaluate(p, fam, g, t_grid, q)
    if np.any((t <= 0) | (t >= 1)):
        raise DomainError("rho_scan grids must lie inside (0, 1)")
    vals = np.log(duals) - 2.0 * c * (t - 1.0)
    B = base_gram(p, q)
    ln1 = math.log(_node_eval(p, fam, g, 1.0, q, B)[0])
    rho_half = math.log(_node_eval(p, fam, g, 0.5, q, B)[0]) + c
    rhs = 2.0 * (ln1 - rho_half)
    mask = t >= 0.5
    chord = (ln1 - vals[mask]) / (1.0 - t[mask]) - rhs
    scale = max(1.0, abs(rhs))
    chord_defect = max(0.0, -float(chord.min())) if chord.size else 0.0
    rep = _verdict("rho", t, vals, np.exp(-2.0 * p.k * t) * norms, _second(vals), fails, tol,
                   {"c": c, "rho_at_one": ln1, "rho_at_half": rho_half,
                    "chord_defect": chord_defect, "chord_nodes": int(mask.sum())})
    rep.passed = rep.passed and chord_defect <= tol * scale
    return rep


@dataclass
class ProbeReport:
    c: np.ndarray
    rho_half: np.ndarray
    plateau: float
    passed: bool
    failed_at: float | None = None
    message: str = ""

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_json(self) -> dict:
        return {"c": [float(v) for v in self.c],
                "rho_half": [None if not math.isfinite(v) else float(v) for v in self.rho_half],
                "plateau": self.plateau if math.isfinite(self.plateau) else None,
                "verdict": self.verdict, "failed_at": self.failed_at, "message": self.message}


def lemma32_probe(p: ExtensionProblem, g: Mapping[Index, complex], sigma,
                  c_grid: Sequence[float] = (-4.0, -16.0, -64.0, -256.0),
                  q: QuadratureSpec | None = None, plateau_tol: float = 1e-3) -> ProbeReport:
    """``rho_c(1/2) = ln ||xi_g||_{1/2}^2 + c`` along ``c -> -inf``; PASS iff finite and flattening."""
    q = q or QuadratureSpec()
    cs = np.asarray(c_grid, dtype=float)
    vals = np.full(cs.shape, np.nan)
    try:
        B = base_gram(p, q)
    except DivergenceError as err:
        return ProbeReport(cs, vals, math.inf, False, float(cs[0]), str(err))
    for i, c in enumerate(cs):
        try:
            dual, _ = _node_eval(p, Scaling(sigma, float(c)), g, 0.5, q, B)
        except (DivergenceError, ToricError) as err:
            return ProbeReport(cs, vals, math.inf, False, float(c), str(err))
        vals[i] = math.log(dual) + c
    last, prev = vals[-1], vals[-2]
    plateau = float(abs(last - prev) / max(1.0, abs(last)))
    return ProbeReport(cs, vals, plateau, bool(plateau < plateau_tol))


def monotonicity_scan(p: ExtensionProblem, g: Mapping[Index, complex], fam: Translation | None,
                      t_grid, q: QuadratureSpec | None = None, tol: float = DEFAULT_TOL) -> ScanReport:
    """``t -> ln ||xi_g||_t^2 + 2kt`` must be nondecreasing for translation families.

    Also reports the rescaled minimal norms ``e^{-2kt} ||f_t||_t^2`` (which must
    be nonincreasing) and the limit ``sigma_mass * int_{Omega'} |f|^2 e^{-phi}``
    they approach as ``t -> -inf``.
    """
    q = q or QuadratureSpec()
    fam = fam or p.family
    if not isinstance(fam, Translation):
        raise ValueError("monotonicity_scan needs a translation family")
    if fam.k != p.k:
        raise ValueError("translation dimension must equal the fiber dimension")
    t, duals, norms, fails = _evaluate(p, fam, g, t_grid, q)
    k = p.k
    vals = np.log(duals) + 2.0 * k * t
    rescaled = np.exp(-2.0 * k * t) * norms
    limit = _limit_constant(p, fam, q)
    r1 = _first(rescaled)
    fin = rescaled[np.isfinite(rescaled)]
    rscale = float(np.max(np.abs(fin))) if fin.size else 1.0
    resc_defect = max(0.0, float(np.nanmax(r1[1:]))) / rscale if t.size > 1 else 0.0
    extras = {
        "rescaled_increase": resc_defect,
        "limit": limit,
        "left_rescaled": float(rescaled[0]),
        "left_rel_gap": abs(rescaled[0] - limit) / limit if math.isfinite(limit) else None,
    }
    rep = _verdict("monotonicity", t, vals, rescaled, _first(vals), fails, tol, extras)
    rep.passed = rep.passed and resc_defect <= tol
    return rep


def _datum_base_mass(p: ExtensionProblem, q: QuadratureSpec, B: np.ndarray | None = None) -> float:
    B = base_gram(p, q) if B is None else B
    f = p.datum_vector()
    return float(np.real(f.conj() @ B @ f))


def _limit_constant(p: ExtensionProblem, fam: Translation, q: QuadratureSpec) -> float:
    try:
        L = sigma_mass(fam.sigmas, LogDomain.full(p.k), q).value
    except DivergenceError:
        return math.inf
    return L * _datum_base_mass(p, q)


@dataclass(frozen=True)
class EstimateCheck:
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    equality_expected: bool
    sigma_mass: float
    base_mass: float

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "verdict": self.verdict,
                "equality_expected": self.equality_expected, "sigma_mass": self.sigma_mass,
                "base_mass": self.base_mass}


def _reference_sigma(p: ExtensionProblem) -> tuple:
    ws = p.weights if p.weights.fiber is not None else p.weights_at(p.t_ref)
    return tuple(ws.fiber_axis(j, p.t_ref, p.k) for j in range(p.k))


def extension_estimate_check(p: ExtensionProblem, q: QuadratureSpec | None = None,
                             rtol: float = 1e-6) -> EstimateCheck:
    """``||f_ref||^2`` against ``int_{Omega''} e^{-sigma} * int_{Omega'} |f|^2 e^{-phi}``."""
    q = q or QuadratureSpec()
    t_ref = p.t_ref if p.weights.fiber is None else None
    ext = min_norm_extension(p, t_ref, q)
    sig = _reference_sigma(p)
    L = sigma_mass(sig, p.model.fiber_hull(), q).value
    base = _datum_base_mass(p, q)
    rhs = L * base
    lhs = ext.norm_sq
    return EstimateCheck(lhs, rhs, lhs / rhs, lhs <= rhs * (1.0 + rtol), p.model.is_product, L, base)


def j_family_trend(js: Sequence[float] = (4.0, 16.0, 64.0), t: float = -20.0,
                   q: QuadratureSpec | None = None) -> list[dict]:
    """``e^{-t} int_{|w|<1} e^{-j max(ln|w|^2 - t, 0)}`` against ``pi j/(j-1)`` and ``pi``.

    The cut-off weight with parameter ``t`` is the translate by ``t/2`` of
    ``MaxAffine(j)``; the limit ``pi`` as ``j -> inf`` is only observed, not asserted.
    """
    q = q or QuadratureSpec()
    rows = []
    for j in js:
        fam = Translation(MaxAffine(float(j)))
        w = fam.axis_weight(0.5 * t)
        val = sigma_mass((w,), LogDomain.below([0.0]), q).value * math.exp(-t)
        target = math.pi * j / (j - 1.0)
        rows.append({"j": float(j), "value": val, "pi_j_over_j_minus_1": target,
                     "rel_error": abs(val - target) / target,
                     "gap_to_pi": (val - math.pi) / math.pi})
    return rows
