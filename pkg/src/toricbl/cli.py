"""Command line front end: ``toricbl <command> --config PATH --out DIR``.

Exit codes: 0 when every gated verdict passes, 1 on a violation, 2 on a
configuration error.  CSV files carry a header row and floats with 17
significant digits; JSON is written with sorted keys so identical configs
give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import bl_verifier as blv
from .convex_core import conjugation_tolerance, default_dual_grid, lf_transform
from .errors import ConfigError, DivergenceError, StencilError, ToricError
from .geodesic import (
    conjugate_affinity_defect,
    family_eval,
    joint_convexity_defect,
    ma_residual,
)
from .quadrature import QuadratureSpec, integrate_log
from .reinhardt_l2 import LogDomain, sigma_mass
from .serialization import (
    datum_from_json,
    domain_from_json,
    family_from_json,
    grid_from_json,
    load_json,
    problem_from_json,
    quadrature_from_json,
    weight_from_json,
)
from .weights import sample

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def shipped_configs() -> list[str]:
    root = resources.files("toricbl") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def resolve_config(name: str) -> Path:
    """A filesystem path, or the name of a shipped config (with or without ``.json``)."""
    p = Path(name)
    if p.is_file():
        return p
    fname = name if name.endswith(".json") else name + ".json"
    shipped = resources.files("toricbl") / "configs" / fname
    if shipped.is_file():
        return Path(str(shipped))
    raise ConfigError(f"config {name!r} not found (shipped: {', '.join(shipped_configs())})")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else None))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_conjugate(cfg: dict, args) -> int:
    w = weight_from_json(cfg.get("weight"))
    if w is None:
        raise ConfigError("conjugate needs a 'weight'")
    primal = grid_from_json(cfg.get("primal_grid", {"lo": -10, "hi": 10, "n": 20001}), "primal_grid")
    f = sample(w, primal)
    dual = grid_from_json(cfg["dual_grid"], "dual_grid") if "dual_grid" in cfg else default_dual_grid(f)
    res = lf_transform(f, dual)
    step = float(np.max(np.diff(primal)))
    xs, fs = f.window_nodes, f.window_values
    lip = float(np.max(np.abs(np.diff(fs) / np.diff(xs)))) if xs.size > 1 else 0.0
    tol = np.array([conjugation_tolerance(step, abs(xi) + lip) for xi in dual])
    amx = np.where(res.argmax >= 0, primal[np.maximum(res.argmax, 0)], np.nan)
    write_csv(args.out / "conjugate.csv", ["xi", "value", "argmax_x", "tolerance"],
              zip(dual, res.values, amx, tol))
    write_json(args.out / "conjugate.json", {
        "weight": w.to_json(),
        "primal_grid": {"lo": primal[0], "hi": primal[-1], "n": primal.size},
        "tolerance_rule": "10 * primal_step * max(1, |xi| + Lip)",
        "xi": dual, "value": res.values, "argmax_index": res.argmax, "argmax_x": amx,
        "tolerance": tol,
    })
    return EXIT_OK


def cmd_geodesic_eval(cfg: dict, args) -> int:
    fam = family_from_json(cfg.get("family"))
    if fam is None:
        raise ConfigError("geodesic-eval needs a 'family'")
    t_grid = args.t_grid if args.t_grid is not None else grid_from_json(cfg.get("t_grid", "0.2:1:9"))
    x_grid = grid_from_json(cfg.get("x_grid", "-2:0:21"), "x_grid")
    rows = [(t, x, family_eval(fam, float(t), [x])) for t in t_grid for x in x_grid]
    write_csv(args.out / "geodesic.csv", ["t", "x", "value"], rows)
    summary: dict[str, Any] = {"family": fam.to_json(), "n_values": len(rows)}
    if "dual_grid" in cfg:
        base = grid_from_json(cfg.get("base_grid", "-12:3:15001"), "base_grid")
        summary["affinity_defect"] = conjugate_affinity_defect(
            fam, t_grid, grid_from_json(cfg["dual_grid"], "dual_grid"), base)
    write_json(args.out / "geodesic.json", summary)
    return EXIT_OK


def _ma_points(cfg: dict, seed: int) -> np.ndarray:
    if "points" in cfg:
        return np.array(cfg["points"], dtype=float)
    r = cfg.get("random", {"n": 100, "t": [0.3, 0.9], "x": [-1.5, -0.5]})
    rng = np.random.default_rng(seed)
    n = int(r.get("n", 100))
    return np.column_stack([rng.uniform(*r["t"], n), rng.uniform(*r["x"], n)])


def ma_scan(fam, pts: np.ndarray, h: float) -> list[tuple]:
    rows = []
    for t, *x in pts:
        try:
            rows.append((t, *x, ma_residual(fam, float(t), x, h), ""))
        except StencilError as err:
            rows.append((t, *x, math.nan, str(err)))
    return rows


def cmd_ma_scan(cfg: dict, args) -> int:
    fam = family_from_json(cfg.get("family"))
    if fam is None:
        raise ConfigError("ma-scan needs a 'family'")
    h = float(cfg.get("h", 1e-4))
    tol = float(cfg.get("tol", 1e-6))
    pts = _ma_points(cfg, args.seed)
    rows = ma_scan(fam, pts, h)
    xs = [f"x{j}" for j in range(pts.shape[1] - 1)]
    write_csv(args.out / "ma_scan.csv", ["t", *xs, "residual", "note"], rows)
    res = np.array([r[-2] for r in rows])
    worst = float(np.nanmax(np.abs(res))) if np.any(np.isfinite(res)) else math.nan
    ok = bool(np.all(np.isfinite(res)) and worst <= tol)
    write_json(args.out / "ma_scan.json", {"family": fam.to_json(), "h": h, "tol": tol,
                                           "max_abs_residual": worst, "seed": args.seed,
                                           "verdict": "PASS" if ok else "FAIL"})
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_sigma_mass(cfg: dict, args) -> int:
    sig = cfg.get("sigma")
    sigma = tuple(weight_from_json(s) for s in sig) if isinstance(sig, list) else weight_from_json(sig)
    dom = domain_from_json(cfg["domain"]) if "domain" in cfg else LogDomain.full(1)
    q = quadrature_from_json(cfg.get("quadrature"))
    try:
        r = sigma_mass(sigma, dom, q)
    except DivergenceError as err:
        write_json(args.out / "sigma_mass.json", {"value": "inf", "error": str(err)})
        return EXIT_VIOLATION
    rec = r.to_json()
    write_json(args.out / "sigma_mass.json", rec)
    write_csv(args.out / "sigma_mass.csv", ["value", "abs_error_estimate", "panels"],
              [(r.value, r.abs_error, r.panels)])
    return EXIT_OK


def _raw_sigma(variant: str, alpha: float) -> Callable:
    if variant == "exp_scaled":
        # clipped so that alpha = 0 gives 0 rather than 0 * inf
        return lambda x: alpha * np.exp(np.minimum(2.0 * x, 700.0))
    return lambda x: (1.0 + alpha) * np.logaddexp(0.0, 2.0 * x)


def reproduce_constants(alphas: Sequence[float], q: QuadratureSpec | None = None) -> list[dict]:
    """``L`` for both named weights per alpha; nonpositive alphas are integrated raw (divergent)."""
    q = q or QuadratureSpec()
    rows = []
    for variant in ("exp_scaled", "log_one_plus_exp"):
        for a in alphas:
            s = _raw_sigma(variant, float(a))
            target = math.pi / a if a > 0 else math.inf
            try:
                r = integrate_log(lambda x, s=s: 2.0 * x - s(x), -math.inf, math.inf, q)
                L = 2.0 * math.pi * r.value
                rows.append({"variant": variant, "alpha": float(a), "L": L, "pi_over_alpha": target,
                             "rel_error": abs(L - target) / target, "status": "ok"})
            except DivergenceError:
                rows.append({"variant": variant, "alpha": float(a), "L": math.inf,
                             "pi_over_alpha": target, "rel_error": math.nan, "status": "divergent"})
    return rows


def cmd_reproduce_constants(cfg: dict, args) -> int:
    alphas = args.alphas if args.alphas is not None else cfg.get("alphas", [0.5, 1.0, 2.0])
    rows = reproduce_constants([float(a) for a in alphas], quadrature_from_json(cfg.get("quadrature")))
    cols = ["variant", "alpha", "L", "pi_over_alpha", "rel_error", "status"]
    if args.format == "json":
        write_json(args.out / "constants.json", rows)
    else:
        write_csv(args.out / "constants.csv", cols, [[r[c] for c in cols] for r in rows])
    ok = all(r["rel_error"] <= 1e-6 for r in rows if r["status"] == "ok")
    return EXIT_OK if ok else EXIT_VIOLATION


# verify ----------------------------------------------------------------


def _emit_scan(rep: blv.ScanReport, name: str, args) -> None:
    if args.format == "json":
        (args.out / f"{name}.json").write_text(rep.to_json_str() + "\n", encoding="utf-8")
    else:
        (args.out / f"{name}.csv").write_text(rep.to_csv(), encoding="utf-8")


def run_verify(cfg: dict, args) -> tuple[list[dict], int]:
    q = quadrature_from_json(cfg.get("quadrature"))
    p = problem_from_json(cfg.get("problem") or {})
    checks = cfg.get("checks", {})
    if not isinstance(checks, dict) or not checks:
        raise ConfigError("verify config needs a nonempty 'checks' object")
    results: list[dict] = []

    def grid_of(spec: dict, default: str) -> np.ndarray:
        if args.t_grid is not None:
            return args.t_grid
        return grid_from_json(spec.get("t_grid", default), "t_grid")

    def g_of(spec: dict) -> dict:
        return datum_from_json(spec["g"]) if "g" in spec else dict(p.datum)

    for name, spec in checks.items():
        spec = spec or {}
        gate = bool(spec.get("gate", True))
        rec: dict[str, Any] = {"check": name, "gated": gate}
        try:
            if name == "affinity":
                fam = family_from_json(spec["family"]) if "family" in spec else p.family
                tol = float(spec.get("tol", 1e-8))
                d = conjugate_affinity_defect(
                    fam, grid_of(spec, "0.2:1:9"),
                    grid_from_json(spec.get("dual_grid", "0:8:801"), "dual_grid"),
                    grid_from_json(spec.get("base_grid", "-12:3:15001"), "base_grid"))
                rec.update(defect=d, tol=tol, passed=d <= tol)
            elif name == "ma":
                fam = family_from_json(spec["family"]) if "family" in spec else p.family
                tol = float(spec.get("tol", 1e-6))
                rows = ma_scan(fam, _ma_points(spec, args.seed), float(spec.get("h", 1e-4)))
                res = np.array([r[-2] for r in rows])
                worst = float(np.max(np.abs(res)))
                rec.update(max_abs_residual=worst, tol=tol, seed=args.seed,
                           passed=bool(np.all(np.isfinite(res)) and worst <= tol))
            elif name == "joint_convexity":
                fam = family_from_json(spec["family"]) if "family" in spec else p.family
                tol = float(spec.get("tol", 1e-8))
                d = joint_convexity_defect(fam, grid_of(spec, "0.3:0.9:7"),
                                           grid_from_json(spec.get("x_grid", "-2:0:21"), "x_grid"))
                rec.update(defect=d, tol=tol, passed=d <= tol)
            elif name == "logconvexity":
                rep = blv.logconvexity_scan(p, g_of(spec), None, grid_of(spec, "-6:0:33"), q)
                _emit_scan(rep, "logconvexity", args)
                rec.update(defect=rep.defect, tol=rep.tol, scale=rep.scale, passed=rep.passed)
            elif name == "monotonicity":
                rep = blv.monotonicity_scan(p, g_of(spec), None, grid_of(spec, "-8:0:33"), q)
                _emit_scan(rep, "monotonicity", args)
                rec.update(defect=rep.defect, tol=rep.tol, scale=rep.scale, passed=rep.passed,
                           **rep.extras)
            elif name == "rho":
                sigma = weight_from_json(spec["sigma"]) if "sigma" in spec else p.family.sigma
                rep = blv.rho_scan(p, g_of(spec), sigma, float(spec.get("c", -2.0)),
                                   grid_of(spec, "0.5:0.95:33"), q)
                _emit_scan(rep, "rho", args)
                rec.update(defect=rep.defect, tol=rep.tol, scale=rep.scale, passed=rep.passed,
                           **rep.extras)
            elif name == "lemma32":
                sigma = weight_from_json(spec["sigma"]) if "sigma" in spec else p.family.sigma
                pr = blv.lemma32_probe(p, g_of(spec), sigma,
                                       spec.get("c_grid", [-4.0, -16.0, -64.0, -256.0]), q)
                rec.update(pr.to_json(), passed=pr.passed, tol=1e-3)
            elif name == "estimate":
                est = blv.extension_estimate_check(p, q)
                eq_tol = float(spec.get("equality_tol", 1e-4))
                passed = est.passed
                if spec.get("expect_equality", est.equality_expected):
                    passed = passed and abs(est.ratio - 1.0) <= eq_tol
                rec.update(est.to_json(), equality_tol=eq_tol, passed=passed)
            else:
                raise ConfigError(f"unknown check {name!r}")
        except (KeyError, TypeError, AttributeError) as err:
            raise ConfigError(f"check {name!r}: malformed spec ({err})") from err
        except ToricError as err:
            if isinstance(err, ConfigError):
                raise
            rec.update(passed=False, error=f"{type(err).__name__}: {err}")
        rec["verdict"] = "PASS" if rec["passed"] else "FAIL"
        results.append(rec)
    code = EXIT_OK if all(r["passed"] for r in results if r["gated"]) else EXIT_VIOLATION
    return results, code


def cmd_verify(cfg: dict, args) -> int:
    results, code = run_verify(cfg, args)
    write_json(args.out / "verify.json", {"name": cfg.get("name"), "checks": results,
                                          "exit_code": code})
    for r in results:
        print(f"{r['verdict']}  {r['check']}{'' if r['gated'] else ' (not gated)'}")
    return code


COMMANDS: dict[str, Callable[[dict, argparse.Namespace], int]] = {
    "conjugate": cmd_conjugate,
    "geodesic-eval": cmd_geodesic_eval,
    "ma-scan": cmd_ma_scan,
    "sigma-mass": cmd_sigma_mass,
    "verify": cmd_verify,
    "reproduce-constants": cmd_reproduce_constants,
}


def _t_grid(s: str) -> np.ndarray:
    try:
        return blv.parse_t_grid(s)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toricbl", description="Toric weak geodesics and L2-extension checks.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="config path or shipped config name")
    ap.add_argument("--out", default="toricbl_out", help="output directory")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--t-grid", type=_t_grid, default=None, help="override scan grids, lo:hi:n")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized sample points")
    ap.add_argument("--alphas", type=lambda s: [float(v) for v in s.split(",")], default=None,
                    help="comma-separated alphas for reproduce-constants")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.config is not None:
            cfg = load_json(resolve_config(args.config))
            if not isinstance(cfg, dict):
                raise ConfigError("config must be a JSON object")
        elif args.command == "reproduce-constants":
            cfg = {}
        else:
            raise ConfigError(f"{args.command} needs --config")
        args.out = Path(args.out)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as err:
        print(f"config error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
