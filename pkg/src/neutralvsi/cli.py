"""Batch front-end: ``neutralvsi verify | list | explain``.

Exit codes: 0 every check passed, 1 a check failed, 2 invalid config,
3 evaluation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import jsonschema

from . import __version__
from . import families as fam
from . import invariants as inv
from . import residuals as res
from . import transforms as tr
from .exprdsl import (
    EMPTY_REGISTRY, Call, DSLError, FunctionRegistry, Sym, as_expr, const_value, parse, substitute,
)
from .jets import JetError
from .laurent import WaveSolveError
from .report import CheckResult, VerificationReport
from .sampling import sample_points
from .tensor import GeometryError, curvature_at, kundt_kinematics, walker_recurrence

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_EVAL = 0, 1, 2, 3

SIMPLE_CHECKS = ("vacuum", "einstein", "vsi-battery", "csi", "kundt", "walker", "nilpotency",
                 "vsi-precondition", "frame")

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["family", "checks"],
    "additionalProperties": False,
    "properties": {
        "family": {"type": "string"},
        "params": {"type": "object"},
        "bindings": {"type": "object", "additionalProperties": {"type": ["string", "number"]}},
        "functions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "args", "body"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "args": {"type": "array", "items": {"type": "string"}},
                    "body": {"type": "string"},
                    "antiderivatives": {"type": "object", "additionalProperties": {"type": "string"}},
                },
            },
        },
        "antiderivatives": {"type": "object", "additionalProperties": {"type": "string"}},
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "string", "enum": list(SIMPLE_CHECKS)},
                    {
                        "type": "object", "required": ["residual"], "additionalProperties": False,
                        "properties": {"residual": {"type": "string", "enum": list(res.SYSTEM_IDS)},
                                       "variant": {"enum": ["printed", "corrected"]},
                                       "extra": {"type": "object"}},
                    },
                    {
                        "type": "object", "required": ["transform"], "additionalProperties": False,
                        "properties": {"transform": {
                            "type": "object", "required": ["kind", "generator"], "additionalProperties": False,
                            "properties": {"kind": {"enum": list(tr.KINDS)},
                                           "generator": {"type": "string"},
                                           "inverse": {"type": "string"},
                                           "laws": {"enum": list(tr.LAWS)}}}},
                    },
                    {
                        "type": "object", "required": ["einstein"], "additionalProperties": False,
                        "properties": {"einstein": {"type": "object", "additionalProperties": False,
                                                    "properties": {"lambda": {"type": ["string", "number"]}}}},
                    },
                ]
            },
        },
        "sample": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "box": {"type": "object", "additionalProperties": {
                    "type": "array", "minItems": 2, "maxItems": 2, "items": {"type": ["string", "number"]}}},
            },
        },
        "order": {"type": "integer", "minimum": 2, "maximum": 6},
        "mode": {"enum": ["float", "rational"]},
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
}

EXPLAIN = {
    "vacuum": "Ricci-flatness: max |R_ab| over the sample points; exact zero in rational mode.",
    "einstein": "Einstein condition: max |R_ab - (R/4) g_ab|, reporting Lambda = R/4 per point; "
                "an optional expected Lambda is also enforced.",
    "vsi-battery": "All nine scalar invariants vanish at every point: " +
                   ", ".join(f"{k} = {v}" for k, v in inv.DESCRIPTIONS.items()) + ".",
    "csi": "Constant scalar invariants: for each of the nine invariants the spread max - min across the "
           "points is below tol (1 + |mean|); rational mode requires zero spread.",
    "kundt": "Optical scalars of l1 (the first frame covector): geodesic residual l^b l_a;b, expansion "
             "l^a_;a, shear and twist norms of the transverse projection of l_a;b.",
    "walker": "Recurrence of the null bivector F = l1 ^ l2: F_ab;c = F_ab k_c for some recurrence vector k. "
              "k is extracted by least squares and the residual compared with 1e-9 |F|.",
    "nilpotency": "Boost-weight blocks of the frame Riemann tensor: the 2x2 matrices a and s, with a "
                  "transverse index raised, must be nilpotent (zero trace and determinant) and the "
                  "transverse component R_2323 and sigma = R_0101 must vanish.",
    "vsi-precondition": "d^2 W_A / dv^2 = 0 and sigma = R_0101 = 0 at each point.",
    "frame": "The family's null frame is orthonormal in the split sense: Gram matrix equal to eta.",
}
for _sid in res.SYSTEM_IDS:
    EXPLAIN[_sid] = (f"Residual system {_sid}: pointwise residuals of the transcribed PDEs, "
                     "available in 'printed' and 'corrected' variants.")
for _k in tr.KINDS:
    EXPLAIN[_k] = (f"Transformation {_k}: pulls the metric back through the coordinate map with jet "
                   "Jacobians and compares with the metric built from the transformed parameters; the "
                   "nine invariants are compared at corresponding points.")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# family construction


_SLOT_CHARTS = {("st_vsi_solution", "beta"): ("u", "A"), ("st_vsi_solution", "gamma"): ("u", "B")}
_LITERAL_KEYS = {"variant", "eps"}


def _registry(functions) -> FunctionRegistry:
    reg = EMPTY_REGISTRY
    for f in functions or ():
        reg = reg.define(f["name"], f["args"], f["body"])
        for wrt, F in (f.get("antiderivatives") or {}).items():
            reg = reg.with_antiderivative(f["name"], wrt, F)
    return reg


def _family_chart(name: str):
    if name in fam.CATALOG:
        return fam.CATALOG[name].chart
    return {"special_vsi": fam.NULL_CHART, "kaigorodov": fam.CSI1_CHART, "csi1_solved": fam.CSI1_CHART,
            "csi2_solved": fam.CSI2_CHART, "csi2_simple": fam.CSI2_CHART}[name]


def _parse_value(v, chart, reg, params):
    if isinstance(v, list):
        return [_parse_value(x, chart, reg, params) for x in v]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return as_expr(Fraction(str(v)))
    if isinstance(v, str):
        return parse(v, chart, reg, params=params)
    raise ConfigError(f"unsupported parameter value {v!r}")


def _resolver(reg: FunctionRegistry, supplied: Mapping, chart, params):
    """Slot resolver: explicit entries, then registered antiderivatives of single calls."""
    explicit = {k: parse(v, chart, reg, params=params) for k, v in (supplied or {}).items()}

    def resolve(slot, resolved):
        if slot.name in explicit:
            return explicit[slot.name]
        e = slot.integrand(resolved)
        if isinstance(e, Call):
            fn = e.fn
            for a, arg in zip(fn.args, e.args):
                if arg == Sym(slot.wrt) and (fn.name, a) in reg.antiderivatives:
                    F = reg.antiderivatives[(fn.name, a)]
                    return substitute(F, dict(zip(fn.args, e.args)))
        return None

    return resolve


def build_family(cfg: Mapping):
    name = cfg["family"]
    if name not in fam.CATALOG and name not in fam.PRESETS:
        raise ConfigError(f"family: unknown family {name!r}")
    bindings = {k: Fraction(str(v)) for k, v in (cfg.get("bindings") or {}).items()}
    reg = _registry(cfg.get("functions"))
    chart = _family_chart(name).names
    pnames = tuple(bindings)
    raw = dict(cfg.get("params") or {})
    args = {}
    for k, v in raw.items():
        if k in _LITERAL_KEYS:
            args[k] = v
        else:
            try:
                args[k] = _parse_value(v, _SLOT_CHARTS.get((name, k), chart), reg, pnames)
            except DSLError as exc:
                raise ConfigError(f"params.{k}: {exc}") from exc
    anti = _resolver(reg, cfg.get("antiderivatives"), chart, pnames)
    try:
        return _construct(name, args, bindings, anti)
    except TypeError as exc:
        raise ConfigError(f"params: {exc}") from exc


def _construct(name, a, bindings, anti):
    b = bindings or None
    if name == "flat":
        return fam.flat()
    if name == "kundt":
        return fam.kundt(a["H"], tuple(a["W"]), a.get("gAB"), bindings=b)
    if name in ("walker_rank2", "walker_rank1"):
        return fam.walker_canonical(a["B"], a.get("H_i"), a.get("A_ij"), bindings=b)
    if name == "null_vsi":
        return fam.null_vsi(fam.NullVsiParams(**a), bindings=b)
    if name == "st_vsi":
        return fam.st_vsi(fam.StVsiParams(**a), bindings=b)
    if name == "csi1":
        return fam.csi1(fam.Csi1Params(**a), bindings=b)
    if name == "csi2":
        return fam.csi2(fam.Csi2Params(**a), bindings=b)
    if name == "null_vsi_branchA":
        return fam.null_vsi_solution_branchA(**a, antiderivatives=anti, bindings=b)
    if name == "null_vsi_branchB":
        return fam.null_vsi_solution_branchB(**a, antiderivatives=anti, bindings=b)
    if name == "st_vsi_solution":
        return fam.st_vsi_solution(**a, bindings=b)
    if name == "special_vsi":
        return fam.special_vsi(**a)
    consts = {k: (v if k == "variant" else _num(v)) for k, v in a.items()}
    if name == "kaigorodov":
        return fam.kaigorodov(**consts)
    if name == "csi1_solved":
        return fam.csi1_solved(**consts)
    return fam.csi2_solved(**consts, preset=name)


def _num(e):
    v = const_value(e)
    if v is None:
        raise ConfigError(f"expected a numeric constant, got {e}")
    return v


# ---------------------------------------------------------------------------
# checks


def _small(x, tol, mode):
    return x == 0 if mode == "rational" else abs(float(x)) < tol


def run_check(check, m, points, mode, order, tol) -> CheckResult:
    if isinstance(check, dict) and "residual" in check:
        variant = check.get("variant", "printed")
        r = res.evaluate(check["residual"], m, points, mode, variant, check.get("extra"))
        name = f"{check['residual']}[{variant}]"
        return CheckResult(name, r.passed(None if mode == "rational" else tol), r.worst(),
                           {"per_equation": r.max_residual})
    if isinstance(check, dict) and "transform" in check:
        t = check["transform"]
        spec = tr.TransformSpec(t["kind"], t["generator"], t.get("inverse"), t.get("laws", "printed"))
        rep = tr.verify_form_preservation(m, spec, points, mode)
        return CheckResult(f"{spec.kind}[{spec.laws}]", rep.passed(None if mode == "rational" else tol),
                           rep.max_discrepancy, {"battery_max_change": rep.battery_max_change,
                                                 "per_point": rep.per_point})
    if isinstance(check, dict) and "einstein" in check:
        lam = check["einstein"].get("lambda")
        lam = None if lam is None else Fraction(str(lam))
        if mode == "float" and lam is not None:
            lam = float(lam)
        v = inv.einstein_check(m, points, mode, tol, lam)
        return CheckResult("einstein", v.passed, v.details["max_residual"], v.details)
    if check == "vacuum":
        worst = res.max_ricci(m, points, mode)
        return CheckResult("vacuum", _small(worst, tol, mode), worst)
    if check == "einstein":
        v = inv.einstein_check(m, points, mode, tol)
        return CheckResult("einstein", v.passed, v.details["max_residual"], v.details)
    if check == "vsi-battery":
        v = inv.vsi_verdict(m, points, mode, order, tol)
        return CheckResult("vsi-battery", v.passed, v.details["max_abs"], v.details)
    if check == "csi":
        v = inv.csi_verdict(m, points, mode, order)
        spread = max((s["spread"] for s in v.details["invariants"].values() if s), default=0.0)
        return CheckResult("csi", v.passed, spread, v.details)
    if check == "vsi-precondition":
        v = inv.vsi_precondition_check(m, points, mode, tol)
        return CheckResult("vsi-precondition", v.passed,
                           max(v.details["W_vv"]["max"], v.details["sigma"]["max"]), v.details)
    if check == "frame":
        v = inv.frame_check(m, points, mode)
        return CheckResult("frame", v.passed, v.details["max_deviation"])
    if m.frame is None:
        raise GeometryError(f"check {check!r} needs a null frame on family {m.family!r}")
    l1, l2 = m.frame.covectors[0], m.frame.covectors[2]
    if check == "kundt":
        worst, ok = 0.0, True
        for p in points:
            for k, v in kundt_kinematics(m, l1, p, mode).residuals().items():
                worst = max(worst, abs(float(v)))
                ok &= _small(v, tol, mode)
        return CheckResult("kundt", ok, worst)
    if check == "walker":
        rs = [walker_recurrence(m, l1, l2, p, mode) for p in points]
        return CheckResult("walker", all(r.passed for r in rs), max(float(r.residual) for r in rs))
    if check == "nilpotency":
        ok, worst = True, 0.0
        for p in points:
            bw = inv.boost_weight_matrices(curvature_at(m, p, 2, mode), m)
            v = inv.nilpotency_check(bw, None if mode == "rational" else tol)
            ok &= v["passed"]
            worst = max(worst, *(abs(float(v[k][q])) for k in ("a", "s") for q in ("trace", "det")),
                        abs(float(v["Rt"]["value"])), abs(float(v["sigma"]["value"])))
        return CheckResult("nilpotency", ok, worst)
    raise ConfigError(f"checks: unknown check {check!r}")


def _check_box(box, admitted, names):
    out = {}
    for n in names:
        lo, hi = (Fraction(str(x)) for x in box.get(n, admitted.get(n, fam.UNIT_BOX)))
        alo, ahi = (Fraction(x) for x in admitted.get(n, (lo, hi)))
        if not (alo <= lo < hi <= ahi):
            raise ConfigError(f"sample.box.{n}: [{lo}, {hi}] is outside the admitted region [{alo}, {ahi}]")
        out[n] = (lo, hi)
    return out


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc


def run(cfg: Mapping, overrides: Mapping | None = None) -> VerificationReport:
    cfg = dict(cfg)
    validate_config(cfg)
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}
    sample = dict(cfg.get("sample") or {})
    mode = ov.get("mode", cfg.get("mode", "float"))
    order = ov.get("order", cfg.get("order", 3))
    tol = ov.get("tol", cfg.get("tol", 1e-9))
    seed = ov.get("seed", sample.get("seed", 0))
    count = ov.get("points", sample.get("count", 8))
    try:
        m = build_family(cfg)
    except (fam.FamilyError, DSLError, KeyError) as exc:
        raise ConfigError(f"params: {exc}") from exc
    box = _check_box(sample.get("box") or {}, m.box or {}, m.chart.names)
    points = sample_points(box, m.chart.names, count, seed, mode)
    rep = VerificationReport(m.family, mode, order, seed, tol, points)
    for check in cfg["checks"]:
        try:
            rep.add(run_check(check, m, points, mode, order, tol))
        except ConfigError:
            raise
        except (GeometryError, JetError, ArithmeticError, DSLError, WaveSolveError, ValueError) as exc:
            name = check if isinstance(check, str) else json.dumps(check, sort_keys=True)
            rep.add(CheckResult(name, False, None, {}, f"{type(exc).__name__}: {exc}"))
    return rep


# ---------------------------------------------------------------------------
# entry point


def list_families() -> dict:
    return {
        "families": {k: {"slots": list(v.slots), "chart": list(v.chart.names), "description": v.description,
                         "presets": list(v.presets)} for k, v in fam.CATALOG.items()},
        "presets": sorted(fam.PRESETS),
    }


def explain(check_id: str) -> str:
    try:
        return EXPLAIN[check_id]
    except KeyError:
        raise KeyError(f"unknown check id {check_id!r}; known: {', '.join(sorted(EXPLAIN))}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neutralvsi", description="Curvature checks for neutral-signature "
                                 "Kundt, VSI and CSI metrics.")
    ap.add_argument("--version", action="version", version=f"neutralvsi {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run the checks of a JSON config")
    v.add_argument("config")
    v.add_argument("--seed", type=int)
    v.add_argument("--mode", choices=("float", "rational"))
    v.add_argument("--order", type=int)
    v.add_argument("--points", type=int)
    v.add_argument("--report", help="write the JSON report here")
    v.add_argument("--tol", type=float)
    sub.add_parser("list", help="list families and presets")
    e = sub.add_parser("explain", help="describe a check")
    e.add_argument("check_id")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(json.dumps(list_families(), indent=2, sort_keys=True) + "\n")
        return EXIT_PASS
    if args.command == "explain":
        try:
            sys.stdout.write(explain(args.check_id) + "\n")
        except KeyError as exc:
            sys.stderr.write(f"error: {exc.args[0]}\n")
            return EXIT_CONFIG
        return EXIT_PASS
    try:
        cfg = load_config(args.config)
        rep = run(cfg, {"seed": args.seed, "mode": args.mode, "order": args.order,
                        "points": args.points, "tol": args.tol})
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    if args.report:
        Path(args.report).write_text(rep.to_json())
    sys.stdout.write(rep.to_text())
    if rep.errored:
        return EXIT_EVAL
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
