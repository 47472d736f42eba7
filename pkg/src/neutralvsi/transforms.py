"""Coordinate transformations of the Kundt families and their component laws.

Two law sets are available for every kind.  ``"printed"`` applies the
reference primed-component lists verbatim; ``"corrected"`` applies the laws
obtained by pulling the metric back through the coordinate map.  The
pullback check in :func:`verify_form_preservation` does not depend on either
law set and arbitrates between them.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import jets
from .exprdsl import (
    ZERO, Expr, Sym, as_expr, const_value, diff, eval_jets, evaluate, free_symbols, has_transcendental,
    parse, substitute,
)
from .families import (
    CSI2_BOX, CSI2_CHART, NULL_CHART, ST_BOX, ST_CHART, UNIT_BOX, Csi2Params, FamilyError, MissingAntiderivativeError,
    NullVsiParams, StVsiParams, box_points, csi2, null_vsi, st_vsi,
)
from .invariants import BATTERY, battery_at
from .laurent import NotLaurentError, as_lpoly, antiderivative
from .tensor import MetricInstance

KINDS = ("null-shift", "null-rescale", "st-shift", "st-rescale", "csi2-shift")
LAWS = ("printed", "corrected")

_FAMILY = {
    "null-shift": NullVsiParams, "null-rescale": NullVsiParams,
    "st-shift": StVsiParams, "st-rescale": StVsiParams,
    "csi2-shift": Csi2Params,
}
_CHART = {NullVsiParams: NULL_CHART, StVsiParams: ST_CHART, Csi2Params: CSI2_CHART}
_BOX = {NullVsiParams: {n: UNIT_BOX for n in NULL_CHART.names}, StVsiParams: ST_BOX, Csi2Params: CSI2_BOX}
# (null coordinate v, retarded coordinate u, allowed generator arguments)
_SHIFT_ARGS = {
    "null-shift": ("v1", "u1", ("u1", "u2", "v2")),
    "st-shift": ("v", "u", ("u", "X", "T")),
    "csi2-shift": ("v", "u", ("u", "U", "V")),
}
_RESCALE_ARGS = {"null-rescale": ("v1", "u1"), "st-rescale": ("v", "u")}


class TransformError(ValueError):
    pass


class IncompatibleTransform(TransformError):
    pass


class SingularJacobian(TransformError, ArithmeticError):
    pass


@dataclass(frozen=True)
class TransformSpec:
    """A shift v -> v + h(...) or a rescale (u, v) -> (g(u), v / g'(u)).

    ``inverse`` is g^{-1} written in the same variable; affine g gets one
    automatically.
    """

    kind: str
    generator: Expr
    inverse: Expr | None = None
    laws: str = "printed"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TransformError(f"unknown transform kind {self.kind!r}; expected one of {KINDS}")
        if self.laws not in LAWS:
            raise TransformError(f"unknown law set {self.laws!r}")
        chart = _CHART[_FAMILY[self.kind]].names
        gen = parse(self.generator, chart) if isinstance(self.generator, str) else as_expr(self.generator)
        if self.kind in _SHIFT_ARGS:
            allowed = _SHIFT_ARGS[self.kind][2]
        else:
            allowed = (_RESCALE_ARGS[self.kind][1],)
        extra = free_symbols(gen) - set(allowed)
        if extra:
            raise TransformError(f"generator of {self.kind} may depend only on {allowed}, found {sorted(extra)}")
        object.__setattr__(self, "generator", gen)
        if self.is_rescale:
            u = _RESCALE_ARGS[self.kind][1]
            if const_value(diff(gen, u)) == 0:
                raise SingularJacobian("g' vanishes identically")
            inv = self.inverse
            if inv is None:
                inv = _affine_inverse(gen, u)
            elif isinstance(inv, str):
                inv = parse(inv, chart)
            object.__setattr__(self, "inverse", as_expr(inv))

    @property
    def is_rescale(self) -> bool:
        return self.kind in _RESCALE_ARGS

    def with_laws(self, laws: str) -> "TransformSpec":
        return replace(self, laws=laws)


def _affine_inverse(g: Expr, u: str) -> Expr:
    try:
        lp = as_lpoly(g, (u,))
    except NotLaurentError:
        lp = None
    if lp is None or lp.degree(u)[0] < 0 or lp.degree(u)[1] > 1:
        raise TransformError("a non-affine rescale needs an explicit inverse")
    a = lp.terms.get((1,), Fraction(0))
    b = lp.terms.get((0,), Fraction(0))
    return (as_expr(u) - b) / a


def identity(kind: str) -> TransformSpec:
    if kind in _RESCALE_ARGS:
        return TransformSpec(kind, as_expr(_RESCALE_ARGS[kind][1]))
    return TransformSpec(kind, ZERO)


def mobius(kind: str, a, b, c, d, laws: str = "printed") -> TransformSpec:
    """Rescale with g(u) = (a u + b) / (c u + d) and its exact inverse."""
    if a * d - b * c == 0:
        raise SingularJacobian("degenerate Mobius map")
    u = as_expr(_RESCALE_ARGS[kind][1])
    g = (a * u + b) / (c * u + d)
    ginv = (d * u - b) / (a - c * u)
    return TransformSpec(kind, g, ginv, laws)


# ---------------------------------------------------------------------------
# component laws


def _check_family(p, t: TransformSpec):
    want = _FAMILY[t.kind]
    if not isinstance(p, want):
        raise IncompatibleTransform(f"{t.kind} applies to {want.__name__}, got {type(p).__name__}")


def _null_shift(p: NullVsiParams, h: Expr, laws: str) -> NullVsiParams:
    # both law sets coincide here
    return NullVsiParams(
        W1=p.W1,
        WU=p.WU - h * p.W1 - diff(h, "u2"),
        WV=p.WV - diff(h, "v2"),
        H1=p.H1,
        H0=p.H0 - h * p.H1 - diff(h, "u1"),
    )


def _null_rescale(p: NullVsiParams, g: Expr, laws: str) -> NullVsiParams:
    g1 = diff(g, "u1")
    g2 = diff(g1, "u1")
    H1 = (p.H1 + g2) / (g1 * g1) if laws == "printed" else (g1 * p.H1 + g2) / (g1 * g1)
    return NullVsiParams(W1=p.W1, WU=p.WU / g1, WV=p.WV / g1, H1=H1, H0=p.H0 / (g1 * g1))


def _st_shift(p: StVsiParams, h: Expr, laws: str) -> StVsiParams:
    W1 = p.W1
    if laws == "printed":
        H1 = p.H1 * (1 - h * W1 * W1 / 4)
    else:
        H1 = p.H1 - h * W1 * W1 / 4
    return replace(
        p,
        H1=H1,
        H0=p.H0 - h * p.H1 - diff(h, "u") + (h * W1) * (h * W1) / 8,
        WX=p.WX - h * W1 - diff(h, "X"),
        WT=p.WT - diff(h, "T"),
    )


def _st_rescale(p: StVsiParams, g: Expr, laws: str) -> StVsiParams:
    g1 = diff(g, "u")
    g2 = diff(g1, "u")
    out = replace(p, H1=(g1 * p.H1 + g2) / (g1 * g1), H0=p.H0 / (g1 * g1), WX=p.WX / g1, WT=p.WT / g1)
    if laws == "printed":
        out = replace(out, w1=p.W1 / g1)
    return out


def _csi2_shift(p: Csi2Params, h: Expr, laws: str) -> Csi2Params:
    V = Sym("V")
    hu, hU, hV = diff(h, "u"), diff(h, "U"), diff(h, "V")
    BV2 = p.B * V * V
    if laws == "printed":
        wbar = -2 * h / V + p.WV - hV
        return replace(p, H0=p.H0 - h * p.H1 - hu, WV=wbar, WU=p.WU - hU + BV2 * hV)
    return replace(
        p,
        H1=p.H1 - 2 * p.A * h,
        H0=p.H0 - h * p.H1 + p.A * h * h - hu,
        WV=p.WV - p.alpha * h / V - hV,
        WU=p.WU - p.beta * V * h - hU + BV2 * hV,
    )


_LAWS = {
    "null-shift": _null_shift, "null-rescale": _null_rescale,
    "st-shift": _st_shift, "st-rescale": _st_rescale, "csi2-shift": _csi2_shift,
}


def _to_primed(p, t: TransformSpec):
    """Rewrite component functions of u in terms of u' = g(u)."""
    if not t.is_rescale:
        return p
    u = _RESCALE_ARGS[t.kind][1]
    sub = {u: t.inverse}
    names = ("W1", "WU", "WV", "H1", "H0") if isinstance(p, NullVsiParams) else ("WX", "WT", "H1", "H0")
    kw = {n: substitute(getattr(p, n), sub) for n in names}
    if isinstance(p, StVsiParams) and p.w1 is not None:
        kw["w1"] = substitute(p.w1, sub)
    return replace(p, **kw)


def transform_params(p, t: TransformSpec):
    """Primed parameter set, as functions of the primed coordinates."""
    if isinstance(p, MetricInstance):
        p = p.params
    _check_family(p, t)
    return _to_primed(_LAWS[t.kind](p, t.generator, t.laws), t)


def coordinate_map(t: TransformSpec) -> tuple:
    """Primed coordinates as expressions of the unprimed chart, in chart order."""
    chart = _CHART[_FAMILY[t.kind]].names
    out = {n: Sym(n) for n in chart}
    if t.is_rescale:
        v, u = _RESCALE_ARGS[t.kind]
        out[u] = t.generator
        out[v] = Sym(v) / diff(t.generator, u)
    else:
        v = _SHIFT_ARGS[t.kind][0]
        out[v] = Sym(v) + t.generator
    return tuple(out[n] for n in chart)


def build(p, bindings: Mapping | None = None, family: str | None = None) -> MetricInstance:
    if isinstance(p, NullVsiParams):
        return null_vsi(p, bindings, family or "null_vsi")
    if isinstance(p, StVsiParams):
        return st_vsi(p, bindings, family or "st_vsi")
    if isinstance(p, Csi2Params):
        return csi2(p, bindings, family or "csi2")
    raise IncompatibleTransform(f"no transform acts on {type(p).__name__}")


def apply(m: MetricInstance, t: TransformSpec) -> MetricInstance:
    return build(transform_params(m.params, t), m.bindings, f"{m.family}'")


# ---------------------------------------------------------------------------
# verification


@dataclass
class FormReport:
    kind: str
    laws: str
    max_discrepancy: float
    exact_zero: bool
    battery_max_change: float | None
    points: list = field(default_factory=list)
    per_point: list = field(default_factory=list)

    def passed(self, tol: float | None = 1e-10) -> bool:
        ok = self.exact_zero if tol is None else self.max_discrepancy < tol
        if self.battery_max_change is not None:
            ok = ok and (self.battery_max_change == 0 if tol is None else self.battery_max_change < tol)
        return ok


def _map_jets(t: TransformSpec, m: MetricInstance, point: Mapping, mode: str):
    arr = eval_jets(list(coordinate_map(t)), point, 1, mode, m.bindings, m.chart.names)
    idx = jets._index(1)
    J = np.empty((4, 4), dtype=arr.dtype)
    for c in range(4):
        mono = [0] * 4
        mono[c] = 1
        J[:, c] = arr[:, idx[tuple(mono)]]
    return arr[:, 0], J


def pullback_discrepancy(m: MetricInstance, m2: MetricInstance, t: TransformSpec, point, mode: str = "float"):
    """max |g(x) - J^T g'(phi(x)) J| and the image point."""
    x = m.chart.point(point)
    try:
        img, J = _map_jets(t, m, x, mode)
    except jets.JetDomainError as exc:
        raise SingularJacobian(f"coordinate map is singular at {x}: {exc}") from exc
    det = jets.coerce(0, mode)
    if mode == "float":
        det = np.linalg.det(J.astype(float))
        if abs(det) < 1e-14:
            raise SingularJacobian(f"Jacobian is singular at {x}")
    else:
        from .tensor import exact_inverse
        try:
            exact_inverse(J)
        except (ZeroDivisionError, ArithmeticError) as exc:
            raise SingularJacobian(f"Jacobian is singular at {x}") from exc
    image = dict(zip(m.chart.names, img))
    g = m.metric_jets(x, 0, mode)[..., 0]
    g2 = m2.metric_jets(image, 0, mode)[..., 0]
    D = g - J.T @ g2 @ J
    return D, image


def verify_form_preservation(p, t: TransformSpec, points: Sequence, mode: str = "float",
                             battery: bool = True, bindings: Mapping | None = None) -> FormReport:
    """Pull the original metric back through the map and compare with the primed metric."""
    m = p if isinstance(p, MetricInstance) else build(p, bindings)
    m2 = build(transform_params(m.params, t), m.bindings, f"{m.family}'")
    worst, exact = 0.0, True
    bworst = 0.0 if battery else None
    rows, used = [], []
    for pt in points:
        D, image = pullback_discrepancy(m, m2, t, pt, mode)
        d = max(abs(float(x)) for x in D.ravel())
        exact &= all(x == 0 for x in D.ravel())
        worst = max(worst, d)
        row = {"discrepancy": d}
        if battery:
            b1 = battery_at(m, m.chart.point(pt), 3, mode)
            b2 = battery_at(m2, image, 3, mode)
            ch = max(abs(float(b1[k] - b2[k])) for k in BATTERY)
            bworst = max(bworst, ch)
            row["battery_change"] = ch
        rows.append(row)
        used.append({k: str(v) for k, v in m.chart.point(pt).items()})
    return FormReport(t.kind, t.laws, worst, bool(exact), bworst, used, rows)


# ---------------------------------------------------------------------------
# composition and gauge fixing


def compose(t1: TransformSpec, t2: TransformSpec) -> TransformSpec:
    """The single transform equal to t1 followed by t2 (same kind)."""
    if t1.kind != t2.kind:
        raise TransformError("only transforms of one kind compose here")
    if not t1.is_rescale:
        return TransformSpec(t1.kind, t1.generator + t2.generator, laws=t1.laws)
    u = _RESCALE_ARGS[t1.kind][1]
    g = substitute(t2.generator, {u: t1.generator})
    ginv = substitute(t1.inverse, {u: t2.inverse})
    return TransformSpec(t1.kind, g, ginv, t1.laws)


GAUGE_TARGETS = {
    NullVsiParams: ("WV", "eps"),
    StVsiParams: ("WT",),
    Csi2Params: ("WV",),
}


def _integrate(e: Expr, wrt: str, chart, bindings, supplied):
    if supplied is not None:
        return parse(supplied, chart) if isinstance(supplied, str) else as_expr(supplied)
    try:
        return antiderivative(e, wrt, chart, bindings)
    except NotLaurentError as exc:
        raise MissingAntiderivativeError(
            f"no antiderivative registered for {wrt}-integral and none could be built: {exc}") from exc


def gauge_fix(p, target: str, antiderivative=None, laws: str = "printed", bindings: Mapping | None = None,
              eps=None, g=None, g_inverse=None):
    """Zero one gauge-reachable component; returns (params, TransformSpec).

    ``antiderivative`` is the caller's h; otherwise it is built when the
    integrand is a Laurent polynomial.  The ``"eps"`` target of the null
    family takes a rescale ``g`` with g'' = -eps g' and its inverse.
    """
    if isinstance(p, MetricInstance):
        bindings = bindings or p.bindings
        p = p.params
    allowed = GAUGE_TARGETS.get(type(p))
    if allowed is None or target not in allowed:
        raise IncompatibleTransform(f"target {target!r} is not gauge-reachable for {type(p).__name__}")
    bindings = dict(bindings or {})
    if target == "eps":
        if eps is None or g is None:
            raise MissingAntiderivativeError("the eps gauge needs eps and a rescale g with g'' = -eps g'")
        t = TransformSpec("null-rescale", g, g_inverse, laws)
        e = parse(eps, NULL_CHART.names) if isinstance(eps, str) else as_expr(eps)
        g1 = diff(t.generator, "u1")
        if _not_zero(diff(g1, "u1") + e * g1, bindings, p):
            raise FamilyError("the supplied g does not satisfy g'' = -eps g'")
        return transform_params(p, t), t
    if isinstance(p, NullVsiParams):
        kind, wrt, integrand = "null-shift", "v2", p.WV
    elif isinstance(p, StVsiParams):
        kind, wrt, integrand = "st-shift", "T", p.WT
    else:
        kind, wrt = "csi2-shift", "V"
        # h solves h_V + (alpha / V) h = W_V (printed law: h_V + 2 h / V = W_V)
        integrand = p.WV
    if const_value(integrand) == 0:
        return p, identity(kind)
    chart = _CHART[type(p)].names
    if kind == "csi2-shift":
        if laws == "printed":
            pw = 2
        else:
            a = const_value(p.alpha)
            if a is None:
                raise FamilyError("the csi2 gauge needs a numeric alpha")
            pw = a
            if pw.denominator != 1:
                raise FamilyError("alpha must be an integer for the Laurent gauge solve")
            pw = int(pw)
        V = Sym("V")
        # integrating factor V^pw: h = V^-pw * int V^pw W_V dV
        h = _integrate(V ** pw * integrand if pw >= 0 else integrand / V ** (-pw), wrt, chart, bindings,
                       antiderivative)
        h = h / V ** pw if pw >= 0 else h * V ** (-pw)
    else:
        h = _integrate(integrand, wrt, chart, bindings, antiderivative)
    t = TransformSpec(kind, h, laws=laws)
    out = transform_params(p, t)
    if _not_zero(getattr(out, target), bindings, p):
        raise MissingAntiderivativeError(f"the supplied generator does not zero {target}")
    return out, t


def _not_zero(e: Expr, bindings: Mapping | None, p) -> bool:
    """Zero test at a few interior points of the family box; exact unless e is transcendental."""
    chart = _CHART[type(p)]
    arith = "float" if has_transcendental(e) else "fraction"
    for pt in box_points(_BOX[type(p)], chart.names):
        val = evaluate(e, pt, bindings, arith)
        if (abs(val) > 1e-10) if arith == "float" else (val != 0):
            return True
    return False
