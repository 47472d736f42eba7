"""Pointwise residuals of the vacuum and Einstein PDE systems of each family.

Fields are expanded as jets at the sample point and the equations are then
plain jet arithmetic, so no symbolic differentiation happens here.  Each
system comes in a ``printed`` variant, transcribed term by term from the
reference equations, and a ``corrected`` variant that agrees with the Ricci
tensor of the family metric.  Both variants are registered even where they coincide.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import jets
from .exprdsl import Expr, as_expr, eval_jets
from .families import _e, Csi1Params, Csi2Params, NullVsiParams, StVsiParams
from .jets import japply, jmul, jpartial, jtruncate, order_of
from .tensor import MetricInstance, curvature_at

HALF = Fraction(1, 2)


class ResidualError(ValueError):
    pass


class FamilyMismatch(ResidualError):
    pass


class FJ:
    """Jet value that truncates to the lower order when combined."""

    __slots__ = ("c",)

    def __init__(self, c: np.ndarray):
        self.c = c

    @property
    def order(self):
        return order_of(self.c)

    @property
    def value(self):
        return self.c[0]

    def _pair(self, other):
        if isinstance(other, FJ):
            k = min(self.order, other.order)
            return jtruncate(self.c, k), jtruncate(other.c, k)
        o = np.zeros_like(self.c)
        o[0] = jets.coerce(other, "rational" if self.c.dtype == object else "float")
        return self.c, o

    def __add__(self, other):
        a, b = self._pair(other)
        return FJ(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        return FJ(a - b)

    def __rsub__(self, other):
        a, b = self._pair(other)
        return FJ(b - a)

    def __neg__(self):
        return FJ(-self.c)

    def __mul__(self, other):
        if not isinstance(other, FJ):
            mode = "rational" if self.c.dtype == object else "float"
            return FJ(self.c * jets.coerce(other, mode))
        a, b = self._pair(other)
        return FJ(jmul(a, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, FJ):
            mode = "rational" if self.c.dtype == object else "float"
            return FJ(self.c * (1 / jets.coerce(other, mode)))
        a, b = self._pair(other)
        return FJ(jmul(a, japply(b, "recip")))

    def __rtruediv__(self, other):
        return FJ(japply(self.c, "recip")) * other

    def __pow__(self, n: int):
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def d(self, axis: int) -> "FJ":
        return FJ(jpartial(self.c, axis))


class Fields:
    """Jets of named fields and coordinates at one point."""

    def __init__(self, exprs: Mapping[str, Expr], point: Mapping, chart: Sequence[str], order: int,
                 mode: str, bindings: Mapping | None = None, constants: Mapping | None = None):
        self.chart = tuple(chart)
        self.mode = mode
        names = list(exprs)
        coords = [as_expr(n) for n in self.chart]
        arr = eval_jets([exprs[n] for n in names] + coords, point, order, mode, bindings, self.chart)
        self._f = {n: FJ(arr[i]) for i, n in enumerate(names)}
        self._x = {n: FJ(arr[len(names) + i]) for i, n in enumerate(self.chart)}
        self.const = {k: jets.coerce(Fraction(v), mode) for k, v in (constants or {}).items()}
        self._cache: dict = {}

    def __call__(self, name: str, *wrt: str) -> FJ:
        key = (name, wrt)
        if key not in self._cache:
            if name not in self._f:
                raise ResidualError(f"field {name!r} is not defined; supply it via extra")
            out = self._f[name]
            for w in wrt:
                out = out.d(self.chart.index(w))
            self._cache[key] = out
        return self._cache[key]

    def x(self, name: str) -> FJ:
        return self._x[name]

    def d(self, value: FJ, *wrt: str) -> FJ:
        for w in wrt:
            value = value.d(self.chart.index(w))
        return value

    def exp(self, a: FJ) -> FJ:
        if self.mode == "rational":
            raise jets.RationalModeError("exp is not available in rational mode")
        return FJ(japply(a.c, "exp"))

    def c(self, name: str):
        if name not in self.const:
            raise ResidualError(f"constant {name!r} is not defined; supply it via extra")
        return self.const[name]


# ---------------------------------------------------------------------------
# null family


def _fourth(f: Fields, corrected: bool) -> FJ:
    v1 = f.x("v1")
    W1, WU, WV, H1, H0 = (f(n) for n in ("W1", "WU", "WV", "H1", "H0"))
    d = f
    quad = 2 * WV * (d("H1", "u2") if corrected else d("WV", "u2"))
    return (v1 * (W1 * d("H1", "v2") - 2 * d("H1", "v2", "u2"))
            - 2 * d("H0", "v2", "u2") - W1 * d("H0", "v2") + 2 * WU * d("H1", "v2")
            + H1 * d("WV", "u2") + H1 * d("WU", "v2") + W1 * WV * d("WU", "v2")
            + quad + d("WV", "u1", "u2") - WV * d("W1", "u1")
            + d("WU", "u1", "v2") - HALF * (W1 * WV) ** 2 - W1 * WV * d("WV", "u2")
            + d("WU", "v2") * d("WV", "u2") - HALF * d("WU", "v2") ** 2 - HALF * d("WV", "u2") ** 2)


def _second(f: Fields) -> FJ:
    return (f("H1", "v2") - HALF * f("W1") * f("WV", "v2") + HALF * f("WU", "v2", "v2")
            - HALF * f("WV", "v2", "u2"))


def _third(f: Fields) -> FJ:
    # the W1 inside the u2-derivative is the family's single W1 component
    W1, WV = f("W1"), f("WV")
    return (-HALF * f("W1", "u1") + f("H1", "u2") - HALF * WV * W1 * W1 + HALF * W1 * f("WU", "v2")
            + HALF * WV * f("W1", "u2") - HALF * f("WU", "v2", "u2") + HALF * f("WV", "u2", "u2"))


def _splurge(f: Fields) -> FJ:
    return f("W1", "u2") - HALF * f("W1") * f("W1")


# ---------------------------------------------------------------------------
# spacelike/timelike family (eps = 1, W_T = 0)


def _adam1(f: Fields) -> FJ:
    X = f.x("X")
    return 2 * X * X * f("H1", "T") + f.d(X * X * f("WX", "T"), "X")


def _adam_bracket(f: Fields) -> FJ:
    X = f.x("X")
    return 2 * X * X * f("H1", "X") - 2 * f("WX")


def _adam2(f: Fields) -> FJ:
    X = f.x("X")
    return 2 * X * X * f("H1", "T", "T") - f.d(_adam_bracket(f), "X")


def _adam3(f: Fields) -> FJ:
    X = f.x("X")
    return X * X * f("WX", "T", "T") + _adam_bracket(f)


def _adam4(f: Fields) -> FJ:
    X = f.x("X")
    X2 = X * X
    WX, H1, H0 = f("WX"), f("H1"), f("H0")
    lhs = 2 * X2 * f("H0", "X", "X") - 4 * X * f("H0", "X") + 4 * H0 - 2 * X2 * f("H0", "T", "T")
    rhs = (WX * _adam_bracket(f) + 2 * X2 * WX * f("H1", "X") + 2 * X2 * H1 * f("WX", "X")
           - X2 * f("WX", "T") ** 2 + 2 * X2 * f("WX", "u", "X"))
    return lhs - rhs


def _st_concise(f: Fields) -> FJ:
    X = f.x("X")
    P = f("H0") / X
    WX, H1 = f("WX"), f("H1")
    lhs = f.d(P, "X", "X") - f.d(P, "T", "T")
    rhs = (f("WX", "u", "X") + f.d(WX * H1, "X") - f.d(WX * WX, "T", "T") * Fraction(1, 4)) / X
    return lhs - rhs


# ---------------------------------------------------------------------------
# first CSI family (A = -2K, B = 0, sigma = 0)


def _csi1_exps(f: Fields):
    KX = f.x("X") * f.c("K")
    e1 = f.exp(KX)
    return e1, e1 * e1


def _big_de(f: Fields, corrected: bool, drop_v: bool = False) -> FJ:
    K = f.c("K")
    v = 0 if drop_v else f.x("v")
    e1, e2 = _csi1_exps(f)
    H1, H0, WX, WT = f("H1"), f("H0"), f("WX"), f("WT")
    d = f
    out = (4 * d("H1", "X") * WX * e2 + 2 * K * e2 * d("H0", "X")
           + 4 * K * K * e2 * H0
           + 2 * d("WT", "X") * e1 * d("WX", "T")
           + 2 * K * e2 * d("WX", "u") - WT * WT * K * K * e2
           - 2 * v * d("H1", "X", "X") * e2 + 2 * d("WT", "X") * e2 * WT * K
           - 6 * K * e2 * v * d("H1", "X") + 2 * K * e2 * H1 * WX
           - 2 * WT * K * e1 * d("WX", "T")
           + 2 * H1 * d("WX", "X") * e2 - 4 * d("H1", "T") * WT * e1
           - 2 * H1 * d("WT", "T") * e1
           - 2 * d("WT", "u", "T") * e1 + 2 * v * d("H1", "T", "T")
           + 2 * d("H0", "T", "T") - d("WX", "T") ** 2
           + 2 * d("WX", "u", "X") * e2)
    if corrected:
        out = out - 2 * e2 * d("H0", "X", "X") - e2 * d("WT", "X") ** 2
    else:
        out = out + 2 * d("WT", "X") - d("WT", "X") ** 2 - d("H0", "X", "X") * e2
    return out


def _de2(f: Fields) -> FJ:
    K = f.c("K")
    e1, _ = _csi1_exps(f)
    return (2 * f("H1", "T") - K * f("WT", "X") * e1 + 2 * f("WT") * K * K * e1 + K * f("WX", "T")
            - f("WT", "X", "X") * e1 + f("WX", "X", "T"))


def _de3(f: Fields) -> FJ:
    K = f.c("K")
    e1, e2 = _csi1_exps(f)
    return 2 * f("H1", "X") * e2 - f("WT", "X", "T") * e1 + f("WT", "T") * K * e1 + f("WX", "T", "T")


def _vdep(f: Fields) -> FJ:
    K = f.c("K")
    _, e2 = _csi1_exps(f)
    return -2 * f("H1", "X", "X") * e2 - 6 * K * e2 * f("H1", "X") + 2 * f("H1", "T", "T")


def _const(f: Fields) -> FJ:
    K, C3 = f.c("K"), f.c("C3")
    em2 = f.exp(-2 * K * f.x("X"))
    return 2 * C3 * K * (1 - em2)


def _csi1_h0_printed(f: Fields) -> FJ:
    K, C1, C2 = f.c("K"), f.c("C1"), f.c("C2")
    T = f.x("T")
    e1, e2 = _csi1_exps(f)
    ab, ab_X, al, J, H0 = f("abar"), f("abar", "X"), f("alpha"), f("J"), f("H0")
    return (2 * C2 * K * K * e2 * ab + 2 * C2 * K * e2 * ab_X - 2 * K * e2 * ab_X * ab
            - C2 * K * e2 * al + K * e2 * al * ab - C1 * C1 * K * K * e2 * T * T
            - C1 * C1 + 2 * C1 * K * K * e2 * ab * T + 2 * C1 * K * e2 * ab_X * T - C1 * K * e2 * al * T
            - 2 * C1 * C2 * K * K * e2 * T - e2 * ab_X * ab_X
            - 2 * e1 * J - 2 * K * e2 * ab - K * K * e2 * ab * ab
            - C2 * C2 * K * K * e2 + e2 * ab_X * al + 2 * f("H0", "T", "T") - 2 * e2 * f("H0", "X", "X")
            + 2 * K * e2 * f("H0", "X") + 4 * K * K * e2 * H0)


# ---------------------------------------------------------------------------
# second CSI family (A = 0, alpha = -2, beta = 2B)


def _last_big(f: Fields, corrected: bool, drop_v: bool = False) -> FJ:
    B = f.c("B")
    V = f.x("V")
    v = 0 if drop_v else f.x("v")
    V2 = V * V
    V3 = V2 * V
    V4 = V2 * V2
    H1, H0, wu, wv = f("H1"), f("H0"), f("WU"), f("WV")
    d = f
    sq = V2 * d("WV", "U") ** 2 if corrected else d("WV", "U") ** 2
    return (-4 * B * V4 * d("H0", "V", "V") + 4 * v * d("H1", "V", "U") * V2 + 2 * B * V4 * d("WV", "u", "V")
            - 4 * B * V4 * v * d("H1", "V", "V") - 16 * B * V3 * v * d("H1", "V") + 2 * H1 * V4 * B * d("WV", "V")
            + 4 * B * V3 * H1 * wv + 2 * d("WU", "V") * V4 * B * d("WV", "V") - 4 * B * V3 * d("WV", "V") * wu
            - 2 * B * V4 * d("WV", "V") * d("WV", "U") + 4 * B * V4 * d("H1", "V") * wv + 4 * V * v * d("H1", "U")
            + 8 * B * V2 * H0 - 2 * H1 * V2 * d("WU", "V") - 2 * H1 * V2 * d("WV", "U") + 4 * B * V3 * d("WV", "u")
            - 4 * d("H1", "V") * V2 * wu - 4 * d("H1", "U") * wv * V2 - 4 * d("WU", "V") * V * wu
            - 2 * d("WU", "V") * V2 * d("WV", "U") + B * B * V4 * V2 * d("WV", "V") ** 2 + 4 * wu * d("WV", "U") * V
            + d("WU", "V") ** 2 * V2 - 4 * V * d("H0", "U") + sq + 4 * wu * wu
            - 2 * d("WV", "u", "U") * V2 - 2 * d("WU", "u", "V") * V2 + 4 * d("H0", "V", "U") * V2)


def _last_de1(f: Fields, corrected: bool) -> FJ:
    B = f.c("B")
    V = f.x("V")
    V2 = V * V
    V3 = V2 * V
    k = 2 if corrected else 1
    return (2 * f("H1", "U") * V - 2 * f("H1", "V") * B * V3 + 4 * B * B * V2 * V2 * f("WV", "V")
            - 2 * B * V * f("WU") - k * f("WV", "U") * B * V2 - f("WU", "V", "U") * V
            - 2 * B * V3 * f("WV", "V", "U") + 2 * f("WU", "U") + f("WV", "U", "U") * V
            + B * V3 * f("WU", "V", "V") + B * B * V2 * V3 * f("WV", "V", "V"))


def _last_de2(f: Fields) -> FJ:
    B = f.c("B")
    V = f.x("V")
    V2 = V * V
    return (4 * B * V2 * V * f("WV", "V") - 2 * f("WU") - 2 * f("WV", "U") * V + 2 * f("H1", "V") * V2
            + f("WU", "V", "V") * V2 + B * V2 * V2 * f("WV", "V", "V") - f("WV", "V", "U") * V2)


def _last_vdep(f: Fields) -> FJ:
    B = f.c("B")
    V = f.x("V")
    V2 = V * V
    return (4 * f("H1", "V", "U") * V2 - 4 * B * V2 * V2 * f("H1", "V", "V") - 16 * B * V2 * V * f("H1", "V")
            + 4 * V * f("H1", "U"))


def _csi2_h0_printed(f: Fields) -> FJ:
    B = f.c("B")
    U, V = f.x("U"), f.x("V")
    V2 = V * V
    V3 = V2 * V
    al, be, ga, de = f("alpha"), f("beta"), f("gamma"), f("delta")
    w = -4 * B * be * U + de
    P1 = -w / V2 + 2 * V * ga - 3 * be / V3
    Q1 = w / V + V2 * ga + 3 * be / (2 * V2)
    # "d beta / dU" in the last group is taken as the u-derivative
    P1u = -(-4 * B * f("beta", "u") * U + f("delta", "u")) / V2 + 2 * V * f("gamma", "u") - 3 * f("beta", "u") / V3
    return (-4 * B * V2 * f("H0", "V", "V") + 8 * B * V2 * f("H0") - 2 * (al + be / V3) * V2 * P1
            + 12 * be * Q1 / V2 + 4 * f("H0", "V", "U") * V2
            - 4 * P1 * V * Q1 + V2 * P1 * P1 - 2 * V2 * P1u)


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class Equation:
    name: str
    fn: Callable[[Fields], FJ]


@dataclass(frozen=True)
class ResidualSystem:
    id: str
    variant: str
    equations: tuple
    order: int
    chart: tuple
    fields: Callable
    constants: Callable = lambda m, extra: {}
    note: str = ""


def _null_fields(m: MetricInstance, extra):
    p = m.params
    if not isinstance(p, NullVsiParams):
        raise FamilyMismatch(f"null-vacuum needs a null-family metric, got {m.family!r}")
    return {"W1": p.W1, "WU": p.WU, "WV": p.WV, "H1": p.H1, "H0": p.H0}


def _st_fields(m: MetricInstance, extra):
    p = m.params
    if not isinstance(p, StVsiParams):
        raise FamilyMismatch(f"st-vacuum needs a spacelike/timelike metric, got {m.family!r}")
    if p.eps != 1 or p.WT != as_expr(0) or p.w1 is not None:
        raise FamilyMismatch("the st-vacuum equations assume eps = 1 and W_T = 0")
    return {"H1": p.H1, "WX": p.WX, "H0": p.H0}


def _csi1_fields(m: MetricInstance, extra):
    p = m.params
    if not isinstance(p, Csi1Params):
        raise FamilyMismatch(f"csi1 systems need a csi1 metric, got {m.family!r}")
    out = {"H1": p.H1, "H0": p.H0, "WX": p.WX, "WT": p.WT}
    out.update({k: _e(v, ST) for k, v in (extra or {}).items() if k in ("alpha", "abar", "J")})
    return out


def _csi1_consts(m: MetricInstance, extra):
    from .families import _const_of
    from .exprdsl import const_value
    p = m.params
    K = _const_of(p.K, m.bindings)
    A, B, sig = (const_value(x) for x in (p.A, p.B, p.sigma))
    if K is None or A != -2 * K or B != 0 or sig != 0:
        raise FamilyMismatch("csi1 systems assume A = -2K, B = 0, sigma = 0 with numeric K")
    out = {"K": K}
    out.update({k: Fraction(v) for k, v in (extra or {}).items() if k in ("C1", "C2", "C3")})
    return out


def _csi2_fields(m: MetricInstance, extra):
    p = m.params
    if not isinstance(p, Csi2Params):
        raise FamilyMismatch(f"csi2 systems need a csi2 metric, got {m.family!r}")
    out = {"H1": p.H1, "H0": p.H0, "WU": p.WU, "WV": p.WV}
    out.update({k: _e(v, CSI2) for k, v in (extra or {}).items() if k in ("alpha", "beta", "gamma", "delta")})
    return out


def _csi2_consts(m: MetricInstance, extra):
    from .families import _const_of
    from .exprdsl import const_value
    p = m.params
    B = _const_of(p.B, m.bindings)
    if B is None or const_value(p.A) != 0 or const_value(p.alpha) != -2 or const_value(p.beta) != 2 * B:
        raise FamilyMismatch("csi2 systems assume A = 0, alpha = -2, beta = 2B with numeric B")
    return {"B": B}


NULL = ("v1", "u1", "v2", "u2")
ST = ("v", "u", "X", "T")
CSI2 = ("v", "u", "U", "V")


def _systems():
    out = {}

    def put(s):
        out[(s.id, s.variant)] = s

    for variant in ("printed", "corrected"):
        corr = variant == "corrected"
        put(ResidualSystem("null-vacuum", variant, (
            Equation("fourthDE", lambda f, c=corr: _fourth(f, c)),
            Equation("second", _second),
            Equation("third", _third),
            Equation("splurge", _splurge),
        ), 2, NULL, _null_fields))
        put(ResidualSystem("st-vacuum", variant, (
            Equation("adam1", _adam1), Equation("adam2", _adam2),
            Equation("adam3", _adam3), Equation("adam4", _adam4),
        ), 2, ST, _st_fields))
        put(ResidualSystem("st-H0", variant, (Equation("concise", _st_concise),), 2, ST, _st_fields))
        put(ResidualSystem("csi1-einstein", variant, (
            Equation("bigDE", lambda f, c=corr: _big_de(f, c)),
            Equation("DE2", _de2), Equation("DE3", _de3), Equation("vDEP", _vdep),
        ), 2, ST, _csi1_fields, _csi1_consts))
        put(ResidualSystem("csi2-einstein", variant, (
            Equation("lastBigDE", lambda f, c=corr: _last_big(f, c)),
            Equation("lastDE1", lambda f, c=corr: _last_de1(f, c)),
            Equation("lastDE2", _last_de2), Equation("lastVDEP", _last_vdep),
        ), 2, CSI2, _csi2_fields, _csi2_consts))
        put(ResidualSystem("constraints", variant, (
            Equation("vDEP", _vdep), Equation("CONST", _const),
        ), 2, ST, _csi1_fields, _csi1_consts))
    put(ResidualSystem("csi1-H0", "printed", (Equation("H0-ODE", _csi1_h0_printed),), 2, ST,
                       _csi1_fields, _csi1_consts,
                       "needs extra fields alpha, abar, J and constants C1, C2"))
    put(ResidualSystem("csi1-H0", "corrected", (
        Equation("H0-ODE", lambda f: _big_de(f, True, drop_v=True)),), 2, ST, _csi1_fields, _csi1_consts))
    put(ResidualSystem("csi2-H0", "printed", (Equation("H0-ODE", _csi2_h0_printed),), 2, CSI2,
                       _csi2_fields, _csi2_consts, "needs extra fields alpha, beta, gamma, delta"))
    put(ResidualSystem("csi2-H0", "corrected", (
        Equation("H0-ODE", lambda f: _last_big(f, True, drop_v=True)),), 2, CSI2, _csi2_fields, _csi2_consts))
    return out


SYSTEMS = _systems()
SYSTEM_IDS = tuple(sorted({k[0] for k in SYSTEMS}))


def get_system(system_id: str, variant: str = "printed") -> ResidualSystem:
    try:
        return SYSTEMS[(system_id, variant)]
    except KeyError:
        raise ResidualError(f"unknown residual system {system_id!r} / variant {variant!r}") from None


@dataclass
class SystemResult:
    system: str
    variant: str
    max_residual: dict
    values: list = field(default_factory=list)

    def worst(self) -> float:
        return max(self.max_residual.values(), default=0.0)

    def passed(self, tol: float | None) -> bool:
        if tol is None:
            return all(all(v == 0 for v in row.values()) for row in self.values)
        return self.worst() < tol


def evaluate(system: ResidualSystem | str, m: MetricInstance, points: Sequence, mode: str = "float",
             variant: str = "printed", extra: Mapping | None = None, order: int | None = None) -> SystemResult:
    """Per-equation max |residual| over ``points``."""
    if isinstance(system, str):
        system = get_system(system, variant)
    if tuple(m.chart.names) != system.chart:
        raise FamilyMismatch(f"system {system.id!r} expects chart {system.chart}, got {m.chart.names}")
    exprs = system.fields(m, extra)
    consts = system.constants(m, extra)
    order = order or system.order
    worst = {e.name: 0.0 for e in system.equations}
    rows = []
    for p in points:
        f = Fields(exprs, m.chart.point(p), system.chart, order, mode, m.bindings, consts)
        row = {}
        for eq in system.equations:
            val = eq.fn(f)
            val = val.value if isinstance(val, FJ) else val
            row[eq.name] = val
            worst[eq.name] = max(worst[eq.name], abs(float(val)))
        rows.append(row)
    return SystemResult(system.id, system.variant, worst, rows)


def max_ricci(m: MetricInstance, points: Sequence, mode: str = "float") -> float:
    out = 0.0
    for p in points:
        ric = curvature_at(m, p, 2, mode).ricci[..., 0]
        out = max(out, max(abs(float(x)) for x in ric.ravel()))
    return out


def max_einstein(m: MetricInstance, points: Sequence, mode: str = "float", lam=None) -> float:
    """max |R_ab - Lambda g_ab|; Lambda from the first point's trace unless given."""
    out = 0.0
    for p in points:
        b = curvature_at(m, p, 2, mode)
        if lam is None:
            lam = b.scalar[0] / 4
        res = b.ricci[..., 0] - lam * b.g[..., 0]
        out = max(out, max(abs(float(x)) for x in res.ravel()))
    return out


@dataclass
class CrossCheck:
    system: SystemResult
    curvature: float
    consistent: bool
    residual_zero: bool
    curvature_zero: bool


def vacuum_system_for(m: MetricInstance) -> str:
    if isinstance(m.params, NullVsiParams):
        return "null-vacuum"
    if isinstance(m.params, StVsiParams):
        return "st-vacuum"
    raise FamilyMismatch(f"no vacuum system for family {m.family!r}")


def cross_check_vacuum(m: MetricInstance, points: Sequence, mode: str = "float", variant: str = "printed",
                       tol: float = 1e-9) -> CrossCheck:
    """Residual system ~ 0 iff Ricci ~ 0, at every point."""
    res = evaluate(vacuum_system_for(m), m, points, mode, variant)
    ric = max_ricci(m, points, mode)
    rz = res.passed(None if mode == "rational" else tol)
    cz = ric == 0 if mode == "rational" else ric < tol
    return CrossCheck(res, ric, rz == cz, rz, cz)


def cross_check_einstein(m: MetricInstance, points: Sequence, mode: str = "float", variant: str = "printed",
                         tol: float = 1e-9, extra: Mapping | None = None) -> CrossCheck:
    sid = "csi1-einstein" if isinstance(m.params, Csi1Params) else "csi2-einstein"
    lam = None
    if isinstance(m.params, Csi1Params):
        from .families import _const_of
        lam = -3 * _const_of(m.params.K, m.bindings) ** 2
    res = evaluate(sid, m, points, mode, variant, extra)
    ein = max_einstein(m, points, mode, lam)
    rz = res.passed(None if mode == "rational" else tol)
    cz = ein == 0 if mode == "rational" else ein < tol
    return CrossCheck(res, ein, rz == cz, rz, cz)


def dependency_check_adam(H1, WX, points: Sequence, mode: str = "float") -> float:
    """max |d_T adam1 - d_X adam3 - adam2| for arbitrary H1(u,T,X), W_X(u,T,X)."""
    exprs = {"H1": _e(H1, ST), "WX": _e(WX, ST), "H0": as_expr(0)}
    worst = 0.0
    for p in points:
        f = Fields(exprs, dict(zip(ST, p)), ST, 4, mode)
        r = f.d(_adam1(f), "T") - f.d(_adam3(f), "X") - _adam2(f)
        worst = max(worst, abs(float(r.value)))
        if mode == "rational" and r.value != 0:
            return worst
    return worst
