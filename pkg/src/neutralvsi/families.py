"""Constructors for the neutral-signature Kundt, Walker, VSI and CSI families.

Every closed-form solution is assembled term by term.  Integrals appearing
in a solution are named *slots*; the caller supplies an antiderivative for
each slot (or asks for an exact Laurent-polynomial one with ``"auto"``), and
every supplied antiderivative is differentiated back and compared with its
integrand at a few deterministic points before the metric is built.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .exprdsl import (
    ONE, ZERO, Expr, Param, Sym, as_expr, const_value, diff, evaluate, exp_, free_symbols,
    has_transcendental, parse, substitute,
)
from .laurent import NotLaurentError, antiderivative
from .tensor import Chart, KundtData, MetricInstance, NullFrame

F = Fraction
HALF = F(1, 2)

KUNDT_CHART = Chart(("v", "u", "x", "y"))
NULL_CHART = Chart(("v1", "u1", "v2", "u2"))
ST_CHART = Chart(("v", "u", "X", "T"))
CSI1_CHART = ST_CHART
CSI2_CHART = Chart(("v", "u", "U", "V"))

UNIT_BOX = (F(-1), F(1))


class FamilyError(ValueError):
    pass


class DependenceError(FamilyError):
    """A parameter depends on a coordinate it is not allowed to."""


class MissingAntiderivativeError(FamilyError, KeyError):
    pass


class AntiderivativeMismatch(FamilyError):
    pass


def S(name: str) -> Sym:
    return Sym(name)


def _e(x, chart: Sequence[str] = (), params: Sequence[str] = ()) -> Expr:
    if isinstance(x, str):
        return parse(x, tuple(chart), params=params)
    return as_expr(x)


def require(name: str, e: Expr, allowed: Sequence[str]) -> Expr:
    extra = free_symbols(e) - set(allowed)
    if extra:
        raise DependenceError(f"{name} may depend only on {tuple(allowed)}, found {sorted(extra)}")
    return e


# ---------------------------------------------------------------------------
# antiderivative slots


@dataclass(frozen=True)
class Slot:
    """One integral in a closed-form solution: d(value)/d(wrt) = integrand."""

    name: str
    wrt: str
    integrand: Callable[[dict], Expr]
    doc: str = ""


def resolve_slots(slots: Sequence[Slot], supplied, variables: Sequence[str],
                  bindings: Mapping | None = None) -> dict:
    """Fill every slot from ``supplied``.

    ``supplied`` is a mapping, ``"auto"``, or a callable ``(slot, resolved)``
    returning an Expr or None; None falls back to the automatic integrator.
    """
    resolver = supplied if callable(supplied) else None
    auto = supplied == "auto" or resolver is not None
    supplied = {} if auto else dict(supplied or {})
    out: dict = {}
    for s in slots:
        if s.name in supplied:
            out[s.name] = as_expr(supplied[s.name])
            continue
        if resolver is not None:
            got = resolver(s, out)
            if got is not None:
                out[s.name] = as_expr(got)
                continue
        if not auto:
            raise MissingAntiderivativeError(f"no antiderivative supplied for slot {s.name!r} ({s.doc})")
        try:
            out[s.name] = antiderivative(s.integrand(out), s.wrt, variables, bindings)
        except NotLaurentError as exc:
            raise MissingAntiderivativeError(
                f"slot {s.name!r} has no Laurent-polynomial antiderivative: {exc}") from exc
    return out


def check_antiderivatives(slots: Sequence[Slot], values: Mapping, points: Sequence[Mapping],
                          bindings: Mapping | None = None, tol: float = 1e-9) -> dict:
    """Max |d_wrt F - integrand| per slot; raises on the first mismatch."""
    report = {}
    for s in slots:
        F_ = values[s.name]
        resid = diff(F_, s.wrt) - s.integrand(values)
        exact = not has_transcendental(resid)
        worst = 0.0
        for p in points:
            val = evaluate(resid, p, bindings, "fraction" if exact else "float")
            if (exact and val != 0) or (not exact and abs(val) > tol):
                raise AntiderivativeMismatch(f"slot {s.name!r}: derivative differs from integrand by {val} at {p}")
            worst = max(worst, abs(float(val)))
        report[s.name] = worst
    return report


def box_points(box: Mapping, names: Sequence[str]) -> list:
    """A few deterministic interior points of a coordinate box."""
    fracs = (F(1, 3), F(1, 2), F(5, 7))
    out = []
    for k, t in enumerate(fracs):
        p = {}
        for j, n in enumerate(names):
            lo, hi = box.get(n, UNIT_BOX)
            s = fracs[(k + j) % len(fracs)]
            p[n] = lo + (hi - lo) * s
        out.append(p)
    return out


def _slot_values(slots, antiderivatives, chart, box, bindings):
    vals = resolve_slots(slots, antiderivatives, chart.names, bindings)
    check_antiderivatives(slots, vals, box_points(box, chart.names), bindings)
    return vals


# ---------------------------------------------------------------------------
# generic constructors


def _frame_from(l1, n1, l2, n2):
    return NullFrame(tuple(tuple(as_expr(c) for c in row) for row in (l1, n1, l2, n2)))


def _d(chart: Chart, name: str, coeff=ONE) -> list:
    row = [ZERO] * 4
    row[chart.index(name)] = as_expr(coeff)
    return row


def _lin(*rows):
    out = [ZERO] * 4
    for r in rows:
        out = [a + b for a, b in zip(out, r)]
    return out


def _assemble(chart, guu, gu, gAB, v, u, A):
    """Kundt-type assembly: g_uv = 1, g_uu, g_uA, g_AB."""
    g = [[ZERO] * 4 for _ in range(4)]
    iv, iu = chart.index(v), chart.index(u)
    g[iv][iu] = g[iu][iv] = ONE
    g[iu][iu] = guu
    for a, name in enumerate(A):
        ia = chart.index(name)
        g[iu][ia] = g[ia][iu] = gu[a]
        for b, nb in enumerate(A):
            g[ia][chart.index(nb)] = gAB[a][b]
    return tuple(tuple(r) for r in g)


def kundt(H, W: Sequence, gAB: Sequence | None = None, chart: Chart = KUNDT_CHART,
          transverse_frame: tuple | None = None, bindings: Mapping | None = None,
          family: str = "kundt", params=None, box: Mapping | None = None) -> MetricInstance:
    """ds^2 = 2 du (dv + H du + W_A dx^A) + g_AB dx^A dx^B.

    Chart order is (v, u, x^A).  The default transverse block is the split
    form 2 dx dy with frame l2 = d(x^2), n2 = d(x^1); a non-default block
    needs ``transverse_frame`` = (l2, n2) covectors for a full null frame.
    """
    v, u, *A = chart.names
    H = _e(H, chart.names)
    W = [_e(w, chart.names) for w in W]
    split = gAB is None
    gAB = [[ZERO, ONE], [ONE, ZERO]] if split else [[_e(c, chart.names) for c in r] for r in gAB]
    for r in gAB:
        for c in r:
            require("g_AB", c, (u, *A))
    if gAB[0][1] != gAB[1][0]:
        raise FamilyError("g_AB must be symmetric")
    g = _assemble(chart, 2 * H, W, gAB, v, u, A)
    frame = None
    if split or transverse_frame is not None:
        l1 = _d(chart, u)
        n1 = _lin(_d(chart, v), _d(chart, u, H), _d(chart, A[0], W[0]), _d(chart, A[1], W[1]))
        if split:
            l2, n2 = _d(chart, A[1]), _d(chart, A[0])
        else:
            l2, n2 = transverse_frame
        frame = _frame_from(l1, n1, l2, n2)
    kd = KundtData(v=v, u=u, H=H, W={A[0]: W[0], A[1]: W[1]}, transverse=tuple(A))
    return MetricInstance(chart, g, frame, family, params or {}, dict(bindings or {}), kd, dict(box or {}))


def flat(chart: Chart = NULL_CHART) -> MetricInstance:
    """2 du1 dv1 + 2 du2 dv2."""
    return kundt(ZERO, (ZERO, ZERO), chart=chart, family="flat")


def walker_canonical(B, H_i: Sequence | None = None, A_ij: Sequence | None = None,
                     bindings: Mapping | None = None) -> MetricInstance:
    """du^I (2 delta_IJ dv^J + B_IJ du^J + H_Ii dx^i) + A_ij dx^i dx^j in four dimensions.

    A 2x2 ``B`` gives the rank-2 form in chart (v1, u1, v2, u2), where no x^i
    remain.  A scalar ``B`` with ``H_i`` (two entries) and ``A_ij`` gives the
    rank-1 form in chart (v, u, x, y).
    """
    if isinstance(B, (list, tuple)):
        if H_i or A_ij:
            raise FamilyError("the rank-2 Walker form has no transverse x^i in four dimensions")
        ch = NULL_CHART
        Bm = [[_e(c, ch.names) for c in r] for r in B]
        if Bm[0][1] != Bm[1][0]:
            raise FamilyError("B_IJ must be symmetric")
        g = [[ZERO] * 4 for _ in range(4)]
        g[0][1] = g[1][0] = ONE
        g[2][3] = g[3][2] = ONE
        g[1][1], g[3][3] = Bm[0][0], Bm[1][1]
        g[1][3] = g[3][1] = Bm[0][1]
        frame = _frame_from(
            _d(ch, "u1"),
            _lin(_d(ch, "v1"), _d(ch, "u1", Bm[0][0] * HALF), _d(ch, "u2", Bm[0][1])),
            _d(ch, "u2"),
            _lin(_d(ch, "v2"), _d(ch, "u2", Bm[1][1] * HALF)),
        )
        kd = None
        if "v1" not in free_symbols(Bm[1][1]):
            kd = KundtData("v1", "u1", Bm[0][0] * HALF, {"v2": ZERO, "u2": Bm[0][1]}, ("v2", "u2"))
        return MetricInstance(ch, tuple(tuple(r) for r in g), frame, "walker_rank2",
                              {"B": Bm}, dict(bindings or {}), kd)
    ch = KUNDT_CHART
    Bs = _e(B, ch.names)
    Hs = [_e(h, ch.names) for h in (H_i or (ZERO, ZERO))]
    for h in Hs:
        require("H_i", h, ("u", "x", "y"))
    gAB = None
    if A_ij is not None:
        gAB = [[require("A_ij", _e(c, ch.names), ("u", "x", "y")) for c in r] for r in A_ij]
    m = kundt(Bs * HALF, [h * HALF for h in Hs], gAB, ch, bindings=bindings, family="walker_rank1")
    return replace(m, params={"B": Bs, "H": Hs, "A": gAB})


# ---------------------------------------------------------------------------
# VSI families


@dataclass(frozen=True)
class NullVsiParams:
    W1: Expr = ZERO
    WU: Expr = ZERO
    WV: Expr = ZERO
    H1: Expr = ZERO
    H0: Expr = ZERO

    def __post_init__(self):
        allowed = {"W1": ("u1", "u2")}
        for k in ("W1", "WU", "WV", "H1", "H0"):
            e = _e(getattr(self, k), NULL_CHART.names)
            object.__setattr__(self, k, require(k, e, allowed.get(k, ("u1", "u2", "v2"))))


def null_vsi(p: NullVsiParams, bindings: Mapping | None = None, family: str = "null_vsi",
             box: Mapping | None = None) -> MetricInstance:
    v1 = S("v1")
    H = v1 * p.H1 + p.H0
    Wu2 = v1 * p.W1 + p.WU
    # transverse coordinates ordered (v2, u2): frame l2 = du2, n2 = dv2
    m = kundt(H, (p.WV, Wu2), chart=NULL_CHART, bindings=bindings, family=family, params=p,
              box=box or {n: UNIT_BOX for n in NULL_CHART.names})
    return m


@dataclass(frozen=True)
class StVsiParams:
    eps: int = 1
    WX: Expr = ZERO
    WT: Expr = ZERO
    H1: Expr = ZERO
    H0: Expr = ZERO
    # explicit W1(u, X), used only to represent transformed parameter sets
    w1: Expr | None = None

    def __post_init__(self):
        if self.eps not in (0, 1):
            raise FamilyError("eps must be 0 or 1")
        for k in ("WX", "WT", "H1", "H0"):
            e = _e(getattr(self, k), ST_CHART.names)
            object.__setattr__(self, k, require(k, e, ("u", "X", "T")))
        if self.w1 is not None:
            object.__setattr__(self, "w1", require("w1", _e(self.w1, ST_CHART.names), ("u", "X")))

    @property
    def W1(self) -> Expr:
        if self.w1 is not None:
            return self.w1
        return as_expr(-2 * self.eps) / S("X")


ST_BOX = {"v": UNIT_BOX, "u": UNIT_BOX, "X": (F(1, 2), F(3)), "T": UNIT_BOX}


def _st_frame(chart, n1):
    dX, dT = _d(chart, "X"), _d(chart, "T")
    l2 = _lin(dX, [-c for c in dT])
    n2 = [c * HALF for c in _lin(dX, dT)]
    return l2, n2


def st_vsi(p: StVsiParams, bindings: Mapping | None = None, family: str = "st_vsi",
           box: Mapping | None = None) -> MetricInstance:
    """Transverse block dX^2 - dT^2 with W1 = -2 eps / X and the forced v^2 W1^2 / 8 in H."""
    v = S("v")
    W1 = p.W1
    H = v * v * W1 * W1 * F(1, 8) + v * p.H1 + p.H0
    WX = v * W1 + p.WX
    l2, n2 = _st_frame(ST_CHART, None)
    return kundt(H, (WX, p.WT), [[ONE, ZERO], [ZERO, as_expr(-1)]], ST_CHART, (l2, n2),
                 bindings, family, p, box or ST_BOX)


def special_vsi(F1="0", F2="0") -> MetricInstance:
    """W = 0, H1 = 0, H0 = F1(u1, v2) + F2(u1, u2)."""
    F1 = require("F1", _e(F1, NULL_CHART.names), ("u1", "v2"))
    F2 = require("F2", _e(F2, NULL_CHART.names), ("u1", "u2"))
    return null_vsi(NullVsiParams(H0=F1 + F2), family="special_vsi")


def _branch_a_slots(alpha, beta, gamma):
    return (
        Slot("int_alpha_du2", "u2", lambda r: alpha, "integral of alpha du2"),
        Slot("int_beta_dv2", "v2", lambda r: beta, "integral of beta dv2"),
        Slot("int_gamma_du2", "u2", lambda r: gamma, "integral of gamma du2"),
        Slot("int_alpha_u1_du2", "u2", lambda r: diff(alpha, "u1"), "integral of d(alpha)/du1 du2"),
        Slot("int_beta_u1_dv2", "v2", lambda r: diff(beta, "u1"), "integral of d(beta)/du1 dv2"),
    )


def null_vsi_solution_branchA(alpha="0", beta="0", gamma="0", F1="0", F2="0",
                              antiderivatives="auto", bindings: Mapping | None = None) -> MetricInstance:
    """Vanishing W1 branch of the null vacuum system.

    alpha(u1, u2), beta(u1, v2), gamma(u1, u2), F1(u1, u2), F2(u1, v2).
    """
    ch = NULL_CHART.names
    alpha = require("alpha", _e(alpha, ch), ("u1", "u2"))
    beta = require("beta", _e(beta, ch), ("u1", "v2"))
    gamma = require("gamma", _e(gamma, ch), ("u1", "u2"))
    F1 = require("F1", _e(F1, ch), ("u1", "u2"))
    F2 = require("F2", _e(F2, ch), ("u1", "v2"))
    slots = _branch_a_slots(alpha, beta, gamma)
    box = {n: UNIT_BOX for n in ch}
    r = _slot_values(slots, antiderivatives, NULL_CHART, box, bindings)
    v2, u2 = S("v2"), S("u2")
    H1 = alpha + beta
    WU = 2 * alpha * v2 - 2 * r["int_beta_dv2"] + gamma
    H0 = (2 * beta * v2 * r["int_alpha_du2"] - 2 * beta * u2 * r["int_beta_dv2"]
          + beta * r["int_gamma_du2"] + v2 * r["int_alpha_u1_du2"] - u2 * r["int_beta_u1_dv2"] + F1 + F2)
    p = NullVsiParams(W1=ZERO, WU=WU, WV=ZERO, H1=H1, H0=H0)
    return null_vsi(p, bindings, "null_vsi_branchA", box)


BRANCH_B_BOX = {"v1": UNIT_BOX, "u1": UNIT_BOX, "v2": UNIT_BOX, "u2": (F(1, 2), F(1))}


def _branch_b_common(alpha, delta, gamma, eta):
    f = ONE / (alpha + S("u2"))
    return f, (
        Slot("G", "v2", lambda r: gamma, "integral of gamma dv2"),
        Slot("D", "u2", lambda r: f * delta, "integral of f delta du2"),
    )


def _branch_b_corrected_slots(f, alpha, delta, gamma, eta):
    return (
        Slot("E", "u2", lambda r: f * f * delta, "integral of f^2 delta du2"),
        Slot("N", "u2", lambda r: f * f * eta, "integral of f^2 eta du2"),
        Slot("M", "u2", lambda r: f * diff(delta, "u1"), "integral of f d(delta)/du1 du2"),
    )


def _branch_b_printed_slots(f, alpha, delta, gamma, eta):
    gv = diff(gamma, "v2")
    return (
        Slot("int_delta_du2", "u2", lambda r: delta, "integral of delta du2"),
        Slot("int_gamma2_dv2", "v2", lambda r: gamma * gamma, "integral of gamma^2 dv2"),
        Slot("int_f_du2", "u2", lambda r: f, "integral of f du2"),
        Slot("int_v2_gammav_dv2", "v2", lambda r: S("v2") * gv, "integral of v2 d(gamma)/dv2 dv2"),
        Slot("int_gammav_G_dv2", "v2", lambda r: gv * r["G"], "integral of d(gamma)/dv2 G dv2"),
        Slot("int_gammav_dv2", "v2", lambda r: gv, "integral of d(gamma)/dv2 dv2"),
        Slot("int_eta_du2", "u2", lambda r: eta, "integral of eta du2"),
        Slot("int_D_du2", "u2", lambda r: r["D"], "double integral of f delta du2"),
        Slot("int_fu1_over_f_du2", "u2", lambda r: diff(f, "u1") / f, "integral of (1/f) df/du1 du2"),
        Slot("int_gamma_u1_dv2", "v2", lambda r: diff(gamma, "u1"), "integral of d(gamma)/du1 dv2"),
        Slot("int_D_delta_over_f_du2", "u2", lambda r: r["D"] * delta / f, "integral of (1/f) D delta du2"),
        Slot("int_delta_u1_over_f_du2", "u2", lambda r: diff(delta, "u1") / f,
             "integral of (1/f) d(delta)/du1 du2"),
    )


def branch_b_slots(alpha, delta, gamma, eta, variant="corrected"):
    f, common = _branch_b_common(alpha, delta, gamma, eta)
    extra = (_branch_b_corrected_slots if variant == "corrected" else _branch_b_printed_slots)(
        f, alpha, delta, gamma, eta)
    return f, common + extra


def null_vsi_solution_branchB(alpha="0", delta="0", gamma="0", eta="0", F1="0", F2="0",
                              antiderivatives="auto", variant: str = "corrected",
                              bindings: Mapping | None = None, box: Mapping | None = None) -> MetricInstance:
    """W1 = -2 f branch with f = 1/(alpha(u1) + u2) and the gauge eps(u1) = 0.

    alpha(u1), delta(u1, u2), gamma(u1, v2), eta(u1, u2), F1(u1, v2), F2(u1, u2).
    ``variant="printed"`` assembles H0 from the reference twelve-slot display,
    ``"corrected"`` from the H0 that actually solves the remaining vacuum
    equation (slots G, D, E, N, M).
    """
    if variant not in ("corrected", "printed"):
        raise FamilyError(f"unknown variant {variant!r}")
    ch = NULL_CHART.names
    alpha = require("alpha", _e(alpha, ch), ("u1",))
    delta = require("delta", _e(delta, ch), ("u1", "u2"))
    gamma = require("gamma", _e(gamma, ch), ("u1", "v2"))
    eta = require("eta", _e(eta, ch), ("u1", "u2"))
    F1 = require("F1", _e(F1, ch), ("u1", "v2"))
    F2 = require("F2", _e(F2, ch), ("u1", "u2"))
    box = dict(box or BRANCH_B_BOX)
    for p in box_points(box, ch):
        if evaluate(alpha + S("u2"), p, bindings, "float") == 0:
            raise FamilyError("alpha + u2 vanishes inside the sample box")
    f, slots = branch_b_slots(alpha, delta, gamma, eta, variant)
    r = _slot_values(slots, antiderivatives, NULL_CHART, box, bindings)
    v2, u2 = S("v2"), S("u2")
    ap = diff(alpha, "u1")
    G, D = r["G"], r["D"]
    H1 = delta * HALF - ap * f + D + f * gamma
    WU = delta * v2 - 2 * f * G + eta
    W1 = -2 * f
    if variant == "corrected":
        E, N, M = r["E"], r["N"], r["M"]
        inner = (E * (v2 * gamma - G) + N * gamma - ap * E * v2 * HALF + D * D * v2 * F(1, 4)
                 + M * v2 * HALF + F1)
        H0 = inner / f + f * gamma * G - ap * f * G + D * G + diff(G, "u1") + F2
    else:
        inner = (G * r["int_delta_du2"]
                 - 2 * r["int_gamma2_dv2"] * r["int_f_du2"]
                 + r["int_v2_gammav_dv2"] * r["int_delta_du2"]
                 - 2 * r["int_gammav_G_dv2"] * r["int_f_du2"]
                 + r["int_gammav_dv2"] * r["int_eta_du2"]
                 + ap * G * r["int_f_du2"]
                 - G * r["int_D_du2"]
                 - G * r["int_fu1_over_f_du2"]
                 - u2 * r["int_gamma_u1_dv2"]
                 - v2 * ap * r["int_delta_du2"] * HALF
                 + v2 * r["int_D_delta_over_f_du2"] * HALF
                 + v2 * r["int_delta_u1_over_f_du2"] * HALF
                 + F1)
        H0 = f * inner + F2
    p = NullVsiParams(W1=W1, WU=WU, WV=ZERO, H1=H1, H0=H0)
    return null_vsi(p, bindings, f"null_vsi_branchB_{variant}", box)


def _shifted(e: Expr, var: str, arg: Expr) -> Expr:
    return substitute(e, {var: arg})


def st_vsi_solution_parts(alpha="0", beta="0", gamma="0"):
    """(W_X, H1) for alpha(u, X), beta(u, A) at A = X + T, gamma(u, B) at B = X - T."""
    names = ST_CHART.names
    alpha = require("alpha", _e(alpha, names), ("u", "X"))
    beta = require("beta", _e(beta, ("u", "A")), ("u", "A"))
    gamma = require("gamma", _e(gamma, ("u", "B")), ("u", "B"))
    X, T = S("X"), S("T")
    Ap, Bm = X + T, X - T
    b, c = _shifted(beta, "A", Ap), _shifted(gamma, "B", Bm)
    bA, cB = _shifted(diff(beta, "A"), "A", Ap), _shifted(diff(gamma, "B"), "B", Bm)
    WX = 2 * (b + c - alpha) / X + diff(alpha, "X")
    H1 = (alpha - b - c - X * bA - X * cB) / (X * X)
    return WX, H1


def st_h0_source(WX: Expr, H1: Expr) -> Expr:
    """Right-hand side of the wave equation for H0/X."""
    return (diff(diff(WX, "u"), "X") + diff(WX * H1, "X")
            - diff(diff(WX * WX, "T"), "T") * F(1, 4)) / S("X")


def solve_st_h0(WX: Expr, H1: Expr, homogeneous: Expr = ZERO) -> Expr:
    """Exact Laurent H0 with (d_X^2 - d_T^2)(H0/X) = source, plus X * homogeneous."""
    from .laurent import as_lpoly, solve_wave
    src = as_lpoly(st_h0_source(WX, H1), ("u", "X", "T"))
    P = solve_wave(src, "X", "T")
    return S("X") * (P.to_expr() + as_expr(homogeneous))


def st_vsi_solution(alpha="0", beta="0", gamma="0", H0=None, bindings: Mapping | None = None,
                    box: Mapping | None = None) -> MetricInstance:
    """eps = 1, W_T = 0 solution; ``H0=None`` solves its wave equation exactly."""
    WX, H1 = st_vsi_solution_parts(alpha, beta, gamma)
    H0 = solve_st_h0(WX, H1) if H0 is None else _e(H0, ST_CHART.names)
    box = dict(box or ST_BOX)
    if box["X"][0] <= 0 <= box["X"][1]:
        raise FamilyError("the sample box must exclude X = 0")
    return st_vsi(StVsiParams(eps=1, WX=WX, WT=ZERO, H1=H1, H0=H0), bindings, "st_vsi_solution", box)


# ---------------------------------------------------------------------------
# CSI families


def _const_of(e: Expr, bindings: Mapping):
    v = const_value(e)
    if v is None and isinstance(e, Param) and e.name in bindings:
        v = Fraction(bindings[e.name])
    return v


@dataclass(frozen=True)
class Csi1Params:
    K: Expr = Param("K")
    A: Expr = ZERO
    B: Expr = ZERO
    sigma: Expr = ZERO
    H1: Expr = ZERO
    H0: Expr = ZERO
    WX: Expr = ZERO
    WT: Expr = ZERO

    def __post_init__(self):
        for k in ("K", "A", "B", "sigma"):
            e = _e(getattr(self, k), (), ("K",))
            object.__setattr__(self, k, require(k, e, ()))
        for k in ("H1", "H0", "WX", "WT"):
            e = _e(getattr(self, k), CSI1_CHART.names, ("K",))
            object.__setattr__(self, k, require(k, e, ("u", "T", "X")))


CSI1_BOX = ST_BOX


def csi1(p: Csi1Params, bindings: Mapping | None = None, family: str = "csi1",
         box: Mapping | None = None) -> MetricInstance:
    """2 l1 n1 - exp(2KX) dT^2 + dX^2 with l2 = dX - e^{KX} dT, n2 = (dX + e^{KX} dT)/2."""
    bindings = dict(bindings or {})
    k = _const_of(p.K, bindings)
    if k == 0:
        raise FamilyError("K = 0 is inconsistent with the Einstein system of this family")
    ch = CSI1_CHART
    v, X = S("v"), S("X")
    eK = exp_(p.K * X)
    H = v * v * p.sigma + v * p.H1 + p.H0
    WX = p.A * v + p.WX
    WT = (p.B * v + p.WT) * eK
    l2 = _lin(_d(ch, "X"), _d(ch, "T", -eK))
    n2 = [c * HALF for c in _lin(_d(ch, "X"), _d(ch, "T", eK))]
    gAB = [[ONE, ZERO], [ZERO, -(eK * eK)]]
    return kundt(H, (WX, WT), gAB, ch, (l2, n2), bindings, family, p, box or CSI1_BOX)


def csi1_special(K="K", H1="0", H0="0", WX="0", WT="0", bindings=None, family="csi1_special"):
    """A = -2K, B = 0, sigma = 0."""
    Ke = _e(K, (), ("K",))
    return csi1(Csi1Params(K=Ke, A=-2 * Ke, B=ZERO, sigma=ZERO, H1=H1, H0=H0, WX=WX, WT=WT),
                bindings, family)


def kaigorodov(K=1, C=1) -> MetricInstance:
    """H1 = W = 0, H0 = C exp(-K X)."""
    Ke = as_expr(F(K))
    H0 = as_expr(F(C)) * exp_(-Ke * S("X"))
    return csi1_special(Ke, H0=H0, family="kaigorodov")


def csi1_solution_parts(K, C1="0", C2="0", C3="0", alpha="0", rho="0", gamma="0", abar=None,
                        variant: str = "corrected"):
    """(H1, W_X) of the two-constant family solving the first-order subsystem.

    ``abar`` is the double integral of exp(KX) alpha_X, divided by exp(KX) in
    between; only the ``variant`` differs in its prefactor inside H1 (K/2 for
    ``"corrected"``, 1/2 for ``"printed"``) and the sign of the exponent in
    the C3 part of W_X (exp(-2KX) corrected, exp(2KX) printed).
    """
    K = _e(K, (), ("K",))
    C1, C2, C3 = (require(n, _e(c, (), ("K",)), ()) for n, c in (("C1", C1), ("C2", C2), ("C3", C3)))
    alpha = require("alpha", _e(alpha, CSI1_CHART.names, ("K",)), ("u", "X"))
    rho = require("rho", _e(rho, CSI1_CHART.names, ("K",)), ("u",))
    gamma = require("gamma", _e(gamma, CSI1_CHART.names, ("K",)), ("u",))
    abar = require("abar", _e(abar if abar is not None else "0", CSI1_CHART.names, ("K",)), ("u", "X"))
    X, T = S("X"), S("T")
    e2 = exp_(-2 * K * X)
    pref = K * HALF if variant == "corrected" else HALF
    H1 = (pref * abar + diff(abar, "X") * HALF - alpha * HALF - K * C1 * T * HALF - K * C2 * HALF
          - K * gamma * HALF - K * C3 * T * T * F(1, 4) + C3 * e2 / (4 * K))
    wexp = e2 if variant == "corrected" else exp_(2 * K * X)
    WX = C3 * T * T * HALF + C1 * T + C3 * wexp / (2 * K * K) - abar + rho * exp_(-K * X) / K + gamma
    return H1, WX


def csi1_abar_check(K, alpha, abar, bindings=None, points=None) -> float:
    """Residual of d/dX (e^{KX} d(abar)/dX) = e^{KX} d(alpha)/dX."""
    K = _e(K, (), ("K",))
    alpha, abar = _e(alpha, CSI1_CHART.names, ("K",)), _e(abar, CSI1_CHART.names, ("K",))
    eK = exp_(K * S("X"))
    resid = diff(eK * diff(abar, "X"), "X") - eK * diff(alpha, "X")
    pts = points or box_points(CSI1_BOX, CSI1_CHART.names)
    return max(abs(evaluate(resid, p, bindings, "float")) for p in pts)


CSI1_SOLVED_H0 = ("(2*K^4*T*(2*T + 3) - 6*K^3*X*u*(2*T + 3) + 9*K^2*(-2*T*u + 8*X - u)"
                  " + 36*K*(X*u^2 + 1) + 18*u^2)/(144*K^4)")


def csi1_solved(K=1, variant: str = "corrected") -> MetricInstance:
    """C1 = 1/3, C2 = 1/2, C3 = 0, alpha = u X, rho = u, gamma = 0, with a matching H0."""
    Kf = F(K)
    H1, WX = csi1_solution_parts(Kf, F(1, 3), F(1, 2), 0, "u*X", "u", "0", abar="u*X/K",
                                 variant=variant)
    H1, WX = (substitute(e, {"K": as_expr(Kf)}) for e in (H1, WX))
    H0 = substitute(parse(CSI1_SOLVED_H0, CSI1_CHART.names, params=("K",)), {"K": as_expr(Kf)})
    return csi1_special(as_expr(Kf), H1=H1, H0=H0, WX=WX, family=f"csi1_solved_{variant}")


@dataclass(frozen=True)
class Csi2Params:
    A: Expr = ZERO
    B: Expr = Param("B")
    alpha: Expr = as_expr(-2)
    beta: Expr = ZERO
    H1: Expr = ZERO
    H0: Expr = ZERO
    WU: Expr = ZERO
    WV: Expr = ZERO

    def __post_init__(self):
        for k in ("A", "B", "alpha", "beta"):
            e = _e(getattr(self, k), (), ("B",))
            object.__setattr__(self, k, require(k, e, ()))
        for k in ("H1", "H0", "WU", "WV"):
            e = _e(getattr(self, k), CSI2_CHART.names, ("B",))
            object.__setattr__(self, k, require(k, e, ("u", "U", "V")))


CSI2_BOX = {"v": UNIT_BOX, "u": UNIT_BOX, "U": UNIT_BOX, "V": (F(1, 2), F(3))}


def csi2_components(p: Csi2Params):
    v, V = S("v"), S("V")
    P = p.A * v * v + v * p.H1 + p.H0
    Q = v * V * p.beta + p.WU
    Sv = p.alpha * v / V + p.WV
    return P, Q, Sv


def csi2(p: Csi2Params, bindings: Mapping | None = None, family: str = "csi2",
         box: Mapping | None = None) -> MetricInstance:
    """2 (l1 n1 + l2 n2) with l2 = dU, n2 = dV + B V^2 dU."""
    ch = CSI2_CHART
    V = S("V")
    P, Q, Sv = csi2_components(p)
    BV2 = p.B * V * V
    gAB = [[2 * BV2, ONE], [ONE, ZERO]]  # (U, V) block
    W = (Q + Sv * BV2, Sv)
    # n1 = dv + P du + Q dU + S (dV + B V^2 dU) is the Kundt n1 for these W_A
    return kundt(P, W, gAB, ch, (_d(ch, "U"), _lin(_d(ch, "V"), _d(ch, "U", BV2))),
                 bindings, family, p, box or CSI2_BOX)


def csi2_special(B="B", H1="0", H0="0", WU="0", WV="0", bindings=None, family="csi2_special"):
    """A = 0, alpha = -2, beta = 2B."""
    Be = _e(B, (), ("B",))
    return csi2(Csi2Params(A=ZERO, B=Be, alpha=as_expr(-2), beta=2 * Be, H1=H1, H0=H0, WU=WU, WV=WV),
                bindings, family)


def csi2_solution_parts(B, alpha="0", beta="0", gamma="0", delta="0"):
    """(H1, W_U) for alpha(u), beta(u), gamma(u, U), delta(u) with W_V = 0."""
    B = _e(B, (), ("B",))
    ch = CSI2_CHART.names
    alpha = require("alpha", _e(alpha, ch, ("B",)), ("u",))
    beta = require("beta", _e(beta, ch, ("B",)), ("u",))
    gamma = require("gamma", _e(gamma, ch, ("B",)), ("u", "U"))
    delta = require("delta", _e(delta, ch, ("B",)), ("u",))
    U, V = S("U"), S("V")
    H1 = alpha + beta / (V * V * V)
    WU = V * V * gamma + (-4 * B * beta * U + delta) / V + F(3, 2) * beta / (V * V)
    return H1, WU


CSI2_PRESETS = {
    "csi2_solved": (("u", "1", "U*u", "u"),
                    "(80*B^3*U^2*V^2 - 20*B^2*U*V^4*u - 40*B^2*U*V^2*u - 100*B^2*U*V + 20*B*U*V^7*u^2"
                    " + 20*B*U*V^7 + 20*B*U*V^4*u + 5*B*V^4*u^2 + 5*B*V^4 + 12*B*V^3*u + 5*B*V^2*u^2"
                    " + 25*B*V*u + 30*B - 6*V^3*u)/(40*B^2*V^6)"),
    "csi2_simple": (("u", "0", "U", "1"), "(4*U*V^5*u + V^2*u + 1)/(8*B*V^4)"),
}


def csi2_solved(B=1, preset: str = "csi2_solved") -> MetricInstance:
    (a, b, c, d), h0 = CSI2_PRESETS[preset]
    Bf = as_expr(F(B))
    if F(B) == 0:
        raise FamilyError("B = 0 makes the preset H0 singular")
    H1, WU = csi2_solution_parts(Bf, a, b, c, d)
    H0 = substitute(parse(h0, CSI2_CHART.names, params=("B",)), {"B": Bf})
    H1, WU = (substitute(e, {"B": Bf}) for e in (H1, WU))
    return csi2_special(Bf, H1=H1, H0=H0, WU=WU, family=preset)


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class FamilyInfo:
    name: str
    builder: Callable
    slots: tuple
    description: str
    presets: tuple = ()
    chart: Chart = NULL_CHART
    box: Mapping = field(default_factory=dict)


CATALOG = {
    "flat": FamilyInfo("flat", flat, (), "flat split-signature metric 2 du1 dv1 + 2 du2 dv2"),
    "kundt": FamilyInfo("kundt", kundt, ("H", "W", "gAB"),
                        "generic Kundt metric 2 du (dv + H du + W_A dx^A) + g_AB dx^A dx^B",
                        chart=KUNDT_CHART),
    "walker_rank2": FamilyInfo("walker_rank2", walker_canonical, ("B",),
                               "Walker canonical form with a 2-dimensional null plane"),
    "walker_rank1": FamilyInfo("walker_rank1", walker_canonical, ("B", "H_i", "A_ij"),
                               "Walker canonical form with a null line", chart=KUNDT_CHART),
    "null_vsi": FamilyInfo("null_vsi", null_vsi, ("W1", "WU", "WV", "H1", "H0"),
                           "null-case VSI family", ("special_vsi",), box={n: UNIT_BOX for n in NULL_CHART.names}),
    "st_vsi": FamilyInfo("st_vsi", st_vsi, ("eps", "WX", "WT", "H1", "H0"),
                         "spacelike/timelike VSI family", chart=ST_CHART, box=ST_BOX),
    "null_vsi_branchA": FamilyInfo("null_vsi_branchA", null_vsi_solution_branchA,
                                   ("alpha", "beta", "gamma", "F1", "F2"),
                                   "Ricci-flat null VSI solutions with W1 = 0"),
    "null_vsi_branchB": FamilyInfo("null_vsi_branchB", null_vsi_solution_branchB,
                                   ("alpha", "delta", "gamma", "eta", "F1", "F2", "variant"),
                                   "Ricci-flat null VSI solutions with W1 = -2/(alpha + u2)",
                                   box=BRANCH_B_BOX),
    "st_vsi_solution": FamilyInfo("st_vsi_solution", st_vsi_solution, ("alpha", "beta", "gamma", "H0"),
                                  "Ricci-flat spacelike/timelike VSI solutions", chart=ST_CHART, box=ST_BOX),
    "csi1": FamilyInfo("csi1", csi1, ("K", "A", "B", "sigma", "H1", "H0", "WX", "WT"),
                       "first CSI family", ("kaigorodov", "csi1_solved"), CSI1_CHART, CSI1_BOX),
    "csi2": FamilyInfo("csi2", csi2, ("A", "B", "alpha", "beta", "H1", "H0", "WU", "WV"),
                       "second CSI family", ("csi2_solved", "csi2_simple"), CSI2_CHART, CSI2_BOX),
}

PRESETS = {
    "special_vsi": lambda: special_vsi("v2^2*u1", "u2^3 - u1*u2"),
    "kaigorodov": lambda: kaigorodov(1, 1),
    "csi1_solved": lambda: csi1_solved(1),
    "csi2_solved": lambda: csi2_solved(1),
    "csi2_simple": lambda: csi2_solved(1, "csi2_simple"),
}
