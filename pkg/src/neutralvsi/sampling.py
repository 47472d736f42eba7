"""Seeded sample points and random family instances with rational data."""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exprdsl import Expr, Sym, diff, ln_
from .families import (
    BRANCH_B_BOX, NULL_CHART, ST_BOX, ST_CHART, UNIT_BOX,
    NullVsiParams, StVsiParams, csi1_special, csi2_special, kundt,
    null_vsi, null_vsi_solution_branchA, null_vsi_solution_branchB, st_vsi, st_vsi_solution,
)
from .laurent import LPoly, WaveSolveError
from .transforms import KINDS, TransformSpec, mobius

DENOMINATORS = (5, 7, 9, 11, 13)


def rng_for(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def rational_in(lo, hi, rng, denominators=DENOMINATORS) -> Fraction:
    """Strictly interior rational of bounded denominator."""
    q = int(rng.choice(denominators))
    k = int(rng.integers(1, q))
    return Fraction(lo) + (Fraction(hi) - Fraction(lo)) * Fraction(k, q)


def sample_points(box: Mapping, names: Sequence[str], n: int, seed=0, mode: str = "rational") -> list:
    """``n`` distinct points inside ``box``; floats are the same rationals rounded."""
    rng = rng_for(seed)
    out, seen = [], set()
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 100 * n + 100:
            raise ValueError("could not draw enough distinct points")
        p = tuple(rational_in(*box.get(name, UNIT_BOX), rng) for name in names)
        if p in seen:
            continue
        seen.add(p)
        out.append(dict(zip(names, p)))
    if mode == "float":
        out = [{k: float(v) for k, v in p.items()} for p in out]
    return out


def small_rational(rng, num=3, den=(1, 2, 3)) -> Fraction:
    return Fraction(int(rng.integers(-num, num + 1)), int(rng.choice(den)))


def random_poly(vars: Sequence[str], rng, max_deg: int = 2, nterms: int = 3, nonzero: bool = True) -> Expr:
    """Sparse polynomial with small rational coefficients."""
    vars = tuple(vars)
    terms: dict = {}
    while True:
        for _ in range(nterms):
            k = [0] * len(vars)
            for _ in range(int(rng.integers(0, max_deg + 1))):
                k[int(rng.integers(0, len(vars)))] += 1
            c = small_rational(rng)
            terms[tuple(k)] = terms.get(tuple(k), 0) + c
        p = LPoly(vars, terms)
        if p or not nonzero:
            return p.to_expr()


# ---------------------------------------------------------------------------
# solution families


def random_branch_a(seed=0):
    rng = rng_for(seed)
    return null_vsi_solution_branchA(
        alpha=random_poly(("u1", "u2"), rng),
        beta=random_poly(("u1", "v2"), rng),
        gamma=random_poly(("u1", "u2"), rng),
        F1=random_poly(("u1", "u2"), rng),
        F2=random_poly(("u1", "v2"), rng),
    )


def random_branch_b(seed=0, variant: str = "corrected"):
    """alpha = c + d u1 with alpha + u2 >= 1 on the box; delta, eta divisible by (alpha + u2)^2."""
    rng = rng_for(seed)
    c = rational_in(1, 2, rng)
    d = rational_in(Fraction(-1, 2), Fraction(1, 2), rng)
    alpha = c + d * Sym("u1")
    base = alpha + Sym("u2")
    delta = base * base * random_poly(("u1", "u2"), rng, max_deg=1)
    eta = base * base * random_poly(("u1", "u2"), rng, max_deg=1)
    return null_vsi_solution_branchB(
        alpha=alpha, delta=delta, gamma=random_poly(("u1", "v2"), rng),
        eta=eta, F1=random_poly(("u1", "v2"), rng), F2=random_poly(("u1", "u2"), rng),
        variant=variant, antiderivatives=_branch_b_logs(alpha, base),
    )


def _branch_b_logs(alpha, base):
    """The two printed-variant slots that integrate to logarithms; the rest are automatic."""
    logs = {"int_f_du2": ln_(base), "int_fu1_over_f_du2": -diff(alpha, "u1") * ln_(base)}
    return lambda slot, resolved: logs.get(slot.name)


def random_st_solution(seed=0, max_tries: int = 50):
    """Random (alpha, beta, gamma) with an exactly solved H0; resamples when no Laurent H0 exists."""
    rng = rng_for(seed)
    last = None
    for _ in range(max_tries):
        try:
            return st_vsi_solution(
                alpha=random_poly(("u", "X"), rng),
                beta=random_poly(("u", "A"), rng),
                gamma=random_poly(("u", "B"), rng),
            )
        except WaveSolveError as exc:
            last = exc
    raise WaveSolveError(f"no solvable instance in {max_tries} draws: {last}")


SOLUTION_SAMPLERS = {
    "null_vsi_branchA": (random_branch_a, {n: UNIT_BOX for n in NULL_CHART.names}, NULL_CHART.names),
    "null_vsi_branchB": (random_branch_b, BRANCH_B_BOX, NULL_CHART.names),
    "st_vsi_solution": (random_st_solution, ST_BOX, ST_CHART.names),
}


# ---------------------------------------------------------------------------
# generic (non-solution) instances and controls


def random_null_params(seed=0, walker: bool = False) -> NullVsiParams:
    rng = rng_for(seed)
    wide = ("u1", "u2", "v2")
    return NullVsiParams(
        W1=random_poly(("u1", "u2"), rng),
        WU=random_poly(wide, rng),
        WV=0 if walker else random_poly(wide, rng),
        H1=random_poly(wide, rng),
        H0=random_poly(wide, rng),
    )


def random_null(seed=0, walker: bool = False):
    return null_vsi(random_null_params(seed, walker))


def random_st(seed=0, eps: int = 1):
    rng = rng_for(seed)
    names = ("u", "X", "T")
    return st_vsi(StVsiParams(eps=eps, WX=random_poly(names, rng), WT=random_poly(names, rng),
                              H1=random_poly(names, rng), H0=random_poly(names, rng)))


def random_csi2(seed=0, B=1):
    rng = rng_for(seed)
    names = ("u", "U", "V")
    return csi2_special(Fraction(B), H1=random_poly(names, rng), H0=random_poly(names, rng),
                        WU=random_poly(names, rng), WV=random_poly(names, rng), family="csi2_random")


def random_csi1(seed=0, K=1):
    rng = rng_for(seed)
    names = ("u", "X", "T")
    return csi1_special(Fraction(K), H1=random_poly(names, rng), H0=random_poly(names, rng),
                        WX=random_poly(names, rng), WT=random_poly(names, rng), family="csi1_random")


def sigma_control(seed=0):
    """Kundt metric with a v^2 term in H, so R_0101 != 0."""
    rng = rng_for(seed)
    c = rational_in(1, 2, rng)
    H = c * Sym("v") * Sym("v") + random_poly(("u", "x", "y"), rng)
    return kundt(H, (random_poly(("u", "x", "y"), rng), random_poly(("u", "x", "y"), rng)),
                 family="kundt_sigma_control")


def non_walker_null(seed=0):
    """Null family instance with a nonzero W_v2 component."""
    return null_vsi(random_null_params(seed), family="null_vsi_nonwalker")


# ---------------------------------------------------------------------------
# transform generators


def random_transform(kind: str, seed=0, laws: str = "printed") -> TransformSpec:
    """Shifts by random polynomials; rescales by Mobius maps regular on the unit box."""
    if kind not in KINDS:
        raise ValueError(kind)
    rng = rng_for(seed)
    if kind.endswith("rescale"):
        while True:
            a, b = rational_in(1, 2, rng), small_rational(rng)
            d = rational_in(2, 3, rng)
            c = rational_in(-1, 1, rng)
            if a * d - b * c != 0:
                return mobius(kind, a, b, c, d, laws)
    args = {"null-shift": ("u1", "u2", "v2"), "st-shift": ("u", "X", "T"), "csi2-shift": ("u", "U", "V")}[kind]
    return TransformSpec(kind, random_poly(args, rng), laws=laws)


def transform_subject(kind: str, seed=0):
    """A random family instance the transform acts on."""
    if kind.startswith("null"):
        return random_null(seed)
    if kind.startswith("st"):
        return random_st(seed, eps=1)
    return random_csi2(seed)


def non_csi_control(chart, seed=0, gAB=None):
    """Kundt metric on ``chart`` whose v^2 coefficient in H varies, so R_0101 is not constant."""
    rng = rng_for(seed)
    v, u, a, b = chart.names
    sigma = Sym(a) * Sym(a) + random_poly((u, a, b), rng, max_deg=1)
    H = sigma * Sym(v) * Sym(v) + random_poly((u, a, b), rng)
    return kundt(H, (random_poly((u, a, b), rng), random_poly((u, a, b), rng)), gAB, chart=chart,
                 family="non_csi_control")
