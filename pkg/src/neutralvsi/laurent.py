"""Sparse Laurent polynomials with rational coefficients.

Used to build exact antiderivatives for randomly drawn test functions and to
solve the flat wave equation for H0 in the spacelike/timelike family.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Mapping, Sequence

from .exprdsl import (
    Add, Call, Const, Div, Exp, Expr, Ln, Mul, Neg, Param, Pow, Sym,
    ZERO, add, as_expr, inline, mul, power,
)


class NotLaurentError(ValueError):
    """Expression is not a Laurent polynomial in the chosen variables."""


class LPoly:
    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Mapping | None = None):
        self.vars = tuple(vars)
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v != 0}

    # construction -----------------------------------------------------------
    @classmethod
    def const(cls, vars, c) -> "LPoly":
        return cls(vars, {(0,) * len(vars): Fraction(c)})

    @classmethod
    def var(cls, vars, name) -> "LPoly":
        k = tuple(int(v == name) for v in vars)
        return cls(vars, {k: Fraction(1)})

    @classmethod
    def from_expr(cls, e: Expr, vars: Sequence[str], params: Mapping | None = None) -> "LPoly":
        """Expand ``e``; quotients are carried as fractions and divided exactly at the end."""
        vars = tuple(vars)
        params = dict(params or {})
        memo: dict = {}
        one = cls.const(vars, 1)

        def go(x):
            key = id(x)
            if key in memo:
                return memo[key]
            if isinstance(x, Const):
                r = (cls.const(vars, x.value), one)
            elif isinstance(x, Sym):
                if x.name not in vars:
                    raise NotLaurentError(f"symbol {x.name!r} is not a polynomial variable")
                r = (cls.var(vars, x.name), one)
            elif isinstance(x, Param):
                if x.name not in params:
                    raise NotLaurentError(f"parameter {x.name!r} is unbound")
                r = (cls.const(vars, Fraction(params[x.name])), one)
            elif isinstance(x, Add):
                n, d = go(x.terms[0])
                for t in x.terms[1:]:
                    n2, d2 = go(t)
                    n, d = (n + n2, d) if d == d2 else (n * d2 + n2 * d, d * d2)
                r = (n, d)
            elif isinstance(x, Mul):
                n, d = one, one
                for t in x.factors:
                    n2, d2 = go(t)
                    n, d = n * n2, d * d2
                r = (n, d)
            elif isinstance(x, Div):
                (a, b), (c, d) = go(x.num), go(x.den)
                if not c:
                    raise ZeroDivisionError("division by zero")
                r = (a * d, b * c)
            elif isinstance(x, Pow):
                if x.exp.denominator != 1:
                    raise NotLaurentError("fractional power")
                n, d = go(x.base)
                p = int(x.exp)
                r = (n ** p, d ** p) if p >= 0 else (d ** -p, n ** -p)
            elif isinstance(x, Neg):
                n, d = go(x.arg)
                r = (-n, d)
            elif isinstance(x, Call):
                r = go(inline(x))
            elif isinstance(x, (Exp, Ln)):
                raise NotLaurentError("transcendental function")
            else:
                raise TypeError(x)
            if len(r[1].terms) == 1 and r[1] != one:
                r = (r[0] * r[1].inverse(), one)
            memo[key] = r
            return r

        n, d = go(e)
        return n.exact_div(d)

    def to_expr(self) -> Expr:
        out = []
        for k in sorted(self.terms, reverse=True):
            c = self.terms[k]
            fs = [power(Sym(n), p) for n, p in zip(self.vars, k) if p != 0]
            out.append(mul(Const(c), *fs))
        return add(*out) if out else ZERO

    # arithmetic -------------------------------------------------------------
    def _like(self, other):
        if isinstance(other, LPoly):
            if other.vars != self.vars:
                raise ValueError("variable mismatch")
            return other
        return LPoly.const(self.vars, other)

    def __add__(self, other):
        other = self._like(other)
        t = defaultdict(Fraction, self.terms)
        for k, v in other.terms.items():
            t[k] += v
        return LPoly(self.vars, t)

    __radd__ = __add__

    def __neg__(self):
        return LPoly(self.vars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._like(other))

    def __rsub__(self, other):
        return self._like(other) - self

    def __mul__(self, other):
        other = self._like(other)
        t: dict = defaultdict(Fraction)
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                t[tuple(a + b for a, b in zip(k1, k2))] += v1 * v2
        return LPoly(self.vars, t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = LPoly.const(self.vars, 1)
        for _ in range(n):
            r = r * self
        return r

    def inverse(self) -> "LPoly":
        if len(self.terms) != 1:
            raise NotLaurentError("only monomials can be inverted")
        (k, v), = self.terms.items()
        return LPoly(self.vars, {tuple(-a for a in k): 1 / v})

    def _shift(self):
        """Monomial m such that self * m has no negative exponents."""
        lows = [min((k[i] for k in self.terms), default=0) for i in range(len(self.vars))]
        return LPoly(self.vars, {tuple(-min(a, 0) for a in lows): 1})

    def exact_div(self, other: "LPoly") -> "LPoly":
        """Quotient when ``other`` divides ``self``; lex-order long division."""
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        if len(other.terms) == 1:
            return self * other.inverse()
        ms, mo = self._shift(), other._shift()
        num, den = self * ms, other * mo
        lead = max(den.terms)
        lc = den.terms[lead]
        q = LPoly(self.vars)
        rem = num
        while rem:
            k = max(rem.terms)
            step = tuple(a - b for a, b in zip(k, lead))
            if min(step) < 0:
                raise NotLaurentError("denominator does not divide the numerator")
            t = LPoly(self.vars, {step: rem.terms[k] / lc})
            q = q + t
            rem = rem - t * den
        return q * mo * ms.inverse()

    def __eq__(self, other):
        return isinstance(other, LPoly) and self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"LPoly({self.vars}, {self.terms})"

    # calculus ---------------------------------------------------------------
    def diff(self, name: str, n: int = 1) -> "LPoly":
        i = self.vars.index(name)
        out = self
        for _ in range(n):
            t = {}
            for k, v in out.terms.items():
                if k[i] != 0:
                    kk = list(k)
                    kk[i] -= 1
                    t[tuple(kk)] = v * k[i]
            out = LPoly(self.vars, t)
        return out

    def integrate(self, name: str) -> "LPoly":
        """Term-wise antiderivative with zero constant; rejects 1/x terms."""
        i = self.vars.index(name)
        t = {}
        for k, v in self.terms.items():
            if k[i] == -1:
                raise NotLaurentError(f"antiderivative of 1/{name} is not a Laurent polynomial")
            kk = list(k)
            kk[i] += 1
            t[tuple(kk)] = v / kk[i]
        return LPoly(self.vars, t)

    def degree(self, name: str) -> tuple:
        i = self.vars.index(name)
        ks = [k[i] for k in self.terms]
        return (min(ks), max(ks)) if ks else (0, 0)


def antiderivative(e: Expr, wrt: str, vars: Sequence[str], params: Mapping | None = None) -> Expr:
    """Exact antiderivative of a Laurent-polynomial expression."""
    return LPoly.from_expr(as_expr(e), vars, params).integrate(wrt).to_expr()


# ---------------------------------------------------------------------------
# exact linear algebra


def solve_linear(rows: list, rhs: list) -> list | None:
    """Exact solve of A x = b over Fractions; None if inconsistent.

    Free variables are set to zero.
    """
    n = len(rows[0]) if rows else 0
    A = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        A[r] = [x / p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    if any(all(x == 0 for x in row[:n]) and row[n] != 0 for row in A):
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = A[i][n]
    return x


class WaveSolveError(ValueError):
    """No Laurent-polynomial particular solution in the searched basis."""


def solve_wave(S: LPoly, x: str, t: str, extra_t: int = 2) -> LPoly:
    """Particular Laurent solution P of (d_x^2 - d_t^2) P = S.

    Works block by block: fixed powers of the spectator variables and fixed
    total (x, t) degree, with ansatz t^j x^(e - j), 0 <= j <= jmax.
    """
    ix, it = S.vars.index(x), S.vars.index(t)
    blocks: dict = defaultdict(dict)
    for k, v in S.terms.items():
        spect = tuple(a for i, a in enumerate(k) if i not in (ix, it))
        blocks[(spect, k[ix] + k[it])][k] = v
    out = LPoly(S.vars)
    for (spect, d), terms in sorted(blocks.items()):
        e = d + 2
        jmax = max(k[it] for k in terms) + extra_t
        basis = list(range(jmax + 1))

        def mono(j):
            k = [0] * len(S.vars)
            rest = iter(spect)
            for i in range(len(k)):
                if i == ix:
                    k[i] = e - j
                elif i == it:
                    k[i] = j
                else:
                    k[i] = next(rest)
            return LPoly(S.vars, {tuple(k): 1})

        images = [mono(j).diff(x, 2) - mono(j).diff(t, 2) for j in basis]
        keys = sorted(set(terms) | {k for im in images for k in im.terms})
        rows = [[im.terms.get(k, Fraction(0)) for im in images] for k in keys]
        rhs = [terms.get(k, Fraction(0)) for k in keys]
        sol = solve_linear(rows, rhs)
        if sol is None:
            raise WaveSolveError(f"no Laurent solution for degree block {d} with spectators {spect}")
        for j, c in zip(basis, sol):
            if c:
                out = out + mono(j) * c
    return out


def as_lpoly(e, vars, params=None) -> LPoly:
    return LPoly.from_expr(as_expr(e), vars, params)

