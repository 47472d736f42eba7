"""A small expression language for scalar functions of chart coordinates.

Grammar (conventional precedence, ``^`` binds tightest and is right
associative, then unary minus, then ``*`` ``/``, then ``+`` ``-``)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Numbers are integers or decimal fractions and are always stored exactly.
Names resolve to chart coordinates, named parameters (bound at evaluation
time), the builtins ``exp`` and ``ln``, or functions from a
:class:`FunctionRegistry`.  Exponents must be rational constants.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import jets
from .jets import Jet

MAX_DEPTH = 200
BUILTINS = ("exp", "ln")


class DSLError(ValueError):
    """Base class for expression language errors."""


class ParseError(DSLError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownSymbolError(DSLError):
    def __init__(self, name: str, offset: int | None = None):
        where = f" (at byte {offset})" if offset is not None else ""
        super().__init__(f"unknown symbol {name!r}{where}")
        self.name = name
        self.offset = offset


class ArityError(DSLError):
    def __init__(self, name: str, expected: int, got: int, offset: int | None = None):
        super().__init__(f"{name} takes {expected} argument(s), got {got}")
        self.name = name
        self.expected = expected
        self.got = got
        self.offset = offset


class EvaluationError(DSLError):
    """Unbound symbol or parameter met during evaluation."""


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base class of all expression nodes.  Nodes are immutable values."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, p)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Sym(Expr):
    """A chart coordinate (or a function argument inside a body)."""

    name: str


@dataclass(frozen=True)
class Param(Expr):
    """A named constant bound at evaluation time (K, B, C1, ...)."""

    name: str


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: Fraction


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class Ln(Expr):
    arg: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class FunctionDef:
    name: str
    args: tuple
    body: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: FunctionDef
    args: tuple

    @property
    def name(self) -> str:
        return self.fn.name


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not an expression")
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    if isinstance(x, str):
        return Sym(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def const_value(e: Expr) -> Fraction | None:
    """Rational value of a tree made only of constants, else None."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        v = const_value(e.arg)
        return None if v is None else -v
    if isinstance(e, Add):
        vals = [const_value(t) for t in e.terms]
        return None if None in vals else sum(vals, Fraction(0))
    if isinstance(e, Mul):
        vals = [const_value(t) for t in e.factors]
        return None if None in vals else math.prod(vals, start=Fraction(1))
    if isinstance(e, Div):
        n, d = const_value(e.num), const_value(e.den)
        if n is None or d is None or d == 0:
            return None
        return n / d
    if isinstance(e, Pow):
        b = const_value(e.base)
        if b is None or e.exp.denominator != 1 or (b == 0 and e.exp < 0):
            return None
        return b ** int(e.exp)
    return None


# smart constructors used by programmatic building (the parser does not fold)


def add(*xs) -> Expr:
    terms = []
    c = Fraction(0)
    for x in xs:
        x = as_expr(x)
        parts = x.terms if isinstance(x, Add) else (x,)
        for p in parts:
            if isinstance(p, Const):
                c += p.value
            else:
                terms.append(p)
    if c != 0 or not terms:
        terms.append(Const(c))
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


def mul(*xs) -> Expr:
    factors = []
    c = Fraction(1)
    for x in xs:
        x = as_expr(x)
        parts = x.factors if isinstance(x, Mul) else (x,)
        for p in parts:
            if isinstance(p, Const):
                c *= p.value
            elif isinstance(p, Neg):
                c = -c
                factors.append(p.arg)
            else:
                factors.append(p)
    if c == 0:
        return ZERO
    if not factors:
        return Const(c)
    if c == -1:
        inner = factors[0] if len(factors) == 1 else Mul(tuple(factors))
        return Neg(inner)
    if c != 1:
        factors.insert(0, Const(c))
    return factors[0] if len(factors) == 1 else Mul(tuple(factors))


def neg(x) -> Expr:
    x = as_expr(x)
    if isinstance(x, Const):
        return Const(-x.value)
    if isinstance(x, Neg):
        return x.arg
    return Neg(x)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    bv = const_value(b)
    if bv is not None:
        if bv == 0:
            raise ZeroDivisionError("division by a literal zero")
        return mul(Const(1 / bv), a)
    if a == ZERO:
        return ZERO
    return Div(a, b)


def power(b, p) -> Expr:
    b = as_expr(b)
    p = Fraction(p)
    if p == 0:
        return ONE
    if p == 1:
        return b
    bv = const_value(b)
    if bv is not None and p.denominator == 1 and not (bv == 0 and p < 0):
        return Const(bv ** int(p))
    if isinstance(b, Pow) and p.denominator == 1 and b.exp.denominator == 1:
        return Pow(b.base, b.exp * p)
    return Pow(b, p)


def exp_(x) -> Expr:
    x = as_expr(x)
    return ONE if x == ZERO else Exp(x)


def ln_(x) -> Expr:
    x = as_expr(x)
    return ZERO if x == ONE else Ln(x)


def call(fn: FunctionDef, *args) -> Expr:
    if len(args) != len(fn.args):
        raise ArityError(fn.name, len(fn.args), len(args))
    return Call(fn, tuple(as_expr(a) for a in args))


# ---------------------------------------------------------------------------
# registry


class FunctionRegistry:
    """Named functions with declared argument symbols, plus antiderivatives.

    The registry is persistent: ``define`` and ``with_antiderivative`` return
    new registries and leave the receiver untouched.
    """

    def __init__(self, functions: Mapping | None = None, antiderivatives: Mapping | None = None):
        self._functions = MappingProxyType(dict(functions or {}))
        self._anti = MappingProxyType(dict(antiderivatives or {}))

    @property
    def functions(self) -> Mapping[str, FunctionDef]:
        return self._functions

    @property
    def antiderivatives(self) -> Mapping[tuple, Expr]:
        return self._anti

    def __contains__(self, name) -> bool:
        return name in self._functions

    def __getitem__(self, name) -> FunctionDef:
        return self._functions[name]

    def define(self, name: str, args: Sequence[str], body, params: Iterable[str] = ()) -> "FunctionRegistry":
        if name in BUILTINS:
            raise DSLError(f"{name!r} is a builtin")
        args = tuple(args)
        if len(set(args)) != len(args):
            raise DSLError(f"duplicate argument names in {name}")
        if isinstance(body, str):
            body = parse(body, args, self, params=params)
        fns = dict(self._functions)
        fns[name] = FunctionDef(name, args, body)
        return FunctionRegistry(fns, self._anti)

    def with_antiderivative(self, name: str, wrt: str, F, params: Iterable[str] = ()) -> "FunctionRegistry":
        fn = self._functions.get(name)
        if fn is None:
            raise UnknownSymbolError(name)
        if wrt not in fn.args:
            raise DSLError(f"{wrt!r} is not an argument of {name}")
        if isinstance(F, str):
            F = parse(F, fn.args, self, params=params)
        anti = dict(self._anti)
        anti[(name, wrt)] = F
        return FunctionRegistry(self._functions, anti)


EMPTY_REGISTRY = FunctionRegistry()


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(source, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {source[pos]!r}", _byte(source, pos))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), _byte(source, start)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte(source, n)))
    return toks


def _byte(source: str, char_pos: int) -> int:
    return len(source[:char_pos].encode("utf-8"))


def _number(text: str) -> Fraction:
    return Fraction(text)


class _Parser:
    def __init__(self, source, chart, registry, params):
        self.toks = _tokenize(source)
        self.i = 0
        self.chart = tuple(chart)
        self.registry = registry
        self.params = frozenset(params)
        self.depth = 0

    def peek(self, k=0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t.text != text or t.kind not in ("op",):
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.offset)
        return self.take()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError("expression nested too deeply", self.peek().offset)

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", t.offset)
        return e

    def expr(self) -> Expr:
        self.enter()
        terms = [self.term()]
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            terms.append(rhs if op == "+" else Neg(rhs))
        self.depth -= 1
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                factors.append(rhs)
                continue
            left = factors[0] if len(factors) == 1 else Mul(tuple(factors))
            if isinstance(rhs, Const) and rhs.value == 0:
                raise ParseError("division by literal zero", op.offset)
            if isinstance(left, Const) and isinstance(rhs, Const):
                factors = [Const(left.value / rhs.value)]
            else:
                factors = [Div(left, rhs)]
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            nxt, after = self.peek(), self.peek(1)
            if nxt.kind == "num" and not (after.kind == "op" and after.text == "^"):
                self.take()
                return Const(-_number(nxt.text))
            self.enter()
            e = Neg(self.unary())
            self.depth -= 1
            return e
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.take()
            self.enter()
            ex = self.unary()
            self.depth -= 1
            p = const_value(ex)
            if p is None:
                raise ParseError("exponent must be a rational constant", t.offset)
            return Pow(base, p)
        return base

    def atom(self) -> Expr:
        t = self.take()
        if t.kind == "num":
            return Const(_number(t.text))
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            if self.peek().kind == "op" and self.peek().text == "(":
                return self.application(t)
            if t.text in self.chart:
                return Sym(t.text)
            if t.text in self.params:
                return Param(t.text)
            raise UnknownSymbolError(t.text, t.offset)
        if t.kind == "end":
            raise ParseError("unexpected end of input", t.offset)
        raise ParseError(f"unexpected {t.text!r}", t.offset)

    def application(self, name_tok: _Tok) -> Expr:
        self.expect("(")
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        name = name_tok.text
        if name in BUILTINS:
            if len(args) != 1:
                raise ArityError(name, 1, len(args), name_tok.offset)
            return Exp(args[0]) if name == "exp" else Ln(args[0])
        if name not in self.registry:
            raise UnknownSymbolError(name, name_tok.offset)
        fn = self.registry[name]
        if len(args) != len(fn.args):
            raise ArityError(name, len(fn.args), len(args), name_tok.offset)
        return Call(fn, tuple(args))


def parse(source: str, chart: Sequence[str], registry: FunctionRegistry | None = None,
          params: Iterable[str] = ()) -> Expr:
    """Parse ``source`` into an AST over the coordinate names in ``chart``."""
    if not isinstance(source, str):
        raise TypeError("source must be a string")
    return _Parser(source, chart, registry or EMPTY_REGISTRY, params).parse()


# ---------------------------------------------------------------------------
# printer


def _fmt_fraction(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"({v.numerator}/{v.denominator})"


def _atomic(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value.denominator != 1 or e.value >= 0
    return isinstance(e, (Sym, Param, Call, Exp, Ln, Pow))


def _wrap(e: Expr) -> str:
    s = to_source(e)
    return s if _atomic(e) else f"({s})"


def to_source(e: Expr) -> str:
    """Print an AST so that parsing the result gives back the same AST."""
    if isinstance(e, Const):
        return _fmt_fraction(e.value)
    if isinstance(e, (Sym, Param)):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_source(a) for a in e.args)})"
    if isinstance(e, Exp):
        return f"exp({to_source(e.arg)})"
    if isinstance(e, Ln):
        return f"ln({to_source(e.arg)})"
    if isinstance(e, Neg):
        a = e.arg
        inner = to_source(a)
        if isinstance(a, Const) or not _atomic(a):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Add):
        parts = []
        for k, t in enumerate(e.terms):
            if isinstance(t, Add):
                s = f"({to_source(t)})"
            else:
                s = to_source(t)
            if k == 0:
                parts.append(s)
            elif isinstance(t, Neg):
                a = t.arg
                body = f"({to_source(a)})" if isinstance(a, Add) else to_source(a)
                parts.append(f" - {body}")
            else:
                parts.append(f" + {s}")
        return "".join(parts)
    if isinstance(e, Mul):
        out = []
        for f in e.factors:
            plain = isinstance(f, Const) and f.value.denominator == 1
            out.append(to_source(f) if plain else _wrap(f))
        return "*".join(out)
    if isinstance(e, Div):
        return f"{_wrap(e.num)}/{_wrap(e.den)}"
    if isinstance(e, Pow):
        b = e.base
        atomic_base = isinstance(b, (Sym, Param, Call, Exp, Ln)) or (
            isinstance(b, Const) and (b.value.denominator != 1 or b.value >= 0))
        bs = to_source(b) if atomic_base else f"({to_source(b)})"
        p = e.exp
        ps = str(p.numerator) if p.denominator == 1 and p >= 0 else f"({_fmt_fraction(p).strip('()')})"
        return f"{bs}^{ps}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# traversal helpers


def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, (Pow,)):
        return (e.base,)
    if isinstance(e, (Exp, Ln, Neg)):
        return (e.arg,)
    if isinstance(e, Call):
        return e.args
    return ()


def free_symbols(e: Expr) -> set[str]:
    """Coordinate symbols appearing in ``e`` (function bodies are closed)."""
    out: set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Sym):
            out.add(x.name)
        stack.extend(children(x))
    return out


def free_params(e: Expr) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Param):
            out.add(x.name)
        elif isinstance(x, Call):
            stack.append(x.fn.body)
        stack.extend(children(x))
    return out


def has_transcendental(e: Expr) -> bool:
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, (Exp, Ln)):
            return True
        if isinstance(x, Call):
            stack.append(x.fn.body)
        stack.extend(children(x))
    return False


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace coordinate symbols and parameters by expressions."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    memo: dict[int, Expr] = {}

    def go(x: Expr) -> Expr:
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, (Sym, Param)):
            r = mapping.get(x.name, x)
        elif isinstance(x, Const):
            r = x
        elif isinstance(x, Add):
            r = add(*[go(t) for t in x.terms])
        elif isinstance(x, Mul):
            r = mul(*[go(t) for t in x.factors])
        elif isinstance(x, Div):
            r = div(go(x.num), go(x.den))
        elif isinstance(x, Pow):
            r = power(go(x.base), x.exp)
        elif isinstance(x, Exp):
            r = exp_(go(x.arg))
        elif isinstance(x, Ln):
            r = ln_(go(x.arg))
        elif isinstance(x, Neg):
            r = neg(go(x.arg))
        elif isinstance(x, Call):
            r = Call(x.fn, tuple(go(a) for a in x.args))
        else:
            raise TypeError(x)
        memo[key] = r
        return r

    return go(e)


def inline(e: Expr) -> Expr:
    """Expand every registered-function call into its body."""
    memo: dict[int, Expr] = {}

    def go(x: Expr) -> Expr:
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Call):
            args = [go(a) for a in x.args]
            body = inline(x.fn.body)
            r = substitute(body, dict(zip(x.fn.args, args)))
        elif isinstance(x, (Sym, Param, Const)):
            r = x
        elif isinstance(x, Add):
            r = Add(tuple(go(t) for t in x.terms))
        elif isinstance(x, Mul):
            r = Mul(tuple(go(t) for t in x.factors))
        elif isinstance(x, Div):
            r = Div(go(x.num), go(x.den))
        elif isinstance(x, Pow):
            r = Pow(go(x.base), x.exp)
        elif isinstance(x, Exp):
            r = Exp(go(x.arg))
        elif isinstance(x, Ln):
            r = Ln(go(x.arg))
        elif isinstance(x, Neg):
            r = Neg(go(x.arg))
        else:
            raise TypeError(x)
        memo[key] = r
        return r

    return go(e)


def diff(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative with respect to coordinate ``name``."""
    e = inline(e)
    memo: dict[int, Expr] = {}

    def go(x: Expr) -> Expr:
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Sym):
            r = ONE if x.name == name else ZERO
        elif isinstance(x, (Const, Param)):
            r = ZERO
        elif isinstance(x, Add):
            r = add(*[go(t) for t in x.terms])
        elif isinstance(x, Mul):
            fs = x.factors
            r = add(*[mul(*fs[:k], go(f), *fs[k + 1:]) for k, f in enumerate(fs)])
        elif isinstance(x, Div):
            dn, dd = go(x.num), go(x.den)
            r = add(div(dn, x.den), neg(div(mul(x.num, dd), power(x.den, 2))))
        elif isinstance(x, Pow):
            r = mul(Const(x.exp), power(x.base, x.exp - 1), go(x.base))
        elif isinstance(x, Exp):
            r = mul(x, go(x.arg))
        elif isinstance(x, Ln):
            r = div(go(x.arg), x.arg)
        elif isinstance(x, Neg):
            r = neg(go(x.arg))
        else:
            raise TypeError(x)
        memo[key] = r
        return r

    return go(e)


def diffn(e: Expr, *names: str) -> Expr:
    for n in names:
        e = diff(e, n)
    return e


def check_antiderivatives(registry: FunctionRegistry, probes: Sequence[Mapping], tol: float = 1e-12,
                          params: Mapping | None = None) -> dict:
    """Check every registered antiderivative at the probe points.

    Probes map a function's argument names to values.  Entries without
    transcendentals are checked exactly; the others in float against ``tol``.
    Returns ``{"passed": bool, "entries": {...}, "failures": [...]}``.
    """
    entries, failures = {}, []
    for (name, wrt), F in sorted(registry.antiderivatives.items()):
        fn = registry[name]
        resid = add(diff(F, wrt), neg(inline(fn.body)))
        exact = not has_transcendental(resid)
        worst = 0
        for p in probes:
            point = {a: p[a] for a in fn.args}
            val = abs(evaluate(resid, point, params, "fraction" if exact else "float"))
            worst = max(worst, val)
            if (exact and val != 0) or (not exact and val > tol):
                failures.append({"function": name, "wrt": wrt, "point": dict(point), "residual": val})
        entries[f"{name}/{wrt}"] = worst
    return {"passed": not failures, "entries": entries, "failures": failures}


# ---------------------------------------------------------------------------
# evaluation


class _JetOps:
    def __init__(self, order, mode):
        self.order = order
        self.mode = mode

    def const(self, v):
        return Jet.constant(v, self.order, self.mode)

    def exp(self, x):
        return x.exp()

    def ln(self, x):
        return x.ln()

    def pow(self, x, p):
        return x.powq(p)


class _ScalarOps:
    """Plain scalar evaluation in Fraction, float or mpmath arithmetic."""

    def __init__(self, kind):
        self.kind = kind
        if kind == "mpmath":
            import mpmath

            self.mp = mpmath

    def const(self, v):
        if self.kind == "fraction":
            return Fraction(v)
        if self.kind == "float":
            return float(v)
        return self.mp.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else self.mp.mpf(v)

    def exp(self, x):
        if self.kind == "fraction":
            raise jets.RationalModeError("exp() is not available in exact arithmetic")
        return self.mp.exp(x) if self.kind == "mpmath" else math.exp(x)

    def ln(self, x):
        if self.kind == "fraction":
            raise jets.RationalModeError("ln() is not available in exact arithmetic")
        if x <= 0:
            raise jets.JetDomainError(f"ln of non-positive value {x}")
        return self.mp.log(x) if self.kind == "mpmath" else math.log(x)

    def pow(self, x, p):
        p = Fraction(p)
        if p.denominator != 1 and x < 0:
            raise jets.JetDomainError("negative base with non-integer exponent")
        if p.denominator == 1:
            if x == 0 and p < 0:
                raise jets.JetDomainError("division by zero")
            return x ** int(p)
        if self.kind == "fraction":
            v = jets._rational_root(x, p)
            return Fraction(int(v.numerator), int(v.denominator))
        if self.kind == "mpmath":
            return x ** (self.mp.mpf(p.numerator) / p.denominator)
        return x ** float(p)


def _evaluate(e: Expr, env: dict, params: Mapping, ops, memo: dict | None = None) -> object:
    memo = {} if memo is None else memo

    def go(x: Expr):
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Const):
            r = ops.const(x.value)
        elif isinstance(x, Sym):
            if x.name not in env:
                raise EvaluationError(f"coordinate {x.name!r} is not bound")
            r = env[x.name]
        elif isinstance(x, Param):
            if x.name not in params:
                raise EvaluationError(f"parameter {x.name!r} is not bound")
            r = ops.const(params[x.name])
        elif isinstance(x, Add):
            it = iter(x.terms)
            r = go(next(it))
            for t in it:
                r = r + go(t)
        elif isinstance(x, Mul):
            it = iter(x.factors)
            r = go(next(it))
            for t in it:
                r = r * go(t)
        elif isinstance(x, Div):
            den = go(x.den)
            if not isinstance(den, Jet) and den == 0:
                raise jets.JetDomainError("division by zero")
            r = go(x.num) / den
        elif isinstance(x, Pow):
            r = ops.pow(go(x.base), x.exp)
        elif isinstance(x, Exp):
            r = ops.exp(go(x.arg))
        elif isinstance(x, Ln):
            r = ops.ln(go(x.arg))
        elif isinstance(x, Neg):
            r = -go(x.arg)
        elif isinstance(x, Call):
            inner = {a: go(v) for a, v in zip(x.fn.args, x.args)}
            r = _evaluate(x.fn.body, inner, params, ops)
        else:
            raise TypeError(x)
        memo[key] = r
        return r

    return go(e)


def _jet_env(point, order, mode, chart):
    names = tuple(chart) if chart is not None else tuple(point)
    if len(names) > jets.NVARS:
        raise ValueError("at most four coordinates")
    missing = [n for n in names if n not in point]
    if missing:
        raise EvaluationError(f"coordinates {missing} are not bound")
    return {n: Jet.variable(point[n], k, order, mode) for k, n in enumerate(names)}


def eval_jet(e: Expr, point: Mapping[str, object], order: int, mode: str = "float",
             params: Mapping[str, object] | None = None,
             chart: Sequence[str] | None = None) -> Jet:
    """Truncated Taylor expansion of ``e`` at ``point``.

    ``chart`` fixes which coordinate maps to which jet axis; by default the
    insertion order of ``point`` is used.
    """
    return Jet(eval_jets([e], point, order, mode, params, chart)[0], order, mode)


def eval_jets(exprs: Sequence[Expr], point: Mapping[str, object], order: int, mode: str = "float",
              params: Mapping[str, object] | None = None,
              chart: Sequence[str] | None = None) -> np.ndarray:
    """Coefficient array (len(exprs), ncoef) sharing one evaluation memo."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if mode == "rational" and any(has_transcendental(e) for e in exprs):
        raise jets.RationalModeError("exp/ln are not available in rational mode")
    env = _jet_env(point, order, mode, chart)
    ops = _JetOps(order, mode)
    memo: dict = {}
    params = dict(params or {})
    out = jets.zeros((len(exprs),), order, mode)
    for k, e in enumerate(exprs):
        v = _evaluate(e, env, params, ops, memo)
        out[k] = v.coeffs if isinstance(v, Jet) else Jet.constant(v, order, mode).coeffs
    return out


def evaluate(e: Expr, point: Mapping[str, object], params: Mapping[str, object] | None = None,
             arithmetic: str = "fraction"):
    """Plain pointwise value in ``"fraction"``, ``"float"`` or ``"mpmath"`` arithmetic."""
    ops = _ScalarOps(arithmetic)
    if arithmetic == "fraction":
        env = {k: Fraction(v) for k, v in point.items()}
    elif arithmetic == "float":
        env = {k: float(v) for k, v in point.items()}
    else:
        env = {k: ops.const(Fraction(v)) if isinstance(v, (int, Fraction)) else ops.mp.mpf(v)
               for k, v in point.items()}
    return _evaluate(e, env, dict(params or {}), ops)
