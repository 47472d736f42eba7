"""Truncated multivariate Taylor jets in four variables.

A jet of order ``N`` stores the Taylor coefficients ``c[m] = (d^m f)(x0) / m!``
for every multi-index ``m`` with total degree at most ``N``.  Coefficients are
kept in a dense vector ordered by total degree, so truncating to a lower order
is a prefix slice.  Two coefficient fields are supported: binary floats
(``"float"``) and exact rationals backed by :class:`gmpy2.mpq` (``"rational"``).

Besides the scalar :class:`Jet` type, the module exposes array level kernels
(``jmul``, ``jeinsum``, ``jpartial`` ...) acting on numpy arrays whose last axis
is the coefficient axis.  The tensor module builds on those.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq

NVARS = 4
MODES = ("float", "rational")

# Hook for higher precision float jets (e.g. np.longdouble).
FLOAT_DTYPE = np.float64


class JetError(ArithmeticError):
    """Base class for jet arithmetic failures."""


class JetModeError(JetError):
    """Operands disagree on order or coefficient field."""


class JetOrderError(JetError):
    """Not enough jet order left for the requested operation."""


class JetDomainError(JetError):
    """Zero divisor, log of a non-positive value or similar."""


class RationalModeError(JetDomainError):
    """A transcendental operation was requested on exact rational jets."""


# ---------------------------------------------------------------------------
# index tables


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= order, graded then lexicographic."""
    out = []
    for deg in range(order + 1):
        block = []
        for combo in combinations_with_replacement(range(NVARS), deg):
            m = [0] * NVARS
            for k in combo:
                m[k] += 1
            block.append(tuple(m))
        block.sort(reverse=True)
        out.extend(block)
    return tuple(out)


@lru_cache(maxsize=None)
def _index(order: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomials(order))}


def ncoef(order: int) -> int:
    return math.comb(order + NVARS, NVARS)


@lru_cache(maxsize=None)
def _mul_tables(order: int):
    """Pair tables (I, J, starts) for the truncated Cauchy product."""
    mons = monomials(order)
    idx = _index(order)
    pairs = []
    for i, a in enumerate(mons):
        da = sum(a)
        for j, b in enumerate(mons):
            if da + sum(b) > order:
                continue
            k = idx[tuple(x + y for x, y in zip(a, b))]
            pairs.append((k, i, j))
    pairs.sort()
    K = np.array([p[0] for p in pairs])
    I = np.array([p[1] for p in pairs])
    J = np.array([p[2] for p in pairs])
    starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
    return I, J, starts


@lru_cache(maxsize=None)
def _partial_tables(order: int, axis: int):
    """Source indices and integer factors mapping order -> order-1 derivative."""
    idx = _index(order)
    src, fac = [], []
    for m in monomials(order - 1):
        mm = list(m)
        mm[axis] += 1
        src.append(idx[tuple(mm)])
        fac.append(m[axis] + 1)
    return np.array(src), np.array(fac)


# ---------------------------------------------------------------------------
# coefficient helpers


def coerce(x, mode: str):
    """Convert a scalar to the coefficient field of ``mode``."""
    if mode == "float":
        if isinstance(x, (Fraction, type(mpq()))):
            return FLOAT_DTYPE(x.numerator) / FLOAT_DTYPE(x.denominator)
        return FLOAT_DTYPE(x)
    if mode == "rational":
        if isinstance(x, float):
            raise JetModeError(f"float {x!r} given to a rational jet")
        if isinstance(x, (np.integer,)):
            x = int(x)
        return mpq(x)
    raise ValueError(f"unknown mode {mode!r}")


def zeros(shape, order: int, mode: str) -> np.ndarray:
    shape = tuple(np.atleast_1d(shape)) if shape != () else ()
    full = shape + (ncoef(order),)
    if mode == "float":
        return np.zeros(full, dtype=FLOAT_DTYPE)
    out = np.empty(full, dtype=object)
    out.fill(mpq(0))
    return out


def order_of(a: np.ndarray) -> int:
    """Jet order encoded by the length of the coefficient axis."""
    n = a.shape[-1]
    k = 0
    while ncoef(k) < n:
        k += 1
    if ncoef(k) != n:
        raise JetOrderError(f"{n} is not a valid coefficient count")
    return k


def jtruncate(a: np.ndarray, order: int) -> np.ndarray:
    return a[..., : ncoef(order)]


def jmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise truncated product of two jet arrays of equal order."""
    order = order_of(a)
    I, J, starts = _mul_tables(order)
    prod = a[..., I] * b[..., J]
    return np.add.reduceat(prod, starts, axis=-1)


def jeinsum(spec: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Einstein contraction of two jet arrays, multiplying jets pointwise.

    ``spec`` addresses the tensor axes only, e.g. ``"ab,bc->ac"``; the
    coefficient axis is handled internally.
    """
    order = min(order_of(a), order_of(b))
    a = jtruncate(a, order)
    b = jtruncate(b, order)
    I, J, starts = _mul_tables(order)
    lhs, out = spec.split("->")
    sa, sb = lhs.split(",")
    full = f"{sa}z,{sb}z->{out}z"
    prod = np.einsum(full, a[..., I], b[..., J])
    return np.add.reduceat(prod, starts, axis=-1)


def jpartial(a: np.ndarray, axis: int) -> np.ndarray:
    order = order_of(a)
    if order < 1:
        raise JetOrderError("cannot differentiate an order-0 jet")
    src, fac = _partial_tables(order, axis)
    return a[..., src] * fac


def jgrad(a: np.ndarray) -> np.ndarray:
    """Stack of partial derivatives along a new trailing tensor axis."""
    return np.stack([jpartial(a, k) for k in range(NVARS)], axis=-2)


def jcompose(a: np.ndarray, series: Sequence) -> np.ndarray:
    """Evaluate sum_k series[k] * (a - a0)^k by Horner's rule."""
    nil = a.copy()
    nil[..., 0] = nil[..., 0] * 0
    out = zeros(a.shape[:-1], order_of(a), _mode_of_array(a))
    out[..., 0] = series[-1]
    for c in reversed(series[:-1]):
        out = jmul(out, nil)
        out[..., 0] = out[..., 0] + c
    return out


def _mode_of_array(a: np.ndarray) -> str:
    return "rational" if a.dtype == object else "float"


# series coefficient generators (scalar constant term -> list of Taylor coefficients)


def _exp_series(x0, order, mode):
    if mode == "rational":
        raise RationalModeError("exp() is not available in rational mode")
    e = np.exp(x0)
    return [e / math.factorial(k) for k in range(order + 1)]


def _ln_series(x0, order, mode):
    if mode == "rational":
        raise RationalModeError("ln() is not available in rational mode")
    if not x0 > 0:
        raise JetDomainError(f"ln of non-positive value {x0}")
    out = [np.log(x0)]
    for k in range(1, order + 1):
        out.append((-1) ** (k + 1) / (k * x0**k))
    return out


def _recip_series(x0, order, mode):
    if x0 == 0:
        raise JetDomainError("division by a jet with zero constant term")
    inv = 1 / x0
    out = [inv]
    for _ in range(order):
        out.append(-out[-1] * inv)
    return out


def _rational_root(x0, p: Fraction):
    """Exact x0**p for rational x0, or raise when the result is irrational."""
    x0 = mpq(x0)
    if p.denominator == 1:
        if x0 == 0 and p < 0:
            raise JetDomainError("zero raised to a negative power")
        return x0 ** int(p)
    if x0 < 0:
        raise JetDomainError("negative base with non-integer exponent")
    q = p.denominator
    n, exact_n = gmpy2.iroot(gmpy2.mpz(x0.numerator), q)
    d, exact_d = gmpy2.iroot(gmpy2.mpz(x0.denominator), q)
    if not (exact_n and exact_d):
        raise RationalModeError(f"{x0}**{p} is not rational")
    root = mpq(n, d)
    if p.numerator < 0 and root == 0:
        raise JetDomainError("zero raised to a negative power")
    return root ** p.numerator


def _pow_series(x0, order, mode, p: Fraction):
    if p.denominator == 1 and p >= 0:
        # polynomial case, valid for any base
        n = int(p)
        out = []
        for k in range(order + 1):
            out.append(math.comb(n, k) * x0 ** (n - k) if k <= n else x0 * 0)
        return out
    if mode == "float":
        if p.denominator != 1 and x0 < 0:
            raise JetDomainError("negative base with non-integer exponent")
        if x0 == 0:
            raise JetDomainError("zero base with negative or fractional exponent")
        lead = np.power(x0, float(p))
        pf = float(p)
    else:
        if x0 == 0:
            raise JetDomainError("zero base with negative or fractional exponent")
        lead = _rational_root(x0, p)
        pf = mpq(p.numerator, p.denominator)
    out = []
    binom = 1 if mode == "float" else mpq(1)
    inv = 1 / x0
    term = lead
    for k in range(order + 1):
        out.append(binom * term)
        binom = binom * (pf - k) / (k + 1)
        term = term * inv
    return out


def japply(a: np.ndarray, kind: str, p: Fraction | None = None) -> np.ndarray:
    """Apply exp / ln / recip / pow to every jet of an array."""
    order = order_of(a)
    mode = _mode_of_array(a)
    flat = a.reshape(-1, a.shape[-1])
    out = np.empty_like(flat)
    for r in range(flat.shape[0]):
        x0 = flat[r, 0]
        if kind == "exp":
            s = _exp_series(x0, order, mode)
        elif kind == "ln":
            s = _ln_series(x0, order, mode)
        elif kind == "recip":
            s = _recip_series(x0, order, mode)
        elif kind == "pow":
            s = _pow_series(x0, order, mode, Fraction(p))
        else:
            raise ValueError(kind)
        out[r] = jcompose(flat[r], s)
    return out.reshape(a.shape)


# ---------------------------------------------------------------------------
# scalar jet type


class Jet:
    """Immutable truncated Taylor expansion of a scalar in four variables.

    >>> x = Jet.variable(2, 0, order=1)
    >>> y = Jet.variable(3, 1, order=1)
    >>> (x * y).coefficient((0, 1, 0, 0))
    2.0
    """

    __slots__ = ("coeffs", "order", "mode")

    def __init__(self, coeffs: np.ndarray, order: int, mode: str = "float"):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if len(coeffs) != ncoef(order):
            raise JetOrderError(f"order {order} needs {ncoef(order)} coefficients")
        self.coeffs = coeffs
        self.order = order
        self.mode = mode

    # constructors -----------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, mode: str = "float") -> "Jet":
        c = zeros((), order, mode)
        c[0] = coerce(value, mode)
        return cls(c, order, mode)

    @classmethod
    def variable(cls, value, axis: int, order: int, mode: str = "float") -> "Jet":
        c = zeros((), order, mode)
        c[0] = coerce(value, mode)
        if order >= 1:
            e = [0] * NVARS
            e[axis] = 1
            c[_index(order)[tuple(e)]] = coerce(1, mode)
        return cls(c, order, mode)

    @classmethod
    def from_dict(cls, terms: dict, order: int, mode: str = "float") -> "Jet":
        """Build from ``{multi_index: coefficient}``; higher degrees are dropped."""
        c = zeros((), order, mode)
        idx = _index(order)
        for m, v in terms.items():
            m = tuple(m) + (0,) * (NVARS - len(m))
            if sum(m) <= order:
                c[idx[m]] = coerce(v, mode)
        return cls(c, order, mode)

    # access -------------------------------------------------------------------
    @property
    def value(self):
        return self.coeffs[0]

    def coefficient(self, m: Sequence[int]):
        m = tuple(m) + (0,) * (NVARS - len(m))
        if sum(m) > self.order:
            raise JetOrderError(f"multi-index {m} exceeds order {self.order}")
        return self.coeffs[_index(self.order)[m]]

    def derivative(self, m: Sequence[int]):
        """Partial derivative value d^m f(x0) (coefficient times m!)."""
        c = self.coefficient(m)
        f = 1
        for k in m:
            f *= math.factorial(k)
        return c * f

    def as_dict(self) -> dict:
        return {m: c for m, c in zip(monomials(self.order), self.coeffs) if c != 0}

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(f"cannot raise order {self.order} to {order}")
        return Jet(self.coeffs[: ncoef(order)].copy(), order, self.mode)

    def partial(self, axis: int) -> "Jet":
        return Jet(jpartial(self.coeffs, axis), self.order - 1, self.mode)

    # arithmetic ---------------------------------------------------------------
    def _check(self, other: "Jet"):
        if other.order != self.order or other.mode != self.mode:
            raise JetModeError(
                f"jet mismatch: order {self.order}/{other.order}, mode {self.mode}/{other.mode}"
            )

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.constant(other, self.order, self.mode)

    def __add__(self, other):
        o = self._lift(other)
        return Jet(self.coeffs + o.coeffs, self.order, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.order, self.mode)

    def __sub__(self, other):
        o = self._lift(other)
        return Jet(self.coeffs - o.coeffs, self.order, self.mode)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        return Jet(jmul(self.coeffs, other.coeffs), self.order, self.mode)

    __rmul__ = __mul__

    def scale(self, c) -> "Jet":
        return Jet(self.coeffs * coerce(c, self.mode), self.order, self.mode)

    def reciprocal(self) -> "Jet":
        return Jet(japply(self.coeffs, "recip"), self.order, self.mode)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            c = coerce(other, self.mode)
            if c == 0:
                raise JetDomainError("division by zero")
            return Jet(self.coeffs / c, self.order, self.mode)
        self._check(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, p):
        return self.powq(p)

    def exp(self) -> "Jet":
        return Jet(japply(self.coeffs, "exp"), self.order, self.mode)

    def ln(self) -> "Jet":
        return Jet(japply(self.coeffs, "ln"), self.order, self.mode)

    def powq(self, p) -> "Jet":
        p = Fraction(p)
        if p == 0:
            return Jet.constant(1, self.order, self.mode)
        return Jet(japply(self.coeffs, "pow", p), self.order, self.mode)

    # comparison -------------------------------------------------------------
    def max_abs(self):
        return max(abs(c) for c in self.coeffs)

    def allclose(self, other: "Jet", tol: float = 0.0) -> bool:
        self._check(other)
        diff = self.coeffs - other.coeffs
        if self.mode == "rational" and tol == 0:
            return all(d == 0 for d in diff)
        return all(abs(d) <= tol for d in diff)

    def __repr__(self):
        terms = ", ".join(f"{m}: {c}" for m, c in self.as_dict().items())
        return f"Jet(order={self.order}, mode={self.mode}, {{{terms}}})"

