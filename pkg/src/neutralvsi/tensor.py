"""Pointwise tensor calculus on jets of a metric.

Conventions::

    Gamma^a_{bc} = 1/2 g^{ad} (g_{db,c} + g_{dc,b} - g_{bc,d})
    R^a_{bcd}    = Gamma^a_{bd,c} - Gamma^a_{bc,d}
                   + Gamma^a_{ce} Gamma^e_{bd} - Gamma^a_{de} Gamma^e_{bc}
    R_{bd}       = R^a_{bad}

Covariant derivatives append the new index last, ``T_{ab;c}``.  Every
component array keeps the jet coefficient axis last, so a metric of jet
order N gives Christoffel symbols of order N-1, curvature of order N-2 and
its first covariant derivative of order N-3.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from gmpy2 import mpq

from . import jets
from .exprdsl import Expr, as_expr, eval_jets, free_symbols
from .jets import jeinsum, jgrad, jtruncate, order_of

N = 4


class GeometryError(ValueError):
    """Base class for geometric precondition failures."""


class SingularMetricError(GeometryError):
    pass


class InsufficientOrderError(GeometryError):
    pass


class FrameError(GeometryError):
    pass


@dataclass(frozen=True)
class Chart:
    names: tuple
    signature: str = "neutral"

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) != N or len(set(names)) != N:
            raise ValueError(f"a chart needs four distinct coordinate names, got {names}")

    def index(self, name: str) -> int:
        return self.names.index(name)

    def point(self, values) -> dict:
        """Normalise a point given as mapping or sequence to a dict."""
        if isinstance(values, Mapping):
            return {n: values[n] for n in self.names}
        vals = tuple(values)
        if len(vals) != N:
            raise ValueError("a point needs four coordinates")
        return dict(zip(self.names, vals))


FRAME_ETA = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


@dataclass(frozen=True)
class NullFrame:
    """Covectors (l1, n1, l2, n2) with ds^2 = 2 (l1 n1 + l2 n2).

    Frame vectors are the metric duals of the covectors, so index 0 is the
    null vector raised from l1, index 1 the one raised from n1, and so on.
    """

    covectors: tuple
    labels: tuple = ("l1", "n1", "l2", "n2")

    def __post_init__(self):
        cov = tuple(tuple(as_expr(c) for c in row) for row in self.covectors)
        if len(cov) != N or any(len(r) != N for r in cov):
            raise ValueError("a null frame needs four covectors with four components")
        object.__setattr__(self, "covectors", cov)


@dataclass(frozen=True)
class KundtData:
    """Where the Kundt structure sits inside a metric instance."""

    v: str
    u: str
    H: Expr
    W: Mapping[str, Expr]
    transverse: tuple


@dataclass(frozen=True)
class MetricInstance:
    chart: Chart
    g: tuple
    frame: NullFrame | None = None
    family: str = "custom"
    params: Mapping = field(default_factory=dict)
    bindings: Mapping = field(default_factory=dict)
    kundt: KundtData | None = None
    box: Mapping = field(default_factory=dict)

    def __post_init__(self):
        g = tuple(tuple(as_expr(c) for c in row) for row in self.g)
        if len(g) != N or any(len(r) != N for r in g):
            raise ValueError("metric must be 4x4")
        for a in range(N):
            for b in range(a + 1, N):
                if g[a][b] != g[b][a]:
                    raise ValueError(f"metric is not symmetric in ({a},{b})")
        allowed = set(self.chart.names)
        for row in g:
            for c in row:
                extra = free_symbols(c) - allowed
                if extra:
                    raise ValueError(f"metric component uses unknown coordinates {sorted(extra)}")
        object.__setattr__(self, "g", g)

    def components(self) -> list:
        return [self.g[a][b] for a in range(N) for b in range(N)]

    def metric_jets(self, point, order: int, mode: str) -> np.ndarray:
        p = self.chart.point(point)
        arr = eval_jets(self.components(), p, order, mode, self.bindings, self.chart.names)
        return arr.reshape(N, N, -1)


# ---------------------------------------------------------------------------
# small exact linear algebra


def _const(value, mode):
    return jets.coerce(value, mode)


def exact_inverse(M) -> np.ndarray:
    """Gauss-Jordan inverse over mpq (object arrays)."""
    n = len(M)
    A = [[mpq(M[i][j]) for j in range(n)] + [mpq(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise SingularMetricError("metric is singular at this point")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = A[i][j + n]
    return out


def matrix_inverse(M: np.ndarray, mode: str) -> np.ndarray:
    if mode == "rational":
        return exact_inverse(M)
    if abs(np.linalg.det(M.astype(float))) < 1e-300:
        raise SingularMetricError("metric is singular at this point")
    return np.linalg.inv(M.astype(jets.FLOAT_DTYPE))


def _constant_jets(M: np.ndarray, order: int, mode: str) -> np.ndarray:
    out = jets.zeros(M.shape, order, mode)
    out[..., 0] = M
    return out


def inverse_jets(g: np.ndarray) -> np.ndarray:
    """Jet of the inverse metric via the Neumann series around g(x0)."""
    order = order_of(g)
    mode = "rational" if g.dtype == object else "float"
    G0inv = matrix_inverse(g[..., 0], mode)
    Ginv = _constant_jets(G0inv, order, mode)
    E = g.copy()
    E[..., 0] = E[..., 0] * 0
    B = -jeinsum("ab,bc->ac", Ginv, E)
    term = Ginv
    total = Ginv.copy()
    for _ in range(order):
        term = jeinsum("ab,bc->ac", B, term)
        total = total + term
    return total


def nabla(T: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Covariant derivative of an all-lower tensor jet array.

    ``T`` has shape (4,)*r + (ncoef,), ``gamma`` is Gamma^a_{bc}.  The result
    carries the derivative index last and one jet order less.
    """
    r = T.ndim - 1
    k = order_of(T)
    if k < 1:
        raise InsufficientOrderError("no jet order left for a covariant derivative")
    out = jgrad(T)
    if r == 0:
        return out
    G = jtruncate(gamma, k - 1)
    Tt = jtruncate(T, k - 1)
    letters = "pqrstuvw"[:r]
    for i in range(r):
        g_spec = "f" + "c" + letters[i]
        t_spec = letters[:i] + "f" + letters[i + 1:]
        out = out - jeinsum(f"{g_spec},{t_spec}->{letters}c", G, Tt)
    return out


# ---------------------------------------------------------------------------
# curvature bundle


@dataclass
class CurvatureBundle:
    """Jet-valued curvature data at one point.

    Array attributes keep the jet coefficient axis last; ``value(name)``
    returns the pointwise (order 0) component array.
    """

    point: dict
    order: int
    mode: str
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    christoffel: np.ndarray
    riemann_up: np.ndarray | None = None
    riemann: np.ndarray | None = None
    ricci: np.ndarray | None = None
    scalar: np.ndarray | None = None
    weyl: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def value(self, name: str) -> np.ndarray:
        arr = getattr(self, name) if not name.startswith("nabla_") else covariant_derivative(self, name[6:])
        return arr[..., 0]

    @property
    def has_derivatives(self) -> bool:
        return self.order >= 3


def connection_at(m: MetricInstance, point, order: int, mode: str = "float") -> CurvatureBundle:
    if order < 1:
        raise InsufficientOrderError("Christoffel symbols need metric order >= 1")
    p = m.chart.point(point)
    g = m.metric_jets(p, order, mode)
    ginv = inverse_jets(g)
    dg = jgrad(g)  # dg[a, b, c] = d_c g_ab
    half = _const(Fraction(1, 2), mode)
    lower = (dg + dg.transpose(0, 2, 1, 3) - dg.transpose(2, 0, 1, 3)) * half
    gamma = jeinsum("ad,dbc->abc", ginv, lower)
    return CurvatureBundle(point=p, order=order, mode=mode, g=g, ginv=ginv, dg=dg, christoffel=gamma)


def curvature_at(m: MetricInstance, point, order: int = 3, mode: str = "float") -> CurvatureBundle:
    """Metric, inverse, Christoffel, Riemann, Ricci, scalar and Weyl jets."""
    if order < 2:
        raise InsufficientOrderError("curvature needs metric jets of order >= 2")
    b = connection_at(m, point, order, mode)
    gamma = b.christoffel
    k = order - 2
    dG = jgrad(gamma)  # dG[a, b, x, y] = d_y Gamma^a_{bx}
    Gt = jtruncate(gamma, k)
    Rup = (dG.transpose(0, 1, 3, 2, 4) - dG
           + jeinsum("ace,ebd->abcd", Gt, Gt) - jeinsum("ade,ebc->abcd", Gt, Gt))
    gt = jtruncate(b.g, k)
    git = jtruncate(b.ginv, k)
    R = jeinsum("ae,ebcd->abcd", gt, Rup)
    ric = sum(Rup[a, :, a, :] for a in range(N))
    scal = jeinsum("bd,bd->", git, ric)
    half = _const(Fraction(1, 2), mode)
    sixth = _const(Fraction(1, 6), mode)
    gR = jeinsum("ac,bd->abcd", gt, ric)  # g_ac R_bd
    # g_ac R_bd - g_ad R_bc - g_bc R_ad + g_bd R_ac
    mix = gR - gR.transpose(0, 1, 3, 2, 4) - gR.transpose(1, 0, 2, 3, 4) + gR.transpose(1, 0, 3, 2, 4)
    gg = jeinsum("ac,bd->abcd", gt, gt)
    ggs = gg - gg.transpose(0, 1, 3, 2, 4)
    C = R - mix * half + jeinsum(",abcd->abcd", scal, ggs) * sixth
    b.riemann_up, b.riemann, b.ricci, b.scalar, b.weyl = Rup, R, ric, scal, C
    return b


def covariant_derivative(bundle: CurvatureBundle, tensor: str) -> np.ndarray:
    """First covariant derivative of a named bundle field (index appended last)."""
    cache = bundle._cache
    if tensor in cache:
        return cache[tensor]
    sources = {"metric": bundle.g, "riemann": bundle.riemann, "ricci": bundle.ricci,
               "scalar": bundle.scalar, "weyl": bundle.weyl}
    if tensor == "einstein":
        k = order_of(bundle.ricci)
        half = _const(Fraction(1, 2), bundle.mode)
        src = bundle.ricci - jeinsum(",ab->ab", bundle.scalar, jtruncate(bundle.g, k)) * half
    elif tensor in sources:
        src = sources[tensor]
    else:
        raise KeyError(f"unknown tensor field {tensor!r}")
    if src is None:
        raise InsufficientOrderError(f"{tensor} is not available in this bundle")
    if order_of(src) < 1:
        raise InsufficientOrderError(f"jet order exhausted for the derivative of {tensor}")
    out = nabla(src, bundle.christoffel)
    cache[tensor] = out
    return out


# ---------------------------------------------------------------------------
# frames and kinematics


def covector_jets(m: MetricInstance, covector: Sequence, point, order: int, mode: str) -> np.ndarray:
    p = m.chart.point(point)
    return eval_jets([as_expr(c) for c in covector], p, order, mode, m.bindings, m.chart.names)


def frame_vectors(m: MetricInstance, point, mode: str = "float", frame: NullFrame | None = None) -> np.ndarray:
    """Rows are the four frame vectors (raised covectors) at ``point``."""
    frame = frame or m.frame
    if frame is None:
        raise FrameError(f"family {m.family!r} carries no null frame")
    g = m.metric_jets(point, 0, mode)[..., 0]
    ginv = matrix_inverse(g, mode)
    theta = np.array([covector_jets(m, c, point, 0, mode)[:, 0] for c in frame.covectors], dtype=g.dtype)
    return theta @ ginv.T


def frame_gram(m: MetricInstance, point, mode: str = "float") -> np.ndarray:
    E = frame_vectors(m, point, mode)
    g = m.metric_jets(point, 0, mode)[..., 0]
    return E @ g @ E.T


def frame_components(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Project an all-lower tensor (values, no jet axis) onto frame vectors."""
    out = T
    for _ in range(T.ndim):
        out = np.tensordot(out, E.T, axes=([0], [0]))
    return out


def _dot(g, x, y):
    return x @ g @ y


def complete_frame(g: np.ndarray, ell_up: np.ndarray, mode: str):
    """Deterministic Gram-Schmidt completion (n, w1, w2) around a null vector."""
    ginv = matrix_inverse(g, mode)
    seeds = [ginv[:, i] for i in range(N)]  # raised coordinate covectors
    n0 = None
    for s in seeds:
        c = _dot(g, ell_up, s)
        if c != 0 and (mode == "rational" or abs(c) > 1e-12):
            n0 = s / c
            break
    if n0 is None:
        raise FrameError("cannot find a vector with nonzero product against l")
    half = _const(Fraction(1, 2), mode)
    n = n0 - ell_up * (_dot(g, n0, n0) * half)
    ws = []
    for s in seeds:
        w = s - ell_up * _dot(g, s, n) - n * _dot(g, s, ell_up)
        cand = ws + [w]
        M = np.array(cand, dtype=float)
        if np.linalg.matrix_rank(M, tol=1e-10) == len(cand):
            ws = cand
        if len(ws) == 2:
            break
    if len(ws) < 2:
        raise FrameError("frame completion failed")
    return n, ws[0], ws[1]


@dataclass
class KundtKinematics:
    geodesic: object
    expansion: object
    shear: object
    twist: object
    L: np.ndarray
    h: np.ndarray
    null_norm: object
    affinity: object

    def residuals(self) -> dict:
        return {"geodesic": self.geodesic, "expansion": self.expansion,
                "shear": self.shear, "twist": self.twist}


def _maxabs(x):
    flat = np.ravel(np.asarray(x, dtype=object))
    return max((abs(v) for v in flat), default=0)


def kundt_kinematics(m: MetricInstance, ell: Sequence, point, mode: str = "float",
                     tol: float = 1e-10) -> KundtKinematics:
    """Optical scalars of the covector field ``ell`` at ``point``.

    The transverse space is spanned by the frame's l2, n2 when ``m`` carries a
    frame whose first covector is ``ell``; otherwise by a Gram-Schmidt
    completion seeded with the raised coordinate covectors in chart order.
    """
    b = connection_at(m, point, 1, mode)
    lj = covector_jets(m, ell, point, 1, mode)
    dl = nabla(lj, b.christoffel)[..., 0]  # dl[a, b] = l_{a;b}
    g = b.g[..., 0]
    ginv = b.ginv[..., 0]
    l_low = lj[:, 0]
    l_up = ginv @ l_low
    null_norm = l_low @ l_up
    if (mode == "rational" and null_norm != 0) or (mode == "float" and abs(null_norm) > tol):
        raise FrameError(f"covector is not null (l.l = {null_norm})")
    G = dl @ l_up  # l^b l_{a;b}
    k = int(np.argmax([abs(float(x)) for x in l_low]))
    kappa = G[k] / l_low[k]
    geo = _maxabs(G - kappa * l_low)
    theta = np.sum(ginv * dl)
    if m.frame is not None and tuple(as_expr(c) for c in ell) == m.frame.covectors[0]:
        E = frame_vectors(m, point, mode)
        w1, w2 = E[2], E[3]
    else:
        _, w1, w2 = complete_frame(g, l_up, mode)
    W = np.array([w1, w2])
    L = W @ dl.T @ W.T  # L_ij = l_{a;b} w_i^a w_j^b
    h = W @ g @ W.T
    hinv = matrix_inverse(h, mode)
    exp_L = np.sum(hinv * L.T)
    half = _const(Fraction(1, 2), mode)
    sym = (L + L.T) * half
    shear = _maxabs(sym - h * (exp_L * half))
    twist = abs((L[0, 1] - L[1, 0]) * half)
    return KundtKinematics(geodesic=geo, expansion=abs(theta), shear=shear, twist=twist,
                           L=L, h=h, null_norm=null_norm, affinity=kappa)


@dataclass
class Recurrence:
    k: np.ndarray
    residual: object
    norm: object
    passed: bool


def walker_recurrence(m: MetricInstance, l1: Sequence, l2: Sequence | None, point, mode: str = "float",
                      rel_tol: float = 1e-9) -> Recurrence:
    """Least-squares recurrence vector of the null bivector l1 ^ l2.

    With ``l2`` omitted the plain null line l1 is tested instead.
    """
    b = connection_at(m, point, 1, mode)
    a = covector_jets(m, l1, point, 1, mode)
    if l2 is None:
        F = a
    else:
        c = covector_jets(m, l2, point, 1, mode)
        F = jeinsum("a,b->ab", a, c) - jeinsum("a,b->ab", c, a)
    dF = nabla(F, b.christoffel)[..., 0]
    F0 = F[..., 0]
    if F0.ndim == 2:
        iu = np.triu_indices(N, 1)
        f = F0[iu]
        df = np.array([dF[..., cc][iu] for cc in range(N)])
    else:
        f = F0
        df = np.array([dF[:, cc] for cc in range(N)])
    ff = f @ f
    if ff == 0:
        raise GeometryError("the bivector vanishes at this point")
    k = np.array([(f @ df[cc]) / ff for cc in range(N)], dtype=f.dtype)
    res = max(_maxabs(df[cc] - k[cc] * f) for cc in range(N))
    norm = _maxabs(f)
    passed = res == 0 if mode == "rational" else res <= rel_tol * float(norm)
    return Recurrence(k=k, residual=res, norm=norm, passed=bool(passed))


def signature_at(m: MetricInstance, point) -> tuple:
    """(number of positive, number of negative) eigenvalues of g."""
    g = np.array(m.metric_jets(point, 0, "float")[..., 0], dtype=float)
    ev = np.linalg.eigvalsh(g)
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))
