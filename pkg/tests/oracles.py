"""Independent reference computations used by the tests.

Everything here uses plain central differences of the metric components,
evaluated in high precision mpmath arithmetic so that the step size, not
cancellation, controls the error.
"""
from fractions import Fraction

import mpmath
import numpy as np

from neutralvsi.exprdsl import evaluate

DPS = 40
N = 4


def metric_at(m, point):
    names = m.chart.names
    p = {n: point[n] for n in names}
    with mpmath.workdps(DPS):
        return np.array([[evaluate(m.g[a][b], p, m.bindings, "mpmath") for b in range(N)] for a in range(N)],
                        dtype=object)


def _shift(point, name, h):
    q = dict(point)
    q[name] = q[name] + h
    return q


def _mp_point(point):
    with mpmath.workdps(DPS):
        return {k: mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)
                for k, v in point.items()}


def _inverse(g):
    with mpmath.workdps(DPS):
        M = mpmath.matrix(g.tolist()) ** -1
        return np.array([[M[i, j] for j in range(N)] for i in range(N)], dtype=object)


def fd_metric_derivative(m, point, h):
    """dg[a, b, c] = d_c g_ab by central differences."""
    names = m.chart.names
    out = np.empty((N, N, N), dtype=object)
    with mpmath.workdps(DPS):
        for c, n in enumerate(names):
            gp = metric_at(m, _shift(point, n, h))
            gm = metric_at(m, _shift(point, n, -h))
            out[:, :, c] = (gp - gm) / (2 * h)
    return out


def fd_christoffel(m, point, h=1e-5):
    """Gamma^a_bc = 1/2 g^ad (g_db,c + g_dc,b - g_bc,d) from differenced g."""
    p = _mp_point(point)
    with mpmath.workdps(DPS):
        h = mpmath.mpf(h)
        ginv = _inverse(metric_at(m, p))
        dg = fd_metric_derivative(m, p, h)
        lower = (dg + dg.transpose(0, 2, 1) - dg.transpose(2, 0, 1)) / 2
        return np.einsum("ad,dbc->abc", ginv, lower)


def fd_riemann_up(m, point, h=1e-5):
    """R^a_bcd = Gamma^a_bd,c - Gamma^a_bc,d + Gamma^a_ce Gamma^e_bd - Gamma^a_de Gamma^e_bc."""
    p = _mp_point(point)
    names = m.chart.names
    with mpmath.workdps(DPS):
        hh = mpmath.mpf(h)
        G = fd_christoffel(m, p, h)
        dG = np.empty((N, N, N, N), dtype=object)  # dG[a, b, c, y] = d_y Gamma^a_bc
        for y, n in enumerate(names):
            dG[..., y] = (fd_christoffel(m, _shift(p, n, hh), h) - fd_christoffel(m, _shift(p, n, -hh), h)) / (2 * hh)
        R = (np.einsum("abdc->abcd", dG) - dG
             + np.einsum("ace,ebd->abcd", G, G) - np.einsum("ade,ebc->abcd", G, G))
        return R


def fd_scalar_gradient(scalar_fn, point, names, h=1e-5):
    """Central differences of a float-valued function of the point."""
    out = []
    for n in names:
        out.append((scalar_fn(_shift(point, n, h)) - scalar_fn(_shift(point, n, -h))) / (2 * h))
    return np.array(out, dtype=float)


def to_float(a):
    return np.array(np.vectorize(float, otypes=[float])(a), dtype=float)


def relative_error(approx, ref):
    approx, ref = to_float(approx), to_float(ref)
    scale = max(1.0, float(np.max(np.abs(ref))))
    return float(np.max(np.abs(approx - ref))) / scale
