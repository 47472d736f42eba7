"""Scalar curvature invariants, boost-weight blocks and VSI/CSI/Einstein verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exprdsl import eval_jets
from .jets import _index
from .tensor import (
    CurvatureBundle,
    GeometryError,
    MetricInstance,
    covariant_derivative,
    curvature_at,
    frame_components,
    FRAME_ETA,
    frame_gram,
    frame_vectors,
)

BATTERY = ("I1", "I2", "I3", "I4", "I5", "I6", "D1", "D2", "D3")
DERIVATIVE_INVARIANTS = ("D1", "D2", "D3")

DESCRIPTIONS = {
    "I1": "R",
    "I2": "R_ab R^ab",
    "I3": "R_abcd R^abcd",
    "I4": "C_abcd C^abcd",
    "I5": "R_a^b R_b^c R_c^a",
    "I6": "R_ab^cd R_cd^ef R_ef^ab",
    "D1": "R_;a R^;a",
    "D2": "R_ab;c R^ab;c",
    "D3": "R_abcd;e R^abcd;e",
}


@dataclass
class InvariantBattery:
    """Named scalar invariants at one point; unavailable entries are None."""

    values: dict
    mode: str
    point: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.values[name]

    @property
    def complete(self) -> bool:
        return all(self.values.get(k) is not None for k in BATTERY)

    @property
    def unavailable(self) -> list:
        return [k for k in BATTERY if self.values.get(k) is None]

    def max_abs(self) -> float:
        return max((abs(float(v)) for v in self.values.values() if v is not None), default=0.0)

    def as_floats(self) -> dict:
        return {k: (None if v is None else float(v)) for k, v in self.values.items()}


def _raise_all(T: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    out = T
    for _ in range(T.ndim):
        out = np.tensordot(out, ginv, axes=([0], [0]))
    return out


def _full(T, ginv):
    """T_{a..} T^{a..}."""
    return np.sum(T * _raise_all(T, ginv))


def compute_battery(bundle: CurvatureBundle) -> InvariantBattery:
    ginv = bundle.ginv[..., 0]
    R4 = bundle.riemann[..., 0]
    ric = bundle.ricci[..., 0]
    C = bundle.weyl[..., 0]
    vals = {
        "I1": bundle.scalar[0],
        "I2": _full(ric, ginv),
        "I3": _full(R4, ginv),
        "I4": _full(C, ginv),
    }
    mixed = ginv @ ric  # R^a_b
    vals["I5"] = np.trace(mixed @ mixed @ mixed)
    # R_ab^cd as a 6x6-ish operator on index pairs
    up2 = np.tensordot(np.tensordot(R4, ginv, axes=([2], [0])), ginv, axes=([2], [0]))
    M = up2.reshape(16, 16)
    vals["I6"] = np.trace(M @ M @ M)
    if bundle.order >= 3:
        vals["D1"] = _full(covariant_derivative(bundle, "scalar")[..., 0], ginv)
        vals["D2"] = _full(covariant_derivative(bundle, "ricci")[..., 0], ginv)
        vals["D3"] = _full(covariant_derivative(bundle, "riemann")[..., 0], ginv)
    else:
        vals.update({k: None for k in DERIVATIVE_INVARIANTS})
    return InvariantBattery(values=vals, mode=bundle.mode, point=dict(bundle.point))


def battery_at(m: MetricInstance, point, order: int = 3, mode: str = "float") -> InvariantBattery:
    return compute_battery(curvature_at(m, point, order, mode))


# ---------------------------------------------------------------------------
# boost weight blocks


ETA2 = np.array([[0, 1], [1, 0]])


@dataclass
class BoostWeightMatrices:
    """Frame blocks of the Riemann tensor; transverse indices raised with eta."""

    sigma: object
    vecN: np.ndarray
    a: np.ndarray
    s: np.ndarray
    Rt: object

    @staticmethod
    def nilpotent_form(M):
        """M^A_B = eta^{AC} M_CB."""
        return ETA2 @ M


def boost_weight_matrices(bundle: CurvatureBundle, m: MetricInstance) -> BoostWeightMatrices:
    E = frame_vectors(m, bundle.point, bundle.mode)
    Rf = frame_components(bundle.riemann[..., 0], E)
    T = (2, 3)
    a = np.array([[Rf[0, 1, A, B] for B in T] for A in T], dtype=Rf.dtype)
    s = np.array([[Rf[0, A, 1, B] + Rf[0, B, 1, A] for B in T] for A in T], dtype=Rf.dtype)
    vecN = np.array([Rf[0, 1, 0, A] for A in T], dtype=Rf.dtype)
    return BoostWeightMatrices(sigma=Rf[0, 1, 0, 1], vecN=vecN, a=a, s=s, Rt=Rf[2, 3, 2, 3])


def _small(x, tol):
    return x == 0 if tol is None else abs(float(x)) < tol


def nilpotency_check(bw, tol: float | None = 1e-9) -> dict:
    """Per-matrix nilpotency from trace and determinant.

    ``bw`` is a BoostWeightMatrices or a plain 2x2 matrix.  For the former
    ``passed`` combines nilpotent a and s, vanishing Rt and vanishing sigma.  ``tol=None``
    demands exact zeros.
    """
    def verdict(M):
        M = np.asarray(M, dtype=object)
        tr = M[0, 0] + M[1, 1]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        return {"trace": tr, "det": det, "nilpotent": bool(_small(tr, tol) and _small(det, tol))}

    if not isinstance(bw, BoostWeightMatrices):
        return verdict(bw)
    out = {
        "a": verdict(bw.nilpotent_form(bw.a)),
        "s": verdict(bw.nilpotent_form(bw.s)),
        "Rt": {"value": bw.Rt, "flat": bool(_small(bw.Rt, tol))},
        # sigma is itself a boost-weight-zero component; nonzero sigma spoils nilpotency
        "sigma": {"value": bw.sigma, "zero": bool(_small(bw.sigma, tol))},
    }
    out["passed"] = (out["a"]["nilpotent"] and out["s"]["nilpotent"] and out["Rt"]["flat"]
                     and out["sigma"]["zero"])
    return out


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


def vsi_precondition_check(m: MetricInstance, points: Sequence, mode: str = "float",
                           tol: float = 1e-9) -> Verdict:
    """d^2 W_A / dv^2 = 0 as jets and R_0101 = 0 at each point."""
    if m.kundt is None:
        raise GeometryError(f"family {m.family!r} is not tagged as a Kundt metric")
    k = m.kundt
    vi = m.chart.index(k.v)
    w_ok, s_ok = True, True
    worst_w, worst_s = 0.0, 0.0
    names = sorted(k.W)
    for p in points:
        arr = eval_jets([k.W[n] for n in names], m.chart.point(p), 2, mode, m.bindings, m.chart.names)
        mono = [0] * 4
        mono[vi] = 2
        idx = _index(2)[tuple(mono)]
        for row in arr:
            w = 2 * row[idx]
            worst_w = max(worst_w, abs(float(w)))
            w_ok &= _small(w, tol if mode == "float" else None)
        b = curvature_at(m, p, 2, mode)
        sig = boost_weight_matrices(b, m).sigma
        worst_s = max(worst_s, abs(float(sig)))
        s_ok &= _small(sig, tol if mode == "float" else None)
    return Verdict("vsi-precondition", w_ok and s_ok,
                   {"W_vv": {"passed": w_ok, "max": worst_w}, "sigma": {"passed": s_ok, "max": worst_s}})


def einstein_residual(bundle: CurvatureBundle):
    """(max |R_ab - R/4 g_ab|, Lambda = R/4)."""
    g = bundle.g[..., 0]
    ric = bundle.ricci[..., 0]
    lam = bundle.scalar[0] / 4
    res = ric - lam * g
    return max(abs(x) for x in res.ravel()), lam


def einstein_check(m: MetricInstance, points: Sequence, mode: str = "float", tol: float = 1e-9,
                   expected_lambda=None) -> Verdict:
    worst, lams = 0, []
    ok = True
    for p in points:
        b = curvature_at(m, p, 2, mode)
        r, lam = einstein_residual(b)
        lams.append(lam)
        worst = max(worst, r)
        ok &= _small(r, tol if mode == "float" else None)
        if expected_lambda is not None:
            ok &= _small(lam - expected_lambda, tol if mode == "float" else None)
    return Verdict("einstein", bool(ok), {"max_residual": float(worst),
                                          "lambda": [float(x) for x in lams]})


def csi_verdict(m: MetricInstance, points: Sequence, mode: str = "float", order: int = 3,
                tol: float = 1e-8) -> Verdict:
    """CSI iff every invariant's spread over the points is below tol (1 + |mean|)."""
    if len(points) < 2:
        raise ValueError("csi_verdict needs at least two points")
    rows = []
    for p in points:
        try:
            rows.append(battery_at(m, p, order, mode))
        except (GeometryError, ArithmeticError) as exc:
            raise GeometryError(f"evaluation failed at point {p}: {exc}") from exc
    stats, ok = {}, True
    for name in BATTERY:
        vals = [r.values[name] for r in rows]
        if any(v is None for v in vals):
            stats[name] = None
            continue
        if mode == "rational":
            spread = max(vals) - min(vals)
            good = spread == 0
            mean = sum(vals) / len(vals)
        else:
            fv = [float(v) for v in vals]
            spread = max(fv) - min(fv)
            mean = sum(fv) / len(fv)
            good = spread < tol * (1 + abs(mean))
        ok &= good
        stats[name] = {"mean": float(mean), "spread": float(spread), "constant": bool(good)}
    return Verdict("csi", bool(ok), {"invariants": stats, "npoints": len(points)})


def vsi_verdict(m: MetricInstance, points: Sequence, mode: str = "float", order: int = 3,
                tol: float = 1e-9) -> Verdict:
    worst, ok = 0.0, True
    for p in points:
        bat = battery_at(m, p, order, mode)
        for v in bat.values.values():
            if v is not None:
                ok &= _small(v, tol if mode == "float" else None)
        worst = max(worst, bat.max_abs())
    return Verdict("vsi", bool(ok), {"max_abs": worst, "npoints": len(points)})


def frame_check(m: MetricInstance, points: Sequence, mode: str = "float", tol: float = 1e-10) -> Verdict:
    """Frame Gram matrix equals the split-null eta at each point."""
    worst = 0.0
    ok = True
    for p in points:
        G = frame_gram(m, p, mode)
        d = G - FRAME_ETA
        w = max(abs(float(x)) for x in d.ravel())
        worst = max(worst, w)
        ok &= (all(x == 0 for x in d.ravel()) if mode == "rational" else w < tol)
    return Verdict("frame", bool(ok), {"max_deviation": worst})

