from fractions import Fraction

import pytest

from neutralvsi import families as fm
from neutralvsi import sampling as sm
from neutralvsi import transforms as tr
from neutralvsi.exprdsl import ZERO, evaluate, parse

F = Fraction
NULL = fm.NULL_CHART.names


def pts(m, n=3, seed=0, mode="rational"):
    return sm.sample_points(m.box, m.chart.names, n, seed, mode)


def same_params(p1, p2, names, chart, points):
    for p in points:
        for n in names:
            a = evaluate(getattr(p1, n), p)
            b = evaluate(getattr(p2, n), p)
            if a != b:
                return False
    return True


class TestSpec:
    def test_unknown_kind(self):
        with pytest.raises(tr.TransformError):
            tr.TransformSpec("boost", "0")

    def test_generator_dependence(self):
        with pytest.raises(tr.TransformError):
            tr.TransformSpec("null-shift", "v1")
        with pytest.raises(tr.TransformError):
            tr.TransformSpec("null-rescale", "u1 + u2")

    def test_constant_rescale_is_singular(self):
        with pytest.raises(tr.SingularJacobian):
            tr.TransformSpec("null-rescale", "3")
        with pytest.raises(tr.SingularJacobian):
            tr.mobius("st-rescale", 1, 2, 2, 4)

    def test_nonaffine_rescale_needs_inverse(self):
        with pytest.raises(tr.TransformError):
            tr.TransformSpec("null-rescale", "u1^3 + u1")

    def test_affine_inverse(self):
        t = tr.TransformSpec("null-rescale", "2*u1 + 1")
        assert evaluate(t.inverse, {"u1": 5}) == 2

    def test_incompatible_family(self):
        with pytest.raises(tr.IncompatibleTransform):
            tr.transform_params(sm.random_null(0), tr.identity("st-shift"))
        with pytest.raises(tr.IncompatibleTransform):
            tr.transform_params(fm.kaigorodov().params, tr.identity("csi2-shift"))


class TestIdentity:
    @pytest.mark.parametrize("kind", tr.KINDS)
    def test_identity_preserves_params(self, kind):
        m = sm.transform_subject(kind, 1)
        p2 = tr.transform_params(m.params, tr.identity(kind))
        names = ("W1", "WU", "WV", "H1", "H0") if kind.startswith("null") else (
            ("WX", "WT", "H1", "H0") if kind.startswith("st") else ("WU", "WV", "H1", "H0"))
        assert same_params(m.params, p2, names, m.chart, pts(m))

    @pytest.mark.parametrize("kind", tr.KINDS)
    def test_identity_metric_unchanged(self, kind):
        m = sm.transform_subject(kind, 2)
        rep = tr.verify_form_preservation(m, tr.identity(kind), pts(m, 2), "rational", battery=False)
        assert rep.exact_zero


class TestPullback:
    @pytest.mark.parametrize("kind", tr.KINDS)
    def test_corrected_laws_exact(self, kind):
        for seed in range(2):
            m = sm.transform_subject(kind, seed)
            t = sm.random_transform(kind, seed, laws="corrected")
            rep = tr.verify_form_preservation(m, t, pts(m, 2, seed), "rational")
            assert rep.exact_zero, rep.max_discrepancy
            assert rep.battery_max_change == 0
            assert rep.passed(None)

    def test_printed_null_shift_exact(self):
        m = sm.transform_subject("null-shift", 3)
        t = sm.random_transform("null-shift", 3, laws="printed")
        assert tr.verify_form_preservation(m, t, pts(m, 2), "rational", battery=False).exact_zero

    @pytest.mark.parametrize("kind", ["null-rescale", "st-shift", "st-rescale", "csi2-shift"])
    def test_printed_laws_disagree_with_pullback(self, kind):
        m = sm.transform_subject(kind, 4)
        t = sm.random_transform(kind, 4, laws="printed")
        rep = tr.verify_form_preservation(m, t, pts(m, 2, 4), "rational", battery=False)
        assert not rep.exact_zero

    def test_float_mode(self):
        m = sm.transform_subject("st-rescale", 5)
        t = sm.random_transform("st-rescale", 5, laws="corrected")
        rep = tr.verify_form_preservation(m, t, pts(m, 2, 5, "float"), "float")
        assert rep.max_discrepancy < 1e-10
        assert rep.passed(1e-9)

    def test_singular_jacobian_at_point(self):
        # g = u1^2 / 2 has g' = 0 at u1 = 0
        t = tr.TransformSpec("null-rescale", "u1^2/2", "(2*u1)^(1/2)", "corrected")
        m = sm.random_null(1)
        with pytest.raises(tr.SingularJacobian):
            tr.pullback_discrepancy(m, m, t, {"v1": 1, "u1": 0, "v2": 1, "u2": 1}, "rational")


class TestLaws:
    def test_null_rescale_by_two(self):
        # u1' = 2 u1: H0' = H0 / 4, W_U halves and the v1 coefficient W1 is unchanged
        m = sm.random_null(6)
        t = tr.TransformSpec("null-rescale", "2*u1", laws="corrected")
        p2 = tr.transform_params(m.params, t)
        for p in pts(m, 3, 6):
            q = dict(p, u1=2 * p["u1"])
            assert evaluate(p2.H0, q) == evaluate(m.params.H0, p) / 4
            assert evaluate(p2.WU, q) == evaluate(m.params.WU, p) / 2
            assert evaluate(p2.W1, q) == evaluate(m.params.W1, p)

    def test_shift_composition(self):
        m = sm.random_null(7)
        t1 = tr.TransformSpec("null-shift", "u2*v2", laws="corrected")
        t2 = tr.TransformSpec("null-shift", "u1 - v2^2", laws="corrected")
        two = tr.transform_params(tr.transform_params(m.params, t1), t2)
        one = tr.transform_params(m.params, tr.compose(t1, t2))
        assert same_params(two, one, ("W1", "WU", "WV", "H1", "H0"), m.chart, pts(m, 3))

    def test_rescale_composition_inverse(self):
        t1 = tr.mobius("null-rescale", 1, 1, 0, 2, "corrected")
        t2 = tr.mobius("null-rescale", 2, 0, 1, 3, "corrected")
        c = tr.compose(t1, t2)
        for u in (F(1, 3), F(2, 5)):
            assert evaluate(c.inverse, {"u1": evaluate(c.generator, {"u1": u})}) == u

    def test_compose_needs_same_kind(self):
        with pytest.raises(tr.TransformError):
            tr.compose(tr.identity("null-shift"), tr.identity("null-rescale"))

    def test_coordinate_map_rescale(self):
        t = tr.TransformSpec("null-rescale", "3*u1")
        cm = tr.coordinate_map(t)
        p = {"v1": 6, "u1": 1, "v2": 0, "u2": 0}
        assert [evaluate(e, p) for e in cm] == [2, 3, 0, 0]


class TestGauge:
    @pytest.mark.parametrize("seed", range(3))
    def test_null_wv_removed(self, seed):
        m = sm.random_null(seed)
        out, t = tr.gauge_fix(m, "WV", laws="corrected")
        assert tr.verify_form_preservation(m, t, pts(m, 2, seed), "rational", battery=False).exact_zero
        for p in pts(m, 3, seed):
            assert evaluate(out.WV, p) == 0

    def test_st_wt_removed(self):
        m = sm.random_st(3)
        out, t = tr.gauge_fix(m, "WT", laws="corrected")
        for p in pts(m, 3, 3):
            assert evaluate(out.WT, p) == 0
        assert tr.verify_form_preservation(m, t, pts(m, 2), "rational", battery=False).exact_zero

    def test_csi2_wv_removed(self):
        m = fm.csi2_special(1, WV="V^2*u + U")
        out, t = tr.gauge_fix(m, "WV", laws="corrected")
        for p in pts(m, 3):
            assert evaluate(out.WV, p) == 0
        assert tr.verify_form_preservation(m, t, pts(m, 2), "rational", battery=False).exact_zero

    def test_csi2_log_antiderivative_supplied(self):
        # W_V = V needs int V^-1 dV = ln V, which the caller provides
        m = fm.csi2_special(1, WV="V")
        with pytest.raises(fm.MissingAntiderivativeError):
            tr.gauge_fix(m, "WV", laws="corrected")
        out, t = tr.gauge_fix(m, "WV", antiderivative=parse("ln(V)", fm.CSI2_CHART.names), laws="corrected")
        for p in pts(m, 3, mode="float"):
            assert abs(evaluate(out.WV, p, arithmetic="float")) < 1e-12

    def test_zero_target_is_identity(self):
        m = sm.random_null(0, walker=True)
        out, t = tr.gauge_fix(m, "WV")
        assert out is m.params
        assert t.generator == ZERO

    def test_wrong_supplied_generator(self):
        m = sm.random_null(1)
        with pytest.raises(fm.MissingAntiderivativeError):
            tr.gauge_fix(m, "WV", antiderivative="u2", laws="corrected")

    def test_unreachable_target(self):
        with pytest.raises(tr.IncompatibleTransform):
            tr.gauge_fix(sm.random_null(0), "H0")

    def test_eps_gauge_requires_g(self):
        with pytest.raises(fm.MissingAntiderivativeError):
            tr.gauge_fix(sm.random_null(0), "eps")

    def test_eps_gauge_checks_ode(self):
        with pytest.raises(fm.FamilyError):
            tr.gauge_fix(sm.random_null(0), "eps", eps="1", g="2*u1")
