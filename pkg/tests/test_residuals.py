from fractions import Fraction

import numpy as np
import pytest

from neutralvsi import families as fm
from neutralvsi import residuals as rs
from neutralvsi import sampling as sm
from neutralvsi.exprdsl import parse
from neutralvsi.tensor import curvature_at

F = Fraction
NULL = fm.NULL_CHART.names


def pts(m, n=4, seed=0, mode="rational"):
    return sm.sample_points(m.box, m.chart.names, n, seed, mode)


class TestRegistry:
    def test_both_variants_for_every_id(self):
        for sid in rs.SYSTEM_IDS:
            assert rs.get_system(sid, "printed").id == sid
            assert rs.get_system(sid, "corrected").id == sid

    def test_unknown_system(self):
        with pytest.raises(rs.ResidualError):
            rs.get_system("no-such-system")
        with pytest.raises(rs.ResidualError):
            rs.get_system("null-vacuum", "draft")

    def test_chart_mismatch(self):
        with pytest.raises(rs.FamilyMismatch):
            rs.evaluate("st-vacuum", fm.flat(), [(0, 0, 0, 0)])

    def test_family_mismatch_same_chart(self):
        m = fm.walker_canonical([["u1", "0"], ["0", "v1"]])
        with pytest.raises(rs.FamilyMismatch):
            rs.evaluate("null-vacuum", m, [(0, 0, 0, 0)])

    def test_st_system_needs_zero_wt(self):
        with pytest.raises(rs.FamilyMismatch):
            rs.evaluate("st-vacuum", sm.random_st(1), [(0, 0, 1, 0)])

    def test_missing_extra_named(self):
        m = fm.csi1_solved(1)
        with pytest.raises(rs.ResidualError, match="C1|alpha|abar|J"):
            rs.evaluate("csi1-H0", m, pts(m, 1, mode="float"), "float", "printed")


class TestNullVacuum:
    @pytest.mark.parametrize("seed", range(3))
    def test_branch_a_zero_both_variants(self, seed):
        m = sm.random_branch_a(seed)
        for variant in ("printed", "corrected"):
            assert rs.evaluate("null-vacuum", m, pts(m, 5, seed), "rational", variant).passed(None)

    @pytest.mark.parametrize("seed", range(3))
    def test_branch_b_zero(self, seed):
        m = sm.random_branch_b(seed)
        assert rs.evaluate("null-vacuum", m, pts(m, 5, seed), "rational", "corrected").passed(None)

    def test_fourth_typo_visible_only_with_wv(self):
        # W_v != 0 separates the printed and corrected quadratic term
        m = sm.random_null(4)
        ps = pts(m, 3, 4)
        pr = rs.evaluate("null-vacuum", m, ps, "rational", "printed")
        co = rs.evaluate("null-vacuum", m, ps, "rational", "corrected")
        assert pr.max_residual["fourthDE"] != co.max_residual["fourthDE"]
        for k in ("second", "third", "splurge"):
            assert pr.max_residual[k] == co.max_residual[k]

    def test_walker_params_variants_agree(self):
        m = sm.random_null(4, walker=True)
        ps = pts(m, 3, 4)
        pr = rs.evaluate("null-vacuum", m, ps, "rational", "printed")
        co = rs.evaluate("null-vacuum", m, ps, "rational", "corrected")
        assert pr.values == co.values

    def test_non_solution_h1(self):
        m = fm.null_vsi(fm.NullVsiParams(H1="u2*v2"))
        res = rs.evaluate("null-vacuum", m, pts(m, 2), "rational")
        assert res.max_residual["second"] != 0

    def test_dropping_alpha_term_breaks_third(self):
        # branch A with the -alpha' f contribution removed from H1
        m = fm.null_vsi_solution_branchA(alpha="u1*u2", beta="v2")
        p = m.params
        bad = fm.null_vsi(fm.NullVsiParams(W1=p.W1, WU=p.WU, WV=p.WV, H1=p.H1 + parse("u2", NULL), H0=p.H0))
        res = rs.evaluate("null-vacuum", bad, pts(m, 3), "rational")
        assert res.max_residual["third"] != 0

    def test_splurge_on_w1(self):
        m = fm.null_vsi(fm.NullVsiParams(W1="-2/(u2 + 1)"))
        res = rs.evaluate("null-vacuum", m, pts(m, 3), "rational")
        assert res.max_residual["splurge"] == 0
        m = fm.null_vsi(fm.NullVsiParams(W1="u2"))
        assert rs.evaluate("null-vacuum", m, pts(m, 2), "rational").max_residual["splurge"] != 0


class TestCrossCheck:
    @pytest.mark.parametrize("m", [fm.null_vsi(fm.NullVsiParams()), sm.random_branch_a(2), sm.random_branch_b(3),
                                   sm.random_st_solution(1)], ids=lambda m: m.family)
    def test_solutions_agree(self, m):
        c = rs.cross_check_vacuum(m, pts(m, 4), "rational", "corrected")
        assert c.consistent and c.residual_zero and c.curvature_zero

    @pytest.mark.parametrize("seed", range(4))
    def test_generic_null_corrected_agrees(self, seed):
        m = sm.random_null(seed)
        c = rs.cross_check_vacuum(m, pts(m, 3, seed), "rational", "corrected")
        assert c.consistent
        assert not c.curvature_zero

    def test_perturbed_solution_detected(self):
        m = sm.random_branch_a(5)
        p = m.params
        bad = fm.null_vsi(fm.NullVsiParams(W1=p.W1, WU=p.WU, WV=p.WV, H1=p.H1, H0=p.H0 + parse("u2*v2", NULL)))
        c = rs.cross_check_vacuum(bad, pts(m, 3), "rational", "corrected")
        assert c.consistent and not c.residual_zero

    def test_float_mode(self):
        m = sm.random_st_solution(2)
        c = rs.cross_check_vacuum(m, pts(m, 3, mode="float"), "float")
        assert c.consistent and c.curvature < 1e-9


class TestStVacuum:
    @pytest.mark.parametrize("seed", range(3))
    def test_solutions_zero(self, seed):
        m = sm.random_st_solution(seed)
        assert rs.evaluate("st-vacuum", m, pts(m, 5, seed), "rational").passed(None)
        assert rs.evaluate("st-H0", m, pts(m, 5, seed), "rational").passed(None)

    def test_generic_nonzero(self):
        m = fm.st_vsi(fm.StVsiParams(eps=1, H1="u*X", WX="T^2", H0="X^3"))
        assert rs.evaluate("st-vacuum", m, pts(m, 3), "rational").worst() > 0

    def test_dependency_identity_exact(self):
        rng = sm.rng_for(7)
        vars_ = ("u", "X", "T")
        ps = [tuple(p.values()) for p in pts(fm.st_vsi(fm.StVsiParams(eps=1)), 4)]
        for _ in range(3):
            H1, WX = sm.random_poly(vars_, rng, 3, 4), sm.random_poly(vars_, rng, 3, 4)
            assert rs.dependency_check_adam(H1, WX, ps, "rational") == 0

    def test_dependency_identity_zero_fields(self):
        assert rs.dependency_check_adam("0", "0", [(0, 0, 1, 0)], "rational") == 0


class TestCsi1:
    def test_corrected_big_de_is_einstein_component(self):
        # corrected bigDE = 2 e^{2KX} E_uu, DE2 = 2 E_uT, DE3 = 2 e^{2KX} E_uX, E = Ric + 3 K^2 g
        m = sm.random_csi1(2)
        for p in pts(m, 3, 1, "float"):
            r = rs.evaluate("csi1-einstein", m, [p], "float", "corrected").values[0]
            b = curvature_at(m, p, 2, "float")
            E = b.ricci[..., 0] + 3 * b.g[..., 0]
            e2 = np.exp(2 * float(p["X"]))
            assert r["bigDE"] == pytest.approx(2 * e2 * E[1, 1], rel=1e-10, abs=1e-10)
            assert r["DE2"] == pytest.approx(2 * E[1, 3], rel=1e-10, abs=1e-10)
            assert r["DE3"] == pytest.approx(2 * e2 * E[1, 2], rel=1e-10, abs=1e-10)

    def test_kaigorodov_printed_vs_corrected(self):
        m = fm.kaigorodov(1, 1)
        ps = pts(m, 4, mode="float")
        assert rs.evaluate("csi1-einstein", m, ps, "float", "corrected").worst() < 1e-10
        assert rs.evaluate("csi1-einstein", m, ps, "float", "printed").max_residual["bigDE"] > 1

    def test_solved_preset(self):
        m = fm.csi1_solved(1)
        ps = pts(m, 4, mode="float")
        assert rs.evaluate("csi1-einstein", m, ps, "float", "corrected").worst() < 1e-10
        assert rs.evaluate("csi1-H0", m, ps, "float", "corrected").worst() < 1e-10
        c = rs.cross_check_einstein(m, ps, "float", "corrected")
        assert c.consistent and c.curvature_zero

    def test_printed_h0_ode_fails_on_solution(self):
        m = fm.csi1_solved(1)
        extra = {"alpha": "u*X", "abar": "u*X", "J": "0", "C1": "1/3", "C2": "1/2"}
        res = rs.evaluate("csi1-H0", m, pts(m, 2, mode="float"), "float", "printed", extra)
        assert res.worst() > 1

    def test_const_equation(self):
        m = fm.kaigorodov(1, 1)
        ps = pts(m, 2, mode="float")
        assert rs.evaluate("constraints", m, ps, "float", extra={"C3": 0}).worst() == 0
        assert rs.evaluate("constraints", m, ps, "float", extra={"C3": 1}).max_residual["CONST"] > 0


class TestCsi2:
    @pytest.mark.parametrize("preset", ["csi2_solved", "csi2_simple"])
    def test_presets_zero(self, preset):
        m = fm.csi2_solved(1, preset)
        ps = pts(m, 4)
        assert rs.evaluate("csi2-einstein", m, ps, "rational", "corrected").passed(None)
        assert rs.evaluate("csi2-H0", m, ps, "rational", "corrected").passed(None)
        c = rs.cross_check_einstein(m, ps, "rational", "corrected")
        assert c.consistent and c.curvature_zero

    def test_generic_cross_check(self):
        m = sm.random_csi2(3)
        c = rs.cross_check_einstein(m, pts(m, 3, 3), "rational", "corrected")
        assert c.consistent and not c.curvature_zero

    def test_printed_differs_on_generic(self):
        m = sm.random_csi2(4)
        ps = pts(m, 2, 4)
        pr = rs.evaluate("csi2-einstein", m, ps, "rational", "printed")
        co = rs.evaluate("csi2-einstein", m, ps, "rational", "corrected")
        assert pr.max_residual["lastDE1"] != co.max_residual["lastDE1"]
        assert pr.max_residual["lastDE2"] == co.max_residual["lastDE2"]


class TestHelpers:
    def test_max_einstein_kaigorodov(self):
        m = fm.kaigorodov(2, 1)
        ps = pts(m, 3, mode="float")
        assert rs.max_einstein(m, ps, "float") < 1e-9
        assert rs.max_einstein(m, ps, "float", lam=-12) < 1e-9
        assert rs.max_einstein(m, ps, "float", lam=0) > 1

    def test_system_result_passed(self):
        r = rs.SystemResult("x", "printed", {"a": 0.5}, [{"a": F(1, 2)}])
        assert r.worst() == 0.5
        assert not r.passed(None)
        assert r.passed(1.0)

    def test_vacuum_system_for(self):
        assert rs.vacuum_system_for(sm.random_null(0)) == "null-vacuum"
        assert rs.vacuum_system_for(sm.random_st(0)) == "st-vacuum"
        with pytest.raises(rs.FamilyMismatch):
            rs.vacuum_system_for(fm.kaigorodov())
