from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neutralvsi import jets
from neutralvsi.jets import Jet, JetDomainError, JetModeError, JetOrderError, RationalModeError

from conftest import jet_strategy, make_jet

X, Y = 0, 1


def dx(order, mode="float", value=0):
    return Jet.variable(value, X, order, mode)


def dy(order, mode="float", value=0):
    return Jet.variable(value, Y, order, mode)


def coeff(j, m):
    return j.coefficient(m)


class TestLayout:
    def test_coefficient_counts(self):
        assert [jets.ncoef(k) for k in range(5)] == [1, 5, 15, 35, 70]

    def test_monomials_graded(self):
        degs = [sum(m) for m in jets.monomials(3)]
        assert degs == sorted(degs)
        assert len(set(jets.monomials(3))) == jets.ncoef(3)

    def test_truncation_is_prefix(self):
        j = make_jet(range(35), 3)
        assert list(j.truncate(2).coeffs) == list(j.coeffs[:15])

    def test_order_of(self):
        assert jets.order_of(jets.zeros((2, 3), 4, "float")) == 4
        with pytest.raises(JetOrderError):
            jets.order_of(np.zeros(7))

    def test_cannot_raise_order(self):
        with pytest.raises(JetOrderError):
            dx(1).truncate(2)

    def test_coefficient_beyond_order(self):
        with pytest.raises(JetOrderError):
            dx(1).coefficient((2, 0, 0, 0))


class TestArithmeticExamples:
    def test_square_order_two(self):
        one_plus = 1 + dx(2)
        sq = one_plus * one_plus
        assert sq.as_dict() == {(0, 0, 0, 0): 1.0, (1, 0, 0, 0): 2.0, (2, 0, 0, 0): 1.0}

    def test_square_truncated(self):
        one_plus = 1 + dx(1)
        assert (one_plus * one_plus).as_dict() == {(0, 0, 0, 0): 1.0, (1, 0, 0, 0): 2.0}

    def test_binomial_square(self):
        s = dx(2) + dy(2)
        assert (s * s).as_dict() == {(2, 0, 0, 0): 1.0, (1, 1, 0, 0): 2.0, (0, 2, 0, 0): 1.0}

    def test_product_rule_at_point(self):
        x, y = dx(1, value=2), dy(1, value=3)
        assert (x * y).as_dict() == {(0, 0, 0, 0): 6.0, (1, 0, 0, 0): 3.0, (0, 1, 0, 0): 2.0}

    def test_geometric_series(self):
        r = 1 / (1 + dx(2, "rational"))
        assert r.as_dict() == {(0, 0, 0, 0): 1, (1, 0, 0, 0): -1, (2, 0, 0, 0): 1}

    def test_exp_series(self):
        e = dx(3).exp()
        for k, c in enumerate([1, 1, 1 / 2, 1 / 6]):
            assert coeff(e, (k, 0, 0, 0)) == pytest.approx(c, abs=1e-15)

    def test_sqrt_binomial(self):
        r = (1 + dx(2, "rational")).powq(Fraction(1, 2))
        assert [coeff(r, (k, 0, 0, 0)) for k in range(3)] == [1, Fraction(1, 2), Fraction(-1, 8)]

    def test_exact_rational_root(self):
        r = (Fraction(9, 4) + dx(1, "rational")).powq(Fraction(1, 2))
        assert r.value == Fraction(3, 2)
        assert coeff(r, (1, 0, 0, 0)) == Fraction(1, 3)

    def test_irrational_root_rejected(self):
        with pytest.raises(RationalModeError):
            (2 + dx(1, "rational")).powq(Fraction(1, 2))

    def test_scale(self):
        assert (dx(1, "rational") * Fraction(3, 2)).coefficient((1, 0, 0, 0)) == Fraction(3, 2)


class TestPartial:
    def test_polynomial(self):
        j = make_jet([0] * 15, 2, "float") + 1 + 2 * dx(2) + dx(2) * dx(2)
        assert j.partial(X).as_dict() == {(0, 0, 0, 0): 2.0, (1, 0, 0, 0): 2.0}

    def test_mixed(self):
        assert (dx(2) * dy(2)).partial(X).as_dict() == {(0, 1, 0, 0): 1.0}

    def test_exp_derivative(self):
        e3 = dx(3).exp()
        e2 = dx(2).exp()
        assert e3.partial(X).allclose(e2, 1e-15)

    def test_order_zero_rejected(self):
        with pytest.raises(JetOrderError):
            Jet.constant(1, 0).partial(X)

    @given(jet_strategy(3), st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=40, deadline=None)
    def test_partials_commute(self, a, i, k):
        assert a.partial(i).partial(k).allclose(a.partial(k).partial(i))


class TestErrors:
    def test_mode_mismatch(self):
        with pytest.raises(JetModeError):
            dx(1, "float") + dx(1, "rational")

    def test_order_mismatch(self):
        with pytest.raises(JetModeError):
            dx(1) * dx(2)

    def test_zero_divisor(self):
        with pytest.raises(JetDomainError):
            1 / dx(2)

    def test_ln_domain(self):
        with pytest.raises(JetDomainError):
            (dx(2) - 1).ln()

    def test_rational_transcendental(self):
        with pytest.raises(RationalModeError):
            (1 + dx(1, "rational")).exp()

    def test_fractional_power_of_negative(self):
        with pytest.raises(JetDomainError):
            (dx(2) - 1).powq(Fraction(1, 3))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            Jet.constant(1, 1, "decimal")


class TestRingProperties:
    @given(jet_strategy(), jet_strategy(), jet_strategy())
    @settings(max_examples=60, deadline=None)
    def test_ring_axioms(self, a, b, c):
        assert (a + b).allclose(b + a)
        assert (a * b).allclose(b * a)
        assert ((a * b) * c).allclose(a * (b * c))
        assert ((a + b) + c).allclose(a + (b + c))
        assert (a * (b + c)).allclose(a * b + a * c)
        assert (a - a).max_abs() == 0

    @given(jet_strategy(), jet_strategy())
    @settings(max_examples=60, deadline=None)
    def test_division_inverts_product(self, a, b):
        if b.value == 0:
            b = b + 1
        assert ((a * b) / b).allclose(a)

    @given(jet_strategy(3, "float"))
    @settings(max_examples=40, deadline=None)
    def test_exp_ln_roundtrip(self, a):
        a = a - a.value + (abs(float(a.value)) + 0.5)
        assert a.ln().exp().allclose(a, 1e-12 * max(1.0, float(a.max_abs())) * 10)

    @given(jet_strategy(3), st.integers(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_integer_power_matches_product(self, a, n):
        if a.value == 0:
            a = a + 1
        expected = Jet.constant(1, a.order, a.mode)
        base = a if n >= 0 else a.reciprocal()
        for _ in range(abs(n)):
            expected = expected * base
        assert a.powq(n).allclose(expected)

    @given(jet_strategy(3), jet_strategy(3))
    @settings(max_examples=30, deadline=None)
    def test_truncation_commutes_with_product(self, a, b):
        assert (a * b).truncate(2).allclose(a.truncate(2) * b.truncate(2))

    @given(jet_strategy(2), jet_strategy(2), st.integers(0, 3))
    @settings(max_examples=30, deadline=None)
    def test_leibniz(self, a, b, k):
        lhs = (a * b).partial(k)
        rhs = a.partial(k) * b.truncate(1) + a.truncate(1) * b.partial(k)
        assert lhs.allclose(rhs)

    def test_rational_is_exact(self):
        third = Jet.constant(Fraction(1, 3), 2, "rational")
        s = third + third + third
        assert s.value == 1
        assert type(s.value).__name__ == "mpq"


class TestArrayKernels:
    def test_einsum_matches_loop(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(2, 3, jets.ncoef(2)))
        B = rng.normal(size=(3, 2, jets.ncoef(2)))
        C = jets.jeinsum("ab,bc->ac", A, B)
        for i in range(2):
            for k in range(2):
                ref = sum(jets.jmul(A[i, j], B[j, k]) for j in range(3))
                np.testing.assert_allclose(C[i, k], ref, atol=1e-14)

    def test_einsum_truncates_to_lower_order(self):
        A = jets.zeros((2,), 3, "float")
        B = jets.zeros((2,), 2, "float")
        assert jets.order_of(jets.jeinsum("a,a->", A, B)) == 2

    def test_japply_elementwise(self):
        a = jets.zeros((2,), 2, "float")
        a[:, 0] = [1.0, 4.0]
        a[:, 1] = 1.0
        out = jets.japply(a, "recip")
        assert out[0, 0] == 1.0
        assert out[1, 0] == 0.25
        assert out[1, 1] == pytest.approx(-1 / 16)

    def test_grad_stacks_partials(self):
        j = make_jet(range(15), 2, "float")
        g = jets.jgrad(j.coeffs)
        assert g.shape == (4, 5)
        np.testing.assert_array_equal(g[1], j.partial(1).coeffs)
