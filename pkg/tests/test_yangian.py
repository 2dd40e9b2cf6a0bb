from fractions import Fraction as F

import numpy as np
import pytest

from elliptic_baxter.polyring import Poly, RatFn, as_poly, max_abs, poly_rem
from elliptic_baxter.yangian import (
    SPIN_VARIABLE,
    build_module,
    chain_basis,
    eigen_example_residual,
    oscillator_comparison,
    product_residual,
    q_degree_report,
    q_exact_at_p,
    qchar_finite_term,
    qchar_interchange_mismatches,
    qchar_ladder_term,
    qchar_oscillator_term,
    qybe_residual,
    rtt_residual,
    sector_indices,
    tensor_module,
    tq_residual,
    two_site_leading_residual,
    two_site_quadratic,
    yangian_q,
    yangian_qchar,
    yangian_r,
    yangian_transfer,
)

SITES = (F(2, 3), F(-5, 7))


class TestPolyRing:
    def test_arithmetic_and_shift(self):
        p = Poly((F(1), F(2), F(3)))  # 1 + 2x + 3x^2
        q = Poly((F(-1), F(1)))
        assert (p * q).coefficient(3) == 3
        assert p.shift(F(1, 2))(F(0)) == p(F(1, 2))
        assert p - p == Poly()
        assert poly_rem(p * q + Poly((F(5),)), q) == Poly((F(5),))

    def test_nested_coefficients(self):
        inner = Poly((F(1), F(1)))
        outer = Poly((inner, 2))  # (1 + t) + 2x
        assert (outer * outer).coefficient(1) == Poly((F(4), F(4)))
        assert outer.shift(F(1)).coefficient(0) == Poly((F(3), F(1)))

    def test_ratfn_cross_multiplication(self):
        a = RatFn(Poly((F(0), F(2))), Poly((F(2),)))
        b = RatFn(Poly((F(0), F(1))))
        assert a == b
        assert not a == RatFn(Poly((F(1), F(1))))


class TestRMatrix:
    def test_displayed_entries(self):
        r = yangian_r(F(3, 4))
        assert r[0][0] == 1 and r[3][3] == 1
        assert r[1][1] == F(3, 7) and r[1][2] == F(4, 7)
        assert r[2][1] == F(4, 7) and r[2][2] == F(3, 7)

    def test_large_argument_limit_is_identity(self):
        z = F(10**12)
        r = yangian_r(z)
        assert abs(r[1][1] - 1) < F(1, 10**11)
        assert abs(r[1][2]) < F(1, 10**11)

    def test_pole_rejected(self):
        with pytest.raises(ZeroDivisionError):
            yangian_r(F(-1))

    @pytest.mark.parametrize("z,w", [(F(3, 7), F(-2, 5)), (F(1, 2), F(5, 3)),
                                     (F(-4, 9), F(7, 11))])
    def test_yang_baxter_exact(self, z, w):
        assert qybe_residual(z, w) == 0


class TestModules:
    def test_defining_module_tables(self):
        V1 = build_module("finite", spin=1)
        assert V1.act[(1, 1)][0] == ((0, Poly((1, 1))),)
        assert V1.act[(2, 2)][1] == ((1, Poly((1, 1))),)
        assert V1.act[(1, 2)][0] == ((1, Poly((1,))),)
        assert V1.act[(2, 1)][1] == ((0, Poly((1,))),)
        assert (1, 2) not in V1.act or 1 not in V1.act[(1, 2)]

    def test_integer_spin_ladder_restricts_to_finite(self):
        m = 3
        fin = build_module("finite", spin=m)
        lad = build_module("ladder", spin=m, levels=m)
        assert lad.act == fin.act

    def test_commutator_on_lowest_vector(self):
        # lower-then-raise minus raise-then-lower acts as the spin on the
        # lowest vector, by direct expansion of the tables
        m = 4
        X = build_module("finite", spin=m)
        up = X.act[(1, 2)][0]
        down = X.act[(2, 1)][1]
        assert up[0][1] * down[0][1] == Poly((m,))
        assert 0 not in X.act[(2, 1)]

    def test_invalid_constructions(self):
        with pytest.raises(ValueError):
            build_module("finite", spin=F(3, 2))
        with pytest.raises(ValueError):
            build_module("ladder", spin=F(1, 2))
        with pytest.raises(ValueError):
            build_module("unknown")


class TestExchangeRelation:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_finite_exact(self, m):
        assert rtt_residual(build_module("finite", spin=m)) == 0.0

    def test_ladder_rational_spin(self):
        assert rtt_residual(
            build_module("ladder", spin=F(5, 3), levels=6)) == 0.0

    def test_ladder_symbolic_spin(self):
        W = build_module("ladder", spin=SPIN_VARIABLE, levels=5)
        assert rtt_residual(W) == 0.0

    def test_oscillator(self):
        assert rtt_residual(build_module("oscillator", levels=6)) == 0.0

    def test_tensor_of_factors(self):
        T = tensor_module(build_module("finite", spin=2),
                          build_module("ladder", spin=F(-1, 2), levels=6))
        assert rtt_residual(T) == 0.0

    def test_flipped_raising_fails(self):
        bad = build_module("ladder", spin=F(5, 3), levels=6,
                           flip_raising=True)
        assert rtt_residual(bad) > 0

    def test_too_shallow_rejected(self):
        with pytest.raises(ValueError):
            rtt_residual(build_module("oscillator", levels=1))


class TestTransfer:
    def test_single_site_defining_module(self):
        a = F(3, 4)
        t = yangian_transfer(build_module("finite", spin=1), (a,), 1)
        assert t.basis == ((1,), (2,))
        assert t.get(0)[0][0] == Poly((a + 1, 1))
        assert t.get(0)[1][1] == Poly((a, 1))
        assert t.get(1)[0][0] == Poly((a, 1))
        assert t.get(1)[1][1] == Poly((a + 1, 1))
        assert not t.get(0)[0][1] and not t.get(1)[1][0]

    def test_zero_site_rejected(self):
        with pytest.raises(ValueError):
            yangian_transfer(build_module("finite", spin=1), (F(0), F(1)), 0)

    def test_shallow_truncation_rejected(self):
        W = build_module("ladder", spin=F(5, 3), levels=3)
        with pytest.raises(ValueError):
            yangian_transfer(W, SITES, 3)

    def test_sector_preservation(self):
        W = build_module("ladder", spin=F(5, 3), levels=6)
        t = yangian_transfer(W, SITES, 3, skip_cross_sector=False)
        assert t.cross_sector_residual() == 0.0

    def test_product_rule_exact(self):
        X = build_module("ladder", spin=F(5, 3), levels=7)
        Y = build_module("ladder", spin=F(-1, 2), shift=F(1, 5), levels=7)
        assert product_residual(X, Y, SITES, 4) == 0.0

    def test_product_rule_mixed_kinds(self):
        X = build_module("finite", spin=2)
        Y = build_module("oscillator", levels=6)
        assert product_residual(X, Y, SITES, 3) == 0.0


class TestBaxterOperator:
    def test_degree_and_triangularity(self):
        for L, sites in [(1, (F(3, 4),)), (2, SITES),
                         (3, (F(2, 3), F(-5, 7), F(9, 4)))]:
            for d in q_degree_report(sites, order=1):
                assert d.degree_matches and d.leading_nonzero
                assert d.p0_upper_triangular and d.p0_diagonal_matches

    def test_two_site_leading_closed_form(self):
        assert two_site_leading_residual(*SITES, 12) == 0

    def test_sector_preservation(self):
        q = yangian_q(SITES, 3)
        assert q.cross_sector_residual() == 0.0

    def test_exact_summation_matches_series(self):
        p = F(1, 7)
        full = q_exact_at_p(SITES, p)
        q = yangian_q(SITES, 60)
        z0 = 0.37
        for r in range(4):
            for c in range(4):
                exact = sum(float(cc) * z0**m
                            for m, cc in enumerate(full[r][c].coeffs))
                approx = sum(
                    float(p)**k * sum(float(cc) * z0**m for m, cc in
                                      enumerate(q.get(k)[r][c].coeffs))
                    for k in range(61)
                )
                assert abs(exact - approx) < 1e-12 * (1 + abs(exact))

    def test_exact_summation_rejects_unit_point(self):
        with pytest.raises(ZeroDivisionError):
            q_exact_at_p(SITES, F(1))


class TestFunctionalRelations:
    def test_tq_single_site(self):
        assert tq_residual((F(3, 4),), 6) == 0.0

    def test_tq_two_sites(self):
        assert tq_residual(SITES, 6) == 0.0

    def test_tq_three_sites(self):
        assert tq_residual((F(2, 3), F(-5, 7), F(9, 4)), 3) == 0.0

    def test_tq_negative_control(self):
        assert tq_residual(SITES, 3, drop_second_term=True) > 0

    def test_oscillator_comparison_two_sites(self):
        assert oscillator_comparison(SITES, 10) == 0.0

    def test_oscillator_comparison_three_sites(self):
        assert oscillator_comparison((F(2, 3), F(-5, 7), F(9, 4)), 4) == 0.0


class TestEigenExample:
    def test_exact_eigenrelation(self):
        assert eigen_example_residual(F(2, 3), F(9, 5), F(1, 3)) == 0.0

    def test_exact_eigenrelation_other_point(self):
        assert eigen_example_residual(F(1, 2), F(7, 4), F(2, 5)) == 0.0

    def test_series_point_zero(self):
        assert eigen_example_residual(F(2, 3), F(9, 5), F(0)) == 0.0

    def test_unit_point_rejected(self):
        with pytest.raises(ValueError):
            eigen_example_residual(F(2, 3), F(9, 5), F(1))

    def test_quadratic_roots_feed_numeric_eigenpair(self):
        a1, a2, p = 0.7, 1.9, 0.3
        quad = two_site_quadratic(F(7, 10), F(19, 10), F(3, 10))
        roots = np.roots([float(quad.coefficient(2)),
                          float(quad.coefficient(1)),
                          float(quad.coefficient(0))])
        A = np.array([
            [a1 + p / (1 - p), 1 / (1 - p)],
            [p / (1 - p), a2 + p / (1 - p)],
        ]) / (1 - p)
        for z1 in roots:
            v = np.array([z1 + a1 + 1, z1 + a2])
            lam = (a1 / (1 - p) + p / (1 - p)**2
                   + (z1 + a2) / ((z1 + a1 + 1) * (1 - p)**2))
            assert np.abs(A @ v - lam * v).max() < 1e-12

    def test_zero_point_root_alignment(self):
        # at the trivial grading point the roots are minus the sites and
        # one eigenvector is a coordinate direction
        a1, a2 = F(2, 3), F(9, 5)
        quad = two_site_quadratic(a1, a2, F(0))
        assert poly_rem(quad, Poly((a1, F(1)))) == Poly()
        assert poly_rem(quad, Poly((a2, F(1)))) == Poly()
        v = (-a2 + a1 + 1, -a2 + a2)  # root -a2
        assert v[1] == 0 and v[0] != 0


class TestQCharacters:
    def test_finite_family(self):
        got = yangian_qchar(build_module("finite", spin=3))
        assert len(got) == 4
        for i, (k1, k2) in enumerate(got):
            r1, r2 = qchar_finite_term(3, i)
            assert k1 == r1 and k2 == r2

    def test_ladder_family_with_shift(self):
        W = build_module("ladder", spin=F(5, 3), shift=F(1, 4), levels=6)
        for i, (k1, k2) in enumerate(yangian_qchar(W)):
            r1, r2 = qchar_ladder_term(F(5, 3), F(1, 4), i)
            assert k1 == r1 and k2 == r2

    def test_oscillator_family(self):
        B = build_module("oscillator", levels=6)
        for i, (k1, k2) in enumerate(yangian_qchar(B)):
            r1, r2 = qchar_oscillator_term(i)
            assert k1 == r1 and k2 == r2

    def test_tensor_not_single_banded(self):
        T = tensor_module(build_module("finite", spin=1),
                          build_module("finite", spin=1))
        with pytest.raises(ValueError):
            yangian_qchar(T)

    def test_interchange_identity(self):
        assert qchar_interchange_mismatches(F(7, 3), F(4, 5), 8) == 0

    def test_interchange_negative_control(self):
        from elliptic_baxter.yangian import _pairs_match
        lhs, rhs = [], []
        for i in range(3):
            j = 2 - i
            x = qchar_ladder_term(F(7, 3), F(0), i)
            y = qchar_ladder_term(F(0), F(4, 5), j)
            lhs.append((x[0] * y[0], x[1] * y[1]))
            x = qchar_ladder_term(F(7, 3) - F(4, 5), F(4, 5) + F(1, 9), i)
            y = qchar_ladder_term(F(4, 5), F(0), j)
            rhs.append((x[0] * y[0], x[1] * y[1]))
        assert not _pairs_match(lhs, rhs)
