import numpy as np
import pytest

from elliptic_baxter.dynamical import (
    DiffOpSeries,
    GradingError,
    ModuleOperator,
    ShapeError,
    SingularityError,
    TermMatrix,
    WeightBasis,
    compose_module_ops,
    invert_weightwise,
    series_add,
    series_compose,
    series_invert,
    series_max_residual,
    series_scale,
)
from elliptic_baxter.modules import build_asymptotic
from elliptic_baxter.theta import EllipticParams, SamplePlan, ThetaExpression, ThetaSum

P = EllipticParams(tau=1j, hbar=0.31)
H = P.hbar


def sample_pairs(seed, count, margin=5e-2):
    return SamplePlan(seed=seed, count=count, pole_margin=margin).pairs(P)


class TestWeightBasis:
    def test_layout(self):
        b = WeightBasis(2.0, (1, 2, 1))
        assert b.size == 4
        assert b.levels == 2
        assert b.index(1, 1) == 2
        assert b.level_of(3) == 2
        assert b.weight(2) == 2.0 - 4

    def test_rejects_empty_level(self):
        with pytest.raises(ShapeError):
            WeightBasis(0.0, (1, 0, 1))


class TestComposeModuleOps:
    def test_identity_neutral(self):
        W = build_asymptotic(1.3 + 0.2j, 0.0, 4, P)
        ident = ModuleOperator.identity(W.basis, P)
        for key in ("++", "+-", "-+", "--"):
            left = compose_module_ops(ident, W.L[key])
            right = compose_module_ops(W.L[key], ident)
            for z, x in sample_pairs(1, 3):
                ref = W.L[key].to_matrix(z, x)
                assert np.allclose(left.to_matrix(z, x), ref, atol=1e-12)
                assert np.allclose(right.to_matrix(z, x), ref, atol=1e-12)

    def test_weight_rule_enforced(self):
        b = WeightBasis(1.0, (1, 1))
        with pytest.raises(ShapeError):
            # a (+,+) bidegree operator must preserve weight
            ModuleOperator(1, 1, b, b, {(1, 0): ThetaSum.one()}, P)

    def test_matches_sequential_application_oracle(self):
        # Oracle: apply Psi then Phi to a function-valued vector directly
        # from the defining property Phi(g(x) v) = g(x+beta*hbar) Phi(v).
        W = build_asymptotic(0.8 - 0.4j, 0.0, 5, P)
        phi, psi = W.L["+-"], W.L["-+"]
        comp = compose_module_ops(phi, psi)
        rng = np.random.default_rng(8)
        coeff = rng.normal(size=W.basis.size) + 1j * rng.normal(size=W.basis.size)
        funcs = [
            (lambda x, c=coeff[b]: c * np.exp(0.2 * x)) for b in range(W.basis.size)
        ]
        for z, x in sample_pairs(5, 4):
            mid = psi.apply_to_function_vector(funcs, z, x + phi.beta * H)
            direct = np.zeros(W.basis.size, dtype=complex)
            for (a, b), s in phi.entries.items():
                direct[a] += s.eval(z, x, P) * mid[b]
            via = comp.apply_to_function_vector(funcs, z, x)
            assert np.allclose(direct, via, rtol=1e-10, atol=1e-12)

    def test_xshift_pattern_on_ladder(self):
        # (Phi o Psi)_{ac}(x) = Phi_{ab}(x) Psi_{bc}(x + beta_Phi * hbar)
        W = build_asymptotic(1.1 + 0.6j, 0.0, 5, P)
        lp, lm = W.L["-+"], W.L["+-"]
        comp = compose_module_ops(lm, lp)  # lowering o raising: diagonal
        for z, x in sample_pairs(7, 4):
            for j in (1, 2, 3):
                got = comp.entries[(j, j)].eval(z, x, P)
                ref = lm.entries[(j, j - 1)].eval(z, x, P) * lp.entries[
                    (j - 1, j)
                ].eval(z, x + lm.beta * H, P)
                assert abs(got - ref) <= 1e-12 * (1 + abs(ref))

    def test_invert_weightwise_roundtrip(self):
        W = build_asymptotic(1.3 + 0.2j, 0.0, 5, P)
        km = W.L["--"]
        inv = invert_weightwise(km)
        left = compose_module_ops(inv, km)
        right = compose_module_ops(km, inv)
        eye = np.eye(W.basis.size)
        for z, x in sample_pairs(3, 3):
            assert np.allclose(left.to_matrix(z, x), eye, atol=1e-10)
            assert np.allclose(right.to_matrix(z, x), eye, atol=1e-10)


def const_series(alpha0, mats, params=P):
    terms = [TermMatrix(lambda z, x, m=np.asarray(m, dtype=complex): m, len(mats[0])) for m in mats]
    return DiffOpSeries(alpha0, terms, len(mats[0]), params)


def theta_series(alpha0, sums, params=P):
    terms = [TermMatrix.from_symbolic(m, params) for m in sums]
    return DiffOpSeries(alpha0, terms, len(sums[0]), params)


class TestSeries:
    def test_identity_neutral(self):
        s = theta_series(
            1.0,
            [
                [[ThetaSum(ThetaExpression.theta(1, 1, 0.1)), ThetaSum.zero()],
                 [ThetaSum.zero(), ThetaSum(ThetaExpression.theta(0, 1, 0.2))]],
            ],
        )
        ident = DiffOpSeries.identity(2, 3, P)
        prod = series_compose(s, ident, 3)
        pts = sample_pairs(11, 3)
        assert series_max_residual(prod, s, 3, pts) < 1e-12
        prod2 = series_compose(ident, s, 3)
        assert series_max_residual(prod2, s, 3, pts) < 1e-12

    def test_single_term_shift_rule_oracle(self):
        # (T_a M(x)) (T_b N(x)) = T_{a+b} M(x + b*hbar) N(x)
        a, b = 0.7 + 0.2j, -1.1 + 0.5j
        m = ThetaSum(ThetaExpression.theta(0, 1, 0.15))
        n = ThetaSum(ThetaExpression.theta(0, 1, 0.25))
        s1 = theta_series(a, [[[m]]])
        s2 = theta_series(b, [[[n]]])
        prod = series_compose(s1, s2, 0)
        assert abs(prod.alpha0 - (a + b)) < 1e-12
        for z, x in sample_pairs(13, 5):
            ref = m.eval(z, x + b * H, P) * n.eval(z, x, P)
            got = prod.terms[0].eval(z, x)[0, 0]
            assert abs(got - ref) <= 1e-12 * (1 + abs(ref))

    def test_associativity(self):
        rng = np.random.default_rng(3)
        mats = lambda: [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3)]
        s1 = const_series(1.0, mats())
        s2 = const_series(-2.0, mats())
        s3 = const_series(0.5 + 0.1j, mats())
        left = series_compose(series_compose(s1, s2, 4), s3, 4)
        right = series_compose(s1, series_compose(s2, s3, 4), 4)
        pts = sample_pairs(17, 4)
        assert series_max_residual(left, right, 4, pts) < 1e-10

    def test_invert_single_term_matches_matrix_inverse(self):
        m = ThetaSum(ThetaExpression.theta(0, 1, 0.15))
        a = 0.9 - 0.3j
        s = theta_series(a, [[[m, ThetaSum.zero()], [ThetaSum.zero(), m.shift_x(0.2)]]])
        inv = series_invert(s, 2)
        for z, x in sample_pairs(19, 4):
            # entrywise inverse with argument shifted by -a*hbar
            ref = 1.0 / m.eval(z, x - a * H, P)
            assert abs(inv.terms[0].eval(z, x)[0, 0] - ref) <= 1e-11 * (1 + abs(ref))
        ident = series_compose(s, inv, 2)
        pts = sample_pairs(23, 4)
        assert series_max_residual(ident, DiffOpSeries.identity(2, 2, P), 2, pts) < 1e-9

    def test_invert_full_series_roundtrip(self):
        rng = np.random.default_rng(5)
        mats = [np.eye(3) + 0.2 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
                for _ in range(4)]
        s = const_series(0.4 + 1.2j, mats)
        inv = series_invert(s, 3)
        prod = series_compose(s, inv, 3)
        prod2 = series_compose(inv, s, 3)
        pts = sample_pairs(29, 3)
        ident = DiffOpSeries.identity(3, 3, P)
        assert series_max_residual(prod, ident, 3, pts) < 1e-9
        assert series_max_residual(prod2, ident, 3, pts) < 1e-9

    def test_invert_singular_leading_term(self):
        s = const_series(0.0, [np.zeros((2, 2))])
        inv = series_invert(s, 1)
        with pytest.raises(SingularityError):
            inv.terms[0].eval(0.1, 0.2)

    def test_add_alignment_and_grading_error(self):
        s1 = const_series(2.0, [np.eye(2), 2 * np.eye(2)])
        s2 = const_series(0.0, [3 * np.eye(2)])
        tot = series_add(s1, s2, 2)
        assert abs(tot.alpha0 - 2.0) < 1e-12
        assert np.allclose(tot.terms[1].eval(0, 0), 2 * np.eye(2) + 3 * np.eye(2))
        with pytest.raises(GradingError):
            series_add(s1, const_series(0.3, [np.eye(2)]), 2)

    def test_scale(self):
        s = const_series(0.0, [np.eye(2)])
        scaled = series_scale(s, lambda z, x: z + x)
        assert np.allclose(scaled.terms[0].eval(0.3, 0.4), 0.7 * np.eye(2))
