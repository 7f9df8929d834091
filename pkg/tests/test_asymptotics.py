import math

import numpy as np
import pytest

from specsum.asymptotics import (
    AnalysisParams,
    ErrorBudget,
    PreAsymptoticError,
    beta_eps,
    check_thm_conditions,
    choose_U,
    choose_eps,
    count,
    eisenstein_bound,
    endpoint_admissible,
    error_budget,
    family_asymptotic_table,
    field_prefactor,
    hypercube_budget_sweep,
    m_rho,
    main_term,
    synth_spectrum,
)
from specsum.numberfield import make_field
from specsum.regions import (
    discrete_singleton,
    family,
    imaginary_box,
    shell_growth_constant,
)

F5 = make_field(5)
FQ = make_field(1)


class TestAnalysisParams:
    def test_defaults(self):
        p = AnalysisParams()
        assert p.tau == 0.3
        assert p.t0 == pytest.approx(0.5 * 0.09 * 1.01)
        assert p.rho == pytest.approx(0.75 + 0.25 * 0.01)
        assert p.A == pytest.approx(2.98)
        assert 1 - p.tau < p.rho < 1

    @pytest.mark.parametrize("kw", [
        {"tau": 0.2}, {"tau": 0.5}, {"a": 2.0}, {"delta": 0.0},
        {"t0": -1.0}, {"rho": 0.5}, {"rho": 1.0}, {"A": 2.0},
    ])
    def test_rejections(self, kw):
        with pytest.raises(ValueError):
            AnalysisParams(**kw)


class TestMRho:
    def test_box_scaling(self):
        p = AnalysisParams()
        for a in (10.0, 100.0, 1000.0):
            C = imaginary_box([(a, a + 1)])
            assert m_rho(C, None, p) == pytest.approx(a ** (p.rho - 1),
                                                      rel=0.02)

    def test_singleton_point_mass(self):
        p = AnalysisParams()
        Cm = discrete_singleton([2.5], parities=[0])
        # nv_{-A}({p}) / nv_1({p}) = p^{-A} / p
        assert m_rho(None, Cm, p) == pytest.approx(2.5 ** (-p.A) / 2.5)

    def test_zero_measure_rejected(self):
        p = AnalysisParams()
        with pytest.raises(ValueError):
            m_rho(imaginary_box([(2, 2)]), None, p)

    def test_beta_eps_interval_arithmetic(self):
        a, s, eps = 5.0, 2.0, 0.1
        C = imaginary_box([(a, a + s)])
        outer = ((a + s + 2 * eps) ** 2 - (a - 2 * eps) ** 2) / 2
        inner = ((a + s - 2 * eps) ** 2 - (a + 2 * eps) ** 2) / 2
        base = ((a + s) ** 2 - a ** 2) / 2
        assert beta_eps(C, eps) == pytest.approx((outer - inner) / base,
                                                 rel=1e-10)


class TestParameterChoice:
    def test_reference_values(self):
        m = math.exp(-100)
        U = choose_U(m, 0.5, 1)
        eps = choose_eps(m, U)
        assert U == pytest.approx(195.39483, abs=1e-4)
        assert eps == pytest.approx(0.108553, abs=1e-5)

    def test_exact_identity(self):
        for m in (math.exp(-10), math.exp(-100), 1e-200):
            U = choose_U(m, 0.5, 2)
            eps = choose_eps(m, U)
            assert U * eps * eps == pytest.approx(
                0.5 * math.log(abs(math.log(m))), abs=1e-12)

    def test_monotonicity(self):
        ms = [math.exp(-20), math.exp(-100), math.exp(-500)]
        Us = [choose_U(m, 0.5, 1) for m in ms]
        epss = [choose_eps(m, U) for m, U in zip(ms, Us)]
        products = [U * e * e for U, e in zip(Us, epss)]
        assert Us == sorted(Us)
        assert epss == sorted(epss, reverse=True)
        assert products == sorted(products)

    def test_pre_asymptotic_threshold_reported(self):
        with pytest.raises(PreAsymptoticError):
            choose_U(0.9, 0.5, 1)
        with pytest.raises(PreAsymptoticError, match="pre-asymptotic"):
            choose_U(math.exp(-2), 0.5, 1, D=shell_growth_constant(1)[1])


class TestErrorBudget:
    def test_q_plus_empty_singleton(self):
        p = AnalysisParams()
        Cm = discrete_singleton([2.5, 4.5], parities=[0, 0])
        b = error_budget(None, Cm, p, 100.0, 0.2, F5)
        assert b.kloosterman_piece == pytest.approx((2.5 * 4.5) ** (-p.A))
        assert b.smoothing_piece == 0.0
        # main term matches the exact discrete identity
        assert b.main_term == pytest.approx(
            2 * math.sqrt(5) / math.pi ** 2 * 2.5 * 4.5, rel=1e-12)
        assert b.ratio < 1e-3

    def test_eps_lower_bound_identity(self):
        # e^{-U eps^2} at eps = sqrt(D/U) equals 1/R exactly
        p = AnalysisParams()
        C = imaginary_box([(50, 60)])
        R, D = shell_growth_constant(1)
        U = 30 * D
        eps = math.sqrt(D / U)
        b = error_budget(C, None, p, U, eps, FQ)
        nv1 = ((60 ** 2 - 50 ** 2) / 2)
        assert b.smoothing_piece == pytest.approx(nv1 / R, rel=1e-10)

    def test_admissibility_named(self):
        p = AnalysisParams()
        C = imaginary_box([(50, 60)])
        with pytest.raises(ValueError, match="U"):
            error_budget(C, None, p, 1.0, 0.2, FQ)
        with pytest.raises(ValueError, match="eps"):
            error_budget(C, None, p, 100.0, 0.5, FQ)

    def test_hypercube_sweep_pieces_small_and_decreasing(self):
        budgets = hypercube_budget_sweep(
            F5, [10 ** (8.5 + k) for k in range(5)])
        ratios = np.array([[pc / b.main_term for pc in b.pieces]
                           for b in budgets])
        assert np.all(ratios[-1] < 0.1)
        assert np.all(np.diff(ratios, axis=0) < 0)

    def test_budget_fields(self):
        b = hypercube_budget_sweep(F5, [1e9])[0]
        assert isinstance(b, ErrorBudget)
        assert b.total_error == pytest.approx(sum(b.pieces))
        assert b.U > 0 and 0 < b.eps < 1


@pytest.fixture(scope="module")
def hyper():
    return family("hypercube", a=[lambda t: t, lambda t: t], sigma=0.3)


@pytest.fixture(scope="module")
def setup():
    fam = family("hypercube", a=[lambda t: t, lambda t: t], sigma=0.3)
    reg = fam.instance(500.0).product
    spec = synth_spectrum(F5, reg, seed=7)
    return reg, spec


class TestConditions:
    def test_hypercube_passes(self, hyper):
        rep = check_thm_conditions(hyper, [10, 100, 1000])
        assert rep["pass"]
        assert rep["o_condition"]["exponent"] < 0

    def test_large_alpha_fails(self, hyper):
        rep = check_thm_conditions(hyper, [10, 100, 1000], alpha=0.6)
        assert not rep["sigma_condition"]["pass"]

    def test_shrinking_side_within_sigma_passes(self):
        # box whose side shrinks exactly like the allowed sigma(t)
        p = AnalysisParams()

        def side(t):
            return 0.1 * ((1 - p.rho) * math.log(t)) ** (-0.4)

        fam = family("box", a=[lambda t: t],
                     b=[lambda t: t + side(t)])
        rep = check_thm_conditions(fam, [1e3, 1e4, 1e5], gamma=0.05)
        assert rep["sigma_condition"]["pass"]

    def test_endpoint_violation_flagged(self, hyper):
        rep = check_thm_conditions(hyper, [10, 100, 1000],
                                   fixed_endpoints=[-2.0])
        assert not rep["endpoint_condition"]["pass"]
        assert -2.0 in rep["endpoint_condition"]["violations"]

    def test_endpoint_admissible(self):
        assert not endpoint_admissible(0.0)       # b = 2
        assert not endpoint_admissible(-0.75)     # b = 3
        assert endpoint_admissible(-1.1)
        assert endpoint_admissible(0.3)

    def test_needs_three_points(self, hyper):
        with pytest.raises(ValueError):
            check_thm_conditions(hyper, [10, 100])


class TestMainTerm:
    def test_empty(self):
        assert main_term(None, F5) == 0.0

    def test_prefactor(self):
        assert field_prefactor(F5) == pytest.approx(
            2 * math.sqrt(5) / (2 * math.pi) ** 2)
        assert field_prefactor(FQ) == pytest.approx(1 / math.pi)

    def test_holo_identity_exact(self):
        row = family_asymptotic_table("holo", F5, [1, 2, 3],
                                      points=[2.0, 3.5])
        assert row["rel_deviation"] < 1e-12

    def test_weyl1_fit(self):
        row = family_asymptotic_table("weyl1", F5,
                                      np.geomspace(100, 1000, 5))
        assert row["exponent"] == pytest.approx(2.0, abs=0.05)
        assert row["rel_deviation"] < 0.03

    def test_unknown_row(self):
        with pytest.raises(ValueError):
            family_asymptotic_table("torus", F5, [1, 2, 3])

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            family_asymptotic_table("weyl1", F5, [10, 100])


class TestEisenstein:
    def test_reference(self):
        assert eisenstein_bound(0.0, [0.0]) == pytest.approx(
            math.log(2) ** 7)

    def test_monotone(self):
        vals = [eisenstein_bound(t, [1.0, -0.5]) for t in (0, 5, 50, 500)]
        assert vals == sorted(vals)


class TestSynthetic:
    def test_count_close_to_main_term(self, setup):
        reg, spec = setup
        mt = main_term(reg, F5)
        assert mt == pytest.approx(1e4, rel=0.1)
        assert 0.9 <= count(spec, region=reg) / mt <= 1.1

    def test_exact_additivity(self, setup):
        reg, spec = setup
        left = imaginary_box([(500, 500.15), (500, 500.3)])
        right = imaginary_box([(500.15, 500.3), (500, 500.3)])
        assert count(spec, region=left) + count(spec, region=right) == \
            count(spec, region=reg)

    def test_exact_monotonicity(self, setup):
        reg, spec = setup
        sub = imaginary_box([(500.1, 500.2), (500, 500.25)])
        assert count(spec, region=sub) <= count(spec, region=reg)

    def test_deterministic(self, setup):
        reg, _ = setup
        a = synth_spectrum(F5, reg, seed=3)
        b = synth_spectrum(F5, reg, seed=3)
        assert a.points == b.points and a.weights == b.weights

    def test_empty_spectrum_counts_zero(self, setup):
        reg, spec = setup
        off = imaginary_box([(10, 11), (10, 11)])
        assert count(spec, region=off) == 0.0

    def test_lognormal_weights_mean_one(self):
        reg = imaginary_box([(100, 101)])
        spec = synth_spectrum(FQ, reg, seed=1, weight_law="lognormal")
        assert np.mean(spec.weights) == pytest.approx(1.0, abs=0.2)

    def test_count_with_test_function(self, setup):
        reg, spec = setup
        # constant function reproduces the total weight
        one = lambda nu: 1.0 + 0j
        assert count(spec, f=(one, one)) == pytest.approx(
            sum(spec.weights))

    def test_count_argument_validation(self, setup):
        reg, spec = setup
        with pytest.raises(ValueError):
            count(spec)
        with pytest.raises(ValueError):
            count(spec, region=reg, f=(lambda nu: 1.0,))

    def test_rejects_unsupported_regions(self):
        with pytest.raises(ValueError):
            synth_spectrum(F5, discrete_singleton([2.0, 3.0],
                                                  parities=[1, 1]), seed=0)
