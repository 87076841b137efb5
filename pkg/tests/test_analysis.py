"""Closed-form MSE identities, attack characterization, trial statistics."""

import math

import numpy as np
import pytest

from namcount import Graph, erdos_renyi
from namcount.analysis import (
    AttackStrategy,
    ConfusionMatrix,
    attack_point,
    confusion_matrix,
    pair_square_sums,
    re_bound,
    re_bound_check,
    simulate_attack,
    theoretical_mse,
    tradeoff_curve,
    tradeoff_type2,
    trial_statistics,
)
from namcount.estimators import BudgetSplit, EstimatorKind
from namcount.mechanisms import Mechanism, MechanismKind


# ---------------------------------------------------------------------------
# closed-form MSE
# ---------------------------------------------------------------------------

class TestTheoreticalMse:
    def test_one_round_triangle_terms_on_k3(self, k3):
        # every pair has one 2-walk between its endpoints: s_b = 3
        mse = theoretical_mse(EstimatorKind.TRI_OR, k3, 1.0)
        assert mse.sigma2_term == pytest.approx(3.0)
        assert mse.sigma4_term == pytest.approx(3.0)
        assert mse.sigma6_term == pytest.approx(1.0)
        assert mse.total == pytest.approx(7.0)

    @pytest.mark.parametrize("graph_name", ["k4", "irr5", "er20"])
    def test_triangle_route_variance_ratios(self, graph_name, request):
        """The full-matrix route cuts the linear noise term 9x below the
        one-round estimator; the column route lands 4x above the full-matrix
        route, trading accuracy for an n-times-smaller download."""
        g = request.getfixturevalue(graph_name)
        sigma2 = 0.83
        one_round = theoretical_mse(EstimatorKind.TRI_OR, g, sigma2)
        full = theoretical_mse(EstimatorKind.TRI_TR, g, sigma2)
        column = theoretical_mse(EstimatorKind.TRI_MTR, g, sigma2)
        assert one_round.sigma2_term == pytest.approx(9.0 * full.sigma2_term)
        assert column.sigma2_term == pytest.approx(4.0 * full.sigma2_term)
        assert full.sigma4_term == 0.0
        assert column.sigma4_term == pytest.approx(one_round.sigma4_term / 9.0)

    def test_quadrangle_form_matches_dense_expansion(self, er20):
        sigma2 = 0.6
        a = er20.adjacency(np.float64)
        b = a @ a
        d = a.sum(axis=1)
        weight = 2.0 * (b @ a) - a * (d[:, None] + d[None, :])
        iu = np.triu_indices(er20.n, k=1)
        lin = sigma2 / 16.0 * float((weight[iu] ** 2).sum())
        quad = sigma2**2 / 16.0 * (er20.n - 2) * float((b[iu] ** 2).sum())
        mse = theoretical_mse(EstimatorKind.QUA_TR, er20, sigma2)
        assert mse.sigma2_term == pytest.approx(lin, rel=1e-12)
        assert mse.sigma4_term == pytest.approx(quad, rel=1e-12)

    def test_pair_square_sums_on_k5(self, k5):
        assert pair_square_sums(k5) == (90.0, 1690.0, 3240.0)

    def test_two_star_form(self, er20):
        eps0 = 0.7
        d = er20.degrees.astype(float)
        mse = theoretical_mse(EstimatorKind.TWO_STAR, er20, 0.0, eps0=eps0)
        # grouped form == expanded moments of the debiased product
        expanded = (8.0 * (d**2).sum() - 16.0 * er20.num_edges
                    + 2.0 * er20.n) / eps0**2
        assert mse.sigma2_term == pytest.approx(expanded, rel=1e-12)
        assert mse.sigma4_term == pytest.approx(20.0 * er20.n / eps0**4)

    def test_two_star_single_node(self):
        g = Graph.from_edges(1, [])
        mse = theoretical_mse(EstimatorKind.TWO_STAR, g, 0.0, eps0=2.0)
        assert mse.sigma2_term == pytest.approx(2.0 / 4.0)
        assert mse.sigma4_term == pytest.approx(20.0 / 16.0)

    def test_two_star_requires_eps0(self, k4):
        with pytest.raises(ValueError, match="eps0"):
            theoretical_mse(EstimatorKind.TWO_STAR, k4, 1.0)
        with pytest.raises(ValueError, match="eps0"):
            theoretical_mse(EstimatorKind.TWO_STAR, k4, 1.0, eps0=0.0)

    def test_rejects_negative_sigma2(self, k4):
        with pytest.raises(ValueError, match="sigma2"):
            theoretical_mse(EstimatorKind.TRI_OR, k4, -0.5)

    @pytest.mark.parametrize("seed", range(4))
    def test_terms_scale_with_noise_power(self, seed):
        g = erdos_renyi(12, 0.4, seed=seed)
        for kind in (EstimatorKind.TRI_OR, EstimatorKind.TRI_TR,
                     EstimatorKind.TRI_MTR, EstimatorKind.QUA_TR):
            lo = theoretical_mse(kind, g, 0.5)
            hi = theoretical_mse(kind, g, 1.0)
            assert lo.sigma2_term >= 0 and lo.sigma4_term >= 0
            assert lo.total == pytest.approx(
                lo.sigma2_term + lo.sigma4_term + lo.sigma6_term)
            assert hi.sigma2_term == pytest.approx(2.0 * lo.sigma2_term)
            assert hi.sigma4_term == pytest.approx(4.0 * lo.sigma4_term)
            assert hi.sigma6_term == pytest.approx(8.0 * lo.sigma6_term)
            assert hi.total > lo.total


# ---------------------------------------------------------------------------
# attack characterization
# ---------------------------------------------------------------------------

class TestConfusionMatrix:
    def test_cells_form_a_distribution(self):
        for strat in AttackStrategy:
            cm = confusion_matrix(strat, 0.7, 0.3)
            cells = cm.cells()
            assert all(0.0 <= c <= 1.0 for c in cells)
            assert sum(cells) == pytest.approx(1.0)

    def test_bit_randomizer_recall_at_unit_budget(self):
        cm = confusion_matrix(AttackStrategy.RR, 1.0, 0.4)
        assert cm.recall == pytest.approx(math.e / (1.0 + math.e))
        assert cm.recall == pytest.approx(0.7310585786, rel=1e-9)
        assert cm.type1 == pytest.approx(1.0 - cm.recall)

    @pytest.mark.parametrize("eps", [0.3, 1.0, 2.5])
    def test_precision_first_threshold_recall_is_half(self, eps):
        cm = confusion_matrix(AttackStrategy.LAP_KAPPA1, eps, 0.2)
        assert cm.recall == pytest.approx(0.5)

    @pytest.mark.parametrize("eps", [0.3, 1.0, 2.5])
    def test_midpoint_threshold_beats_half_recall(self, eps):
        half = confusion_matrix(AttackStrategy.LAP_KAPPA1, eps, 0.2)
        mid = confusion_matrix(AttackStrategy.LAP_KAPPA2, eps, 0.2)
        assert mid.recall == pytest.approx(1.0 - 0.5 * math.exp(-0.5 * eps))
        assert mid.recall > half.recall

    @pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("p", [0.1, 0.4])
    def test_rr_and_unit_threshold_share_precision(self, eps, p):
        # both flag true edges e^eps times more often than absent ones
        rr = confusion_matrix(AttackStrategy.RR, eps, p)
        lap = confusion_matrix(AttackStrategy.LAP_KAPPA1, eps, p)
        assert rr.precision == pytest.approx(lap.precision, rel=1e-12)

    def test_rates_are_density_free(self):
        a = confusion_matrix(AttackStrategy.RR, 1.0, 0.1)
        b = confusion_matrix(AttackStrategy.RR, 1.0, 0.7)
        assert a.type1 == pytest.approx(b.type1)
        assert a.type2 == pytest.approx(b.type2)
        assert a.recall == pytest.approx(b.recall)

    def test_attack_point_mirrors_matrix(self):
        cm = confusion_matrix(AttackStrategy.LAP_KAPPA2, 1.2, 0.25)
        pt = attack_point(AttackStrategy.LAP_KAPPA2, 1.2, 0.25)
        assert (pt.type1, pt.type2, pt.precision, pt.recall) == (
            cm.type1, cm.type2, cm.precision, cm.recall)

    def test_degenerate_cells(self):
        empty = ConfusionMatrix(0.0, 0.0, 0.3, 0.7)
        assert empty.type1 == 0.0 and empty.recall == 0.0
        never_flagged = ConfusionMatrix(0.0, 0.4, 0.0, 0.6)
        assert never_flagged.precision == 0.0

    @pytest.mark.parametrize("bad_p", [0.0, 1.0, -0.2, 1.3])
    def test_density_domain(self, bad_p):
        with pytest.raises(ValueError, match="density"):
            confusion_matrix(AttackStrategy.RR, 1.0, bad_p)

    @pytest.mark.parametrize("bad_eps", [0.0, -1.0, math.inf, float("nan")])
    def test_eps_domain(self, bad_eps):
        with pytest.raises(ValueError, match="eps"):
            confusion_matrix(AttackStrategy.RR, bad_eps, 0.3)


class TestSimulateAttack:
    @pytest.mark.parametrize("strat", list(AttackStrategy))
    def test_matches_closed_form(self, strat):
        draws = 200_000
        mc = simulate_attack(strat, 1.0, 0.4, draws, seed=3)
        exact = confusion_matrix(strat, 1.0, 0.4)
        for got, want in zip(mc.cells(), exact.cells()):
            se = math.sqrt(want * (1.0 - want) / draws)
            assert got == pytest.approx(want, abs=5 * se)

    def test_deterministic_per_seed(self):
        a = simulate_attack(AttackStrategy.RR, 1.0, 0.3, 1000, seed=8)
        b = simulate_attack(AttackStrategy.RR, 1.0, 0.3, 1000, seed=8)
        assert a == b
        c = simulate_attack(AttackStrategy.RR, 1.0, 0.3, 1000, seed=9)
        assert a != c

    def test_validation(self):
        with pytest.raises(ValueError, match="draws"):
            simulate_attack(AttackStrategy.RR, 1.0, 0.3, 0)
        with pytest.raises(ValueError, match="density"):
            simulate_attack(AttackStrategy.RR, 1.0, 1.0, 10)
        with pytest.raises(ValueError, match="eps"):
            simulate_attack(AttackStrategy.RR, math.inf, 0.3, 10)


class TestTradeoff:
    def test_bit_randomizer_piecewise_shape(self):
        eps = 1.0
        q = 1.0 / (1.0 + math.exp(eps))
        assert tradeoff_type2(MechanismKind.RR, eps, 0.0) == pytest.approx(1.0)
        assert tradeoff_type2(MechanismKind.RR, eps, 1.0) == pytest.approx(0.0)
        # inflection where both randomized-flip segments meet
        assert tradeoff_type2(MechanismKind.RR, eps, q) == pytest.approx(q)
        # linearity on each segment
        mid_lo = tradeoff_type2(MechanismKind.RR, eps, q / 2.0)
        assert mid_lo == pytest.approx((1.0 + q) / 2.0)
        mid_hi = tradeoff_type2(MechanismKind.RR, eps, (1.0 + q) / 2.0)
        assert mid_hi == pytest.approx(q / 2.0)

    def test_laplace_symmetric_point(self):
        eps = 1.0
        t = 0.5 * math.exp(-0.5 * eps)  # = 1/(2 sqrt(e)) at unit budget
        assert t == pytest.approx(0.30326533, rel=1e-7)
        assert tradeoff_type2(MechanismKind.LAPLACE, eps, t) == pytest.approx(
            t, rel=1e-12)

    def test_laplace_endpoints(self):
        assert tradeoff_type2(MechanismKind.LAPLACE, 1.0, 0.0) == 1.0
        assert tradeoff_type2(MechanismKind.LAPLACE, 1.0, 1.0) == 0.0

    @pytest.mark.parametrize("kind", [MechanismKind.RR, MechanismKind.LAPLACE])
    def test_curve_monotone_between_endpoints(self, kind):
        curve = tradeoff_curve(Mechanism(kind, 1.0), resolution=401)
        assert len(curve) == 401
        assert curve[0] == (0.0, 1.0)
        assert curve[-1][0] == 1.0
        assert curve[-1][1] == pytest.approx(0.0, abs=1e-12)
        t2 = [pt[1] for pt in curve]
        assert all(b <= a + 1e-12 for a, b in zip(t2, t2[1:]))

    def test_bit_randomizer_dominates_at_unit_budget(self):
        """At matched budget the bit curve never sits above the Laplace
        curve; they touch at the crossover miss rate one half."""
        rr = tradeoff_curve(Mechanism(MechanismKind.RR, 1.0), resolution=1000)
        lap = tradeoff_curve(Mechanism(MechanismKind.LAPLACE, 1.0),
                             resolution=1000)
        gaps = [r[1] - l[1] for r, l in zip(rr, lap)]
        assert max(gaps) <= 1e-12
        touch = tradeoff_type2(MechanismKind.RR, 1.0, 0.5)
        assert touch == pytest.approx(
            tradeoff_type2(MechanismKind.LAPLACE, 1.0, 0.5), abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError, match="type1"):
            tradeoff_type2(MechanismKind.RR, 1.0, 1.5)
        with pytest.raises(ValueError, match="eps"):
            tradeoff_type2(MechanismKind.RR, 0.0, 0.5)
        with pytest.raises(ValueError, match="resolution"):
            tradeoff_curve(Mechanism(MechanismKind.RR, 1.0), resolution=1)


# ---------------------------------------------------------------------------
# trial statistics and convergence shapes
# ---------------------------------------------------------------------------

class TestTrialStatistics:
    def test_worked_example(self):
        stats = trial_statistics([1.0, 2.0, 3.0], truth=2.0)
        assert stats.count == 3
        assert stats.mean == pytest.approx(2.0)
        assert stats.mse == pytest.approx(2.0 / 3.0)
        assert stats.std_error == pytest.approx(1.0 / math.sqrt(3.0))
        assert stats.mean_re == pytest.approx(1.0 / 3.0)
        assert stats.median_re == pytest.approx(0.5)

    def test_zero_truth_disables_relative_error(self):
        stats = trial_statistics([0.5, -0.5], truth=0.0)
        assert stats.mean_re is None and stats.median_re is None
        assert stats.mse == pytest.approx(0.25)

    def test_single_sample(self):
        stats = trial_statistics([4.0], truth=5.0)
        assert stats.std_error == 0.0
        assert stats.mse == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            trial_statistics([], truth=1.0)


class TestReBound:
    def test_terms_positive_and_total(self):
        split = BudgetSplit.from_total(1.0)
        full = re_bound(EstimatorKind.TRI_TR, 100, 12.0, split)
        assert len(full.terms) == 3
        column = re_bound(EstimatorKind.TRI_MTR, 100, 12.0, split)
        assert len(column.terms) == 4
        for bound in (full, column):
            assert all(t > 0 for t in bound.terms)
            assert bound.total == pytest.approx(sum(bound.terms))

    def test_decreases_with_density_and_size(self):
        split = BudgetSplit.from_total(1.0)
        for kind in (EstimatorKind.TRI_TR, EstimatorKind.TRI_MTR):
            sparse = re_bound(kind, 100, 5.0, split).total
            dense = re_bound(kind, 100, 20.0, split).total
            big = re_bound(kind, 1000, 20.0, split).total
            assert dense < sparse
            assert big < dense

    def test_validation(self):
        split = BudgetSplit.from_total(1.0)
        with pytest.raises(ValueError, match="average degree"):
            re_bound(EstimatorKind.TRI_TR, 10, 0.0, split)
        with pytest.raises(ValueError, match="eps1 and eps2"):
            re_bound(EstimatorKind.TRI_TR, 10, 5.0, BudgetSplit(0.5, 0.0, 0.5))
        with pytest.raises(ValueError, match="no relative-error shape"):
            re_bound(EstimatorKind.QUA_TR, 10, 5.0, split)


class TestReBoundCheck:
    def test_denser_family_tracks_the_bound(self):
        split = BudgetSplit.from_total(1.0)
        graphs = [erdos_renyi(60, p, seed=30 + i)
                  for i, p in enumerate((0.15, 0.3, 0.5))]
        report = re_bound_check(graphs, split, kind=EstimatorKind.TRI_TR,
                                trials=25, seed=1)
        assert len(report.points) == 3
        assert report.monotone_bound
        assert all(pt.median_re is not None for pt in report.points)
        assert report.monotone_re is not None
        assert report.slope_ratio is not None and report.slope_ratio > 0

    def test_triangle_free_graph_has_no_relative_error(self, c4):
        split = BudgetSplit.from_total(1.0)
        report = re_bound_check(c4, split, trials=5)
        assert report.points[0].median_re is None
        assert report.monotone_re is None
        assert report.slope_ratio is None

    def test_unsupported_kind(self, c4):
        with pytest.raises(ValueError, match="no relative-error shape"):
            re_bound_check(c4, BudgetSplit.from_total(1.0),
                           kind=EstimatorKind.TWO_STAR)
