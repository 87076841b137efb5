"""Trial driver: batching, cost folding, and report determinism."""

import numpy as np
import pytest

from namcount.accounting import download_cost
from namcount.analysis import trial_statistics
from namcount.estimators import EstimatorKind, StageMask
from namcount.graphs import SubgraphKind, exact_count
from namcount.harness import (
    EstimatorConfig,
    run_joint_trials,
    run_once,
    run_trials,
)


def config(kind, eps=1.0, **kw):
    return EstimatorConfig(kind=kind, eps=eps, **kw)


class TestEstimatorConfig:
    def test_split_follows_fractions(self):
        cfg = config(EstimatorKind.TRI_TR, eps=2.0, fractions=(0.2, 0.6, 0.2))
        s = cfg.split
        assert (s.eps0, s.eps1, s.eps2) == (
            pytest.approx(0.4), pytest.approx(1.2), pytest.approx(0.4))

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
    def test_rejects_bad_eps(self, bad):
        with pytest.raises(ValueError, match="eps"):
            config(EstimatorKind.TRI_TR, eps=bad)


class TestRunOnce:
    @pytest.mark.parametrize("kind", list(EstimatorKind))
    def test_dispatches_every_kind(self, er20, kind):
        est = run_once(er20, config(kind), seed=2)
        assert est.kind is kind
        assert np.isfinite(est.value)
        assert est.download_bytes == download_cost(kind.value, er20.n)

    def test_honors_stage_mask(self, er20):
        cfg = config(EstimatorKind.QUA_TR, mask=StageMask.stage(2))
        est = run_once(er20, cfg, seed=2)
        assert est.ledger.total == pytest.approx(0.8)


class TestRunTrials:
    def test_report_contents(self, er20):
        cfg = config(EstimatorKind.TRI_TR)
        report = run_trials(er20, cfg, trials=12, seed=5)
        assert report.kind is EstimatorKind.TRI_TR
        assert report.trials == 12 and len(report.values) == 12
        assert report.truth == exact_count(er20, SubgraphKind.TRIANGLE)
        assert report.stats == trial_statistics(report.values, report.truth)
        assert report.seed == 5 and report.eps == 1.0

    def test_values_match_individual_runs(self, er20):
        cfg = config(EstimatorKind.TRI_MTR)
        report = run_trials(er20, cfg, trials=4, seed=3)
        singles = [run_once(er20, cfg, seed=3, trial=t).value for t in range(4)]
        assert list(report.values) == singles

    def test_deterministic(self, er20):
        cfg = config(EstimatorKind.QUA_TR)
        a = run_trials(er20, cfg, trials=5, seed=7)
        b = run_trials(er20, cfg, trials=5, seed=7)
        assert a.values == b.values
        assert a.stats == b.stats
        assert np.array_equal(a.cost.per_user_download,
                              b.cost.per_user_download)

    def test_cost_meter_matches_closed_form(self, er20):
        cfg = config(EstimatorKind.TRI_TR)
        report = run_trials(er20, cfg, trials=3, seed=1)
        assert report.cost.cost_dl == download_cost("tri-tr", er20.n)

    def test_only_first_trial_is_traced(self, er20):
        cfg = config(EstimatorKind.TRI_MTR)
        report = run_trials(er20, cfg, trials=6, seed=1)
        downloads = [r for r in report.trace.records if r.kind == "download"]
        # one column download per user, once, regardless of the trial count
        assert len(downloads) == er20.n
        assert report.cost.cost_dl == download_cost("tri-mtr", er20.n)

    def test_keep_trace_off(self, er20):
        cfg = config(EstimatorKind.TRI_TR)
        report = run_trials(er20, cfg, trials=2, seed=1, keep_trace=False)
        assert report.trace is None
        assert report.cost.cost_dl == 0

    def test_clamp_counters_aggregate(self, er20):
        cfg = config(EstimatorKind.TRI_TR)
        trials = 5
        report = run_trials(er20, cfg, trials=trials, seed=2)
        singles = [run_once(er20, cfg, seed=2, trial=t) for t in range(trials)]
        assert report.clamp_events == sum(e.clamp_events for e in singles)
        assert report.clamp_opportunities == sum(
            e.clamp_opportunities for e in singles)

    def test_trials_must_be_positive(self, er20):
        with pytest.raises(ValueError, match="trials"):
            run_trials(er20, config(EstimatorKind.TRI_OR), trials=0)


class TestRunJointTrials:
    def test_three_reports_share_run(self, er20):
        joint = run_joint_trials(er20, eps=1.1, trials=6, seed=4)
        tri, qua, star = joint.reports
        assert tri.kind is EstimatorKind.TRI_MTR
        assert qua.kind is EstimatorKind.QUA_TR
        assert star.kind is EstimatorKind.TWO_STAR
        for rep in joint.reports:
            assert rep.trials == 6 and len(rep.values) == 6
            assert rep.cost.cost_dl == download_cost("joint", er20.n)
        assert tri.ledger is qua.ledger
        assert tri.truth == exact_count(er20, SubgraphKind.TRIANGLE)
        assert qua.truth == exact_count(er20, SubgraphKind.QUADRANGLE)
        assert star.truth == exact_count(er20, SubgraphKind.TWO_STAR)

    def test_matrix_route_doubles_download(self, er20):
        joint = run_joint_trials(er20, eps=1.1, trials=2, seed=4,
                                 triangle_from_matrix=True)
        assert joint.triangles.kind is EstimatorKind.TRI_TR
        assert joint.triangles.cost.cost_dl == download_cost(
            "joint-adjacency", er20.n)

    def test_deterministic(self, er20):
        a = run_joint_trials(er20, eps=1.1, trials=3, seed=9)
        b = run_joint_trials(er20, eps=1.1, trials=3, seed=9)
        assert a.triangles.values == b.triangles.values
        assert a.quadrangles.values == b.quadrangles.values
        assert a.two_stars.values == b.two_stars.values

    def test_trials_must_be_positive(self, er20):
        with pytest.raises(ValueError, match="trials"):
            run_joint_trials(er20, eps=1.1, trials=0)
