import json

import numpy as np
import pytest

from cause_sieve import seeding
from cause_sieve.discover import (
    DiscoveryResult,
    ScoreRow,
    _CandidateEvaluation,
    _score_row,
    analyze,
    check_plausibility,
    empty_parent_test,
    isd,
    metrics,
    result_to_json,
    score_search,
    select_score_estimate,
)
from cause_sieve.errors import BadParam, DomainViolation, TooManyCovariates
from cause_sieve.model import CandidateSet, DiscoveryConfig, FunctionClass
from cause_sieve.stattests import LOG_P_FLOOR
from cause_sieve.synth import gen_benchmark2, gen_linear_chain

from conftest import table


def _chain_data(seed, n=500, noise="gaussian"):
    return gen_linear_chain(seed, n, noise).data


class TestCheckPlausibility:
    def test_verdict_is_conjunction(self):
        data = _chain_data(3)
        cfg = DiscoveryConfig(seed=1)
        for members in [(1,), (2,), (1, 2)]:
            v = check_plausibility(data, CandidateSet(members), FunctionClass("linear"), cfg)
            assert v.plausible == (v.independent and v.significant and v.uniform)
            assert v.uniform and v.p_dist == 1.0  # linear skips the distribution question

    def test_domain_violation_is_recorded_not_raised(self):
        rng = seeding.substream(0, 777)
        data = table(rng.standard_normal(200), rng.standard_normal(200))
        v = check_plausibility(data, CandidateSet((1,)), FunctionClass("cpcm", "pareto"), DiscoveryConfig(seed=0))
        assert not v.plausible
        assert v.reason == "DomainViolation"

    def test_true_parents_usually_plausible(self):
        hits = 0
        for seed in range(10):
            gd = gen_benchmark2(seeding.child_seed(7, seeding.REPLICATE, seed), 400)
            cfg = DiscoveryConfig(seed=seed)
            hits += check_plausibility(gd.data, CandidateSet(gd.true_pa), FunctionClass("additive"), cfg).plausible
        assert hits >= 8


class TestIsd:
    def test_estimate_subset_of_every_plausible_set(self):
        res = isd(_chain_data(5), FunctionClass("linear"), DiscoveryConfig(seed=5))
        for s in res.plausible_sets:
            assert set(res.isd_estimate) <= set(s.members)

    def test_gaussian_chain_comes_up_empty(self):
        empties = 0
        for seed in range(10):
            res = isd(_chain_data(100 + seed, n=1000), FunctionClass("linear"), DiscoveryConfig(seed=seed))
            empties += res.isd_estimate == ()
        assert empties >= 8

    def test_too_many_covariates(self):
        rng = seeding.substream(1, 777)
        cols = [rng.standard_normal(60) for _ in range(4)]
        data = table(rng.standard_normal(60), *cols)
        with pytest.raises(TooManyCovariates):
            isd(data, FunctionClass("linear"), DiscoveryConfig(seed=0, max_p=3))

    def test_mode_validation(self):
        with pytest.raises(BadParam):
            analyze(_chain_data(6), FunctionClass("linear"), DiscoveryConfig(seed=0), mode="all")


class TestScore:
    def _row(self, p_indep, p_sig, p_dist, cfg=None):
        ev = _CandidateEvaluation(CandidateSet((1,)), p_indep, np.asarray(p_sig), p_dist, None)
        return _score_row(ev, cfg or DiscoveryConfig())

    def test_perfect_scores_peak_at_zero(self):
        row = self._row(1.0, [0.0], None)
        assert row.total == pytest.approx(0.0, abs=1e-12)

    def test_formula_evaluation(self):
        row = self._row(np.exp(-2.0), [1e-15], np.exp(-1.0))
        assert row.independence == pytest.approx(-2.0)
        assert row.significance == pytest.approx(np.log(1 - 1e-15))
        assert row.distribution == pytest.approx(-1.0)
        assert row.total == pytest.approx(-3.0, abs=1e-6)

    def test_clamped_at_floor(self):
        row = self._row(0.0, [1.0], 0.0)
        assert row.independence == LOG_P_FLOOR
        assert row.significance == LOG_P_FLOOR
        assert row.distribution == LOG_P_FLOOR

    def test_literal_significance_variant(self):
        cfg = DiscoveryConfig(significance_score="neg_log_p")
        row = self._row(1.0, [np.exp(-3.0)], None, cfg)
        assert row.significance == pytest.approx(3.0)

    def test_error_scores_rank_last(self):
        ev = _CandidateEvaluation(CandidateSet((2,)), np.nan, np.array([np.nan]), None, "DomainViolation")
        bad = _score_row(ev, DiscoveryConfig())
        good = self._row(0.5, [0.01], None)
        assert bad.total == float("-inf")
        assert select_score_estimate([bad, good]).members == (1,)

    def test_tie_break_prefers_small_then_lexicographic(self):
        rows = [
            ScoreRow(CandidateSet((1, 2)), -1.0, 0.0, 0.0, -1.0),
            ScoreRow(CandidateSet((3,)), -1.0, 0.0, 0.0, -1.0),
            ScoreRow(CandidateSet((2,)), -1.0, 0.0, 0.0, -1.0),
        ]
        assert select_score_estimate(rows).members == (2,)


class TestMetrics:
    def test_worked_example(self):
        # truth {1,2,3}; 80% of runs {1,2}, 20% {1,4,5}
        estimates = [(1, 2)] * 8 + [(1, 4, 5)] * 2
        correct, nfp = metrics((1, 2, 3), estimates)
        assert correct == pytest.approx(60.0)
        assert nfp == pytest.approx(80.0)

    def test_all_exact(self):
        correct, nfp = metrics((1, 2), [(1, 2)] * 5)
        assert (correct, nfp) == (100.0, 100.0)

    def test_empty_estimates_vacuous(self):
        correct, nfp = metrics((1, 2), [()] * 5)
        assert (correct, nfp) == (0.0, 100.0)

    def test_rejects_empty_list(self):
        with pytest.raises(BadParam):
            metrics((1,), [])


class TestEmptyParent:
    def test_gaussian_marginal_accepted(self):
        passes = 0
        for seed in range(10):
            rng = seeding.substream(seed, 778)
            data = table(rng.standard_normal(500), rng.standard_normal(500))
            passes += empty_parent_test(data, "gaussian").p_value > 0.05
        assert passes >= 9

    def test_pareto_marginal_rejected_by_gaussian_family(self):
        rejects = 0
        for seed in range(10):
            rng = seeding.substream(seed, 779)
            y = (1.0 - rng.random(500)) ** (-1.0 / 2.0)
            data = table(y, rng.standard_normal(500))
            rejects += empty_parent_test(data, "gaussian").p_value < 0.01
        assert rejects >= 9

    def test_support_violation(self):
        rng = seeding.substream(2, 779)
        data = table(rng.standard_normal(100), rng.standard_normal(100))
        with pytest.raises(DomainViolation):
            empty_parent_test(data, "pareto")


class TestSerialization:
    def _result(self, seed=9):
        return analyze(_chain_data(seed, n=500), FunctionClass("linear"), DiscoveryConfig(seed=seed), mode="both")

    def test_schema_and_key_order(self):
        doc = json.loads(result_to_json(self._result()))
        assert list(doc.keys()) == ["isd_estimate", "plausible_sets", "score_table", "score_estimate", "config", "seed"]
        assert all(list(r.keys()) == ["set", "independence", "significance", "distribution", "total"] for r in doc["score_table"])
        assert doc["config"]["function_class"] == "linear"

    def test_seventeen_significant_digits(self):
        text = result_to_json(self._result())
        value = 1.0 / 3.0
        assert format(value, ".17g") == "0.33333333333333331"  # format contract
        doc = json.loads(text)
        # round-trip equality at full precision
        again = analyze(_chain_data(9, n=500), FunctionClass("linear"), DiscoveryConfig(seed=9), mode="both")
        assert json.loads(result_to_json(again)) == doc

    def test_byte_identical_rerun(self):
        assert result_to_json(self._result()) == result_to_json(self._result())

    def test_score_only_leaves_isd_null(self):
        res = score_search(_chain_data(10), FunctionClass("linear"), DiscoveryConfig(seed=10))
        doc = json.loads(result_to_json(res))
        assert doc["isd_estimate"] is None
        assert doc["plausible_sets"] is None
        assert isinstance(doc["score_estimate"], list)
