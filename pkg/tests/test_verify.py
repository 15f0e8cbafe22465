import json

import numpy as np
import pytest

from cause_sieve import seeding
from cause_sieve.errors import BadParam
from cause_sieve.verify import (
    affine_equality_distance,
    check_cool_lemma,
    check_gamma_support_exception,
    check_marginalizability,
    check_norm_exception,
)


@pytest.fixture(scope="module")
def exp_sample():
    rng = seeding.substream(3, seeding.REPLICATE, 1)
    return np.sort(rng.exponential(1.0, 20000))


class TestEqualityDistance:
    def test_identity_is_zero(self, exp_sample):
        assert affine_equality_distance(exp_sample, 0.0, 1.0) < 0.02

    def test_reflection_candidate_is_zero(self, exp_sample):
        med = float(np.median(exp_sample))
        assert affine_equality_distance(exp_sample, 2 * med, -1.0) < 1e-9

    def test_scale_mismatch_large(self, exp_sample):
        for a in (-2.0, 0.0, 2.0):
            assert affine_equality_distance(exp_sample, a, 0.5) > 0.1

    def test_shift_detected(self, exp_sample):
        assert affine_equality_distance(exp_sample, 0.5, 1.0) > 0.1

    def test_grid_step_precondition(self):
        from cause_sieve.verify import check_dist_equality

        with pytest.raises(BadParam):
            check_dist_equality(grid_a=(-4.0, 4.0, 0.2))
        with pytest.raises(BadParam):
            check_dist_equality(dist="weibull")


class TestCoolLemma:
    def test_part_two_small_run(self):
        r = check_cool_lemma(2, n=800, n_reps=10, seed=1)
        assert r.payload["rejection_rate"] >= 0.9
        assert r.payload["control_rejection_rate"] <= 0.2

    def test_part_bounds(self):
        with pytest.raises(BadParam):
            check_cool_lemma(5, n=500, n_reps=2, seed=0)


class TestGammaException:
    def test_small_run(self):
        r = check_gamma_support_exception(n=800, n_reps=10, seed=1)
        assert r.payload["rejection_rate"] <= 0.2
        assert r.payload["control_rejection_rate"] >= 0.8

    def test_bad_params(self):
        with pytest.raises(BadParam):
            check_gamma_support_exception(k1=0.0)


class TestNormException:
    def test_low_power_flag(self):
        r = check_norm_exception(n=150, n_reps=2, seed=0)
        assert r.payload["low_power"] is True
        assert r.passed is False

    def test_full_gates(self):
        r = check_norm_exception(n=500, n_reps=20, seed=2)
        assert r.passed
        assert r.payload["exception_empty_rate"] >= 0.7
        assert r.payload["control_found_rate"] >= 0.7
        assert r.payload["exception_both_plausible_rate"] >= 0.7


class TestMarginalizability:
    def test_gaussian_small_run(self):
        r = check_marginalizability("gaussian", n=800, n_reps=10, seed=4)
        assert r.payload["empty_rate"] >= 0.8

    def test_report_replay_and_save(self, tmp_path):
        a = check_marginalizability("gaussian", n=500, n_reps=5, seed=9)
        b = check_marginalizability("gaussian", n=500, n_reps=5, seed=9)
        assert a == b
        path = tmp_path / "report.json"
        a.save(path)
        doc = json.loads(path.read_text())
        assert list(doc.keys()) == ["check_id", "seed", "n_reps", "n_samples", "pass", "payload"]
        assert doc["check_id"] == "marginalizability:gaussian"
