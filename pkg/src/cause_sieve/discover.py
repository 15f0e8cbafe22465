"""Plausibility verdicts, the ISD intersection estimate, and the score search.

A candidate set passes when three questions all come back positive: the
recovered noise is independent of the covariates (HSIC), every covariate is
significant, and -- for the parametric class only -- the noise is uniform
on (0,1).  The ISD estimate intersects all passing sets; the score search
ranks every candidate by log-p-value terms and returns the argmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr
from scipy.stats import gamma as gamma_dist

from . import seeding
from .errors import BadParam, DomainViolation, StatError, TooManyCovariates
from .jsonout import json_value
from .model import (
    CandidateSet,
    Dataset,
    DiscoveryConfig,
    FunctionClass,
    enumerate_candidates,
)
from .regress import SmootherConfig, recover_noise
from .stattests import LOG_P_FLOOR, TestResult, ad_uniform_test, hsic_test

NEG_INF = float("-inf")


@dataclass(frozen=True)
class PlausibilityVerdict:
    """Answers to the three questions for one candidate set."""

    candidate: CandidateSet
    independent: bool
    p_indep: float
    significant: bool
    p_sig_max: float
    uniform: bool
    p_dist: float
    plausible: bool
    reason: str | None = None


@dataclass(frozen=True)
class ScoreRow:
    candidate: CandidateSet
    independence: float
    significance: float
    distribution: float
    total: float


@dataclass(frozen=True)
class DiscoveryResult:
    function_class: FunctionClass
    config: DiscoveryConfig
    seed: int
    isd_estimate: tuple[int, ...] | None = None
    plausible_sets: list[CandidateSet] | None = None
    verdicts: list[PlausibilityVerdict] | None = field(default=None, repr=False)
    score_table: list[ScoreRow] | None = None
    score_estimate: CandidateSet | None = None


@dataclass(frozen=True)
class _CandidateEvaluation:
    candidate: CandidateSet
    p_indep: float
    p_sig: np.ndarray
    p_dist: float | None  # None when the class skips the uniformity question
    error: str | None


def _evaluate_candidate(
    data: Dataset, s: CandidateSet, f_class: FunctionClass, cfg: DiscoveryConfig
) -> _CandidateEvaluation:
    smoother = cfg.smoother if isinstance(cfg.smoother, SmootherConfig) else SmootherConfig()
    try:
        recovery = recover_noise(
            data,
            s,
            f_class,
            smoother,
            n_perm=cfg.significance_permutations,
            seed=seeding.child_seed(cfg.seed, f_class.code),
        )
        indep = hsic_test(
            data.covariates(s),
            recovery.residuals,
            method=cfg.hsic_method,
            n_perm=cfg.hsic_permutations,
            seed=seeding.child_seed(cfg.seed, seeding.HSIC_PERM, f_class.code, *s.members),
        )
        p_dist = None
        if not f_class.skip_distribution:
            p_dist = ad_uniform_test(recovery.eps).p_value
    except StatError as exc:
        # one degenerate candidate (domain violation, rank deficiency, ...)
        # must not abort a full search: score it implausible and move on
        return _CandidateEvaluation(s, np.nan, np.full(len(s), np.nan), None, type(exc).__name__)
    return _CandidateEvaluation(s, indep.p_value, recovery.significance_p, p_dist, None)


def _verdict(ev: _CandidateEvaluation, f_class: FunctionClass, alpha: float) -> PlausibilityVerdict:
    if ev.error is not None:
        return PlausibilityVerdict(
            ev.candidate, False, float("nan"), False, float("nan"), False, float("nan"),
            plausible=False, reason=ev.error,
        )
    independent = ev.p_indep > alpha
    p_sig_max = float(np.max(ev.p_sig))
    significant = p_sig_max < alpha
    if f_class.skip_distribution:
        uniform, p_dist = True, 1.0
    else:
        uniform, p_dist = ev.p_dist > alpha, float(ev.p_dist)
    return PlausibilityVerdict(
        ev.candidate,
        independent,
        float(ev.p_indep),
        significant,
        p_sig_max,
        uniform,
        p_dist,
        plausible=independent and significant and uniform,
    )


def _score_row(ev: _CandidateEvaluation, cfg: DiscoveryConfig) -> ScoreRow:
    if ev.error is not None:
        return ScoreRow(ev.candidate, NEG_INF, NEG_INF, NEG_INF, NEG_INF)
    independence = max(float(np.log(max(ev.p_indep, 1e-300))), LOG_P_FLOOR)
    p_sig_max = float(np.max(ev.p_sig))
    if cfg.significance_score == "one_minus_p_log":
        significance = max(float(np.log(max(1.0 - p_sig_max, 1e-300))), LOG_P_FLOOR)
    else:  # literal "minus the log of the maximum p-value"
        significance = min(-float(np.log(max(p_sig_max, 1e-12))), -LOG_P_FLOOR)
    distribution = 0.0 if ev.p_dist is None else max(float(np.log(max(ev.p_dist, 1e-300))), LOG_P_FLOOR)
    l1, l2, l3 = cfg.lambdas
    total = l1 * independence + l2 * significance + l3 * distribution
    return ScoreRow(ev.candidate, independence, significance, distribution, total)


def check_plausibility(
    data: Dataset, s: CandidateSet, f_class: FunctionClass, cfg: DiscoveryConfig | None = None
) -> PlausibilityVerdict:
    """Run the class-appropriate noise recovery and answer the three questions."""
    cfg = cfg or DiscoveryConfig()
    return _verdict(_evaluate_candidate(data, s, f_class, cfg), f_class, cfg.alpha)


def score_set(
    data: Dataset, s: CandidateSet, f_class: FunctionClass, cfg: DiscoveryConfig | None = None
) -> ScoreRow:
    """Log-p-value score components for one candidate set.

    Components are clamped at ln(1e-12) so several hard-zero p-values still
    order; a candidate the fit cannot even evaluate gets a -inf total and
    ranks last.
    """
    cfg = cfg or DiscoveryConfig()
    return _score_row(_evaluate_candidate(data, s, f_class, cfg), cfg)


def select_score_estimate(rows: list[ScoreRow]) -> CandidateSet:
    """Argmax of the total; ties prefer smaller cardinality, then lexicographic."""
    if not rows:
        raise BadParam("empty score table")
    return min(rows, key=lambda r: (-r.total, len(r.candidate), r.candidate.members)).candidate


def analyze(
    data: Dataset,
    f_class: FunctionClass,
    cfg: DiscoveryConfig | None = None,
    mode: str = "both",
) -> DiscoveryResult:
    """Evaluate every candidate once and derive the requested estimates."""
    cfg = cfg or DiscoveryConfig()
    if mode not in ("isd", "score", "both"):
        raise BadParam(f"unknown mode {mode!r}")
    if data.p > cfg.max_p:
        raise TooManyCovariates(f"p={data.p} exceeds max_p={cfg.max_p}")

    evaluations = [
        _evaluate_candidate(data, s, f_class, cfg)
        for s in enumerate_candidates(data.p, cfg.max_p)
    ]

    isd_estimate = None
    plausible_sets = None
    verdicts = None
    if mode in ("isd", "both"):
        verdicts = [_verdict(ev, f_class, cfg.alpha) for ev in evaluations]
        plausible_sets = [v.candidate for v in verdicts if v.plausible]
        if plausible_sets:
            common = set(plausible_sets[0].members)
            for s in plausible_sets[1:]:
                common &= set(s.members)
            isd_estimate = tuple(sorted(common))
        else:
            isd_estimate = ()

    score_table = None
    score_estimate = None
    if mode in ("score", "both"):
        score_table = [_score_row(ev, cfg) for ev in evaluations]
        score_estimate = select_score_estimate(score_table)

    return DiscoveryResult(
        function_class=f_class,
        config=cfg,
        seed=cfg.seed,
        isd_estimate=isd_estimate,
        plausible_sets=plausible_sets,
        verdicts=verdicts,
        score_table=score_table,
        score_estimate=score_estimate,
    )


def isd(data: Dataset, f_class: FunctionClass, cfg: DiscoveryConfig | None = None) -> DiscoveryResult:
    """Intersection of all plausible candidate sets.

    Returns the empty estimate both when the plausible sets have empty
    intersection and when no set is plausible at all (the latter is visible
    as an empty ``plausible_sets`` list).
    """
    return analyze(data, f_class, cfg, mode="isd")


def score_search(data: Dataset, f_class: FunctionClass, cfg: DiscoveryConfig | None = None) -> DiscoveryResult:
    """Best-scoring candidate set over the full enumeration."""
    return analyze(data, f_class, cfg, mode="score")


def empty_parent_test(data: Dataset, family: str, cfg: DiscoveryConfig | None = None) -> TestResult:
    """Can the target's marginal be the family with constant parameters?

    Fits global parameters, transforms u = F(y; theta_hat), and tests
    uniformity.  Conservative, since the parameters are fitted from the
    same sample.
    """
    y = data.y
    if family == "gaussian":
        mu, sd = float(np.mean(y)), float(np.std(y, ddof=1))
        if sd == 0:
            raise DomainViolation("constant target")
        u = ndtr((y - mu) / sd)
    elif family == "pareto":
        if np.min(y) < 1.0:
            raise DomainViolation(f"Pareto family requires Y >= 1, found min {np.min(y)}")
        theta = 1.0 / float(np.mean(np.log(y)))
        u = 1.0 - y ** (-theta)
    elif family == "gamma":
        if np.min(y) <= 0.0:
            raise DomainViolation(f"Gamma family requires Y > 0, found min {np.min(y)}")
        mu, var = float(np.mean(y)), float(np.var(y, ddof=1))
        if var <= 0:
            raise DomainViolation("constant target")
        u = gamma_dist.cdf(y, a=mu * mu / var, scale=var / mu)
    else:
        raise BadParam(f"unknown family {family!r}")
    return ad_uniform_test(np.clip(u, 1e-12, 1.0 - 1e-12))


def metrics(true_pa, estimates) -> tuple[float, float]:
    """(percentage of discovered correct causes, percentage of no false positives).

    The first averages |estimate & truth| / |truth| over runs; the second is
    the fraction of runs whose estimate contains no non-parent (an empty
    estimate vacuously qualifies).  A run with an empty truth contributes
    1.0 to the first average: there is nothing left to discover.
    """
    estimates = list(estimates)
    if not estimates:
        raise BadParam("estimates must be a non-empty list")
    truth = frozenset(true_pa)
    correct = []
    no_false = []
    for est in estimates:
        est = frozenset(est)
        correct.append(len(est & truth) / len(truth) if truth else 1.0)
        no_false.append(1.0 if est <= truth else 0.0)
    return 100.0 * float(np.mean(correct)), 100.0 * float(np.mean(no_false))


# --------------------------------------------------------------------- #
# serialization: fixed key order, 17 significant digits, null for -inf
# --------------------------------------------------------------------- #


def _config_dict(cfg: DiscoveryConfig, f_class: FunctionClass) -> dict:
    smoother = cfg.smoother if isinstance(cfg.smoother, SmootherConfig) else SmootherConfig()
    return {
        "function_class": f_class.label,
        "alpha": cfg.alpha,
        "lambdas": list(cfg.lambdas),
        "hsic_method": cfg.hsic_method,
        "hsic_permutations": cfg.hsic_permutations,
        "significance_permutations": cfg.significance_permutations,
        "smoother": {
            "penalty_grid": list(smoother.penalty_grid),
            "bandwidth_rule": smoother.bandwidth_rule,
            "sigma_floor": smoother.sigma_floor,
        },
        "max_p": cfg.max_p,
        "significance_score": cfg.significance_score,
    }


def result_to_json(result: DiscoveryResult) -> str:
    """Serialize with a fixed schema: isd_estimate, plausible_sets,
    score_table, score_estimate, config, seed."""
    doc = {
        "isd_estimate": list(result.isd_estimate) if result.isd_estimate is not None else None,
        "plausible_sets": (
            [list(s.members) for s in result.plausible_sets]
            if result.plausible_sets is not None
            else None
        ),
        "score_table": (
            [
                {
                    "set": list(r.candidate.members),
                    "independence": r.independence,
                    "significance": r.significance,
                    "distribution": r.distribution,
                    "total": r.total,
                }
                for r in result.score_table
            ]
            if result.score_table is not None
            else None
        ),
        "score_estimate": list(result.score_estimate.members) if result.score_estimate is not None else None,
        "config": _config_dict(result.config, result.function_class),
        "seed": result.seed,
    }
    return json_value(doc) + "\n"


def save_result(result: DiscoveryResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result_to_json(result))
