"""Noise recovery for each function class.

Every fit produces residual-style noise on the (0,1) scale plus one
significance p-value per covariate.  The additive and location-scale
classes estimate conditional means with penalized thin-plate-spline
smoothing (penalty chosen by two-fold cross-validation); those classes
restrict the noise to be additive, not the mean to be additive across
covariates, so the smoother must represent interactions, and it must track
the surface closely enough that the independence test sees only noise.
The parametric class uses kernel-local maximum likelihood or moment
matching with Silverman bandwidths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RBFInterpolator
from scipy.special import gammaln, ndtr
from scipy.stats import t as student_t

from . import stattests
from .errors import BadParam, DegenerateTheta, DomainViolation, RankDeficient
from .model import CandidateSet, Dataset, FunctionClass, NoiseRecovery, pit_rescale

SMOOTHER_DIM_CAP = 6
EPS_CLIP = 1e-12  # keeps parametric eps strictly inside (0,1)
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class SmootherConfig:
    """Settings for the smoothers behind the nonparametric fits.

    ``penalty_grid`` lists the candidate roughness penalties for the
    spline smoother (chosen by two-fold cross-validation on standardized
    data).  ``bandwidth_rule`` governs the kernel-local parametric fits:
    Silverman's per-covariate rule 1.06 * sd * n^(-1/(4+d)), or a
    leave-one-out rescaling of it.
    """

    penalty_grid: tuple[float, ...] = (1e-2, 1e-1, 1e0, 1e1, 1e2)
    bandwidth_rule: str = "silverman"  # or "cv"
    sigma_floor: float | None = None  # None -> 1e-6 * sd(y)

    def __post_init__(self):
        if self.bandwidth_rule not in ("silverman", "cv"):
            raise BadParam(f"unknown bandwidth rule {self.bandwidth_rule!r}")
        if len(self.penalty_grid) == 0 or any(p < 0 for p in self.penalty_grid):
            raise BadParam("penalty_grid must be non-empty and non-negative")
        if self.sigma_floor is not None and self.sigma_floor <= 0:
            raise BadParam("sigma_floor must be positive")


# --------------------------------------------------------------------- #
# penalized spline smoothing of a conditional mean
# --------------------------------------------------------------------- #


class _MeanSmoother:
    """Thin-plate-spline estimate of E[y|x] with CV-chosen penalty.

    Covariates are rescaled to unit variance and the response is
    standardized, so one penalty grid serves every dataset.  The two CV
    folds are the even and odd rows: deterministic, and fold membership
    is independent of the data values.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, cfg: SmootherConfig):
        self._x_scale = np.std(x, axis=0)
        self._x_scale[self._x_scale == 0] = 1.0
        self._y_mean = float(np.mean(y))
        self._y_scale = max(float(np.std(y)), _TINY)
        xn = x / self._x_scale
        yn = (y - self._y_mean) / self._y_scale

        even = np.arange(y.size) % 2 == 0
        best, best_err = cfg.penalty_grid[0], np.inf
        if y.size >= 8 and len(cfg.penalty_grid) > 1:
            for lam in cfg.penalty_grid:
                err = 0.0
                for tr in (even, ~even):
                    f = RBFInterpolator(xn[tr], yn[tr], kernel="thin_plate_spline", smoothing=lam)
                    err += float(np.mean((yn[~tr] - f(xn[~tr])) ** 2))
                if err < best_err:
                    best, best_err = lam, err
        self.penalty = float(best)
        self._spline = RBFInterpolator(xn, yn, kernel="thin_plate_spline", smoothing=self.penalty)
        self.fitted = self.predict(x)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self._spline(x / self._x_scale) * self._y_scale + self._y_mean

    def permutation_evaluator(self, x: np.ndarray, y: np.ndarray) -> "_MeanEvaluator":
        return _MeanEvaluator(self, x, y)


class _MeanEvaluator:
    def __init__(self, model: _MeanSmoother, x: np.ndarray, y: np.ndarray):
        self._model = model
        self._x = x
        self._y = y
        self.baseline = float(np.mean((y - model.predict(x)) ** 2))

    def loss_with_permuted(self, pos: int, perm: np.ndarray) -> float:
        x = self._x.copy()
        x[:, pos] = x[perm, pos]
        return float(np.mean((self._y - self._model.predict(x)) ** 2))


# E[log eps^2] for standard normal eps: psi(1/2) + log 2.  The smoother of
# log squared residuals estimates log sigma^2 plus this constant; without
# the correction sigma_hat is biased low by the factor exp(-0.635).
_LOG_CHI2_MEAN = -1.2703628454614782


class _LocationScaleModel:
    """Two-stage heteroscedastic fit: mean, then log squared residuals."""

    def __init__(self, x: np.ndarray, y: np.ndarray, cfg: SmootherConfig):
        self.floor = cfg.sigma_floor if cfg.sigma_floor is not None else 1e-6 * max(float(np.std(y)), _TINY)
        self.mu_model = _MeanSmoother(x, y, cfg)
        resid = y - self.mu_model.fitted
        z = np.log(resid * resid + self.floor**2)
        self.logvar_model = _MeanSmoother(x, z, cfg)

    def mu(self, x: np.ndarray) -> np.ndarray:
        return self.mu_model.predict(x)

    def sigma(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(np.exp(0.5 * (self.logvar_model.predict(x) - _LOG_CHI2_MEAN)), self.floor)

    def sigma_fitted(self) -> np.ndarray:
        return np.maximum(np.exp(0.5 * (self.logvar_model.fitted - _LOG_CHI2_MEAN)), self.floor)

    def permutation_evaluator(self, x: np.ndarray, y: np.ndarray) -> "_LocScaleEvaluator":
        return _LocScaleEvaluator(self, x, y)


class _LocScaleEvaluator:
    """Gaussian-deviance loss; a permutation moves the mean and the scale."""

    def __init__(self, model: _LocationScaleModel, x: np.ndarray, y: np.ndarray):
        self._model = model
        self._x = x
        self._y = y
        self.baseline = self._loss(x)

    def _loss(self, x: np.ndarray) -> float:
        mu = self._model.mu(x)
        sigma = self._model.sigma(x)  # log-chi2 corrected
        z = (self._y - mu) / sigma
        return float(np.mean(np.log(sigma) + 0.5 * z * z))

    def loss_with_permuted(self, pos: int, perm: np.ndarray) -> float:
        x = self._x.copy()
        x[:, pos] = x[perm, pos]
        return self._loss(x)


# --------------------------------------------------------------------- #
# kernel-local parametric estimates (Pareto and Gamma families)
# --------------------------------------------------------------------- #


def _silverman(x: np.ndarray, dim: int) -> float:
    sd = float(np.std(x))
    if sd == 0.0:
        return 1.0
    return 1.06 * sd * x.size ** (-1.0 / (4.0 + dim))


def _log_kernel_factors(x_tr: np.ndarray, x_ev: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """(d, m, n) array of per-column Gaussian log-kernels."""
    d = x_tr.shape[1]
    out = np.empty((d, x_ev.shape[0], x_tr.shape[0]))
    for j in range(d):
        diff = x_tr[None, :, j] - x_ev[:, None, j]
        out[j] = -(diff * diff) / (2.0 * hs[j] * hs[j])
    return out


def _nw(w: np.ndarray, y_tr: np.ndarray) -> np.ndarray:
    """Kernel-weighted local mean, with a global-mean fallback off-support."""
    sw = w.sum(axis=1)
    return np.where(sw > _TINY, (w @ y_tr) / np.maximum(sw, _TINY), float(np.mean(y_tr)))


def _select_bandwidths(x: np.ndarray, y: np.ndarray, rule: str) -> np.ndarray:
    d = x.shape[1]
    base = np.array([_silverman(x[:, j], d) for j in range(d)])
    if rule == "silverman":
        return base
    # leave-one-out rescaling using the locally constant fit
    best, best_err = base, np.inf
    for mult in (0.25, 0.5, 1.0, 2.0, 4.0):
        w = np.exp(_log_kernel_factors(x, x, mult * base).sum(axis=0))
        sw = w.sum(axis=1)
        keep = sw > 1.0 + 1e-12  # own kernel weight is exactly 1
        if not keep.any():
            continue
        pred = ((w @ y) - y)[keep] / (sw[keep] - 1.0)
        err = float(np.mean((y[keep] - pred) ** 2))
        if err < best_err:
            best, best_err = mult * base, err
    return best


class _CpcmLocalEvaluator:
    def __init__(self, model: "_CpcmLocalModel", x: np.ndarray, y: np.ndarray):
        self._model = model
        self._y = y
        self._factors = model.log_factors(x)
        self._total = self._factors.sum(axis=0)
        self.baseline = model.nll(np.exp(self._total), y)

    def loss_with_permuted(self, pos: int, perm: np.ndarray) -> float:
        logw = self._total - self._factors[pos] + self._factors[pos][perm]
        return self._model.nll(np.exp(logw), self._y)


# Rescales the Silverman bandwidths of the kernel-local parametric fits.
# At n around 500 the plain rule leaves enough smoothing bias in theta for
# the independence and uniformity tests to flag true parent sets; slightly
# narrower windows balance that against estimation noise.
CPCM_BANDWIDTH_SCALE = 0.8


class _CpcmLocalModel:
    """Kernel-weighted local parameter estimates for Pareto and Gamma families."""

    def __init__(self, x: np.ndarray, y: np.ndarray, family: str, cfg: SmootherConfig):
        self.family = family
        self.x_train = x
        self.y_train = y
        self.bandwidths = CPCM_BANDWIDTH_SCALE * _select_bandwidths(
            x, np.log(y) if family == "pareto" else y, cfg.bandwidth_rule
        )
        if family == "pareto":
            self._log_y = np.log(y)

    def log_factors(self, x_ev: np.ndarray) -> np.ndarray:
        return _log_kernel_factors(self.x_train, x_ev, self.bandwidths)

    def theta(self, x_ev: np.ndarray):
        """Local parameters at the evaluation points.

        Pareto: tail index solving the weighted likelihood equation; with
        uniform weights it collapses to the global MLE 1/mean(ln y).
        Gamma: shape and scale by weighted moment matching.
        """
        w = np.exp(self.log_factors(x_ev).sum(axis=0))
        sw = w.sum(axis=1)
        if np.any(sw <= _TINY):
            raise DegenerateTheta("kernel weights underflow away from the data")
        if self.family == "pareto":
            denom = w @ self._log_y
            with np.errstate(divide="ignore"):
                theta = sw / denom
            if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
                raise DegenerateTheta("non-positive or non-finite Pareto index")
            return theta
        mu = (w @ self.y_train) / sw
        second = (w @ (self.y_train * self.y_train)) / sw
        var = second - mu * mu
        if np.any(mu <= 0) or np.any(var <= 0) or not (np.all(np.isfinite(mu)) and np.all(np.isfinite(var))):
            raise DegenerateTheta("degenerate local Gamma moments")
        return mu * mu / var, var / mu

    def nll(self, w: np.ndarray, y: np.ndarray) -> float:
        sw = w.sum(axis=1)
        if np.any(sw <= _TINY):
            raise DegenerateTheta("kernel weights underflow away from the data")
        if self.family == "pareto":
            denom = w @ self._log_y
            with np.errstate(divide="ignore"):
                theta = sw / denom
            if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
                raise DegenerateTheta("non-positive or non-finite Pareto index")
            return float(np.mean(-np.log(theta) + (theta + 1.0) * np.log(y)))
        mu = (w @ self.y_train) / sw
        second = (w @ (self.y_train * self.y_train)) / sw
        var = second - mu * mu
        if np.any(mu <= 0) or np.any(var <= 0):
            raise DegenerateTheta("degenerate local Gamma moments")
        shape = mu * mu / var
        scale = var / mu
        nll = -(shape - 1.0) * np.log(y) + y / scale + shape * np.log(scale) + gammaln(shape)
        return float(np.mean(nll))

    def permutation_evaluator(self, x: np.ndarray, y: np.ndarray) -> _CpcmLocalEvaluator:
        return _CpcmLocalEvaluator(self, x, y)


# --------------------------------------------------------------------- #
# linear fit
# --------------------------------------------------------------------- #


class _LinearEvaluator:
    def __init__(self, contribs: np.ndarray, offset: float, y: np.ndarray):
        self._contribs = contribs
        self._total = offset + contribs.sum(axis=0)
        self._y = y
        self.baseline = float(np.mean((y - self._total) ** 2))

    def loss_with_permuted(self, pos: int, perm: np.ndarray) -> float:
        pred = self._total - self._contribs[pos] + self._contribs[pos][perm]
        return float(np.mean((self._y - pred) ** 2))


class _LinearModel:
    def __init__(self, x: np.ndarray, y: np.ndarray):
        design = np.column_stack([np.ones(x.shape[0]), x])
        coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
        if rank < design.shape[1]:
            raise RankDeficient(f"design matrix rank {rank} < {design.shape[1]} (collinear covariates)")
        self.intercept = float(coef[0])
        self.beta = coef[1:]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.intercept + x @ self.beta

    def permutation_evaluator(self, x: np.ndarray, y: np.ndarray) -> _LinearEvaluator:
        return _LinearEvaluator(np.ascontiguousarray((x * self.beta).T), self.intercept, y)


# --------------------------------------------------------------------- #
# public fits
# --------------------------------------------------------------------- #


def fit_linear(data: Dataset, s: CandidateSet) -> NoiseRecovery:
    """OLS on [1, X_s]; noise by rank PIT of the residuals; per-coefficient
    two-sided t-tests for significance."""
    x = data.covariates(s)
    y = data.y
    n, d = x.shape
    if d >= n - 1:
        raise BadParam(f"|s|={d} too large for n={n}")
    model = _LinearModel(x, y)
    resid = y - model.predict(x)

    design = np.column_stack([np.ones(n), x])
    dof = n - d - 1
    sigma2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(design.T @ design)
    se = np.sqrt(sigma2 * np.diag(xtx_inv)[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(se > 0, model.beta / se, np.inf)
    p_values = 2.0 * student_t.sf(np.abs(t_stats), dof)

    return NoiseRecovery(
        eps=pit_rescale(resid),
        residuals=resid,
        significance_p=np.clip(p_values, 0.0, 1.0),
        fit_loss=float(np.mean(resid**2)),
        function_class=FunctionClass("linear"),
        candidate=s,
        model=model,
    )


def _check_dim(s: CandidateSet):
    if len(s) > SMOOTHER_DIM_CAP:
        raise BadParam(f"|s|={len(s)} exceeds the smoother dimension cap of {SMOOTHER_DIM_CAP}")


def fit_additive(
    data: Dataset,
    s: CandidateSet,
    cfg: SmootherConfig | None = None,
    *,
    n_perm: int = 99,
    seed: int = 0,
) -> NoiseRecovery:
    """Spline conditional-mean fit, residuals rank-PIT rescaled."""
    _check_dim(s)
    cfg = cfg or SmootherConfig()
    x = data.covariates(s)
    y = data.y
    model = _MeanSmoother(x, y, cfg)
    resid = y - model.fitted
    sig = stattests.perm_significance(
        data, s, lambda xt, yt: _MeanSmoother(xt, yt, cfg), n_perm=n_perm, seed=seed
    )
    return NoiseRecovery(
        eps=pit_rescale(resid),
        residuals=resid,
        significance_p=sig,
        fit_loss=float(np.mean(resid**2)),
        function_class=FunctionClass("additive"),
        candidate=s,
        model=model,
    )


def fit_location_scale(
    data: Dataset,
    s: CandidateSet,
    cfg: SmootherConfig | None = None,
    *,
    n_perm: int = 99,
    seed: int = 0,
) -> NoiseRecovery:
    """Spline mean plus spline log-variance; standardized residuals PIT rescaled."""
    _check_dim(s)
    cfg = cfg or SmootherConfig()
    x = data.covariates(s)
    y = data.y
    model = _LocationScaleModel(x, y, cfg)
    resid = y - model.mu_model.fitted
    std_resid = resid / model.sigma_fitted()
    sig = stattests.perm_significance(
        data, s, lambda xt, yt: _LocationScaleModel(xt, yt, cfg), n_perm=n_perm, seed=seed
    )
    return NoiseRecovery(
        eps=pit_rescale(std_resid),
        residuals=std_resid,
        significance_p=sig,
        fit_loss=float(np.mean(resid**2)),
        function_class=FunctionClass("location-scale"),
        candidate=s,
        model=model,
    )


def fit_cpcm(
    data: Dataset,
    s: CandidateSet,
    family: str,
    cfg: SmootherConfig | None = None,
    *,
    n_perm: int = 99,
    seed: int = 0,
) -> NoiseRecovery:
    """Conditionally parametric fit; eps is the parametric transform F(y; theta(x)).

    The transform is NOT rank rescaled: only the parametric class carries
    distributional content, and the uniformity question has to see it.
    """
    _check_dim(s)
    cfg = cfg or SmootherConfig()
    x = data.covariates(s)
    y = data.y
    f_class = FunctionClass("cpcm", family)

    if family == "pareto" and np.min(y) < 1.0:
        raise DomainViolation(f"Pareto family requires Y >= 1, found min {np.min(y)}")
    if family == "gamma" and np.min(y) <= 0.0:
        raise DomainViolation(f"Gamma family requires Y > 0, found min {np.min(y)}")

    raw = None
    if family == "gaussian":
        model = _LocationScaleModel(x, y, cfg)
        z = (y - model.mu_model.fitted) / model.sigma_fitted()
        eps = ndtr(z)
        raw = z  # the independence question sees the standardized scale
        fit_loss = float(np.mean((y - model.mu_model.fitted) ** 2))
        refit = lambda xt, yt: _LocationScaleModel(xt, yt, cfg)
    elif family == "pareto":
        model = _CpcmLocalModel(x, y, "pareto", cfg)
        theta = model.theta(x)
        eps = 1.0 - y ** (-theta)
        median = 2.0 ** (1.0 / theta)  # the conditional mean may not exist
        fit_loss = float(np.mean((y - median) ** 2))
        refit = lambda xt, yt: _CpcmLocalModel(xt, yt, "pareto", cfg)
    elif family == "gamma":
        from scipy.stats import gamma as gamma_dist

        model = _CpcmLocalModel(x, y, "gamma", cfg)
        shape, scale = model.theta(x)
        eps = gamma_dist.cdf(y, a=shape, scale=scale)
        fit_loss = float(np.mean((y - shape * scale) ** 2))
        refit = lambda xt, yt: _CpcmLocalModel(xt, yt, "gamma", cfg)
    else:
        raise BadParam(f"unknown cpcm family {family!r}")

    sig = stattests.perm_significance(data, s, refit, n_perm=n_perm, seed=seed)
    eps = np.clip(eps, EPS_CLIP, 1.0 - EPS_CLIP)
    return NoiseRecovery(
        eps=eps,
        residuals=eps if raw is None else raw,
        significance_p=sig,
        fit_loss=fit_loss,
        function_class=f_class,
        candidate=s,
        model=model,
    )


def recover_noise(
    data: Dataset,
    s: CandidateSet,
    f_class: FunctionClass,
    cfg: SmootherConfig | None = None,
    *,
    n_perm: int = 99,
    seed: int = 0,
) -> NoiseRecovery:
    """Dispatch to the class-appropriate fit."""
    if f_class.kind == "linear":
        return fit_linear(data, s)
    if f_class.kind == "additive":
        return fit_additive(data, s, cfg, n_perm=n_perm, seed=seed)
    if f_class.kind == "location-scale":
        return fit_location_scale(data, s, cfg, n_perm=n_perm, seed=seed)
    return fit_cpcm(data, s, f_class.family, cfg, n_perm=n_perm, seed=seed)
