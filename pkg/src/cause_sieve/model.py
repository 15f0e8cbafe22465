"""Domain types shared by every estimator.

A :class:`Dataset` holds an n x (p+1) numeric table with the target in
column 0 and covariates in columns 1..p, so covariate index ``i`` is also
its column index.  Candidate parent sets are non-empty subsets of
``{1, .., p}``; the empty-parent hypothesis is assessed by a dedicated
operation in :mod:`cause_sieve.discover`, never by an empty candidate.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import (
    BadParam,
    ConstantColumn,
    MissingTarget,
    NonFiniteEntry,
    TooFewRows,
    TooManyCovariates,
    ValidationError,
)

MIN_ROWS = 20

KINDS = ("linear", "additive", "location-scale", "cpcm")
FAMILIES = ("gaussian", "gamma", "pareto")

# stable integer codes for PRNG key derivation (never hash() strings)
CLASS_CODES = {
    ("linear", None): 1,
    ("additive", None): 2,
    ("location-scale", None): 3,
    ("cpcm", "gaussian"): 4,
    ("cpcm", "gamma"): 5,
    ("cpcm", "pareto"): 6,
}


@dataclass(frozen=True)
class FunctionClass:
    """Structural restriction on the target's assignment function.

    ``kind`` selects among linear, additive, location-scale, and the
    conditionally parametric model; ``family`` names the parametric family
    and must be present exactly when ``kind == "cpcm"``.
    """

    kind: str
    family: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadParam(f"unknown function class kind {self.kind!r}")
        if self.kind == "cpcm":
            if self.family not in FAMILIES:
                raise BadParam(f"cpcm requires a family in {FAMILIES}, got {self.family!r}")
        elif self.family is not None:
            raise BadParam(f"family is only valid for cpcm, got kind={self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "FunctionClass":
        """Parse CLI-style labels: ``linear``, ``additive``, ``location-scale``,
        ``cpcm:gaussian``, ``cpcm:gamma``, ``cpcm:pareto``."""
        text = text.strip().lower()
        if text.startswith("cpcm:"):
            return cls("cpcm", text.split(":", 1)[1])
        if text == "cpcm":
            raise BadParam("cpcm needs a family, e.g. cpcm:gaussian")
        return cls(text)

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.family}" if self.family else self.kind

    @property
    def skip_distribution(self) -> bool:
        """Rank-based noise rescaling makes the uniformity question vacuous
        for every class except the parametric one."""
        return self.kind != "cpcm"

    @property
    def code(self) -> int:
        return CLASS_CODES[(self.kind, self.family)]


@dataclass(frozen=True)
class CandidateSet:
    """A non-empty ordered set of covariate indices (1-based)."""

    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if len(members) == 0:
            raise BadParam("candidate set must be non-empty")
        if len(set(members)) != len(members):
            raise BadParam(f"duplicate members in candidate set {members}")
        if any(m < 1 for m in members):
            raise BadParam(f"covariate indices are 1-based, got {members}")
        object.__setattr__(self, "members", tuple(sorted(members)))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members


@dataclass(frozen=True)
class Dataset:
    """Validated numeric table.  Column 0 is the target."""

    values: np.ndarray
    names: tuple[str, ...]
    target_index: int = 0

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1] - 1

    @property
    def y(self) -> np.ndarray:
        return self.values[:, self.target_index]

    @property
    def target_name(self) -> str:
        return self.names[self.target_index]

    def covariates(self, s: CandidateSet) -> np.ndarray:
        """n x |s| matrix of the covariates in ``s`` (column order = sorted members)."""
        bad = [m for m in s.members if m > self.p]
        if bad:
            raise BadParam(f"covariate indices {bad} exceed p={self.p}")
        return self.values[:, list(s.members)]


def validate_dataset(values, names, target_name: str) -> Dataset:
    """Check the table invariants and reorder columns so the target is column 0.

    Raises ``MissingTarget``, ``NonFiniteEntry`` (with original row/column
    coordinates), ``ConstantColumn``, ``TooFewRows``, or ``ValidationError``
    for structural problems (duplicate names, no covariates).
    """
    names = tuple(str(c) for c in names)
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D table, got ndim={arr.ndim}")
    if arr.shape[1] != len(names):
        raise ValidationError(f"{len(names)} column names for {arr.shape[1]} columns")
    if len(set(names)) != len(names):
        raise ValidationError("column names are not unique")
    if target_name not in names:
        raise MissingTarget(f"target column {target_name!r} not found in {list(names)}")
    if arr.shape[1] < 2:
        raise ValidationError("need at least one covariate besides the target")
    if arr.shape[0] < MIN_ROWS:
        raise TooFewRows(f"need at least {MIN_ROWS} rows, got {arr.shape[0]}")

    bad = ~np.isfinite(arr)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonFiniteEntry(int(row), int(col))

    t = names.index(target_name)
    order = [t] + [j for j in range(arr.shape[1]) if j != t]
    arr = np.ascontiguousarray(arr[:, order])
    names = tuple(names[j] for j in order)

    for j in range(1, arr.shape[1]):
        if np.ptp(arr[:, j]) == 0.0:
            raise ConstantColumn(names[j])

    arr.setflags(write=False)
    return Dataset(values=arr, names=names)


def load_csv(path, target_name: str) -> Dataset:
    """Read an RFC-4180 CSV with a mandatory header row and validate it."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = []
        for r, record in enumerate(reader):
            if not record:
                continue
            if len(record) != len(header):
                raise ValidationError(f"{path}: row {r} has {len(record)} fields, expected {len(header)}")
            parsed = []
            for c, cell in enumerate(record):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise NonFiniteEntry(r, c, f"{path}: non-numeric cell {cell!r} at row {r}, column {c}") from None
            rows.append(parsed)
    if not rows:
        raise TooFewRows(f"{path}: no data rows")
    return validate_dataset(np.asarray(rows, dtype=float), header, target_name)


def write_csv(dataset: Dataset, path) -> None:
    """Write the table back out in the same dialect ``load_csv`` reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.names)
        for row in dataset.values:
            writer.writerow([repr(float(v)) for v in row])


def pit_rescale(residuals) -> np.ndarray:
    """Probability integral transform by mid-ranks: (rank - 0.5) / n.

    Ties get average ranks; the output is strictly inside (0, 1), which the
    uniformity tests require, and depends on the input only through its
    ranks (invariant under strictly increasing transforms).
    """
    r = np.asarray(residuals, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise BadParam("residuals must be a non-empty 1-D vector")
    if not np.all(np.isfinite(r)):
        raise BadParam("residuals must be finite")
    ranks = rankdata(r, method="average")
    return (ranks - 0.5) / r.size


def enumerate_candidates(p: int, max_p: int = 12) -> list[CandidateSet]:
    """All 2^p - 1 non-empty candidate sets, ascending cardinality then
    lexicographic.  The order is total and reproducible."""
    if p < 1:
        raise BadParam(f"need at least one covariate, got p={p}")
    if p > max_p:
        raise TooManyCovariates(f"p={p} exceeds the enumeration cap max_p={max_p}")
    out = []
    for size in range(1, p + 1):
        for combo in itertools.combinations(range(1, p + 1), size):
            out.append(CandidateSet(combo))
    return out


@dataclass(frozen=True)
class DiscoveryConfig:
    """Settings shared by the plausibility checks and the score search."""

    alpha: float = 0.05
    lambdas: tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: int = 0
    hsic_method: str = "gamma"
    hsic_permutations: int = 500
    significance_permutations: int = 99
    smoother: "object | None" = None  # regress.SmootherConfig; None = defaults
    max_p: int = 12
    significance_score: str = "one_minus_p_log"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise BadParam(f"alpha must be in (0,1), got {self.alpha}")
        if len(self.lambdas) != 3 or any(l < 0 for l in self.lambdas):
            raise BadParam(f"lambdas must be three non-negative weights, got {self.lambdas}")
        if self.max_p > 20:
            raise BadParam(f"max_p is capped at 20, got {self.max_p}")
        if self.hsic_method not in ("gamma", "permutation"):
            raise BadParam(f"unknown hsic method {self.hsic_method!r}")
        if self.significance_score not in ("one_minus_p_log", "neg_log_p"):
            raise BadParam(f"unknown significance_score {self.significance_score!r}")


@dataclass(frozen=True)
class NoiseRecovery:
    """Recovered noise for one candidate set, with fit diagnostics.

    ``eps`` lies strictly in (0,1) and feeds the uniformity question;
    ``residuals`` is the same noise before rank rescaling (for the
    parametric class the two coincide) and feeds the independence test,
    where the monotone rescale would cost tail-localized power.
    ``significance_p`` holds one p-value per member of the candidate set,
    in member order.  ``fit_loss`` is the mean squared prediction error of
    the fitted centre of the conditional distribution (diagnostics only).
    """

    eps: np.ndarray
    residuals: np.ndarray
    significance_p: np.ndarray
    fit_loss: float
    function_class: FunctionClass
    candidate: CandidateSet
    model: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        if eps.ndim != 1:
            raise BadParam("eps must be a vector")
        if not (np.all(eps > 0.0) and np.all(eps < 1.0)):
            raise BadParam("eps entries must lie strictly inside (0, 1)")
        resid = np.asarray(self.residuals, dtype=float)
        if resid.shape != eps.shape:
            raise BadParam("residuals must match eps in length")
        sig = np.asarray(self.significance_p, dtype=float)
        if sig.shape != (len(self.candidate),):
            raise BadParam("one significance p-value per candidate member required")
        if not (np.all(sig >= 0.0) and np.all(sig <= 1.0)):
            raise BadParam("significance p-values must lie in [0, 1]")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "residuals", resid)
        object.__setattr__(self, "significance_p", sig)
