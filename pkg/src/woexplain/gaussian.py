"""Class-conditional Gaussian density models.

One Gaussian per class, diagonal or full covariance, plus class priors.
This is the likelihood backend for every weight-of-evidence computation:
it answers log P(x_target | x_prefix, Y = c) in closed form for arbitrary
coordinate splits, and extends to composite hypotheses Y in C through a
posterior-weighted mixture so that chained conditional scores telescope
exactly.

All probability arithmetic happens in log space; sums of likelihoods go
through log-sum-exp.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logsumexp

from .errors import (
    InsufficientDataError,
    InvalidDataError,
    InvalidModelError,
    InvalidParameterError,
    InvalidPartitionError,
    MissingEvidenceError,
    NumericalConditioningError,
    UnknownLabelError,
)
from .types import Evidence, HypothesisSet, as_evidence, as_hypothesis

LOG_2PI = float(np.log(2.0 * np.pi))

MODEL_FORMAT_VERSION = 1

DIAGONAL = "diagonal"
FULL = "full"

# relative scale of the default ridge added to fitted covariances
DEFAULT_FLOOR_SCALE = 1e-6
# absolute fallback when the data has zero variance everywhere
DEGENERATE_FLOOR = 1e-12


@runtime_checkable
class DensityBackend(Protocol):
    """What the scoring layer needs from a likelihood model.

    Any object with per-class conditional log densities, marginal moments,
    and priors can drive the weight-of-evidence machinery.
    """

    @property
    def n_features(self) -> int: ...

    @property
    def n_classes(self) -> int: ...

    @property
    def priors(self) -> np.ndarray: ...

    def class_conditional_log_density(
        self,
        label: int,
        target: Sequence[int],
        x_target: Sequence[float],
        prefix: Sequence[int] = (),
        x_prefix: Sequence[float] = (),
    ) -> float: ...

    def marginal_moments(self, label: int, feature: int) -> tuple[float, float]: ...


def _index_tuple(indices: Iterable[int], n: int, what: str) -> tuple[int, ...]:
    """Normalize a coordinate collection and bounds-check it against n."""
    try:
        idx = tuple(int(i) for i in indices)
    except (TypeError, ValueError) as exc:
        raise InvalidPartitionError(f"{what} indices must be integers") from exc
    for i in idx:
        if not 0 <= i < n:
            raise InvalidPartitionError(f"{what} index {i} outside 0..{n - 1}")
    if len(set(idx)) != len(idx):
        raise InvalidPartitionError(f"duplicate index in {what}: {list(idx)}")
    return idx


@dataclass(frozen=True)
class GaussianClassModel:
    """Per-class Gaussian densities with shared feature space.

    Attributes:
        means: (K, n) class means.
        covariances: (K, n, n) in full mode, (K, n) variances in diagonal mode.
        priors: (K,) class priors, positive, summing to 1.
        mode: "diagonal" or "full".
        feature_names: n column names, used in files and reports.
    """

    means: np.ndarray
    covariances: np.ndarray
    priors: np.ndarray
    mode: str
    feature_names: tuple[str, ...]

    def __post_init__(self):
        if self.mode not in (DIAGONAL, FULL):
            raise InvalidModelError(f"unknown covariance mode {self.mode!r}")
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covariances, dtype=float)
        priors = np.asarray(self.priors, dtype=float)
        if means.ndim != 2:
            raise InvalidModelError(f"means must be (K, n), got shape {means.shape}")
        k, n = means.shape
        if k < 1 or n < 1:
            raise InvalidModelError(f"need at least 1 class and 1 feature, got {k}x{n}")
        want = (k, n, n) if self.mode == FULL else (k, n)
        if covs.shape != want:
            raise InvalidModelError(
                f"covariances shape {covs.shape} does not match expected {want}"
            )
        if priors.shape != (k,):
            raise InvalidModelError(f"priors shape {priors.shape} does not match ({k},)")
        names = tuple(str(f) for f in self.feature_names)
        if len(names) != n:
            raise InvalidModelError(f"{len(names)} feature names for {n} features")
        for arr in (means, covs, priors):
            arr.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    @cached_property
    def _log_priors(self) -> np.ndarray:
        lp = np.log(self.priors)
        lp.setflags(write=False)
        return lp

    @cached_property
    def _full_cholesky(self) -> np.ndarray:
        """Lower Cholesky factor of every full covariance, computed once."""
        try:
            return np.linalg.cholesky(self.covariances)
        except np.linalg.LinAlgError as exc:
            raise NumericalConditioningError(
                "a class covariance is not positive definite"
            ) from exc

    def validate(self) -> "GaussianClassModel":
        """Check numeric invariants; raise InvalidModelError on any violation.

        Priors must be positive and sum to 1 within 1e-12; every variance
        must be positive; full covariances must be symmetric and admit a
        Cholesky factorization.
        """
        for name, arr in (("means", self.means), ("covariances", self.covariances),
                          ("priors", self.priors)):
            if not np.all(np.isfinite(arr)):
                raise InvalidModelError(f"non-finite entries in {name}")
        if np.any(self.priors <= 0.0):
            bad = int(np.flatnonzero(self.priors <= 0.0)[0])
            raise InvalidModelError(f"prior of class {bad} is not positive")
        total = float(self.priors.sum())
        if abs(total - 1.0) > 1e-12:
            raise InvalidModelError(f"priors sum to {total!r}, expected 1 within 1e-12")
        if self.mode == DIAGONAL:
            if np.any(self.covariances <= 0.0):
                c, i = map(int, np.argwhere(self.covariances <= 0.0)[0])
                raise InvalidModelError(f"variance of feature {i} in class {c} is not positive")
        else:
            for c in range(self.n_classes):
                cov = self.covariances[c]
                if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-10 * (1.0 + np.abs(cov).max())):
                    raise InvalidModelError(f"covariance of class {c} is not symmetric")
            try:
                np.linalg.cholesky(self.covariances)
            except np.linalg.LinAlgError as exc:
                raise InvalidModelError(
                    "a class covariance is not positive definite"
                ) from exc
        return self

    def check_label(self, label: int) -> int:
        label = int(label)
        if not 0 <= label < self.n_classes:
            raise UnknownLabelError(f"label {label} outside model range 0..{self.n_classes - 1}")
        return label

    def marginal_moments(self, label: int, feature: int) -> tuple[float, float]:
        """Mean and variance of one feature under one class."""
        c = self.check_label(label)
        (i,) = _index_tuple((feature,), self.n_features, "feature")
        mean = float(self.means[c, i])
        if self.mode == DIAGONAL:
            var = float(self.covariances[c, i])
        else:
            var = float(self.covariances[c, i, i])
        return mean, var

    def class_conditional_log_density(
        self,
        label: int,
        target: Sequence[int],
        x_target: Sequence[float],
        prefix: Sequence[int] = (),
        x_prefix: Sequence[float] = (),
    ) -> float:
        """log P(X_target = x_target | X_prefix = x_prefix, Y = label).

        In full mode the conditional distribution comes from the Schur
        complement of the class covariance:

            mu_cond  = mu_T + S_TP S_PP^-1 (x_P - mu_P)
            cov_cond = S_TT - S_TP S_PP^-1 S_PT

        In diagonal mode features are independent within a class, so the
        prefix has no effect. An empty target yields log 1 = 0.
        """
        c = self.check_label(label)
        n = self.n_features
        t_idx = _index_tuple(target, n, "target")
        p_idx = _index_tuple(prefix, n, "prefix")
        if set(t_idx) & set(p_idx):
            shared = sorted(set(t_idx) & set(p_idx))[0]
            raise InvalidPartitionError(f"feature {shared} is in both target and prefix")
        if not t_idx:
            return 0.0
        x_t = np.asarray(x_target, dtype=float).reshape(-1)
        if x_t.size != len(t_idx):
            raise InvalidDataError(f"{x_t.size} target values for {len(t_idx)} target indices")
        x_p = np.asarray(x_prefix, dtype=float).reshape(-1)
        if x_p.size != len(p_idx):
            raise InvalidDataError(f"{x_p.size} prefix values for {len(p_idx)} prefix indices")

        if self.mode == DIAGONAL:
            var = self.covariances[c, list(t_idx)]
            dev = x_t - self.means[c, list(t_idx)]
            return float(-0.5 * np.sum(LOG_2PI + np.log(var) + dev * dev / var))

        t = list(t_idx)
        if not p_idx:
            mean = self.means[c, t]
            if len(t_idx) == n and t_idx == tuple(range(n)):
                chol = self._full_cholesky[c]
            else:
                chol = _chol_or_raise(self.covariances[c][np.ix_(t, t)], c)
            return _gauss_log_density(x_t, mean, chol)

        p = list(p_idx)
        cov = self.covariances[c]
        s_pp = cov[np.ix_(p, p)]
        s_tp = cov[np.ix_(t, p)]
        try:
            factor = cho_factor(s_pp, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalConditioningError(
                f"prefix covariance of class {c} is not positive definite"
            ) from exc
        mean = self.means[c, t] + s_tp @ cho_solve(factor, x_p - self.means[c, p],
                                                   check_finite=False)
        cov_cond = cov[np.ix_(t, t)] - s_tp @ cho_solve(factor, s_tp.T, check_finite=False)
        # the Schur complement drifts off symmetric by rounding; restore it
        cov_cond = 0.5 * (cov_cond + cov_cond.T)
        return _gauss_log_density(x_t, mean, _chol_or_raise(cov_cond, c))


def _chol_or_raise(cov: np.ndarray, label: int):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalConditioningError(
            f"conditional covariance of class {label} is not positive definite"
        ) from exc


def _gauss_log_density(x: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> float:
    """Multivariate normal log density from a lower Cholesky factor."""
    z = solve_triangular(chol, x - mean, lower=True, check_finite=False)
    log_det = 2.0 * float(np.sum(np.log(np.diagonal(chol))))
    return float(-0.5 * (x.size * LOG_2PI + log_det + z @ z))


def _hypothesis_base(
    model: DensityBackend,
    classes: Sequence[int],
    prefix: Sequence[int],
    x_prefix: Sequence[float],
) -> np.ndarray:
    """Unnormalized log weight of each class: log prior plus prefix likelihood."""
    base = np.array([np.log(model.priors[c]) for c in classes])
    if len(tuple(prefix)):
        base = base + np.array([
            model.class_conditional_log_density(c, prefix, x_prefix) for c in classes
        ])
    return base


def set_conditional_log_likelihood(
    model: DensityBackend,
    hypothesis: "HypothesisSet | int | Iterable[int]",
    target: Sequence[int],
    x_target: Sequence[float],
    prefix: Sequence[int] = (),
    x_prefix: Sequence[float] = (),
) -> float:
    """log P(X_target = x_target | X_prefix = x_prefix, Y in C).

    The composite hypothesis is a mixture of its member classes with
    weights w_c proportional to P(c) P(x_prefix | c), renormalized over C.
    Equivalently:

        log sum_c exp(b_c + v_c) - log sum_c exp(b_c)

    with b_c = log P(c) + log P(x_prefix | c) and v_c the conditional
    target log density. This form makes chained scores telescope.
    """
    h = as_hypothesis(hypothesis).check_against(model.n_classes)
    cs = list(h)
    if len(cs) == 1:
        # one-element mixture: the weight is 1, skip the arithmetic
        return float(model.class_conditional_log_density(
            cs[0], target, x_target, prefix, x_prefix
        ))
    base = _hypothesis_base(model, cs, prefix, x_prefix)
    vals = np.array([
        model.class_conditional_log_density(c, target, x_target, prefix, x_prefix)
        for c in cs
    ])
    return float(logsumexp(base + vals) - logsumexp(base))


def set_log_likelihood(
    model: DensityBackend,
    hypothesis: "HypothesisSet | int | Iterable[int]",
    indices: Sequence[int],
    values: Sequence[float],
) -> float:
    """log P(X_indices = values | Y in C), the prior-weighted class mixture."""
    return set_conditional_log_likelihood(model, hypothesis, indices, values)


def posterior(model: DensityBackend, evidence: "Evidence | Sequence[float]") -> np.ndarray:
    """P(Y = c | x) for every class, via log-space Bayes rule.

    Requires a fully observed input. Stable for inputs far from every
    class mean because normalization happens before exponentiation.
    """
    e = as_evidence(evidence)
    if e.n_features != model.n_features:
        raise InvalidDataError(
            f"evidence has {e.n_features} features, model expects {model.n_features}"
        )
    if not e.fully_observed:
        missing = int(np.flatnonzero(~e.observed_mask)[0])
        raise MissingEvidenceError(f"posterior needs all features, feature {missing} unobserved")
    coords = tuple(range(model.n_features))
    scores = np.array([
        np.log(model.priors[c]) + model.class_conditional_log_density(c, coords, e.values)
        for c in range(model.n_classes)
    ])
    log_post = scores - logsumexp(scores)
    probs = np.exp(log_post)
    return probs / probs.sum()


def predicted_class(model: DensityBackend, evidence: "Evidence | Sequence[float]") -> int:
    """Posterior argmax; ties break toward the smaller label."""
    return int(np.argmax(posterior(model, evidence)))


def fit(
    data: np.ndarray,
    labels: Sequence[int],
    mode: str = FULL,
    variance_floor: float | None = None,
    feature_names: Sequence[str] | None = None,
) -> GaussianClassModel:
    """Fit one Gaussian per class by maximum likelihood.

    Labels must be dense integers 0..K-1 with every class present at
    least twice. Covariances use the maximum-likelihood normalizer
    (divide by the class count) plus a ridge: variance_floor times the
    identity in full mode, an elementwise floor in diagonal mode. When
    variance_floor is None it defaults to 1e-6 times the mean marginal
    variance of the data, falling back to 1e-12 if that is zero.

    Priors are the empirical class frequencies.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise InvalidDataError(f"data must be a 2-D array, got shape {x.shape}")
    n_rows, n_feat = x.shape
    if n_feat < 1:
        raise InvalidDataError("data must have at least one feature column")
    if not np.all(np.isfinite(x)):
        r, c = map(int, np.argwhere(~np.isfinite(x))[0])
        raise InvalidDataError(f"non-finite value at row {r}, feature {c}")
    y = np.asarray(labels)
    if y.ndim != 1 or y.shape[0] != n_rows:
        raise InvalidDataError(f"labels shape {y.shape} does not match {n_rows} data rows")
    if not np.issubdtype(y.dtype, np.integer):
        y_float = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y_float)) or np.any(y_float != np.floor(y_float)):
            raise InvalidDataError("labels must be integers")
        y = y_float.astype(int)
    y = y.astype(int)
    if np.any(y < 0):
        raise InvalidDataError(f"negative label {int(y.min())}; labels must be 0..K-1")

    n_classes = int(y.max()) + 1
    counts = np.bincount(y, minlength=n_classes)
    if n_classes < 2:
        raise InsufficientDataError("labels contain a single class; need at least two")
    thin = np.flatnonzero(counts < 2)
    if thin.size:
        raise InsufficientDataError(
            f"class {int(thin[0])} has {int(counts[thin[0]])} samples; need at least 2 per class"
        )

    if variance_floor is None:
        scale = float(np.var(x, axis=0).mean())
        floor = DEFAULT_FLOOR_SCALE * scale if scale > 0.0 else DEGENERATE_FLOOR
    else:
        floor = float(variance_floor)
        if not np.isfinite(floor) or floor <= 0.0:
            raise InvalidParameterError(f"variance floor must be positive, got {floor!r}")

    if mode not in (DIAGONAL, FULL):
        raise InvalidParameterError(f"mode must be {DIAGONAL!r} or {FULL!r}, got {mode!r}")

    means = np.empty((n_classes, n_feat))
    if mode == FULL:
        covs = np.empty((n_classes, n_feat, n_feat))
    else:
        covs = np.empty((n_classes, n_feat))
    for c in range(n_classes):
        xc = x[y == c]
        mu = xc.mean(axis=0)
        dev = xc - mu
        means[c] = mu
        if mode == FULL:
            covs[c] = dev.T @ dev / xc.shape[0] + floor * np.eye(n_feat)
        else:
            covs[c] = np.maximum((dev * dev).mean(axis=0), floor)

    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(n_feat))
    model = GaussianClassModel(
        means=means,
        covariances=covs,
        priors=counts / n_rows,
        mode=mode,
        feature_names=tuple(feature_names),
    )
    return model.validate()


def model_to_dict(model: GaussianClassModel) -> dict:
    """Serializable form of a model; field order is fixed for stable files."""
    classes = []
    for c in range(model.n_classes):
        entry = {
            "label": c,
            "prior": float(model.priors[c]),
            "mean": [float(v) for v in model.means[c]],
        }
        if model.mode == FULL:
            entry["cov"] = [[float(v) for v in row] for row in model.covariances[c]]
        else:
            entry["var"] = [float(v) for v in model.covariances[c]]
        classes.append(entry)
    return {
        "version": MODEL_FORMAT_VERSION,
        "mode": model.mode,
        "feature_names": list(model.feature_names),
        "classes": classes,
    }


def model_from_dict(doc: dict) -> GaussianClassModel:
    """Rebuild a model from its serialized form, then validate it."""
    if not isinstance(doc, dict):
        raise InvalidModelError("model document must be a JSON object")
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise InvalidModelError(
            f"unsupported model version {version!r}, expected {MODEL_FORMAT_VERSION}"
        )
    mode = doc.get("mode")
    if mode not in (DIAGONAL, FULL):
        raise InvalidModelError(f"unknown covariance mode {mode!r}")
    names = doc.get("feature_names")
    if not isinstance(names, list) or not names:
        raise InvalidModelError("feature_names must be a nonempty list")
    entries = doc.get("classes")
    if not isinstance(entries, list) or not entries:
        raise InvalidModelError("classes must be a nonempty list")
    try:
        entries = sorted(entries, key=lambda e: int(e["label"]))
        labels = [int(e["label"]) for e in entries]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidModelError("every class entry needs an integer label") from exc
    if labels != list(range(len(entries))):
        raise InvalidModelError(f"class labels must be exactly 0..{len(entries) - 1}, got {labels}")
    key = "cov" if mode == FULL else "var"
    try:
        priors = np.array([float(e["prior"]) for e in entries])
        means = np.array([[float(v) for v in e["mean"]] for e in entries], dtype=float)
        covs = np.array([e[key] for e in entries], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidModelError(f"malformed class entry: {exc}") from exc
    if means.ndim != 2 or means.shape[1] != len(names):
        raise InvalidModelError("class means do not match feature_names in length")
    model = GaussianClassModel(
        means=means,
        covariances=covs,
        priors=priors,
        mode=mode,
        feature_names=tuple(str(n) for n in names),
    )
    return model.validate()


def save_model(model: GaussianClassModel, path: "str | Path") -> None:
    """Write a model as JSON. Identical models produce identical bytes."""
    text = json.dumps(model_to_dict(model), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_model(path: "str | Path") -> GaussianClassModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(doc)
