"""Weight-of-evidence scores.

The weight of evidence of hypothesis A against alternative B given
evidence e is

    woe(A/B : e) = log P(e | Y in A) - log P(e | Y in B)

in natural-log units (nats). Composite hypotheses use prior-weighted
mixture likelihoods, which keeps Bayes rule exact:

    posterior log-odds = prior log-odds + woe

and makes the chain rule over evidence subsets hold identically:

    woe(A/B : e) = sum_i woe(A/B : e_{S_i} | e_{S_1}, ..., e_{S_{i-1}})

for any ordered partition S_1..S_m of the evidence coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DegenerateDensityError,
    DegeneratePriorError,
    InvalidHypothesisError,
    InvalidParameterError,
    InvalidPartitionError,
    MissingEvidenceError,
)
from .gaussian import (
    LOG_2PI,
    DensityBackend,
    set_conditional_log_likelihood,
    set_log_likelihood,
)
from .types import Evidence, HypothesisSet, as_evidence, as_hypothesis


def _checked_pair(
    entailed, contrast, model: DensityBackend
) -> tuple[HypothesisSet, HypothesisSet]:
    a = as_hypothesis(entailed).check_against(model.n_classes)
    b = as_hypothesis(contrast).check_against(model.n_classes)
    if not a.isdisjoint(b):
        shared = sorted(set(a.classes) & set(b.classes))
        raise InvalidHypothesisError(
            f"entailed and contrast sets overlap on classes {shared}"
        )
    return a, b


def _checked_evidence(e, model: DensityBackend) -> Evidence:
    ev = as_evidence(e)
    if ev.n_features != model.n_features:
        raise MissingEvidenceError(
            f"evidence has {ev.n_features} features, model expects {model.n_features}"
        )
    return ev


def _require_observed(e: Evidence, indices: Sequence[int], what: str) -> None:
    for i in indices:
        if not e.observed_mask[i]:
            raise MissingEvidenceError(f"{what} feature {int(i)} is not observed")


def woe(entailed, contrast, evidence, model: DensityBackend) -> float:
    """woe(A/B : e) over all observed coordinates of the evidence."""
    a, b = _checked_pair(entailed, contrast, model)
    e = _checked_evidence(evidence, model)
    idx = e.observed_indices
    x = e.values[list(idx)]
    return set_log_likelihood(model, a, idx, x) - set_log_likelihood(model, b, idx, x)


def woe_conditional(
    entailed,
    contrast,
    target: Sequence[int],
    prefix: Sequence[int],
    evidence,
    model: DensityBackend,
) -> float:
    """woe(A/B : e_target | e_prefix), the chain-rule term for one attribute.

    With an empty prefix this is the marginal WoE of the target subset.
    """
    a, b = _checked_pair(entailed, contrast, model)
    e = _checked_evidence(evidence, model)
    t_idx = tuple(int(i) for i in target)
    p_idx = tuple(int(i) for i in prefix)
    if not t_idx:
        raise InvalidPartitionError("target attribute must be nonempty")
    if set(t_idx) & set(p_idx):
        shared = sorted(set(t_idx) & set(p_idx))[0]
        raise InvalidPartitionError(f"feature {shared} is in both target and prefix")
    _require_observed(e, t_idx, "target")
    _require_observed(e, p_idx, "prefix")
    x_t = e.values[list(t_idx)]
    x_p = e.values[list(p_idx)]
    return set_conditional_log_likelihood(
        model, a, t_idx, x_t, p_idx, x_p
    ) - set_conditional_log_likelihood(model, b, t_idx, x_t, p_idx, x_p)


def woe_chain(
    entailed,
    contrast,
    ordering: Sequence[Sequence[int]],
    evidence,
    model: DensityBackend,
) -> list[float]:
    """Per-attribute conditional WoE along an ordered partition.

    The ordering must partition the observed coordinates of the evidence.
    The scores sum to woe(entailed, contrast, evidence, model) regardless
    of the order; individual terms do depend on it.
    """
    e = _checked_evidence(evidence, model)
    groups = [tuple(int(i) for i in g) for g in ordering]
    flat: list[int] = []
    for k, g in enumerate(groups):
        if not g:
            raise InvalidPartitionError(f"ordering group {k} is empty")
        flat.extend(g)
    if len(set(flat)) != len(flat):
        dup = next(i for i in flat if flat.count(i) > 1)
        raise InvalidPartitionError(f"feature {dup} appears twice in the ordering")
    if set(flat) != set(e.observed_indices):
        raise InvalidPartitionError(
            "ordering must partition the observed coordinates "
            f"{list(e.observed_indices)}, got {sorted(flat)}"
        )
    scores = []
    prefix: list[int] = []
    for g in groups:
        scores.append(woe_conditional(entailed, contrast, g, tuple(prefix), e, model))
        prefix.extend(g)
    return scores


def prior_log_odds(entailed, contrast, model: DensityBackend) -> float:
    """log P(Y in A) - log P(Y in B) from the model priors alone."""
    a, b = _checked_pair(entailed, contrast, model)
    pa = float(np.sum(model.priors[list(a)]))
    pb = float(np.sum(model.priors[list(b)]))
    if pa <= 0.0 or pb <= 0.0:
        raise DegeneratePriorError("a hypothesis set has zero prior mass")
    return math.log(pa) - math.log(pb)


def posterior_log_odds(entailed, contrast, evidence, model: DensityBackend) -> float:
    """log P(Y in A | e) - log P(Y in B | e), straight from Bayes rule.

    Computed from unnormalized per-class joint scores, not from woe, so
    the decomposition identity below is a real cross-check.
    """
    a, b = _checked_pair(entailed, contrast, model)
    e = _checked_evidence(evidence, model)
    idx = list(e.observed_indices)
    x = e.values[idx]

    def side(h: HypothesisSet) -> float:
        scores = [
            np.log(model.priors[c]) + model.class_conditional_log_density(c, idx, x)
            for c in h
        ]
        return float(logsumexp(scores))

    return side(a) - side(b)


def bayes_decomposition(
    entailed, contrast, evidence, model: DensityBackend
) -> tuple[float, float, float]:
    """(prior_log_odds, total_woe, posterior_log_odds) for A vs B given e.

    The three satisfy posterior = prior + woe; prior odds come from the
    model priors and posterior odds from an independent Bayes-rule path.
    """
    prior = prior_log_odds(entailed, contrast, model)
    total = woe(entailed, contrast, evidence, model)
    post = posterior_log_odds(entailed, contrast, evidence, model)
    return prior, total, post


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform 1-D grid spec for numeric integrals over feature marginals.

    span_sigmas is measured from each class mean, so the grid always
    covers that many standard deviations of both marginals.
    """

    points: int = 4001
    span_sigmas: float = 10.0

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise InvalidParameterError(f"grid needs at least 2 points, got {self.points!r}")
        if not self.span_sigmas >= 8.0:
            raise InvalidParameterError(
                f"grid must span at least 8 standard deviations, got {self.span_sigmas!r}"
            )
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "span_sigmas", float(self.span_sigmas))


def information_value(
    feature: int,
    class_a: int,
    class_b: int,
    model: DensityBackend,
    grid: QuadratureGrid = QuadratureGrid(),
) -> float:
    """Information Value of one feature for separating two classes.

        IV = integral of log[p_a(x)/p_b(x)] (p_a(x) - p_b(x)) dx

    over the feature's marginal densities. This is the symmetrized KL
    divergence, so it is nonnegative, and zero exactly when the two
    marginals coincide.
    """
    mu_a, var_a = model.marginal_moments(class_a, feature)
    mu_b, var_b = model.marginal_moments(class_b, feature)
    for label, var in ((class_a, var_a), (class_b, var_b)):
        if var <= 0.0:
            raise DegenerateDensityError(
                f"marginal variance of feature {feature} under class {label} is not positive"
            )
    sd_a, sd_b = math.sqrt(var_a), math.sqrt(var_b)
    lo = min(mu_a - grid.span_sigmas * sd_a, mu_b - grid.span_sigmas * sd_b)
    hi = max(mu_a + grid.span_sigmas * sd_a, mu_b + grid.span_sigmas * sd_b)
    xs = np.linspace(lo, hi, grid.points)
    log_pa = -0.5 * (LOG_2PI + math.log(var_a) + (xs - mu_a) ** 2 / var_a)
    log_pb = -0.5 * (LOG_2PI + math.log(var_b) + (xs - mu_b) ** 2 / var_b)
    integrand = (log_pa - log_pb) * (np.exp(log_pa) - np.exp(log_pb))
    return float(np.trapezoid(integrand, xs))
