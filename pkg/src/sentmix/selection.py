"""Shared-authorship hypothesis comparison.

Three hypotheses partition the corpora into parameter-sharing groups:
M1 (author and disputed text share parameters), M2 (rival and disputed text
share), M0 (all corpora distinct).  Each hypothesis is scored by twice the
log marginal likelihood, computed by Laplace approximation around the joint
maximum-likelihood point, and prior model probabilities are updated to
posterior ones by exponentiating half the score differences.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .corpus import LengthHistogram
from .fit import FitConfig, FitResult, fit_mle, transform
from .model import MixtureParams

__all__ = [
    "Hypothesis",
    "PriorSpec",
    "ResolvedPrior",
    "HypothesisFit",
    "SelectionReport",
    "authorship_hypotheses",
    "joint_loglik",
    "fit_hypothesis",
    "bic_classic",
    "bic_star",
    "laplace_log_marginal",
    "posterior_probs",
    "compare_corpora",
    "MODEL_PRIOR_PRESETS",
]

#: Prior model probabilities keyed by hypothesis name, order (M0, M1, M2).
MODEL_PRIOR_PRESETS: dict[str, dict[str, float]] = {
    "equal": {"M0": 1.0 / 3.0, "M1": 1.0 / 3.0, "M2": 1.0 / 3.0},
    # A sceptic of the attributed author: heavy prior weight on the rival,
    # next to none on the "all distinct" hypothesis.
    "solzhenitsyn": {"M0": 0.0, "M1": 0.05, "M2": 0.95},
}


@dataclass(frozen=True)
class Hypothesis:
    """A partition of corpus labels into parameter-sharing groups."""

    name: str
    groups: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        labels = [lab for group in self.groups for lab in group]
        if len(labels) != len(set(labels)):
            raise ValueError(f"hypothesis {self.name!r}: groups overlap")
        if not labels:
            raise ValueError(f"hypothesis {self.name!r}: no corpora")

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(lab for group in self.groups for lab in group)

    @property
    def dimension(self) -> int:
        return 4 * len(self.groups)


def authorship_hypotheses(
    author: str = "Sh", rival: str = "Kr", disputed: str = "TD"
) -> tuple[Hypothesis, Hypothesis, Hypothesis]:
    """The canonical trio (M0, M1, M2) for an attribution dispute.

    M1: the attributed author wrote the disputed text (their corpora share
    parameters); M2: the rival did; M0: all three corpora differ.
    """
    return (
        Hypothesis("M0", ((author,), (rival,), (disputed,))),
        Hypothesis("M1", ((author, disputed), (rival,))),
        Hypothesis("M2", ((rival, disputed), (author,))),
    )


@dataclass(frozen=True)
class PriorSpec:
    """Parameter prior for the marginal-likelihood integrals.

    Independent normals on the transformed scale (logit p, log xi, log a,
    log b) for every group's parameter block, centered at ``center`` (the
    pooled all-corpora MLE when None) with standard deviation ``sd`` per
    coordinate.  Because the prior is specified directly on the transformed
    scale, no change-of-variables Jacobian enters anywhere downstream.
    """

    sd: float = 10.0
    center: MixtureParams | None = None

    def __post_init__(self):
        if not self.sd > 0.0:
            raise ValueError("prior sd must be positive")

    def resolve(
        self, histograms: Mapping[str, LengthHistogram], config: FitConfig | None = None
    ) -> "ResolvedPrior":
        if self.center is not None:
            center = self.center
        else:
            pooled = reduce(lambda x, y: x.add_counts(y), histograms.values())
            center = fit_mle(pooled.with_label("pooled"), config).params
        return ResolvedPrior(sd=self.sd, center=center)


@dataclass(frozen=True)
class ResolvedPrior:
    """A PriorSpec with its center pinned to concrete parameter values."""

    sd: float
    center: MixtureParams

    def log_density(self, params: MixtureParams) -> float:
        u = transform(params)
        z = (u - transform(self.center)) / self.sd
        return float(-0.5 * np.dot(z, z) - u.size * (math.log(self.sd) + 0.5 * math.log(2.0 * math.pi)))

    def to_json_dict(self) -> dict:
        c = self.center
        return {
            "family": "independent normal on transformed scale (logit p, log xi, log a, log b)",
            "sd": self.sd,
            "center": {"p": c.p, "xi": c.xi, "a": c.a, "b": c.b},
        }


@dataclass(frozen=True)
class HypothesisFit:
    """Per-group MLEs for one hypothesis with the maximized joint log-likelihood."""

    hypothesis: Hypothesis
    group_fits: tuple[FitResult, ...]
    joint_loglik: float
    n_total: int


def _check_partition(hyp: Hypothesis, histograms: Mapping[str, LengthHistogram]) -> None:
    missing = set(histograms) - hyp.labels
    if missing:
        raise ValueError(
            f"hypothesis {hyp.name!r} does not cover corpora: {sorted(missing)}"
        )
    unknown = hyp.labels - set(histograms)
    if unknown:
        raise ValueError(
            f"hypothesis {hyp.name!r} names corpora with no histogram: {sorted(unknown)}"
        )


def joint_loglik(
    hyp: Hypothesis,
    histograms: Mapping[str, LengthHistogram],
    group_params: Sequence[MixtureParams],
) -> float:
    """Sum of grouped log-likelihoods, one shared parameter vector per group."""
    from .fit import grouped_loglik

    _check_partition(hyp, histograms)
    if len(group_params) != len(hyp.groups):
        raise ValueError("need exactly one parameter vector per group")
    total = 0.0
    for group, params in zip(hyp.groups, group_params):
        for label in group:
            total += grouped_loglik(histograms[label], params)
    return total


def _summed_histogram(
    group: tuple[str, ...], histograms: Mapping[str, LengthHistogram]
) -> LengthHistogram:
    return reduce(
        lambda x, y: x.add_counts(y), (histograms[lab] for lab in group)
    ).with_label("+".join(group))


def fit_hypothesis(
    hyp: Hypothesis,
    histograms: Mapping[str, LengthHistogram],
    config: FitConfig | None = None,
    _single_fits: dict[str, FitResult] | None = None,
) -> HypothesisFit:
    """Maximize the joint likelihood group by group.

    A shared group's likelihood over identical bins equals the likelihood of
    the bin-wise summed histogram, so each group reduces to one single-corpus
    fit; shared groups additionally start from their members' individual MLEs.
    """
    _check_partition(hyp, histograms)
    config = config or FitConfig()
    singles = _single_fits if _single_fits is not None else {}

    def single(label: str) -> FitResult:
        if label not in singles:
            singles[label] = fit_mle(histograms[label], config)
        return singles[label]

    group_fits = []
    for group in hyp.groups:
        if len(group) == 1:
            group_fits.append(single(group[0]))
        else:
            member_starts = tuple(single(lab).params for lab in group)
            cfg = replace(config, extra_starts=config.extra_starts + member_starts)
            group_fits.append(fit_mle(_summed_histogram(group, histograms), cfg))
    return HypothesisFit(
        hypothesis=hyp,
        group_fits=tuple(group_fits),
        joint_loglik=float(sum(f.objective for f in group_fits)),
        n_total=sum(h.total for h in histograms.values()),
    )


def bic_classic(fit: HypothesisFit) -> float:
    """2 * max joint log-likelihood - dimension * log(total sentences); larger is better."""
    return 2.0 * fit.joint_loglik - fit.hypothesis.dimension * math.log(fit.n_total)


def laplace_log_marginal(
    loglik_at_mode: float, log_prior_at_mode: float, information: np.ndarray
) -> float:
    """Laplace approximation of log integral of likelihood * prior.

    ``information`` is the negative Hessian of the log-likelihood at the mode
    on the same scale the prior density lives on.  Exact when the
    log-integrand is a quadratic.
    """
    info = np.asarray(information, dtype=float)
    d = info.shape[0]
    sign, logdet = np.linalg.slogdet(info)
    if sign <= 0:
        raise ValueError(
            "observed information is not positive definite; refit or adjust the prior"
        )
    return loglik_at_mode + log_prior_at_mode + 0.5 * d * math.log(2.0 * math.pi) - 0.5 * logdet


def bic_star(fit: HypothesisFit, prior: ResolvedPrior) -> tuple[float, float]:
    """Twice the Laplace-approximated log marginal likelihood of a hypothesis.

    The joint information is block-diagonal, one 4x4 block per group, so the
    approximation factorizes over groups.  Returns ``(score, log_det)`` where
    ``log_det`` is the log-determinant of the joint information matrix.
    """
    log_marginal = 0.0
    log_det_total = 0.0
    for group_fit in fit.group_fits:
        info = group_fit.observed_information
        log_marginal += laplace_log_marginal(
            group_fit.objective, prior.log_density(group_fit.params), info
        )
        log_det_total += float(np.linalg.slogdet(info)[1])
    return 2.0 * log_marginal, log_det_total


def posterior_probs(priors: Sequence[float], bic_stars: Sequence[float]) -> np.ndarray:
    """Posterior model probabilities from priors and per-hypothesis scores.

    Evaluates prior_j * exp(score_j / 2), normalized, entirely in log space
    (the largest exponent is subtracted first), so scores of any magnitude
    are safe.
    """
    priors = np.asarray(priors, dtype=float)
    scores = np.asarray(bic_stars, dtype=float)
    if priors.shape != scores.shape:
        raise ValueError("need one prior per score")
    if np.any(priors < 0.0):
        raise ValueError("priors must be non-negative")
    if priors.sum() <= 0.0:
        raise ValueError("at least one prior must be positive")
    if abs(priors.sum() - 1.0) > 1e-9:
        raise ValueError("priors must sum to 1")
    with np.errstate(divide="ignore"):
        log_weights = np.log(priors) + 0.5 * scores
    log_weights -= log_weights.max()
    weights = np.exp(log_weights)
    return weights / weights.sum()


@dataclass(frozen=True)
class SelectionReport:
    """Scores and posterior probabilities for every hypothesis, plus the prior used."""

    entries: tuple[dict, ...]
    prior: ResolvedPrior
    n_total: int

    @property
    def posterior(self) -> dict[str, float]:
        return {e["name"]: e["posterior_prob"] for e in self.entries}

    @property
    def best(self) -> dict:
        return max(self.entries, key=lambda e: e["posterior_prob"])

    def to_json_dict(self) -> dict:
        return {
            "hypotheses": list(self.entries),
            "prior_spec": self.prior.to_json_dict(),
            "n_total": self.n_total,
        }


def compare_corpora(
    histograms: Mapping[str, LengthHistogram],
    model_priors: Mapping[str, float] | None = None,
    prior_spec: PriorSpec | None = None,
    hypotheses: Sequence[Hypothesis] | None = None,
    config: FitConfig | None = None,
    author: str = "Sh",
    rival: str = "Kr",
    disputed: str = "TD",
) -> SelectionReport:
    """Run the full comparison: fit every hypothesis, score, and update priors.

    ``hypotheses`` defaults to :func:`authorship_hypotheses` over the three
    role labels, which must then all be present in ``histograms``.
    """
    if hypotheses is None:
        roles = (author, rival, disputed)
        if set(roles) != set(histograms):
            raise ValueError(
                f"histograms {sorted(histograms)} do not match roles {roles}; "
                "pass explicit hypotheses for other label sets"
            )
        hypotheses = authorship_hypotheses(author, rival, disputed)
    if model_priors is None:
        model_priors = MODEL_PRIOR_PRESETS["equal"]
    missing = [h.name for h in hypotheses if h.name not in model_priors]
    if missing:
        raise ValueError(f"no prior probability for hypotheses: {missing}")

    config = config or FitConfig()
    prior = (prior_spec or PriorSpec()).resolve(histograms, config)

    single_cache: dict[str, FitResult] = {}
    fits = [
        fit_hypothesis(h, histograms, config, _single_fits=single_cache)
        for h in hypotheses
    ]
    stars_and_dets = [bic_star(f, prior) for f in fits]
    priors_vec = [float(model_priors[h.name]) for h in hypotheses]
    posteriors = posterior_probs(priors_vec, [s for s, _ in stars_and_dets])

    entries = []
    for hyp, fit, (star, log_det), pri, post in zip(
        hypotheses, fits, stars_and_dets, priors_vec, posteriors
    ):
        entries.append(
            {
                "name": hyp.name,
                "groups": [list(g) for g in hyp.groups],
                "group_params": [
                    {"p": f.params.p, "xi": f.params.xi, "a": f.params.a, "b": f.params.b}
                    for f in fit.group_fits
                ],
                "joint_loglik": fit.joint_loglik,
                "bic_classic": bic_classic(fit),
                "bic_star": star,
                "laplace_log_det": log_det,
                "prior_prob": pri,
                "posterior_prob": float(post),
            }
        )
    return SelectionReport(
        entries=tuple(entries), prior=prior, n_total=fits[0].n_total
    )
