"""Sentence-length mixture models and Bayesian authorship comparison.

Workflow: ingest corpora into length histograms (:mod:`sentmix.corpus`),
fit the truncated Poisson / negative-binomial mixture (:mod:`sentmix.model`,
:mod:`sentmix.fit`), then score shared-authorship hypotheses by
Laplace-approximated marginal likelihoods (:mod:`sentmix.selection`).
A command-line front end lives in :mod:`sentmix.cli`.
"""

from .corpus import (
    LengthHistogram,
    SummaryStats,
    bin_lengths,
    bundled_corpus,
    load_histogram,
    save_histogram,
    split_sentences,
    summary_stats,
)
from .fit import (
    FitConfig,
    FitError,
    FitResult,
    ResidualTable,
    fit_min_chisq,
    fit_mle,
    fit_mle_raw,
    grouped_loglik,
    observed_information,
    pearson_residuals,
    predicted_counts,
    raw_loglik,
)
from .model import (
    MixtureParams,
    bin_probs,
    mixture_logpmf,
    mixture_pmf,
    nb_logpmf,
    nb_pmf,
    sample,
    ztp_logpmf,
    ztp_pmf,
)
from .selection import (
    Hypothesis,
    PriorSpec,
    SelectionReport,
    authorship_hypotheses,
    bic_classic,
    bic_star,
    compare_corpora,
    fit_hypothesis,
    joint_loglik,
    posterior_probs,
)

__version__ = "0.1.0"

__all__ = [
    "LengthHistogram",
    "SummaryStats",
    "bin_lengths",
    "bundled_corpus",
    "load_histogram",
    "save_histogram",
    "split_sentences",
    "summary_stats",
    "MixtureParams",
    "bin_probs",
    "mixture_logpmf",
    "mixture_pmf",
    "nb_logpmf",
    "nb_pmf",
    "sample",
    "ztp_logpmf",
    "ztp_pmf",
    "FitConfig",
    "FitError",
    "FitResult",
    "ResidualTable",
    "fit_min_chisq",
    "fit_mle",
    "fit_mle_raw",
    "grouped_loglik",
    "observed_information",
    "pearson_residuals",
    "predicted_counts",
    "raw_loglik",
    "Hypothesis",
    "PriorSpec",
    "SelectionReport",
    "authorship_hypotheses",
    "bic_classic",
    "bic_star",
    "compare_corpora",
    "fit_hypothesis",
    "joint_loglik",
    "posterior_probs",
    "__version__",
]
