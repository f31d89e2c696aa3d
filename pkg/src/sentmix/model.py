"""Sentence-length distribution family.

The model for the number of words Y in a sentence (Y >= 1) is a two-component
mixture: a zero-truncated Poisson for one kind of sentence and a
zero-truncated negative binomial for the other,

    f(y; p, xi, a, b) = p * ztp(y; xi) + (1 - p) * nb(y; a, b) / (1 - nb(0; a, b)),

where nb is the Gamma(a, b)-mixed Poisson (mean a/b, variance (a/b)(1 + 1/b)).
All probability arithmetic runs in log space via log-Gamma; Gamma(a + y)
overflows well before y reaches realistic sentence lengths otherwise.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "MixtureParams",
    "nb_pmf",
    "nb_logpmf",
    "nb_mean",
    "nb_variance",
    "ztp_pmf",
    "ztp_logpmf",
    "mixture_pmf",
    "mixture_logpmf",
    "bin_probs",
    "sample",
]


@dataclass(frozen=True)
class MixtureParams:
    """Mixture parameters: weight p on the Poisson part, Poisson rate xi,
    negative-binomial shape a and rate b."""

    p: float
    xi: float
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not self.xi > 0.0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if not self.a > 0.0:
            raise ValueError(f"a must be positive, got {self.a}")
        if not self.b > 0.0:
            raise ValueError(f"b must be positive, got {self.b}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p, self.xi, self.a, self.b)


def _check_ab(a: float, b: float) -> None:
    if not a > 0.0 or not b > 0.0:
        raise ValueError(f"negative-binomial parameters must be positive, got a={a}, b={b}")


def nb_logpmf(y, a: float, b: float):
    """log of the Gamma-mixed-Poisson pmf at y = 0, 1, 2, ..."""
    _check_ab(a, b)
    y = np.asarray(y)
    if np.any(y < 0):
        raise ValueError("negative binomial support is y >= 0")
    return (
        a * np.log(b)
        - gammaln(a)
        - gammaln(y + 1.0)
        + gammaln(a + y)
        - (a + y) * np.log1p(b)
    )


def nb_pmf(y, a: float, b: float):
    return np.exp(nb_logpmf(y, a, b))


def nb_mean(a: float, b: float) -> float:
    _check_ab(a, b)
    return a / b


def nb_variance(a: float, b: float) -> float:
    _check_ab(a, b)
    return (a / b) * (1.0 + 1.0 / b)


def ztp_logpmf(y, xi: float):
    """log of the zero-truncated Poisson pmf at y = 1, 2, ...

    Stable down to tiny xi: the normalizer 1 - exp(-xi) is evaluated with
    expm1.
    """
    if not xi > 0.0:
        raise ValueError(f"xi must be positive, got {xi}")
    y = np.asarray(y)
    if np.any(y < 1):
        raise ValueError("zero-truncated support is y >= 1")
    return -xi + y * np.log(xi) - gammaln(y + 1.0) - np.log(-np.expm1(-xi))


def ztp_pmf(y, xi: float):
    return np.exp(ztp_logpmf(y, xi))


def _log_nb_zero(a: float, b: float) -> float:
    # log nb(0; a, b) = a * log(b / (b + 1))
    return a * (np.log(b) - np.log1p(b))


def mixture_logpmf(y, params: MixtureParams):
    """log of the two-component truncated mixture pmf at y = 1, 2, ...

    Combines the component logs with logaddexp so either component may
    underflow (or p may be exactly 0 or 1) without losing the other.
    """
    p, xi, a, b = params.as_tuple()
    y = np.asarray(y)
    if np.any(y < 1):
        raise ValueError("mixture support is y >= 1")
    log_ztp = -xi + y * np.log(xi) - gammaln(y + 1.0) - np.log(-np.expm1(-xi))
    log_ztnb = nb_logpmf(y, a, b) - np.log(-np.expm1(_log_nb_zero(a, b)))
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(p) + log_ztp, np.log1p(-p) + log_ztnb)


def mixture_pmf(y, params: MixtureParams):
    return np.exp(mixture_logpmf(y, params))


def bin_probs(bins: Sequence[tuple[int, int]], params: MixtureParams) -> np.ndarray:
    """Probability of a sentence length landing in each bin ``lo..hi``.

    Sums the pointwise pmf over each (inclusive) range.  No renormalization:
    mass outside the covered range is simply absent, so the values sum to
    less than 1 unless the bins cover essentially all of the support.
    """
    if not bins:
        raise ValueError("no bins given")
    lo0 = min(lo for lo, _ in bins)
    hi_max = max(hi for _, hi in bins)
    y = np.arange(lo0, hi_max + 1)
    pmf = mixture_pmf(y, params)
    contiguous = all(bins[i][0] == bins[i - 1][1] + 1 for i in range(1, len(bins)))
    if contiguous and bins[-1][1] == hi_max:
        starts = np.fromiter((lo - lo0 for lo, _ in bins), dtype=np.intp, count=len(bins))
        return np.add.reduceat(pmf, starts)
    return np.array([pmf[lo - lo0 : hi - lo0 + 1].sum() for lo, hi in bins])


def _sample_ztp(rng: np.random.Generator, xi: float, size: int) -> np.ndarray:
    """Zero-truncated Poisson draws by inverse CDF over a grown pmf table."""
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    hi = max(8, int(np.ceil(xi + 12.0 * np.sqrt(xi) + 12.0)))
    while True:
        support = np.arange(1, hi + 1)
        cdf = np.cumsum(ztp_pmf(support, xi))
        if 1.0 - cdf[-1] < 1e-13:
            break
        hi *= 2
    u = rng.random(size) * cdf[-1]
    return 1 + np.searchsorted(cdf, u, side="right").astype(np.int64)


def _sample_ztnb(rng: np.random.Generator, a: float, b: float, size: int) -> np.ndarray:
    """Zero-truncated negative binomial: Gamma-Poisson composition, redrawing zeros."""
    out = np.zeros(size, dtype=np.int64)
    todo = np.arange(size)
    while todo.size:
        lam = rng.gamma(shape=a, scale=1.0 / b, size=todo.size)
        draws = rng.poisson(lam)
        ok = draws > 0
        out[todo[ok]] = draws[ok]
        todo = todo[~ok]
    return out


def sample(params: MixtureParams, n_sentences: int, seed: int) -> np.ndarray:
    """Draw i.i.d. sentence lengths from the mixture; deterministic in seed."""
    if n_sentences < 1:
        raise ValueError("n_sentences must be >= 1")
    rng = np.random.default_rng(seed)
    from_poisson = rng.random(n_sentences) < params.p
    out = np.zeros(n_sentences, dtype=np.int64)
    n_pois = int(from_poisson.sum())
    out[from_poisson] = _sample_ztp(rng, params.xi, n_pois)
    out[~from_poisson] = _sample_ztnb(rng, params.a, params.b, n_sentences - n_pois)
    return out
