import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentmix.corpus import LengthHistogram, bin_lengths
from sentmix.fit import (
    FitConfig,
    FitError,
    finite_difference_gradient,
    finite_difference_hessian,
    fit_min_chisq,
    fit_mle,
    fit_mle_raw,
    grouped_loglik,
    observed_information,
    pearson_residuals,
    predicted_counts,
    raw_loglik,
    transform,
    untransform,
)
from sentmix.model import MixtureParams, bin_probs, mixture_logpmf, sample

TD_PARAMS = MixtureParams(0.17, 9.45, 2.11, 0.16)


def perturbed(params, rng, scale=0.3):
    u = transform(params) + rng.normal(0.0, scale, size=4)
    return untransform(u)


class TestTransforms:
    @given(
        st.floats(min_value=1e-6, max_value=1 - 1e-6),
        st.floats(min_value=1e-4, max_value=1e3),
        st.floats(min_value=1e-4, max_value=1e3),
        st.floats(min_value=1e-4, max_value=1e3),
    )
    @settings(max_examples=200)
    def test_round_trip(self, p, xi, a, b):
        params = MixtureParams(p, xi, a, b)
        back = untransform(transform(params))
        for orig, rt in zip(params.as_tuple(), back.as_tuple()):
            assert rt == pytest.approx(orig, rel=1e-12)

    def test_transform_values(self):
        u = transform(MixtureParams(0.5, 1.0, 1.0, 1.0))
        np.testing.assert_allclose(u, np.zeros(4), atol=1e-15)


class TestGroupedLoglik:
    def test_single_bin(self):
        hist = LengthHistogram("x", ((1, 30, 50),))
        p1 = float(bin_probs(((1, 30),), TD_PARAMS)[0])
        assert grouped_loglik(hist, TD_PARAMS) == pytest.approx(50 * math.log(p1), rel=1e-12)

    def test_zero_count_bins_contribute_nothing(self, corpora):
        sh = corpora["Sh"]
        padded = LengthHistogram("pad", sh.bins + ((66, 70, 0), (71, 75, 0)))
        assert grouped_loglik(padded, TD_PARAMS) == pytest.approx(
            grouped_loglik(sh, TD_PARAMS), rel=1e-14
        )

    def test_minus_infinity_sentinel(self):
        # all weight on a Poisson so small its mass above the first bin underflows
        params = MixtureParams(1.0, 1e-300, 1.0, 1.0)
        hist = LengthHistogram("x", ((1, 5, 10), (6, 10, 3)))
        assert grouped_loglik(hist, params) == float("-inf")

    def test_count_scaling_doubles_differences(self, corpora):
        sh = corpora["Sh"]
        doubled = LengthHistogram("2sh", tuple((lo, hi, 2 * c) for lo, hi, c in sh.bins))
        rng = np.random.default_rng(3)
        for _ in range(5):
            t1, t2 = perturbed(TD_PARAMS, rng), perturbed(TD_PARAMS, rng)
            d1 = grouped_loglik(sh, t1) - grouped_loglik(sh, t2)
            d2 = grouped_loglik(doubled, t1) - grouped_loglik(doubled, t2)
            assert d2 == pytest.approx(2.0 * d1, rel=1e-9)

    def test_raw_loglik_matches_pointwise(self):
        lengths = [1, 4, 9, 9, 17, 33]
        expected = float(np.sum(mixture_logpmf(np.array(lengths), TD_PARAMS)))
        assert raw_loglik(lengths, TD_PARAMS) == pytest.approx(expected, rel=1e-14)

    def test_fit_mle_raw_optimizes_raw_likelihood(self):
        lengths = sample(TD_PARAMS, 30_000, seed=9).tolist()
        result = fit_mle_raw(lengths)
        assert result.converged
        assert raw_loglik(lengths, result.params) == pytest.approx(result.objective, rel=1e-12)
        assert result.objective >= raw_loglik(lengths, TD_PARAMS)


class TestFitMle:
    def test_local_optimality_spot_check(self, corpora, mle_fits):
        sh_fit = mle_fits["Sh"]
        best = grouped_loglik(corpora["Sh"], sh_fit.params)
        rng = np.random.default_rng(12345)
        for _ in range(100):
            assert best >= grouped_loglik(corpora["Sh"], perturbed(sh_fit.params, rng))

    def test_deterministic(self, corpora):
        r1 = fit_mle(corpora["Kr"])
        r2 = fit_mle(corpora["Kr"])
        assert r1.params == r2.params
        assert r1.objective == r2.objective
        np.testing.assert_array_equal(r1.observed_information, r2.observed_information)

    def test_converged_gradient_tolerance(self, mle_fits, minchisq_timed):
        fits, _ = minchisq_timed
        for result in list(mle_fits.values()) + list(fits.values()):
            assert result.converged
            assert result.gradient_norm < 1e-5 * max(1.0, abs(result.objective))

    def test_underdetermined_histogram_rejected(self):
        hist = LengthHistogram("x", ((1, 5, 10), (6, 10, 8), (11, 15, 3), (16, 20, 0), (21, 25, 0)))
        with pytest.raises(FitError, match="nonzero bins"):
            fit_mle(hist)

    def test_nonconvergence_carries_best_effort(self, corpora):
        config = FitConfig(gradient_tol=0.0)
        with pytest.raises(FitError) as excinfo:
            fit_mle(corpora["TD"], config)
        assert excinfo.value.best_effort is not None
        assert excinfo.value.best_effort.converged is False

    def test_sh_multimodality_flagged(self, mle_fits):
        # two regimes fit Sh: a tiny-rate spike at one-word sentences and a
        # bulk rate near 8.5; the fitter must report seeing both
        assert mle_fits["Sh"].n_distinct_optima > 1

    def test_parameter_recovery_synthetic(self):
        # bins must cover essentially all mass: truncating at 65 and dropping
        # the tail would bias the dispersion parameters by more than 3 se at
        # this sample size
        truth = TD_PARAMS
        lengths = sample(truth, 1_000_000, seed=2024)
        hist, dropped = bin_lengths(lengths.tolist(), 5, 400, label="synthetic")
        assert dropped == 0
        result = fit_mle(hist)
        info = result.observed_information
        se = np.sqrt(np.diag(np.linalg.inv(info)))
        delta = transform(result.params) - transform(truth)
        assert np.all(np.abs(delta) <= 3.0 * se), (delta, se)


class TestFitMinChisq:
    def test_unknown_variant(self, corpora):
        with pytest.raises(ValueError):
            fit_min_chisq(corpora["Sh"], variant="quadratic")

    def test_optimum_beats_generating_params(self):
        pred = 4000 * bin_probs(tuple((5 * i + 1, 5 * i + 5) for i in range(13)), TD_PARAMS)
        counts = np.round(pred).astype(int)
        bins = tuple((5 * i + 1, 5 * i + 5, int(c)) for i, c in enumerate(counts))
        hist = LengthHistogram("exact", bins)
        result = fit_min_chisq(hist)
        predicted = predicted_counts(hist, TD_PARAMS)
        at_truth = float(np.sum((counts - predicted) ** 2 / predicted))
        assert result.objective <= at_truth + 1e-9

    def test_paper_literal_variant_differs(self, corpora, minchisq_timed):
        fits, _ = minchisq_timed
        literal = fit_min_chisq(corpora["Sh"], variant="paper-literal")
        standard = fits["Sh"]
        assert literal.objective_label == "min_chisq_paper_literal"
        assert abs(literal.params.xi - standard.params.xi) > 0.5

    def test_cross_optimality(self, corpora, mle_fits, minchisq_timed):
        fits, _ = minchisq_timed
        for label in ("Sh", "Kr", "TD"):
            hist = corpora[label]
            mle, chisq = mle_fits[label], fits[label]
            assert mle.objective >= grouped_loglik(hist, chisq.params)
            table_at_mle = pearson_residuals(hist, mle.params)
            assert chisq.objective <= table_at_mle.chi_squared + 1e-9


class TestPredictedCountsAndResiduals:
    def test_doubling_total_doubles_predictions(self, corpora):
        sh = corpora["Sh"]
        doubled = LengthHistogram("2sh", tuple((lo, hi, 2 * c) for lo, hi, c in sh.bins))
        np.testing.assert_allclose(
            predicted_counts(doubled, TD_PARAMS),
            2.0 * predicted_counts(sh, TD_PARAMS),
            rtol=1e-14,
        )

    def test_degenerate_mixture_mass_in_first_bin(self, corpora):
        params = MixtureParams(1.0, 0.01, 1.0, 1.0)
        pred = predicted_counts(corpora["Sh"], params)
        assert pred[0] == pytest.approx(corpora["Sh"].total, rel=1e-4)
        assert np.all(pred[1:] < 1e-4 * pred[0])

    def test_chi_squared_equals_objective(self, corpora, minchisq_timed):
        fits, _ = minchisq_timed
        for label, result in fits.items():
            table = pearson_residuals(corpora[label], result.params)
            assert table.chi_squared == pytest.approx(result.objective, rel=1e-9)

    def test_residual_definition(self, corpora, minchisq_timed):
        fits, _ = minchisq_timed
        sh = corpora["Sh"]
        table = pearson_residuals(sh, fits["Sh"].params)
        pred = predicted_counts(sh, fits["Sh"].params)
        for row, p, (_, _, c) in zip(table.rows, pred, sh.bins):
            assert row[4] == pytest.approx((c - p) / math.sqrt(p), rel=1e-12)

    def test_degrees_of_freedom_floor(self):
        hist = LengthHistogram("x", ((1, 5, 5), (6, 10, 5), (11, 15, 5)))
        table = pearson_residuals(hist, TD_PARAMS)
        assert table.degrees_of_freedom == 1

    def test_model_excluding_observed_bin_raises(self):
        params = MixtureParams(1.0, 1e-300, 1.0, 1.0)
        hist = LengthHistogram("x", ((1, 5, 10), (6, 10, 3)))
        with pytest.raises(ValueError, match="excludes observed bin"):
            pearson_residuals(hist, params)

    def test_residuals_vanish_as_counts_approach_predictions(self, corpora):
        sh = corpora["Sh"]
        counts = np.round(predicted_counts(sh, TD_PARAMS)).astype(int)
        hist = LengthHistogram("r", tuple((lo, hi, int(c)) for (lo, hi, _), c in zip(sh.bins, counts)))
        table = pearson_residuals(hist, TD_PARAMS)
        # counts differ from this histogram's own predictions only by the
        # rounding (<= 0.5 per bin) plus the total shift it induced
        pred = predicted_counts(hist, TD_PARAMS)
        shift = abs(sh.total - hist.total)
        probs = pred / hist.total
        for row, p, q in zip(table.rows, pred, probs):
            assert abs(row[4]) <= (0.5 + shift * q) / math.sqrt(p) + 1e-12


class TestDerivativeHelpers:
    def test_gradient_on_quadratic(self):
        A = np.array([[3.0, 0.4, 0.0, 0.1], [0.4, 2.0, 0.2, 0.0],
                      [0.0, 0.2, 1.5, 0.3], [0.1, 0.0, 0.3, 4.0]])
        x0 = np.array([0.3, -0.2, 0.8, 0.1])
        f = lambda x: 0.5 * float(x @ A @ x)
        np.testing.assert_allclose(finite_difference_gradient(f, x0), A @ x0, atol=1e-6)

    def test_hessian_on_quadratic(self):
        A = np.array([[3.0, 0.4, 0.0, 0.1], [0.4, 2.0, 0.2, 0.0],
                      [0.0, 0.2, 1.5, 0.3], [0.1, 0.0, 0.3, 4.0]])
        f = lambda x: 0.5 * float(x @ A @ x)
        # near the origin the function values are O(h^2), so cancellation noise
        # vanishes and the second differences are exact for a quadratic
        H = finite_difference_hessian(f, np.zeros(4))
        np.testing.assert_allclose(H, A, atol=1e-6)
        np.testing.assert_array_equal(H, H.T)
        # at a generic point roundoff of the O(1) function values enters at
        # ulp(f)/h^2 ~ 1e-5, which bounds the achievable accuracy
        g = lambda x: 0.5 * float(x @ A @ x) - 1.7
        H2 = finite_difference_hessian(g, np.array([0.5, 1.0, -0.3, 0.2]))
        np.testing.assert_allclose(H2, A, atol=2e-4)


class TestObservedInformation:
    def test_scales_linearly_with_counts(self, corpora, mle_fits):
        sh = corpora["Sh"]
        params = mle_fits["Sh"].params
        doubled = LengthHistogram("2sh", tuple((lo, hi, 2 * c) for lo, hi, c in sh.bins))
        info1 = observed_information(sh, params)
        info2 = observed_information(doubled, params)
        np.testing.assert_allclose(info2, 2.0 * info1, rtol=1e-6)

    def test_positive_definite_at_synthetic_mle(self):
        lengths = sample(TD_PARAMS, 1_000_000, seed=77)
        hist, _ = bin_lengths(lengths.tolist(), 5, 65, label="synthetic")
        result = fit_mle(hist)
        eigenvalues = np.linalg.eigvalsh(result.observed_information)
        assert np.all(eigenvalues > 0.0)

    def test_symmetric(self, corpora, mle_fits):
        info = observed_information(corpora["TD"], mle_fits["TD"].params)
        np.testing.assert_array_equal(info, info.T)

    def test_warns_when_not_positive_definite(self, corpora):
        # far from any optimum the curvature has mixed signs
        bad = MixtureParams(0.9, 30.0, 0.3, 2.0)
        with pytest.warns(UserWarning, match="not positive definite"):
            observed_information(corpora["Sh"], bad)


class TestJsonShapes:
    def test_fit_result_json(self, mle_fits):
        payload = mle_fits["TD"].to_json_dict()
        assert set(payload["params"]) == {"p", "xi", "a", "b"}
        assert payload["objective_label"] == "grouped_loglik"
        assert len(payload["observed_information"]) == 4
        assert all(len(row) == 4 for row in payload["observed_information"])

    def test_residual_table_json(self, corpora, minchisq_timed):
        fits, _ = minchisq_timed
        table = pearson_residuals(corpora["Kr"], fits["Kr"].params)
        payload = table.to_json_dict()
        assert len(payload["rows"]) == 13
        assert set(payload["rows"][0]) == {"lo", "hi", "observed", "predicted", "residual"}
        assert payload["degrees_of_freedom"] == 8
