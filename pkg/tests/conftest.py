import pytest

import sentmix as sm


@pytest.fixture(scope="session")
def corpora():
    return sm.bundled_corpus()


@pytest.fixture(scope="session")
def mle_fits(corpora):
    return {label: sm.fit_mle(hist) for label, hist in corpora.items()}


@pytest.fixture(scope="session")
def minchisq_timed(corpora):
    """Standard-variant min-chisq fits of the three corpora, with wall time."""
    import time

    t0 = time.perf_counter()
    fits = {label: sm.fit_min_chisq(hist, variant="standard") for label, hist in corpora.items()}
    elapsed = time.perf_counter() - t0
    return fits, elapsed
