import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose the call-phase report to fixture teardowns, so the acceptance
    # tests can print their one-line verdicts with the right status
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)
