import math

import numpy as np
import pytest
from scipy.special import gamma

from friedrichs.form_factor import FormFactor
from friedrichs.fredholm import ModelParams, mu0
from friedrichs.torus_quadrature import DEFAULT_SPEC


def watson_lambda_origin() -> float:
    """Lambda(0, 0) for phi = 1 from the simple-cubic Watson integral.

    W_s = sqrt(6)/(32 pi^3) Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24) is
    (1/pi^3) int_{[0,pi]^3} 3 / (3 - sum cos q_i) dq, and u(0, q) = 2 (3 - sum cos q_i),
    so Lambda(0, 0) = (2 pi)^3 W_s / 6.
    """
    ws = math.sqrt(6.0) / (32.0 * math.pi**3) * gamma(1 / 24) * gamma(5 / 24) * gamma(7 / 24) * gamma(11 / 24)
    return (2.0 * math.pi) ** 3 * ws / 6.0


@pytest.fixture(scope="session")
def quad():
    return DEFAULT_SPEC


@pytest.fixture(scope="session")
def ones():
    return FormFactor.constant(1.0)


@pytest.fixture(scope="session")
def eps_ff():
    return FormFactor.epsilon_type()


@pytest.fixture(scope="session")
def crit_ones(ones, quad):
    return ModelParams(mu0(ones, quad), ones)


@pytest.fixture(scope="session")
def crit_eps(eps_ff, quad):
    return ModelParams(mu0(eps_ff, quad), eps_ff)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        outcome = "PASS" if _acceptance[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{outcome}  {name}")
