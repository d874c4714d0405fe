import warnings

import mpmath
import pytest

from fracdecay.mlf import UnsupportedParameters


def ml_reference(alpha, delta, z):
    """Power series in extended precision; digits grow with ``|z|^(1/alpha)``."""
    r = abs(z) ** (1.0 / alpha)
    with mpmath.workdps(int(30 + r / 2.3 + 10)):
        a, d, zz = mpmath.mpf(alpha), mpmath.mpf(delta), mpmath.mpf(z)
        total = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k * mpmath.rgamma(a * k + d)
            total += term
            if k > 10 and abs(term) < mpmath.mpf(10) ** (-40) * max(abs(total), mpmath.mpf(10) ** -300):
                break
            k += 1
        return float(total)


@pytest.fixture
def ml_oracle():
    return ml_reference


@pytest.fixture(autouse=True)
def _quiet_unsupported():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnsupportedParameters)
        yield


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record and print one ``PASS``/``FAIL`` line for an acceptance criterion."""

    def report(name, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
