import pytest

from motortherm.model import EC4POLE_22_90W, params_from_spec


@pytest.fixture
def ec4():
    return params_from_spec(EC4POLE_22_90W, 30.0)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
