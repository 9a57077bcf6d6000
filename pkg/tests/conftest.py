import math

import numpy as np
import pytest

from unruhqfi.params import ChannelScenario, ModelParams

SCENARIOS = list(ChannelScenario)


def draw_params(rng, scenario=None):
    return ModelParams(
        mu=float(rng.uniform(0, 0.5)),
        r=float(rng.uniform(0, math.pi / 4)),
        gamma_a=float(rng.uniform(0, 1)),
        gamma_b=float(rng.uniform(0, 1)),
        scenario=scenario if scenario is not None else SCENARIOS[int(rng.integers(4))],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


_CRITERIA: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_c"):
        return
    number = int(name[len("test_c"):].split("_")[0])
    _CRITERIA.setdefault(number, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status = "PASS" if all(_CRITERIA[number]) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}")
