import json
import pathlib

import pytest

from aiet.specfile import load_file

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture(scope="session")
def golden():
    return load_file(fixture_path("golden_d2.json"))


@pytest.fixture(scope="session")
def golden_stable():
    return load_file(fixture_path("golden_d2_stable.json"))


@pytest.fixture(scope="session")
def d3_central():
    return load_file(fixture_path("d3_central.json"))


@pytest.fixture(scope="session")
def d4_central():
    return load_file(fixture_path("d4_central.json"))


@pytest.fixture(scope="session")
def d4_central_stable():
    return load_file(fixture_path("d4_central_stable.json"))


@pytest.fixture(scope="session")
def d4_unstable():
    return load_file(fixture_path("d4_unstable.json"))


@pytest.fixture(scope="session")
def nonhyperbolic():
    return load_file(fixture_path("nonhyperbolic_d4.json"))


@pytest.fixture(scope="session")
def oracle_loops():
    with open(FIXTURES / "oracle_loops.json") as fh:
        return [tuple(entry) for entry in json.load(fh)]


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {status}")
