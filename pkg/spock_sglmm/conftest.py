import pytest

from spock_sglmm.precisions import IcarFamily, LerouxFamily, ProperCarFamily


class TestConfig(object):
    """Parameters affecting all spatial model tests.

    These are essentially global variables used by py.test to modify aspects
    of the tests. We collect them in this class to provide a mini namespace
    and to avoid using the ``global`` keyword.
    """

    families = [IcarFamily(), ProperCarFamily(0.5), LerouxFamily(0.8)]


def pytest_addoption(parser):
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="Also run tests marked as slow (acceptance-scale studies).",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--slow"):
        return
    skip_slow = pytest.mark.skip(reason="slow test, use --slow to run it")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def pytest_generate_tests(metafunc):
    if "family" in metafunc.fixturenames:
        metafunc.parametrize(
            "family", TestConfig.families, ids=[f.name for f in TestConfig.families]
        )
