import pytest

ACCEPTANCE: dict = {}
PROPERTY_OUTCOMES: dict = {}


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so it can reuse the property-suite outcomes
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py"))


def pytest_runtest_logreport(report):
    if "test_properties.py::" in report.nodeid and (report.when == "call" or report.failed):
        PROPERTY_OUTCOMES[report.nodeid] = report.passed and PROPERTY_OUTCOMES.get(report.nodeid, True)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for the criterion number given by the test's marker."""
    number = request.node.get_closest_marker("criterion").args[0]
    notes: list = []
    yield notes
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}"
    if notes:
        line += "  " + "; ".join(notes)
    ACCEPTANCE[number] = line
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
