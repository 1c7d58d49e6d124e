"""Collects per-criterion outcomes of tests marked ``criterion`` and prints them."""

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "passed": True, "notes": []})
    entry["passed"] = entry["passed"] and rep.passed
    entry["notes"].extend(v for k, v in item.user_properties if k == "detail")


@pytest.fixture
def detail(request):
    """Attach a note to the criterion line of the current test."""
    def add(message: str) -> None:
        request.node.user_properties.append(("detail", message))
    return add


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"    {note}")
