import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    n, title = mark.args
    props = dict(report.user_properties)
    if report.passed:
        status = props.get("status", "PASS")
    else:
        status = "FAIL"
    _RESULTS[n] = (title, status, props.get("detail", ""), report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS, key=lambda k: (isinstance(k, str), k)):
        title, status, detail, secs = _RESULTS[n]
        line = f"[{status}] {n:>2} {title} ({secs:.1f}s)"
        tr.write_line(line + (f": {detail}" if detail else ""))
