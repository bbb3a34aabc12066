import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion number and title")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    k, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    item.config.stash[_RESULTS][k] = (report.passed, title, detail)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        passed, title, detail = results[k]
        line = f"{'PASS' if passed else 'FAIL'} criterion {k}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
