import warnings

import pytest

_CRITERIA: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")
    warnings.filterwarnings("ignore", message="beta_N \\* u_N")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    key = getattr(report, "_criterion", None)
    if key is None:
        return
    _CRITERIA.setdefault(key, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = f"{m.args[0]}. {m.args[1]}"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.split(".")[0])):
        ok = all(o == "passed" for o in _CRITERIA[key])
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}")
