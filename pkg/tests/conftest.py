import sqlite3

import pytest

import media


@pytest.fixture
def memdb():
    db = sqlite3.connect(":memory:")
    yield db
    db.close()


@pytest.fixture
def desk(tmp_path):
    return media.desk_corpus(tmp_path / "desk")


# -- acceptance summary ---------------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    # parametrized criteria pass only if every case passes
    passed = report.passed and _CRITERIA.get(number, (True,))[0]
    _CRITERIA[number] = (passed, title, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, title, detail = _CRITERIA[number]
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
