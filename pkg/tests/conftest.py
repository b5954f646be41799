import pytest


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props:
                continue
            if rep.when != "call" and outcome != "error":
                continue
            rows.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL", props.get("measured", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")

    def key(row):
        head = row[0].split()[0]
        digits = "".join(ch for ch in head if ch.isdigit())
        return int(digits), head

    for name, status, measured in sorted(rows, key=key):
        line = f"{status}  criterion {name}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)


@pytest.fixture
def criterion(record_property):
    """Tag an acceptance test and attach the measured values to the summary."""

    def tag(name, measured=""):
        record_property("criterion", name)
        if measured:
            record_property("measured", measured)

    return tag
