# Acceptance results are printed once per criterion at the end of the session.
ACCEPTANCE = {}


def record(n, name, passed, detail=""):
    ACCEPTANCE[(n, name)] = (bool(passed), detail)
    print(f"AC{n} {'PASS' if passed else 'FAIL'}  {name}  {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), (ok, detail) in sorted(ACCEPTANCE.items()):
        terminalreporter.write_line(f"AC{n:<2} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
