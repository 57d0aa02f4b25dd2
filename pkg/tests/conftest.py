import pytest

from folhodge.catalog import make_carriere, make_flat_torus

# criterion number -> (description, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(scope="session")
def carriere():
    return make_carriere(n=64)


@pytest.fixture(scope="session")
def carriere32():
    return make_carriere(n=32)


@pytest.fixture(scope="session")
def flat16():
    return make_flat_torus(q=2, n=16)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        desc, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {desc}  [{detail}]")
