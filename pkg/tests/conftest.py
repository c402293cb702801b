import pytest
from hypothesis import HealthCheck, settings

from slabcavity.dispersion import MaterialModel, builtin_material
from slabcavity.fresnel import Stack

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def al():
    return builtin_material("al_drude")


@pytest.fixture(scope="session")
def teflon():
    return builtin_material("teflon_fep")


@pytest.fixture(scope="session")
def vacuum():
    return MaterialModel.vacuum()


@pytest.fixture(scope="session")
def metal_stack(al, vacuum):
    return Stack(al, al, vacuum)


@pytest.fixture(scope="session")
def mixed_stack(al, teflon, vacuum):
    return Stack(al, teflon, vacuum)


@pytest.fixture(scope="session")
def ideal_stack(vacuum):
    p = MaterialModel.ideal_proxy(1e8)
    return Stack(p, p, vacuum)


ACCEPTANCE_LINES = []


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> bool:
    """Register one criterion's PASS/FAIL line for the end-of-run summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
