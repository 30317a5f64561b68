import numpy as np
import pytest

from nogp import three_level as tl
from nogp.systems import random_cyclic_system


def maxabs(a, b=0.0) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def random_hermitian(rng, d, scale=1.0):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (z + z.conj().T)


def three_level_case(theta=1.1, vartheta=0.4, shape="const"):
    p = tl.ThreeLevelParams.from_gate_angles(theta, vartheta, shape)
    return p, tl.build_hamiltonian(p), tl.spectrum(p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=tl.PULSE_SHAPES)
def golden(request):
    return three_level_case(1.1, 0.4, request.param)


@pytest.fixture(scope="session")
def cyclic_systems():
    rng = np.random.default_rng(7)
    return [random_cyclic_system(rng) for _ in range(5)]


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def report(request):
    """Record one acceptance line; the terminal summary prints them in criterion order."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, ok, detail):
        lines[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
