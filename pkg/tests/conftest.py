import numpy as np
import pytest

from qdense.quantum import SchmidtSpectrum


def random_spectrum(d, rng, min_weight=0.0):
    """Spectrum with uniformly random weights, optionally floored at ``min_weight``."""
    while True:
        w = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        if w[-1] >= min_weight:
            return SchmidtSpectrum(np.sqrt(w / w.sum()))


def random_complex(shape, rng):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20061)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
