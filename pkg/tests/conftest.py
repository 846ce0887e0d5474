import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scrambling_eur.models import build_hamiltonian, gibbs_state, reference_model
from scrambling_eur.operators import ProjectorFamily, eig_hermitian, embed_pauli
from scrambling_eur.weakmeas import DetectorModel, build_detector_grid


class ReferenceChain:
    """The eight-qubit chain at beta = 1 with the default detector."""

    def __init__(self):
        self.model = reference_model()
        self.h = build_hamiltonian(self.model)
        self.spectrum = eig_hermitian(self.h)
        self.rho = gibbs_state(self.spectrum, 1.0)
        self.v = embed_pauli("z", 0, 8)
        self.w = embed_pauli("z", 7, 8)
        self.proj_v = ProjectorFamily.from_decomposition(eig_hermitian(self.v))
        self.grid = build_detector_grid(DetectorModel())


@pytest.fixture(scope="session")
def chain():
    return ReferenceChain()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion as PASS/FAIL with a detail string, then assert it."""

    def record(name: str, ok: bool, detail: str):
        ACCEPTANCE_RESULTS[name] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
