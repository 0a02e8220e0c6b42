import numpy as np
import pytest

from rdpersuasion.core import Sample

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def record(label, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}  {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20251018)


def make_sample(w, y=None, d=None, cluster=None, cutoff=0.0, rng=None):
    """Sample from arrays; y defaults to random coin flips."""
    w = np.asarray(w, dtype=float)
    if y is None:
        y = (rng or np.random.default_rng(0)).integers(0, 2, len(w))
    return Sample.from_arrays(y, w, d, cluster, cutoff)
