import time

import numpy as np
import pytest

from cantor_spectra import (
    CantorSpec,
    Grid,
    ModelParams,
    PiecewisePotential,
    assemble_hamiltonian,
    build_cantor_potential,
    sturm_count,
)

_SESSION_T0 = time.time()


def pytest_terminal_summary(terminalreporter):
    elapsed = time.time() - _SESSION_T0
    terminalreporter.write_line(
        f"suite wall time: {elapsed:.1f} s (acceptance threshold: 300 s)"
    )


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Pay the jit compilation cost once so timed tests measure math only."""
    pot = build_cantor_potential(CantorSpec(order=0))
    ham = assemble_hamiltonian(pot, ModelParams(mu=10.0), Grid(8))
    sturm_count(ham, 0.0)


def random_potential(rng, max_segments=8):
    """A random step potential: 1..max_segments segments, values in [-1, 1]."""
    m = int(rng.integers(1, max_segments + 1))
    while True:
        cuts = np.sort(rng.uniform(0.05, 0.95, m - 1))
        if cuts.size < 2 or np.min(np.diff(cuts)) > 1e-3:
            break
    bps = np.concatenate(([0.0], cuts, [1.0]))
    vals = rng.uniform(-1.0, 1.0, m)
    return PiecewisePotential(bps, vals)


@pytest.fixture
def make_random_potential():
    return random_potential
