import os

import pytest

from agentloop import experiments as exp


def _workers() -> int:
    return min(2, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def full_sweep():
    """Default-grid dwell/delay sweep, shared by the boundary and
    soundness criteria (about 220 runs, a few minutes)."""
    return exp.delay_dwell_sweep(exp.fig1_sweep_base(), workers=_workers())


@pytest.fixture(scope="session")
def stable_case():
    return exp.fully_coupled_case("stable")


@pytest.fixture(scope="session")
def unstable_case():
    return exp.fully_coupled_case("unstable")
