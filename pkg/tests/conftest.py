"""Shared helpers for the test suite."""
import numpy as np
import pytest

from mdiqct.qmath import PureState


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240901)


def random_pure_state(rng: np.random.Generator) -> PureState:
    """Haar-ish random qubit state with complex amplitudes."""
    raw = rng.normal(size=4)
    amp = raw[:2] + 1j * raw[2:]
    amp = amp / np.linalg.norm(amp)
    return PureState(complex(amp[0]), complex(amp[1]))


def assert_within_sigmas(observed: float, expected: float, stderr: float, sigmas: float = 3.0):
    """Normal-approximation gate used for every Monte Carlo comparison."""
    assert abs(observed - expected) <= sigmas * stderr, (
        f"|{observed} - {expected}| = {abs(observed - expected)} "
        f"exceeds {sigmas} x {stderr}"
    )
