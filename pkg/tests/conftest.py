import numpy as np
import pytest


@pytest.fixture
def rng():
    """Counter-based generator so property tests are reproducible."""
    return np.random.Generator(np.random.Philox(20260816))


def hermitian_entries(rng, dim):
    m = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return 0.5 * (m + m.conj().T)


def complex_entries(rng, dim):
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
