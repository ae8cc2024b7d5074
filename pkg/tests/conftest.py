import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_orthonormal(r: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish orthonormal r x r matrix (rotations and reflections)."""
    q, _ = np.linalg.qr(rng.standard_normal((r, r)))
    if rng.random() < 0.5:
        q[:, 0] = -q[:, 0]
    return q
