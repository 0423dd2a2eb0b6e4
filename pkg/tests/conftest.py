"""Shared builders for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from relfock import (
    FockSpace,
    ModeSpec,
    build_fock_space,
    random_isometry_embedding,
    random_state_vector,
)


def qudit_space(dim: int, label: str, space_id: str | None = None,
                charges=()) -> FockSpace:
    """A d-dimensional space realized as one boson mode with cutoff d-1."""
    return build_fock_space(
        [ModeSpec(label, "boson", dim - 1, charges)], space_id or f"qudit-{label}"
    )


def random_pair(seed: int, max_side: int = 8, max_ref: int = 64):
    """A random (state, embedding) pair with dim(R) possibly exceeding the
    image dimension, so part of the state lies outside the image."""
    rng = np.random.Generator(np.random.PCG64(seed))
    dim_a = int(rng.integers(2, max_side + 1))
    dim_b = int(rng.integers(1, max(2, max_ref // dim_a) + 1))
    dim_b = min(dim_b, max_ref // dim_a)
    dim_img = dim_a * dim_b
    dim_r = int(rng.integers(dim_img, max_ref + 1))
    space_a = qudit_space(dim_a, "a", f"A{seed}")
    space_b = qudit_space(dim_b, "b", f"B{seed}")
    space_r = qudit_space(dim_r, "r", f"R{seed}")
    embedding = random_isometry_embedding(space_a, space_b, space_r, seed=seed + 1)
    psi = random_state_vector(space_r, seed=seed + 2)
    return psi, embedding


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240811))
