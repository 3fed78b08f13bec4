"""Shared fixtures: cached meshes and a seeded generator."""

from functools import lru_cache

import numpy as np
import pytest

from helmdg import build_hexagon_mesh, build_square_with_hole_mesh


@lru_cache(maxsize=32)
def hexagon(m: int):
    return build_hexagon_mesh(m)


@lru_cache(maxsize=8)
def square_hole(m: int):
    return build_square_with_hole_mesh(m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
