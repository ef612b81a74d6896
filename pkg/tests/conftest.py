"""Shared fixtures: the two reference models and their systems.

Session-scoped so the biorthogonal systems, transform tables and dense
grids are built once; everything downstream is read-only.
"""
import numpy as np
import pytest

from twomatrix import (
    KernelContext,
    ModelSpec,
    TransformEvaluator,
    build_system,
)


@pytest.fixture(scope="session")
def gaussian_model():
    return ModelSpec((0.0, 0.0, 0.5), (0.0, 0.0, 0.5), 0.5)


@pytest.fixture(scope="session")
def quartic_model():
    return ModelSpec((0.0, 0.0, 0.5, 0.0, 0.25), (0.0, 0.0, 0.0, 0.0, 0.25), 1.0)


@pytest.fixture(scope="session")
def skew_model():
    # odd sub-leading terms break the x -> -x symmetry; subleading
    # asymptotic coefficients are then generically nonzero
    return ModelSpec((0.0, 0.2, 0.5, 0.2, 0.25), (0.0, -0.1, 1.0, 0.1, 0.25), 0.7)


@pytest.fixture(scope="session")
def gaussian_system(gaussian_model):
    return build_system(gaussian_model, 10)


@pytest.fixture(scope="session")
def quartic_system(quartic_model):
    return build_system(quartic_model, 10)


@pytest.fixture(scope="session")
def gaussian_tev(gaussian_model, gaussian_system):
    return TransformEvaluator(gaussian_model, gaussian_system, memoize=True)


@pytest.fixture(scope="session")
def quartic_tev(quartic_model, quartic_system):
    return TransformEvaluator(quartic_model, quartic_system, memoize=True)


@pytest.fixture(scope="session")
def gaussian_ctx(gaussian_model, gaussian_system, gaussian_tev):
    def make(n):
        return KernelContext(gaussian_model, gaussian_system, gaussian_tev, n)

    return make


@pytest.fixture(scope="session")
def quartic_ctx(quartic_model, quartic_system, quartic_tev):
    def make(n):
        return KernelContext(quartic_model, quartic_system, quartic_tev, n)

    return make


@pytest.fixture(scope="session")
def both_models(gaussian_model, quartic_model):
    return {"gaussian": gaussian_model, "quartic": quartic_model}


def draw_sources(rng, i, j, k, l):
    """Random admissible sources: real numerator points, off-axis poles
    with |Im| in [0.5, 3]."""
    from twomatrix import SourceConfig

    return SourceConfig.make(
        rng.uniform(-2, 2, i),
        rng.uniform(-2, 2, j),
        rng.uniform(-2, 2, k) + 1j * rng.uniform(0.5, 3, k) * rng.choice([-1, 1], k),
        rng.uniform(-2, 2, l) + 1j * rng.uniform(0.5, 3, l) * rng.choice([-1, 1], l),
    )


def monic_hermite(n):
    """Coefficients (ascending) of the monic probabilists' Hermite poly."""
    polys = [np.array([1.0]), np.array([0.0, 1.0])]
    for k in range(1, n + 1):
        nxt = np.zeros(k + 2)
        nxt[1:] = polys[-1]
        nxt[: len(polys[-2])] -= k * polys[-2]
        polys.append(nxt)
    return polys[n]
