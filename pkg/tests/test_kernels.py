"""Compiled and pure-Python replay kernels agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fifarank import kernels

pytestmark = pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")


def _games(seed, M, T):
    rng = np.random.default_rng(seed)
    home = rng.integers(0, M, T)
    away = (home + rng.integers(1, M, T)) % M
    return rng, home, away


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(0, 80))
def test_fifa_backends_agree(seed, M, T):
    rng, home, away = _games(seed, M, T)
    y = rng.choice([0.0, 0.5, 1.0, 0.75], T)
    step = rng.choice([5.0, 10.0, 35.0, 60.0], T)
    knockout = rng.random(T) < 0.3
    out = {}
    for name in ("python", "compiled"):
        theta = np.linspace(1000, 1800, M)
        z, dh, da = kernels.fifa_replay(theta, home, away, y, 1 - y, step, knockout, 600.0, backend=name)
        out[name] = (theta, z, dh, da)
    for a, b in zip(out["python"], out["compiled"]):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(0, 80))
def test_davidson_backends_agree(seed, M, T):
    rng, home, away = _games(seed, M, T)
    b = (rng.random(T) < 0.6).astype(float)
    y = rng.choice([0.0, 0.5, 1.0], T)
    w = rng.uniform(0.5, 3, T)
    out = {}
    for name in ("python", "compiled"):
        theta = np.arange(M) * 20.0
        z, d = kernels.davidson_replay(theta, home, away, b, y, w, 35.0, 0.3, 0.9, 200.0, backend=name)
        out[name] = (theta, z, d)
    for a, c in zip(out["python"], out["compiled"]):
        np.testing.assert_allclose(a, c, rtol=1e-13, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(0, 80))
def test_skellam_backends_agree(seed, M, T):
    rng, home, away = _games(seed, M, T)
    b = (rng.random(T) < 0.6).astype(float)
    d = rng.integers(-4, 5, T)
    out = {}
    for name in ("python", "compiled"):
        theta = np.arange(M) * 15.0
        z, delta, bad = kernels.skellam_replay(theta, home, away, b, d, np.ones(T), 7.5, -0.1, 0.2, 300.0, backend=name)
        out[name] = (theta, z, delta, np.array([bad]))
    for a, c in zip(out["python"], out["compiled"]):
        np.testing.assert_allclose(a, c, rtol=1e-13, atol=1e-10)


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_skellam_overflow_index(backend):
    theta = np.array([0.0, 0.0])
    home = np.array([0, 0, 0])
    away = np.array([1, 1, 1])
    # a huge step sends the skill difference past the intensity cap at game 2
    z, delta, bad = kernels.skellam_replay(theta, home, away, np.zeros(3), np.array([40, 0, 0]), np.ones(3),
                                           1.0, 0.0, 0.0, 1.0, backend=backend)
    assert bad == 1
    assert len(z) == 1


def test_backend_selection():
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
