"""Seeded random operators, states and phase assignments for checks and tests."""

from __future__ import annotations

import numpy as np

from .operators import HeisenbergState, Observable, ProjectorFamily, Spectrum


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase correction of Mezzadri."""
    rng = rng_from(rng)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng) -> np.ndarray:
    rng = rng_from(rng)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


def random_spectrum(n: int, rng, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Sorted, well-separated random eigenvalues."""
    rng = rng_from(rng)
    while True:
        vals = np.sort(rng.uniform(low, high, n))
        if n < 2 or np.min(np.diff(vals)) > 1e-3:
            return vals


def random_observable(n: int, rng, values=None) -> Observable:
    rng = rng_from(rng)
    vals = random_spectrum(n, rng) if values is None else np.asarray(values, dtype=float)
    return Observable(Spectrum(tuple(vals)), ProjectorFamily.from_basis(random_unitary(n, rng)))


def random_phases(shape, rng) -> np.ndarray:
    return rng_from(rng).uniform(0.0, 2 * np.pi, shape)


def random_pure_state(n: int, rng) -> HeisenbergState:
    rng = rng_from(rng)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return HeisenbergState.pure(v)


def random_weights(n: int, rng) -> np.ndarray:
    w = rng_from(rng).dirichlet(np.ones(n))
    return w / w.sum()


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary DFT; its columns form a basis unbiased to the computational one."""
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
