"""Random channel generation for the Monte-Carlo experiments.

Two models: i.i.d. Rayleigh fading and a clustered geometric model built
from uniform-linear-array steering vectors with half-wavelength spacing.
Both are normalized so each user's expected channel energy equals the
antenna count. Generation is deterministic given (seed, dimensions, params),
with counter-based substreams for reproducible parallel trials.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_PATHS = 5


@dataclass(frozen=True)
class GeometricChannelParams:
    """Clustered geometric model parameters: number of propagation paths."""

    n_paths: int = DEFAULT_PATHS

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("path count must be at least 1")


@dataclass(frozen=True)
class ChannelMatrix:
    """K x N user channel matrix (row k is user k's conjugated channel)."""

    h: np.ndarray
    model: str
    seed: int | None = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        object.__setattr__(self, "h", h)
        if h.ndim != 2:
            raise ValueError("channel must be a K x N matrix")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel entries must be finite")

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.h.shape[1]


def substream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for the given substream path.

    Distinct paths under the same root seed yield statistically independent,
    reproducible streams, so parallel trial fan-out is deterministic.
    """
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(path)))
    )


def _as_generator(rng) -> tuple[np.random.Generator, int | None]:
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    return np.random.default_rng(rng), seed


def array_response(angle: float, n_antennas: int) -> np.ndarray:
    """Unit-norm steering vector of a half-wavelength uniform linear array."""
    phases = np.pi * np.arange(n_antennas) * np.sin(angle)
    return np.exp(1j * phases) / np.sqrt(n_antennas)


def rayleigh_channel(n_antennas: int, n_users: int, rng) -> ChannelMatrix:
    """Draw H with i.i.d. standard circularly-symmetric Gaussian entries."""
    gen, seed = _as_generator(rng)
    shape = (n_users, n_antennas)
    h = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2)
    return ChannelMatrix(h, "rayleigh", seed)


def clustered_channel(
    n_antennas: int,
    n_users: int,
    params: GeometricChannelParams,
    rng,
) -> ChannelMatrix:
    """Draw a clustered geometric channel: L random-gain paths per user.

    h_k = sqrt(N/L) * sum_l gain_kl * a(angle_kl) with gains CN(0,1) and
    departure angles uniform on [0, 2pi), independent per user and path.
    Each user draws from its own spawned substream.
    """
    ell = params.n_paths
    gen, seed = _as_generator(rng)
    h = np.empty((n_users, n_antennas), dtype=complex)
    for k, child in enumerate(gen.spawn(n_users)):
        gains = (
            child.standard_normal(ell) + 1j * child.standard_normal(ell)
        ) / np.sqrt(2)
        angles = child.uniform(0.0, 2.0 * np.pi, size=ell)
        steer = np.stack([array_response(a, n_antennas) for a in angles], axis=1)
        h[k] = np.sqrt(n_antennas / ell) * (steer @ gains)
    return ChannelMatrix(h, "clustered", seed)
