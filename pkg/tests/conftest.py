"""Shared fixtures and independent oracle helpers.

Oracles here must stay independent of the solver paths they check: closed
forms, direct enumeration, and finite differences only.
"""
from __future__ import annotations

import numpy as np
import pytest


def complex_gaussian(rng, shape, scale=None):
    """CN(0,1) entries (unit variance) unless an explicit scale is given."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.sqrt(2) if scale is None else z * scale


def random_unitary(rng, n):
    q, r = np.linalg.qr(complex_gaussian(rng, (n, n)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def orthogonal_rows_channel(rng, n, gains):
    """K x N channel with mutually orthogonal rows of squared norms ``gains``."""
    k = len(gains)
    q = np.linalg.qr(complex_gaussian(rng, (n, k)))[0]
    return np.sqrt(np.asarray(gains))[:, None] * q.conj().T


def waterfill_rate_bits(gains, power_budget, noise_var):
    """Closed-form optimum over parallel channels: water-fill then sum log2."""
    gains = np.asarray(gains, dtype=float)
    order = np.argsort(gains)[::-1]
    for active in range(gains.size, 0, -1):
        idx = order[:active]
        level = (power_budget + np.sum(noise_var / gains[idx])) / active
        p = level - noise_var / gains[idx]
        if np.all(p > 0):
            full = np.zeros(gains.size)
            full[idx] = p
            return float(np.sum(np.log2(1.0 + full * gains / noise_var)))
    return 0.0


def min_envelope_2x2(gram):
    """Closed-form minimal diagonal dominator for a 2x2 Hermitian PSD matrix.

    min p1+p2 s.t. diag(p) >= M is attained at p_i = M_ii + |M_12| (balance
    the Schur complement), giving the total M_11 + M_22 + 2 |M_12|.
    """
    return float(gram[0, 0].real + gram[1, 1].real + 2.0 * abs(gram[0, 1]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
