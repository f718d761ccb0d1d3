"""Synthetic test signals: a single damped exponential and an MRS-like sum.

Noise is circularly symmetric complex Gaussian with ``E[g g^*] = I``, drawn
from numpy's PCG64 generator, so a seed fixes the signal on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MRS_AMPLITUDES = np.array([75, 150, 75, 150, 150, 150, 150, 150, 1400, 60, 500], dtype=float)
MRS_FREQUENCIES = np.array([-86, -70, -54, 152, 168, 292, 308, 360, 440, 490, 530], dtype=float)
MRS_DAMPING = np.array([50, 50, 50, 50, 50, 50, 50, 25, 285.7, 25, 200], dtype=float)
MRS_PHASE = np.exp(1j * 135 * np.pi / 180)
MRS_NOISE_SCALE = 15.0
TOY_OMEGA = -0.01
TOY_AMPLITUDE = 1.0


@dataclass(frozen=True)
class SampledSignal:
    """Measurements ``y`` together with the parameters that generated them."""

    y: np.ndarray
    omega: np.ndarray
    a: np.ndarray
    noise_scale: float
    seed: int | None

    @property
    def n(self):
        return self.y.size

    @property
    def p(self):
        return self.omega.size

    @property
    def clean(self):
        j = np.arange(self.n)[:, None]
        return np.exp(j * self.omega[None, :]) @ self.a


def complex_noise(rng, n):
    """Circular complex standard normal samples (real and imaginary variance 1/2)."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)


def mrs_sampling_interval(n):
    return 256.0 / (3.0 * n) * 1e-3


def mrs_truth(n):
    """Discrete frequencies and amplitudes of the MRS model sampled ``n`` times."""
    dt = mrs_sampling_interval(n)
    omega = (2j * np.pi * MRS_FREQUENCIES - MRS_DAMPING) * dt
    return omega, MRS_AMPLITUDES * MRS_PHASE


def generate_mrs(n, seed=0, noise_scale=MRS_NOISE_SCALE):
    """Eleven damped exponentials plus ``noise_scale`` times complex noise."""
    omega, a = mrs_truth(n)
    j = np.arange(n, dtype=float)
    y = np.zeros(n, dtype=complex)
    for w, c in zip(omega, a):
        y += c * np.exp(w * j)
    if noise_scale:
        y = y + noise_scale * complex_noise(np.random.default_rng(seed), n)
    return SampledSignal(y, omega, a, float(noise_scale), seed)


def generate_toy(n=1000, seed=0, noise_var=0.01):
    """``exp(-0.01 j)`` plus noise with complex variance ``noise_var`` per entry."""
    if n < 10:
        raise ValueError("n must be at least 10")
    omega = np.array([TOY_OMEGA + 0j])
    a = np.array([TOY_AMPLITUDE + 0j])
    y = np.exp(TOY_OMEGA * np.arange(n, dtype=float)) + 0j
    if noise_var:
        y = y + np.sqrt(noise_var) * complex_noise(np.random.default_rng(seed), n)
    return SampledSignal(y, omega, a, float(np.sqrt(noise_var)), seed)
