"""BPSK modulation over the AWGN channel and LLR demodulation.

Bit b maps to the symbol 1 - 2b; the receiver sees y = s + z with
z ~ N(0, sigma^2) per dimension and forms channel LLRs 2y / sigma^2.
Each frame draws its noise from an independent, reproducible stream.
"""

from __future__ import annotations

import math

import numpy as np


def ebno_to_sigma(ebno_db: float, rate: float) -> float:
    """Noise standard deviation for a payload rate at the given Eb/N0."""
    if rate <= 0.0:
        raise ValueError("rate must be positive")
    ebno = 10.0 ** (ebno_db / 10.0)
    return math.sqrt(1.0 / (2.0 * rate * ebno))


def modulate(bits: np.ndarray) -> np.ndarray:
    """BPSK mapping 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def frame_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one frame, reproducible for any frame order."""
    return np.random.Generator(np.random.Philox(key=seed + (index << 64)))


def add_noise(symbols: np.ndarray, sigma: float,
              rng: np.random.Generator) -> np.ndarray:
    return symbols + rng.normal(0.0, sigma, size=symbols.shape)


def llr_from_channel(y: np.ndarray, sigma: float) -> np.ndarray:
    """Channel LLRs log P(y|0)/P(y|1) = 2y / sigma^2."""
    return 2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma)


def hard_error_count(y: np.ndarray, codeword: np.ndarray) -> np.ndarray:
    """Number of positions where sign(y) disagrees with the sent codeword.

    y = 0 counts as a positive sign, i.e. a hard decision of bit 0.
    """
    hard = (np.asarray(y) < 0.0).astype(np.int8)
    diff = hard != np.asarray(codeword, dtype=np.int8)
    return diff.sum(axis=-1)
