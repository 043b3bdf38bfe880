"""Successive-cancellation kernel operations.

The check-node update uses the min-sum form, the variable-node update the
exact form. Zero LLRs take the positive sign everywhere so that ties decode
to bit 0.
"""

from __future__ import annotations

import numpy as np


def f_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Check-node update: sign(a) * sign(b) * min(|a|, |b|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sign = np.where((a < 0) != (b < 0), -1.0, 1.0)
    return sign * np.minimum(np.abs(a), np.abs(b))


def g_fun(a: np.ndarray, b: np.ndarray, bit: np.ndarray) -> np.ndarray:
    """Variable-node update: b + (1 - 2*bit) * a for a decided partial sum."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return b + (1.0 - 2.0 * np.asarray(bit)) * a


def hard_decision(llr: np.ndarray) -> np.ndarray:
    """Bit estimate (1 - sign(llr)) / 2 with sign(0) = +1."""
    return (np.asarray(llr) < 0).astype(np.int8)


def pm_update(pm: np.ndarray, llr: np.ndarray, decision: np.ndarray) -> np.ndarray:
    """Add |llr| to the path metric where the decision opposes the LLR sign."""
    penalize = np.asarray(decision).astype(bool) != (np.asarray(llr) < 0)
    return np.asarray(pm, dtype=np.float64) + np.where(penalize, np.abs(llr), 0.0)
