"""Online supervised tuning of the perturbation parameter theta.

Each successful flip retry yields one sample: the per-slot scores Q, their
theta-derivatives dQ, and the slot whose reversal cleared the CRC. The
scores pass through a softmin built on a truncated-Taylor exponential,
the mismatch with the one-hot target is a binary cross entropy, and theta
follows minibatch gradient descent with a power-of-two step until a fixed
update budget is spent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EPS = 1e-12


def exp_taylor(x: np.ndarray, terms: int = 3) -> np.ndarray:
    """Taylor series of exp truncated after the x^terms term, floored at 0.

    The floor keeps the result usable as an unnormalized probability; for
    strongly negative x the truncated polynomial goes negative and clips
    to exactly 0.
    """
    x = np.asarray(x, dtype=np.float64)
    acc = np.zeros_like(x)
    term = np.ones_like(x)
    acc += term
    for t in range(1, terms + 1):
        term = term * x / t
        acc += term
    return np.maximum(acc, 0.0)


def score_weights(Q: np.ndarray, terms: int = 3,
                  exact: bool = False) -> np.ndarray:
    """Unnormalized softmin weights exp(-Q), zero on non-finite scores."""
    Q = np.asarray(Q, dtype=np.float64)
    finite = np.isfinite(Q)
    safe = np.where(finite, Q, 0.0)
    phi = np.exp(-safe) if exact else exp_taylor(-safe, terms)
    return np.where(finite, phi, 0.0)


def softmin(Q: np.ndarray, terms: int = 3, exact: bool = False) -> np.ndarray:
    """Probability that each slot is the flip target, low scores favoured.

    Rows whose weights all vanish return all-zero rows rather than NaN.
    """
    phi = score_weights(Q, terms, exact)
    total = phi.sum(axis=-1, keepdims=True)
    return np.divide(phi, total, out=np.zeros_like(phi), where=total > 0)


def bce_loss(o_hat: np.ndarray, label: int) -> float:
    """Binary cross entropy of a softmin row against a one-hot target."""
    o_hat = np.asarray(o_hat, dtype=np.float64)
    o = np.zeros_like(o_hat)
    o[label] = 1.0
    return float(-(o * np.log(np.maximum(o_hat, EPS))
                   + (1.0 - o) * np.log(np.maximum(1.0 - o_hat, EPS))).sum())


def loss_gradient(Q: np.ndarray, dQ: np.ndarray, label: int,
                  terms: int = 3, exact: bool = False) -> float:
    """d(BCE)/d(theta) through the softmin.

    Uses dphi_k = -phi_k * dQ_k, i.e. the truncated exponential is treated
    as its own derivative the way the exact one would be. Slots with zero
    weight or saturated probability contribute nothing.
    """
    phi = score_weights(Q, terms, exact)
    total = phi.sum()
    if total <= 0.0:
        return 0.0
    o_hat = phi / total
    dQ = np.where(np.isfinite(Q), np.asarray(dQ, dtype=np.float64), 0.0)
    dphi = -phi * dQ
    sum_dphi = dphi.sum()
    o = np.zeros_like(phi)
    o[label] = 1.0
    denom = (1.0 - o_hat) * phi
    num = (o_hat - o) * (dphi - o_hat * sum_dphi)
    good = denom > 0.0
    return float(np.divide(num, denom, out=np.zeros_like(num),
                           where=good).sum())


def init_theta(seed: int) -> float:
    """Deterministic uniform draw of the starting theta in [0, 1)."""
    rng = np.random.Generator(np.random.Philox(key=(seed << 64) | 0x7E7A))
    return float(rng.uniform())


@dataclass
class TrainerState:
    """Minibatch SGD over theta with a hard update budget.

    The step size is 2**-lr_shift per accumulated-gradient unit, i.e. a
    learning rate of batch * 2**-lr_shift spread over the batch.
    """
    theta: float
    lr_shift: int = 9
    batch: int = 32
    terms: int = 3
    update_cap: int = 50
    count: int = 0
    updates: int = 0
    grad_acc: float = 0.0
    history: list = field(default_factory=list)

    @property
    def frozen(self) -> bool:
        return self.updates >= self.update_cap

    def submit(self, Q: np.ndarray, dQ: np.ndarray, label: int) -> bool:
        """Feed one sample; returns True if it was accepted.

        Samples whose softmin weights all vanish carry no gradient signal
        and are discarded without consuming budget. After the update cap
        is reached, submissions are ignored entirely.
        """
        if self.frozen:
            return False
        if score_weights(Q, self.terms).sum() <= 0.0:
            return False
        self.grad_acc += loss_gradient(Q, dQ, label, self.terms)
        self.count += 1
        if self.count % self.batch == 0:
            self.theta -= (2.0 ** -self.lr_shift) * self.grad_acc
            self.grad_acc = 0.0
            self.updates += 1
            self.history.append(self.theta)
        return True

    def submit_batch(self, samples) -> int:
        """Submit a TrainingBatch in frame order; returns accepted count."""
        n = 0
        for i in np.argsort(samples.frame, kind="stable"):
            n += self.submit(samples.Q[i], samples.dQ[i],
                             int(samples.label[i]))
        return n
