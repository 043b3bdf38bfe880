"""Weighted complexity, time-step latency, and memory accounting.

Operation weights: additions and comparisons cost 1 unit, multiplications
3, divisions 24. Latency counts one time step per f- or g-vector stage and
per path-metric update batch, ceil(log2 M) per sort of M elements, and
nothing for hard decisions or binary operations.

Charging schedule (fixed so results are auditable):
  f kernel            1 compare per element per active path
  g kernel            1 add per element per active path
  metric penalty      1 add per candidate whose metric changes
  node metric sums    1 add per element per active path (2 per element
                      for the repetition node's two hypotheses)
  sorts               mergesort_cost(M) compares, ceil(log2 M) steps
  score recording     per split: 1 compare (rectifier) and 2 adds (forked
                      score) per active path, plus L-1 compares for the
                      discarded-candidate minimum; sign-only slots charge
                      the same plus the minimum over active paths
  derivative counters saturating 2-bit updates are free
  soft selection      exp series: `terms` mults, `terms` adds, 1 compare;
                      divisions appear only in the softmin normalization
                      and the per-slot gradient terms (24 units each)
  CRC checks          free (syndrome hardware is out of scope)

The conditional add of a positive rectifier output, the parity penalty,
and hard-flip metric adjustments are data dependent; the decode engine
counts those per frame and the harness adds them to these static counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .nodes import (BRANCH, RATE0, RATE1, REP, SPC, Node, split_budget)

WEIGHT_MULT = 3
WEIGHT_DIV = 24


def ceil_log2(m: int) -> int:
    return (m - 1).bit_length() if m > 1 else 0


def mergesort_cost(m: int) -> int:
    """Worst-case comparison count of merge sort."""
    if m <= 1:
        return 0
    c = ceil_log2(m)
    if m == 1 << c:
        return m * c
    return m * c - (1 << c) + 1


@dataclass
class OpCounts:
    adds: int = 0
    compares: int = 0
    mults: int = 0
    divs: int = 0

    @property
    def weighted(self) -> int:
        return (self.adds + self.compares + WEIGHT_MULT * self.mults
                + WEIGHT_DIV * self.divs)

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(self.adds + other.adds,
                        self.compares + other.compares,
                        self.mults + other.mults,
                        self.divs + other.divs)

    def scaled(self, k: int) -> "OpCounts":
        return OpCounts(self.adds * k, self.compares * k,
                        self.mults * k, self.divs * k)


@dataclass
class CostLedger:
    """Per-frame running totals with a per-attempt breakdown."""
    adds: int = 0
    compares: int = 0
    mults: int = 0
    divs: int = 0
    time_steps: int = 0
    attempts: list = field(default_factory=list)

    _KINDS = ("add", "compare", "mult", "div")

    def charge(self, kind: str, count: int = 1) -> None:
        if kind not in self._KINDS:
            raise ValueError(f"unknown op kind {kind!r}")
        if count < 0:
            raise ValueError("count must be non-negative")
        if kind == "add":
            self.adds += count
        elif kind == "compare":
            self.compares += count
        elif kind == "mult":
            self.mults += count
        else:
            self.divs += count

    def charge_counts(self, counts: OpCounts) -> None:
        self.adds += counts.adds
        self.compares += counts.compares
        self.mults += counts.mults
        self.divs += counts.divs

    def tick(self, steps: int = 1) -> None:
        if steps < 0:
            raise ValueError("steps must be non-negative")
        self.time_steps += steps

    def close_attempt(self) -> None:
        self.attempts.append(self.weighted_total)

    @property
    def weighted_total(self) -> int:
        return (self.adds + self.compares + WEIGHT_MULT * self.mults
                + WEIGHT_DIV * self.divs)


def attempt_profile(root: Node, L: int, record: bool) -> tuple[OpCounts, int]:
    """Static op counts and time steps of one decode pass.

    Mirrors the engine's schedule with the logical active-path count
    (1, 2, 4, ... capped at L); data-dependent ops are excluded and
    counted at run time instead.
    """
    ops = OpCounts()
    ticks = 0
    splits_done = 0
    k = 0
    kmask = (L - 1).bit_length()

    def n_eff() -> int:
        return min(1 << min(splits_done, 30), L)

    def do_split(cand_adds_per_lane: int) -> None:
        nonlocal splits_done, k, ticks
        n = n_eff()
        ops.adds += cand_adds_per_lane * n
        ticks += 1
        prune = 2 * n > L
        if record:
            ops.compares += n
            ops.adds += 2 * n
            if prune and k >= kmask:
                ops.compares += L - 1
        if prune:
            ops.compares += mergesort_cost(2 * L)
            ticks += ceil_log2(2 * L)
        splits_done += 1
        k += 1

    def do_signs(count: int) -> None:
        nonlocal k
        if record and count > 0:
            n = n_eff()
            ops.compares += (2 * n - 1) * count
            ops.adds += 2 * n * count
        k += count

    def walk(node: Node) -> None:
        nonlocal ticks
        m = node.size
        if node.kind == BRANCH:
            half = m // 2
            ops.compares += half * n_eff()
            ticks += 1
            walk(node.left)
            ops.adds += half * n_eff()
            ticks += 1
            walk(node.right)
            return
        if node.kind == RATE0:
            ops.adds += m * n_eff()
            if m > 1:
                ticks += 1
            return
        tau = split_budget(node, L)
        if node.kind == REP:
            ops.adds += 2 * m * n_eff()
            if tau == 1:
                do_split(cand_adds_per_lane=2)
            else:
                ops.adds += n_eff()
                do_signs(1)
            return
        if node.kind == RATE1:
            if m > 1 and (L > 1 or record):
                ops.compares += mergesort_cost(m) * n_eff()
                ticks += ceil_log2(m)
            for _ in range(tau):
                do_split(cand_adds_per_lane=1)
            do_signs(m - tau)
            return
        # single parity check
        ops.compares += mergesort_cost(m) * n_eff()
        ticks += ceil_log2(m)
        ticks += 1
        for _ in range(tau):
            do_split(cand_adds_per_lane=2)
        do_signs(m - 1 - tau)

    walk(root)
    if L > 1:
        ops.compares += L - 1
        ticks += ceil_log2(L)
    return ops, ticks


def rank_cost(width: int) -> tuple[OpCounts, int]:
    """Sorting the per-slot scores into a retry candidate list."""
    return OpCounts(compares=mergesort_cost(width)), ceil_log2(width)


def trainer_sample_cost(width: int, terms: int = 3) -> OpCounts:
    """Gradient evaluation for one training sample of `width` slots."""
    w = width
    return OpCounts(
        adds=terms * w + 5 * w - 2,
        compares=w,
        mults=(terms + 4) * w,
        divs=2 * w,
    )


def trainer_update_cost() -> OpCounts:
    """Applying one accumulated minibatch step to theta."""
    return OpCounts(adds=1, mults=1)


_MEMORY_KINDS = ("scl", "fscl", "sclf", "ssclf", "fast-sclf")


def memory_model(kind: str, N: int, K: int, C: int, L: int,
                 b_f: int = 32, b_i: int = 2, o_bits: int = 1) -> int:
    """Total memory bits of a decoder configuration.

    The list decoders store N(L+1) channel/intermediate words of b_f bits
    plus 2LN path bits. Flip decoders add their score state; the learned
    variant additionally keeps the derivative counters (b_i bits each),
    the one-hot target, five scratch words for the gradient evaluation,
    and the accumulated step.

    o_bits is the charge per one-hot entry; 1 matches the closed form,
    while o_bits=b_i reproduces the reference table values (that known
    discrepancy is why both are available).
    """
    kind = kind.lower()
    if kind not in _MEMORY_KINDS:
        raise ValueError(f"unknown decoder kind {kind!r}")
    if min(N, K, L, b_f) < 1 or C < 0 or (b_i is not None and b_i < 1):
        raise ValueError("invalid memory-model parameters")
    base = N * (L + 1) * b_f + 2 * L * N
    w = K + C
    if kind in ("scl", "fscl"):
        return base
    if kind == "sclf":
        return base + (w + L + 1) * b_f
    if kind == "ssclf":
        return base + w * b_f
    return (base + (w + L + 7) * b_f + (w + L) * b_i + w * o_bits)


def kbits(bits: int) -> float:
    """Binary kilobits rounded to one decimal, ties toward zero."""
    return math.ceil(bits / 1024.0 * 10.0 - 0.5) / 10.0
