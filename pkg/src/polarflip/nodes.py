"""Decode-tree construction and per-node metric arithmetic.

The decoder walks a binary tree over the frozen pattern. Four leaf-node
constituent types are recognized greedily top-down, largest node first:

  rate0  all positions frozen
  rate1  all positions information
  rep    only the last position carries information
  spc    only the first position is frozen

A subtree matching none of these becomes a branch with two children. With
`full_tree=True` classification stops only at single bits, which yields the
conventional bit-by-bit list decoder on the same machinery.

Every information-bit decision and every sign-only decision inside rate1/spc
nodes consumes one slot in the decision index space 0..K+C-1 (spc parity
positions consume none). `decision_slots` lays this space out so that
recording and retry attempts agree on slot numbering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RATE0 = "rate0"
RATE1 = "rate1"
REP = "rep"
SPC = "spc"
BRANCH = "branch"


@dataclass
class Node:
    """One decode-tree node covering leaf positions [lo, hi)."""
    kind: str
    lo: int
    hi: int
    left: "Node | None" = None
    right: "Node | None" = None
    k0: int = -1  # first decision slot, -1 for rate0/branch

    @property
    def size(self) -> int:
        return self.hi - self.lo

    @property
    def n_slots(self) -> int:
        if self.kind == RATE0:
            return 0
        if self.kind == REP:
            return 1
        if self.kind == SPC:
            return self.size - 1
        if self.kind == RATE1:
            return self.size
        return 0


def classify_tree(frozen_mask: np.ndarray, full_tree: bool = False) -> Node:
    """Build the decode tree for a frozen pattern."""
    frozen_mask = np.asarray(frozen_mask, dtype=bool)

    def build(lo: int, hi: int) -> Node:
        seg = frozen_mask[lo:hi]
        size = hi - lo
        if not full_tree or size == 1:
            if seg.all():
                return Node(RATE0, lo, hi)
            if not seg.any():
                return Node(RATE1, lo, hi)
            if not full_tree:
                if seg[:-1].all() and not seg[-1]:
                    return Node(REP, lo, hi)
                if seg[0] and not seg[1:].any():
                    return Node(SPC, lo, hi)
        mid = (lo + hi) // 2
        node = Node(BRANCH, lo, hi)
        node.left = build(lo, mid)
        node.right = build(mid, hi)
        return node

    root = build(0, frozen_mask.size)
    _assign_slots(root)
    return root


def _assign_slots(root: Node) -> int:
    k = 0

    def walk(node: Node) -> None:
        nonlocal k
        if node.kind == BRANCH:
            walk(node.left)
            walk(node.right)
        elif node.kind != RATE0:
            node.k0 = k
            k += node.n_slots

    walk(root)
    return k


def schedule_nodes(root: Node) -> list[Node]:
    """Non-branch nodes in decode order."""
    out: list[Node] = []

    def walk(node: Node) -> None:
        if node.kind == BRANCH:
            walk(node.left)
            walk(node.right)
        else:
            out.append(node)

    walk(root)
    return out


def total_slots(root: Node) -> int:
    return sum(n.n_slots for n in schedule_nodes(root))


def split_budget(node: Node, L: int) -> int:
    """Number of path-splitting decisions a node performs at list size L."""
    if L <= 1:
        return 0
    if node.kind == REP:
        return 1
    if node.kind == RATE1:
        return min(L - 1, node.size)
    if node.kind == SPC:
        return min(L - 1, node.size - 1)
    return 0


@dataclass(frozen=True)
class SlotInfo:
    """Static description of one decision slot at a given list size."""
    node: Node
    pos: int        # position within the node's decision sequence
    is_split: bool  # path-splitting decision vs. sign-only follow-on


def decision_slots(root: Node, L: int) -> list[SlotInfo]:
    """Lay out all decision slots in decode order for list size L."""
    out: list[SlotInfo] = []
    for node in schedule_nodes(root):
        if node.kind == RATE0:
            continue
        tau = split_budget(node, L)
        for pos in range(node.n_slots):
            out.append(SlotInfo(node, pos, pos < tau))
    return out


def stable_abs_order(alpha: np.ndarray) -> np.ndarray:
    """Ascending |alpha| order along the last axis, ties to the lower index."""
    return np.argsort(np.abs(alpha), axis=-1, kind="stable")


def rate0_pm_delta(alpha: np.ndarray) -> np.ndarray:
    """Metric cost of forcing all-zero output: sum of (|a| - a) / 2."""
    alpha = np.asarray(alpha, dtype=np.float64)
    return 0.5 * (np.abs(alpha) - alpha).sum(axis=-1)


def rep_pm_delta(alpha: np.ndarray, bit) -> np.ndarray:
    """Metric cost of repetition output bit: sum of (|a| - (1-2b) a) / 2."""
    alpha = np.asarray(alpha, dtype=np.float64)
    scale = 1.0 - 2.0 * np.asarray(bit, dtype=np.float64)
    if scale.ndim:
        scale = scale[..., None]
    return 0.5 * (np.abs(alpha) - scale * alpha).sum(axis=-1)


def spc_parity(alpha: np.ndarray) -> np.ndarray:
    """Even/odd parity of the hard decisions over a node, parity bit included."""
    hard = (np.asarray(alpha) < 0).astype(np.int8)
    return np.bitwise_xor.reduce(hard, axis=-1)
