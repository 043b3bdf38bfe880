"""Decoder front ends: plain, list, and bit-flipping list decoding.

The flip decoders run one recorded pass, and on CRC failure rank the
decision slots by their recorded scores Q (ascending, ties to the lower
slot) and re-decode once per candidate with that slot's outcome reversed,
stopping at the first pass that clears the CRC. A frame that exhausts its
budget returns the initial answer. The genie ("ideal") variants skip the
ranking and flip exactly where the transmitted path was eliminated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import PolarCode
from .engine import EngineResult, ListEngine, Selection, select_output
from .nodes import decision_slots


@dataclass
class FlipPlan:
    """How a retry at one decision slot perturbs the decoder."""
    slot: int
    kind: str        # "reversal": invert the pruning order; "hard": invert the sign decision
    node_lo: int
    node_hi: int


def flip_plan(engine: ListEngine, slot: int) -> FlipPlan:
    info = decision_slots(engine.root, engine.L)[slot]
    kind = "reversal" if info.is_split else "hard"
    return FlipPlan(slot, kind, info.node.lo, info.node.hi)


@dataclass
class FlipRecord:
    """Flip-candidate scores of one decoded frame."""
    Q: np.ndarray    # (K+C,) per-slot scores, +inf on masked slots
    dQ: np.ndarray   # (K+C,) their theta-derivatives
    candidates: np.ndarray  # ranked slots, best first, masked slots excluded


@dataclass
class DecodeResult:
    payload: np.ndarray
    info: np.ndarray
    crc_ok: np.ndarray
    pm: np.ndarray
    attempts: np.ndarray
    record: FlipRecord | None = None


@dataclass
class TrainingBatch:
    """Supervised samples harvested from successful retries."""
    Q: np.ndarray        # (S, K+C)
    dQ: np.ndarray       # (S, K+C)
    label: np.ndarray    # (S,) slot whose reversal cleared the CRC
    first_hit: np.ndarray  # (S,) True if it was the top-ranked candidate
    frame: np.ndarray    # (S,) originating frame index within the batch

    @staticmethod
    def empty(width: int) -> "TrainingBatch":
        z = np.zeros((0, width))
        i = np.zeros(0, dtype=np.int64)
        return TrainingBatch(z, z.copy(), i, np.zeros(0, dtype=bool), i.copy())


@dataclass
class FlipBatchResult:
    payload: np.ndarray
    info: np.ndarray
    crc_ok: np.ndarray
    pm: np.ndarray           # metric of the answer path
    attempts: np.ndarray     # decode passes per frame, initial included
    retried: np.ndarray      # frames that entered the retry phase
    dyn_add: np.ndarray      # data-dependent additions per frame
    samples: TrainingBatch
    Q: np.ndarray | None = None   # initial-pass records (flip decoders)
    dQ: np.ndarray | None = None
    first_kill: np.ndarray | None = None
    listed: np.ndarray | None = None  # genie selection: correct payload in final list


def rank_flip_candidates(Q: np.ndarray, m: int):
    """Ascending stable order of finite scores, truncated to m per row."""
    Q = np.atleast_2d(Q)
    order = np.argsort(Q, axis=1, kind="stable")
    finite = np.isfinite(np.take_along_axis(Q, order, axis=1))
    counts = np.minimum(finite.sum(axis=1), m)
    return order, counts


def flip_decode_batch(engine: ListEngine, llr: np.ndarray, m: int,
                      theta: float = 0.0,
                      collect_samples: bool = True) -> FlipBatchResult:
    """Decode a batch with up to m score-ranked flip retries per frame."""
    code = engine.code
    llr = np.atleast_2d(llr)
    B = llr.shape[0]
    res = engine.run(llr, theta=theta, record=True)
    sel = select_output(code, res)
    payload = sel.payload.copy()
    info = sel.info.copy()
    crc_ok = sel.crc_ok.copy()
    pm = sel.pm.copy()
    attempts = np.ones(B, dtype=np.int64)
    dyn_add = res.ops["add"].copy()
    retried = ~sel.crc_ok
    width = code.K + code.C
    samples = TrainingBatch.empty(width)
    if retried.any() and m > 0:
        fr = np.flatnonzero(retried)
        order, counts = rank_flip_candidates(res.Q[fr], m)
        pending = np.ones(fr.size, dtype=bool)
        hit_round = np.full(fr.size, -1, dtype=np.int64)
        for i in range(int(counts.max(initial=0))):
            act = np.flatnonzero(pending & (i < counts))
            if act.size == 0:
                break
            rows = fr[act]
            slots = order[act, i]
            r2 = engine.run(llr[rows], flip_slot=slots)
            s2 = select_output(code, r2)
            attempts[rows] += 1
            dyn_add[rows] += r2.ops["add"]
            ok = s2.crc_ok
            win = rows[ok]
            payload[win] = s2.payload[ok]
            info[win] = s2.info[ok]
            pm[win] = s2.pm[ok]
            crc_ok[win] = True
            hit_round[act[ok]] = i
            pending[act] = ~ok
        if collect_samples:
            got = np.flatnonzero(hit_round >= 0)
            if got.size:
                rows = fr[got]
                samples = TrainingBatch(
                    Q=res.Q[rows].copy(),
                    dQ=res.dQ[rows].astype(np.float64),
                    label=order[got, hit_round[got]],
                    first_hit=hit_round[got] == 0,
                    frame=rows,
                )
    return FlipBatchResult(payload=payload, info=info, crc_ok=crc_ok, pm=pm,
                           attempts=attempts, retried=retried,
                           dyn_add=dyn_add, samples=samples,
                           Q=res.Q, dQ=res.dQ)


def ideal_flip_decode_batch(engine: ListEngine, llr: np.ndarray,
                            true_u: np.ndarray,
                            genie_selection: bool = False) -> FlipBatchResult:
    """One genie-directed retry at the recorded elimination slot.

    With genie_selection=False the retry triggers on CRC failure and the
    output is the usual CRC-filtered selection. With genie_selection=True
    the retry triggers whenever the transmitted path was eliminated and a
    frame counts as correct if the transmitted bits appear anywhere in the
    final list.
    """
    code = engine.code
    llr = np.atleast_2d(llr)
    B = llr.shape[0]
    true_u = np.atleast_2d(true_u)
    true_info = true_u[:, code.info_positions]
    res = engine.run(llr, true_u=true_u)
    sel = select_output(code, res)
    payload = sel.payload.copy()
    info = sel.info.copy()
    crc_ok = sel.crc_ok.copy()
    pm = sel.pm.copy()
    if genie_selection:
        trigger = res.first_kill >= 0
    else:
        trigger = ~sel.crc_ok
    listed = _in_list(res, code, true_info)
    attempts = np.ones(B, dtype=np.int64)
    dyn_add = res.ops["add"].copy()
    if trigger.any():
        rows = np.flatnonzero(trigger)
        r2 = engine.run(llr[rows], flip_slot=res.first_kill[rows])
        s2 = select_output(code, r2)
        attempts[rows] += 1
        dyn_add[rows] += r2.ops["add"]
        payload[rows] = s2.payload
        info[rows] = s2.info
        pm[rows] = s2.pm
        crc_ok[rows] = s2.crc_ok
        listed[rows] = _in_list(r2, code, true_info[rows])
    width = code.K + code.C
    return FlipBatchResult(payload=payload, info=info, crc_ok=crc_ok, pm=pm,
                           attempts=attempts, retried=trigger,
                           dyn_add=dyn_add, samples=TrainingBatch.empty(width),
                           first_kill=res.first_kill, listed=listed)


def _in_list(res: EngineResult, code: PolarCode, true_info: np.ndarray):
    cand = res.u[:, :, code.info_positions]
    return (cand == true_info[:, None, :]).all(axis=2).any(axis=1)


# -- single-frame conveniences ---------------------------------------------


def sc_decode(code: PolarCode, llr: np.ndarray):
    """Plain successive cancellation. Returns (input bits, codeword bits)."""
    res = ListEngine(code, 1, full_tree=True).run(llr)
    return res.u[0, 0], res.x[0, 0]


def scl_decode(code: PolarCode, llr: np.ndarray, L: int,
               record: bool = False, theta: float = 0.0) -> DecodeResult:
    """Conventional list decoding over the full tree."""
    return _list_decode(ListEngine(code, L, full_tree=True), llr, record, theta)


def fscl_decode(code: PolarCode, llr: np.ndarray, L: int,
                record: bool = False, theta: float = 0.0) -> DecodeResult:
    """Fast list decoding over constituent nodes."""
    return _list_decode(ListEngine(code, L, full_tree=False), llr, record, theta)


def _list_decode(engine: ListEngine, llr, record, theta) -> DecodeResult:
    res = engine.run(np.atleast_2d(llr), theta=theta, record=record)
    sel = select_output(engine.code, res)
    rec = None
    if record:
        order, counts = rank_flip_candidates(res.Q, engine.code.K + engine.code.C)
        rec = FlipRecord(Q=res.Q[0], dQ=res.dQ[0],
                         candidates=order[0, :counts[0]])
    return DecodeResult(payload=sel.payload[0], info=sel.info[0],
                        crc_ok=sel.crc_ok[0], pm=sel.pm[0],
                        attempts=np.int64(1), record=rec)


def sclf_decode(code: PolarCode, llr: np.ndarray, L: int, m: int,
                theta: float = 0.0) -> DecodeResult:
    """List decoding with score-ranked bit-flip retries, full tree."""
    engine = ListEngine(code, L, full_tree=True)
    return _flip_single(engine, llr, m, theta)


def fast_sclf_decode(code: PolarCode, llr: np.ndarray, L: int, m: int,
                     theta: float = 0.0) -> DecodeResult:
    """Fast list decoding with score-ranked bit-flip retries."""
    engine = ListEngine(code, L, full_tree=False)
    return _flip_single(engine, llr, m, theta)


def _flip_single(engine: ListEngine, llr, m, theta) -> DecodeResult:
    out = flip_decode_batch(engine, llr, m, theta, collect_samples=False)
    order, counts = rank_flip_candidates(out.Q, m)
    rec = FlipRecord(Q=out.Q[0], dQ=out.dQ[0], candidates=order[0, :counts[0]])
    return DecodeResult(payload=out.payload[0], info=out.info[0],
                        crc_ok=out.crc_ok[0], pm=out.pm[0],
                        attempts=out.attempts[0], record=rec)
